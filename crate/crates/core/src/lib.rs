//! Semiparametric estimation for location mixtures of a symmetric distribution.

// `!(x > 0.0)` style checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod comparator;
pub mod data;
pub mod deconvolve;
pub mod error;
pub mod harness;
pub mod identifiability;
pub mod objective;
pub mod optimize;
pub mod sample;
pub mod stepfun;

pub use error::{Error, Result};
pub use objective::MixtureParams;
pub use sample::Sample;
pub use stepfun::StepFunction;
