//! Normal-mixture maximum likelihood baseline and bootstrap standard errors.

mod bootstrap;
mod em;

pub use bootstrap::{bootstrap_se, BootstrapOptions, BootstrapReport, Estimator};
pub use em::{
    em_fit_normal2, em_step, fit_nmle, fit_nmle_from, log_likelihood, EmOptions, NormalMixFit, NormalMixState,
};
