//! Estimator front-ends and the simplex optimizer behind them.

mod fit;
mod nelder_mead;

pub use fit::{
    fit_general, fit_k1, fit_k2, hl_objective, quantile_starts, FitOptions, FitResult, FitWarning,
    StartDiagnostics, Starts, QUANTILE_LEVELS,
};
pub use nelder_mead::{nelder_mead, InitialStep, Minimum, SimplexOptions};
