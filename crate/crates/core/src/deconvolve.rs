//! Recovery of the common component distribution after a fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::MixtureParams;
use crate::sample::Sample;
use crate::stepfun::{Reflection, StepFunction};

/// `|lambda_1 - 1/2|` must exceed this for the component CDF to be recovered.
pub const SINGULARITY_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeconvolutionResult {
    pub g0: StepFunction,
    pub sigma2: f64,
    /// Largest drop between consecutive levels of `g0`.
    pub monotone_violation: f64,
}

/// Component variance: the sample variance (divisor `n - 1`) minus the
/// between-component variance `sum_j lambda_j (mu_j - mu_bar)^2`.
/// Can be negative for a poor fit; the value is returned unchanged.
pub fn sigma2_hat(sample: &Sample, params: &MixtureParams) -> Result<f64> {
    let s2 = sample.variance()?;
    let mean = params.mean_location();
    let between: f64 = params
        .weights()
        .iter()
        .zip(params.locations())
        .map(|(w, m)| w * (m - mean) * (m - mean))
        .sum();
    Ok(s2 - between)
}

/// Nonparametric estimate of the zero-symmetric component CDF for a
/// two-component fit, averaging the two solutions of the 2x2 linear system
/// that links the mixture CDF, its reflection and the shifted components:
///
/// ```text
/// G(z) = { l1 [R(z - m1) + F(z + m1)] - l2 [R(z - m2) + F(z + m2)] } / (2 (l1 - l2))
/// ```
///
/// with `F` the empirical CDF and `R(t) = 1 - F((-t)-)` its reflection.
/// The curve is not forced to be monotone.
pub fn estimate_g0(sample: &Sample, params: &MixtureParams) -> Result<DeconvolutionResult> {
    if params.k() != 2 {
        return Err(Error::UnsupportedK(params.k()));
    }
    let (l1, l2) = (params.weights()[0], params.weights()[1]);
    if (l1 - 0.5).abs() <= SINGULARITY_GUARD {
        return Err(Error::NonInvertibleMixing(l1));
    }
    let (m1, m2) = (params.locations()[0], params.locations()[1]);

    let f = StepFunction::ecdf(sample);
    let r = f.reflect(Reflection::Cdf);
    let parts = [r.shifted(m1), f.shifted(-m1), r.shifted(m2), f.shifted(-m2)];
    let refs: Vec<&StepFunction> = parts.iter().collect();
    let denom = 2.0 * (l1 - l2);
    let g0 = StepFunction::combine(&refs, |v| (l1 * (v[0] + v[1]) - l2 * (v[2] + v[3])) / denom);
    debug_assert_eq!(g0.left_tail(), 0.0);
    debug_assert_eq!(g0.right_tail(), 1.0);

    Ok(DeconvolutionResult {
        monotone_violation: g0.monotone_violation(),
        sigma2: sigma2_hat(sample, params)?,
        g0,
    })
}

/// Weighted pool-adjacent-violators fit (nondecreasing).
fn pava(values: &[f64], weights: &[f64]) -> Vec<f64> {
    // (mean, weight, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (m2, w2, c2) = blocks[blocks.len() - 1];
            let (m1, w1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let w = w1 + w2;
            blocks.push(((m1 * w1 + m2 * w2) / w, w, c1 + c2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, c)| std::iter::repeat(m).take(c))
        .collect()
}

/// Monotone version of a CDF-like step function for plotting: interior levels
/// are replaced by their width-weighted isotonic regression, clipped to `[0, 1]`.
pub fn isotonic(g0: &StepFunction) -> StepFunction {
    let b = g0.breakpoints();
    let levels = g0.levels();
    if b.len() < 2 {
        return g0.clone();
    }
    let interior = &levels[1..levels.len() - 1];
    let widths: Vec<f64> = b.windows(2).map(|w| w[1] - w[0]).collect();
    let fitted = pava(interior, &widths);
    let mut out = Vec::with_capacity(levels.len());
    out.push(levels[0].clamp(0.0, 1.0));
    out.extend(fitted.into_iter().map(|v| v.clamp(0.0, 1.0)));
    out.push(levels[levels.len() - 1].clamp(0.0, 1.0));
    StepFunction::new(b.to_vec(), out).expect("same breakpoints")
}
