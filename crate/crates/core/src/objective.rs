//! Asymmetry distances between a deconvolved empirical distribution and its
//! reflection.
//!
//! For locations `mu` the functions
//!
//! ```text
//! a_j(t) = (1/n) #{i : mu_j - x_i <= t} - (1/n) #{i : x_i - mu_j <= t}
//! ```
//!
//! are integrable step functions, and `d_n(lambda, mu)` is the `L_p` norm of
//! `sum_j lambda_j a_j`. For `p = 2` the squared distance also has the
//! pairwise (V-statistic) form evaluated by [`dn2_vstat`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::stepfun::StepFunction;

/// Weight-sum tolerance for points of the parameter space.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Below this squared norm of `a_1 - a_2` the two locations are treated as equal.
pub const DEGENERATE_NORM: f64 = 1e-14;

/// Mixing weights on the simplex paired with strictly increasing locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct MixtureParams {
    weights: Vec<f64>,
    locations: Vec<f64>,
}

#[derive(Deserialize)]
struct RawParams {
    weights: Vec<f64>,
    locations: Vec<f64>,
}

impl TryFrom<RawParams> for MixtureParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        Self::new(raw.weights, raw.locations)
    }
}

impl MixtureParams {
    pub fn new(weights: Vec<f64>, locations: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if weights.len() != locations.len() {
            return Err(Error::LengthMismatch {
                expected: weights.len(),
                got: locations.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParams(format!(
                "weights must be finite and nonnegative: {weights:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidParams(format!(
                "weights sum to {total}, not 1"
            )));
        }
        if locations.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParams("locations must be finite".into()));
        }
        if locations.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams(format!(
                "locations must be strictly increasing: {locations:?}"
            )));
        }
        Ok(Self { weights, locations })
    }

    /// Normalizes `weights` to sum to one first (for proportional input).
    pub fn from_proportional(weights: Vec<f64>, locations: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidParams(format!(
                "weights must have a positive finite sum: {weights:?}"
            )));
        }
        Self::new(weights.iter().map(|w| w / total).collect(), locations)
    }

    /// Two-component convenience constructor; `mu1 < mu2` required.
    pub fn two(lambda1: f64, mu1: f64, mu2: f64) -> Result<Self> {
        Self::new(vec![lambda1, 1.0 - lambda1], vec![mu1, mu2])
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    /// `sum_j lambda_j mu_j`.
    pub fn mean_location(&self) -> f64 {
        self.weights.iter().zip(&self.locations).map(|(w, m)| w * m).sum()
    }

    /// The mirror-image point `((lambda_k, ..., lambda_1), (-mu_k, ..., -mu_1))`.
    pub fn reflected(&self) -> Self {
        Self {
            weights: self.weights.iter().rev().copied().collect(),
            locations: self.locations.iter().rev().map(|m| -m).collect(),
        }
    }

    /// Applies `mu -> scale * mu + shift` (`scale > 0`).
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Self::new(
            self.weights.clone(),
            self.locations.iter().map(|m| scale * m + shift).collect(),
        )
    }
}

/// Distance exponent check; `f64::INFINITY` selects the sup norm.
pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `a(t; mu)` for one location. Levels are built from integer counts, so both
/// tails are exactly zero.
pub(crate) fn a_function(x: &[f64], mu: f64) -> StepFunction {
    let mut events = Vec::with_capacity(2 * x.len());
    for &xi in x {
        events.push((mu - xi, 1));
        events.push((xi - mu, -1));
    }
    StepFunction::from_count_events(events, x.len() as f64)
}

pub fn a_functions(sample: &Sample, locations: &[f64]) -> Result<Vec<StepFunction>> {
    if locations.is_empty() {
        return Err(Error::InvalidParams("no locations given".into()));
    }
    if locations.iter().any(|m| !m.is_finite()) || locations.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParams(format!(
            "locations must be finite and strictly increasing: {locations:?}"
        )));
    }
    Ok(locations.iter().map(|&m| a_function(sample.values(), m)).collect())
}

/// `alpha_n(t) = sum_j lambda_j a_j(t)` without parameter validation.
pub(crate) fn alpha_raw(x: &[f64], weights: &[f64], locations: &[f64]) -> StepFunction {
    let a: Vec<StepFunction> = locations.iter().map(|&m| a_function(x, m)).collect();
    let refs: Vec<&StepFunction> = a.iter().collect();
    StepFunction::linear_combination(weights, &refs).expect("lengths match")
}

pub(crate) fn norm_of(alpha: &StepFunction, p: f64) -> f64 {
    if p.is_infinite() {
        alpha.sup_norm()
    } else {
        alpha
            .lp_integral(p)
            .expect("alpha_n has vanishing tails")
            .powf(1.0 / p)
    }
}

/// `d_n` for weights/locations that have not been validated (any order,
/// possibly tied). Used inside optimizers.
pub(crate) fn dn_raw(x: &[f64], weights: &[f64], locations: &[f64], p: f64) -> f64 {
    norm_of(&alpha_raw(x, weights, locations), p)
}

/// The asymmetry distance `d_n(lambda, mu)` in `L_p`, `1 <= p <= inf`.
pub fn dn(sample: &Sample, params: &MixtureParams, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(dn_raw(sample.values(), params.weights(), params.locations(), p))
}

/// `d_n^2` through the pairwise form
/// `(1/n^2) sum_{i,j} sum_{a,b} lambda_a lambda_b (|x_i + x_j - mu_a - mu_b| - |x_i - x_j - mu_a + mu_b|)`.
///
/// O(n^2 k^2). Rows are summed in parallel and reduced in index order, so the
/// result does not depend on the thread count.
pub fn dn2_vstat(sample: &Sample, params: &MixtureParams) -> f64 {
    let x = sample.values();
    let w = params.weights();
    let m = params.locations();
    let k = w.len();
    let mut pair_weight = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            pair_weight.push((w[a] * w[b], m[a] + m[b], m[a] - m[b]));
        }
    }
    let rows: Vec<f64> = x
        .par_iter()
        .map(|&xi| {
            let mut row = 0.0;
            for &xj in x {
                let (s, d) = (xi + xj, xi - xj);
                for &(ww, msum, mdiff) in &pair_weight {
                    row += ww * ((s - msum).abs() - (d - mdiff).abs());
                }
            }
            row
        })
        .collect();
    let n = x.len() as f64;
    rows.iter().sum::<f64>() / (n * n)
}

/// Closed-form weight for two locations: the minimizer of
/// `|| lambda a_1 + (1 - lambda) a_2 ||^2` over `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfiledLambda {
    /// Minimizer clamped to `[0, 1]`.
    pub lambda1: f64,
    /// Unconstrained minimizer `-<a_1 - a_2, a_2> / ||a_1 - a_2||^2`.
    pub unclamped: f64,
}

struct Profile {
    a1: StepFunction,
    a2: StepFunction,
    diff_sq: f64,
    unclamped: f64,
}

fn profile_raw(x: &[f64], mu1: f64, mu2: f64) -> Profile {
    let a1 = a_function(x, mu1);
    let a2 = a_function(x, mu2);
    let diff = StepFunction::linear_combination(&[1.0, -1.0], &[&a1, &a2]).expect("two functions");
    let diff_sq = diff.lp_integral(2.0).expect("integrable");
    let cross = diff.inner_product(&a2).expect("integrable");
    Profile {
        a1,
        a2,
        diff_sq,
        unclamped: -cross / diff_sq,
    }
}

pub fn profile_lambda_k2(sample: &Sample, mu1: f64, mu2: f64) -> Result<ProfiledLambda> {
    if !mu1.is_finite() || !mu2.is_finite() {
        return Err(Error::InvalidParams("locations must be finite".into()));
    }
    let prof = profile_raw(sample.values(), mu1, mu2);
    if !(prof.diff_sq >= DEGENERATE_NORM) {
        return Err(Error::DegenerateLocations(prof.diff_sq));
    }
    Ok(ProfiledLambda {
        lambda1: prof.unclamped.clamp(0.0, 1.0),
        unclamped: prof.unclamped,
    })
}

/// Profiled two-component objective at (sorted) locations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfiledObjective {
    /// Squared distance at the constrained optimal weight.
    pub value: f64,
    /// Weight of the smaller location.
    pub lambda1: f64,
    pub unclamped: f64,
    /// Locations coincided; `value = ||a_1||^2` and `lambda1 = 1/2`.
    pub degenerate: bool,
    pub mu1: f64,
    pub mu2: f64,
}

pub(crate) fn profiled_objective_raw(x: &[f64], mu_a: f64, mu_b: f64) -> ProfiledObjective {
    let (mu1, mu2) = if mu_a <= mu_b { (mu_a, mu_b) } else { (mu_b, mu_a) };
    let prof = profile_raw(x, mu1, mu2);
    if !(prof.diff_sq >= DEGENERATE_NORM) {
        return ProfiledObjective {
            value: prof.a1.lp_integral(2.0).expect("integrable"),
            lambda1: 0.5,
            unclamped: f64::NAN,
            degenerate: true,
            mu1,
            mu2,
        };
    }
    let lambda1 = prof.unclamped.clamp(0.0, 1.0);
    let mix = StepFunction::linear_combination(&[lambda1, 1.0 - lambda1], &[&prof.a1, &prof.a2])
        .expect("two functions");
    ProfiledObjective {
        value: mix.lp_integral(2.0).expect("integrable"),
        lambda1,
        unclamped: prof.unclamped,
        degenerate: false,
        mu1,
        mu2,
    }
}

pub fn profiled_objective(sample: &Sample, mu1: f64, mu2: f64) -> ProfiledObjective {
    profiled_objective_raw(sample.values(), mu1, mu2)
}

/// `m(mu_1, mu_2)`: the squared `L_2` objective minimized over the weight
/// `lambda_1 in [0, 1]`. Order of the arguments does not matter. When the
/// unconstrained minimizer lies in `[0, 1]` this equals
/// `(||a_1||^2 ||a_2||^2 - <a_1, a_2>^2) / ||a_1 - a_2||^2`.
pub fn objective_m(sample: &Sample, mu1: f64, mu2: f64) -> f64 {
    profiled_objective_raw(sample.values(), mu1, mu2).value
}
