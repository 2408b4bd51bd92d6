use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, InitialStep, Minimum, SimplexOptions};
use crate::deconvolve::sigma2_hat;
use crate::error::{Error, Result};
use crate::identifiability::{verdict, Reason};
use crate::objective::{self, MixtureParams};
use crate::sample::Sample;
use crate::stepfun::StepFunction;

/// Quantile levels whose ordered pairs (or triples) seed the multi-start search.
pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.2, 0.5, 0.8, 0.95];

/// Objective values closer than this count as a tie; the earlier start wins.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Starts {
    /// Every increasing `k`-subset of [`QUANTILE_LEVELS`], as sample quantiles.
    QuantileProtocol,
    /// Explicit location vectors, one per start.
    Explicit(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub starts: Starts,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Distance exponent; `f64::INFINITY` for the sup norm.
    pub p: f64,
    pub seed: u64,
    /// Extra starts drawn at random sample quantiles (from `seed`).
    pub random_restarts: usize,
    /// Initial simplex edge. `None` uses a tenth of the sample standard
    /// deviation, which keeps fits equivariant under affine maps of the data.
    pub initial_step: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: Starts::QuantileProtocol,
            max_iterations: 500,
            tolerance: 1e-8,
            p: 2.0,
            seed: 0,
            random_restarts: 0,
            initial_step: None,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidOption("max_iterations must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidOption("tolerance must be > 0".into()));
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidOption("initial_step must be positive".into()));
            }
        }
        objective::check_exponent(self.p)
    }

    fn step_for(&self, sample: &Sample) -> f64 {
        self.initial_step.unwrap_or_else(|| {
            let sd = sample.variance().map(f64::sqrt).unwrap_or(0.0);
            if sd > 0.0 {
                0.1 * sd
            } else {
                0.1
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartDiagnostics {
    pub start: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FitWarning {
    /// The fitted point is outside the identifiable parameter set.
    NotIdentifiable(Reason),
    /// Within 1e-6 of the non-identifiable boundary.
    NearIdentifiabilityBoundary,
    NegativeSigma2(f64),
    /// The optimum collapsed two locations onto each other.
    DegenerateLocations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: MixtureParams,
    /// `d_n` at the optimum.
    pub objective: f64,
    pub p: f64,
    pub per_start: Vec<StartDiagnostics>,
    #[serde(default)]
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0: Option<StepFunction>,
    /// Unclamped profiled weight (two-component `L_2` fits only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1_unclamped: Option<f64>,
    #[serde(default)]
    pub warnings: Vec<FitWarning>,
}

impl FitResult {
    /// `(mu_1, mu_2, lambda_1, sigma^2)` for a two-component fit.
    pub fn table_row(&self) -> Option<[f64; 4]> {
        (self.params.k() == 2).then(|| {
            let m = self.params.locations();
            [
                m[0],
                m[1],
                self.params.weights()[0],
                self.sigma2.unwrap_or(f64::NAN),
            ]
        })
    }
}

/// `sum_i sum_j |(x_i + x_j)/2 - mu|`, the criterion minimized by [`fit_k1`].
pub fn hl_objective(sample: &Sample, mu: f64) -> f64 {
    let x = sample.values();
    x.iter()
        .map(|&xi| x.iter().map(|&xj| (0.5 * (xi + xj) - mu).abs()).sum::<f64>())
        .sum()
}

/// One-component location estimate: the median of all `n^2` ordered-pair
/// means `(x_i + x_j)/2`. With an even count the minimizing set is an
/// interval and its midpoint is returned.
pub fn fit_k1(sample: &Sample) -> f64 {
    let x = sample.values();
    let n = x.len();
    let mut means: Vec<(f64, u64)> = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        means.push((0.5 * (x[i] + x[i]), 1));
        for j in i + 1..n {
            means.push((0.5 * (x[i] + x[j]), 2));
        }
    }
    means.sort_by(|a, b| a.0.total_cmp(&b.0));

    let total = (n as u64) * (n as u64);
    // 1-based rank of an order statistic among the weighted means.
    let at_rank = |rank: u64| {
        let mut seen = 0;
        for &(v, w) in &means {
            seen += w;
            if seen >= rank {
                return v;
            }
        }
        unreachable!("rank within total weight")
    };
    if total % 2 == 1 {
        at_rank(total / 2 + 1)
    } else {
        0.5 * (at_rank(total / 2) + at_rank(total / 2 + 1))
    }
}

/// Location starts for `k` components: sample quantiles at every increasing
/// `k`-subset of [`QUANTILE_LEVELS`], in lexicographic order.
pub fn quantile_starts(sample: &Sample, k: usize) -> Vec<Vec<f64>> {
    fn subsets(from: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..QUANTILE_LEVELS.len() {
            cur.push(i);
            subsets(i + 1, k, cur, out);
            cur.pop();
        }
    }
    let mut idx = Vec::new();
    subsets(0, k, &mut Vec::new(), &mut idx);
    idx.into_iter()
        .map(|s| s.iter().map(|&i| sample.quantile(QUANTILE_LEVELS[i])).collect())
        .collect()
}

fn location_starts(sample: &Sample, k: usize, opts: &FitOptions) -> Result<Vec<Vec<f64>>> {
    let mut starts = match &opts.starts {
        Starts::QuantileProtocol => quantile_starts(sample, k),
        Starts::Explicit(s) => {
            if s.is_empty() {
                return Err(Error::InvalidOption("explicit start list is empty".into()));
            }
            if let Some(bad) = s.iter().find(|v| v.len() != k) {
                return Err(Error::LengthMismatch {
                    expected: k,
                    got: bad.len(),
                });
            }
            s.clone()
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_restarts {
        let mut qs: Vec<f64> = (0..k).map(|_| rng.gen_range(0.02..0.98)).collect();
        qs.sort_by(f64::total_cmp);
        starts.push(qs.into_iter().map(|q| sample.quantile(q)).collect());
    }
    Ok(starts)
}

/// Picks the lowest objective; ties within [`TIE_TOLERANCE`] keep the earlier start.
fn best_index(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        match best {
            Some((_, b)) if v >= b - TIE_TOLERANCE => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Builds strictly increasing parameters from possibly tied (weight, location) pairs.
fn ordered_params(mut pairs: Vec<(f64, f64)>) -> (MixtureParams, bool) {
    pairs.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut collapsed = false;
    for i in 1..pairs.len() {
        if pairs[i].1 <= pairs[i - 1].1 {
            pairs[i].1 = next_up(pairs[i - 1].1);
            collapsed = true;
        }
    }
    let total: f64 = pairs.iter().map(|p| p.0).sum();
    let weights = pairs.iter().map(|p| p.0 / total).collect();
    let locations = pairs.iter().map(|p| p.1).collect();
    let params = MixtureParams::new(weights, locations).expect("weights normalized, locations increasing");
    (params, collapsed)
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits + 1 } else { bits - 1 })
}

fn finish(
    sample: &Sample,
    params: MixtureParams,
    objective: f64,
    p: f64,
    per_start: Vec<StartDiagnostics>,
    mut warnings: Vec<FitWarning>,
) -> FitResult {
    let sigma2 = sigma2_hat(sample, &params).ok();
    if let Some(s) = sigma2.filter(|s| *s < 0.0) {
        warnings.push(FitWarning::NegativeSigma2(s));
    }
    let v = verdict(&params);
    if !v.member && v.reason != Reason::UnsupportedK {
        warnings.push(FitWarning::NotIdentifiable(v.reason));
    } else if v.near_boundary {
        warnings.push(FitWarning::NearIdentifiabilityBoundary);
    }
    FitResult {
        params,
        objective,
        p,
        per_start,
        sigma2,
        g0: None,
        lambda1_unclamped: None,
        warnings,
    }
}

/// Two-component `L_2` fit: the profiled objective `m(mu_1, mu_2)` is
/// minimized from each start, the weight is recovered in closed form at the
/// winning locations, and labels are ordered so that `mu_1 < mu_2`.
pub fn fit_k2(sample: &Sample, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    if sample.len() < 2 {
        return Err(Error::TooFewObservations {
            need: 2,
            got: sample.len(),
        });
    }
    let starts = location_starts(sample, 2, opts)?;
    let simplex = SimplexOptions {
        max_iterations: opts.max_iterations,
        tolerance: opts.tolerance,
        initial_step: InitialStep::Uniform(opts.step_for(sample)),
    };
    let x = sample.values();
    let runs: Vec<Option<Minimum>> = starts
        .par_iter()
        .map(|s| {
            nelder_mead(
                |m| objective::profiled_objective_raw(x, m[0], m[1]).value,
                s,
                &simplex,
            )
            .ok()
        })
        .collect();

    let per_start: Vec<StartDiagnostics> = starts
        .iter()
        .zip(&runs)
        .map(|(s, r)| match r {
            Some(m) => StartDiagnostics {
                start: s.clone(),
                converged: m.converged,
                iterations: m.iterations,
                objective: m.value.max(0.0).sqrt(),
            },
            None => StartDiagnostics {
                start: s.clone(),
                converged: false,
                iterations: 0,
                objective: f64::NAN,
            },
        })
        .collect();
    let best = best_index(runs.iter().map(|r| r.as_ref().map_or(f64::NAN, |m| m.value)))
        .ok_or(Error::AllStartsFailed)?;
    let m = runs[best].as_ref().expect("best run is finite");

    let prof = objective::profiled_objective_raw(x, m.argmin[0], m.argmin[1]);
    let (params, collapsed) = ordered_params(vec![
        (prof.lambda1, prof.mu1),
        (1.0 - prof.lambda1, prof.mu2),
    ]);
    let mut warnings = Vec::new();
    if prof.degenerate || collapsed {
        warnings.push(FitWarning::DegenerateLocations);
    }
    let objective = per_start[best].objective;
    let mut result = finish(sample, params, objective, 2.0, per_start, warnings);
    result.lambda1_unclamped = (!prof.degenerate).then_some(prof.unclamped);
    Ok(result)
}

fn softmax_weights(z: &[f64]) -> Vec<f64> {
    let max = z.iter().fold(0.0f64, |m, &v| m.max(v));
    let mut e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    e.push((-max).exp());
    let total: f64 = e.iter().sum();
    e.iter().map(|v| v / total).collect()
}

/// General `k`-component fit in any `L_p` (`1 <= k <= 3`). Weights are
/// parameterized by `k - 1` free logits and locations are unconstrained
/// (sorted with their weights on evaluation). `k = 1` and `k = 2` with
/// `p = 2` use the dedicated solvers.
pub fn fit_general(sample: &Sample, k: usize, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    if !(1..=3).contains(&k) {
        return Err(Error::UnsupportedK(k));
    }
    if sample.len() < k {
        return Err(Error::TooFewObservations {
            need: k,
            got: sample.len(),
        });
    }
    if k == 2 && opts.p == 2.0 {
        return fit_k2(sample, opts);
    }
    if k == 1 && opts.p == 2.0 {
        let mu = fit_k1(sample);
        let params = MixtureParams::new(vec![1.0], vec![mu]).expect("one component");
        let objective = objective::dn(sample, &params, 2.0)?;
        let per_start = vec![StartDiagnostics {
            start: vec![mu],
            converged: true,
            iterations: 0,
            objective,
        }];
        return Ok(finish(sample, params, objective, 2.0, per_start, Vec::new()));
    }

    let p = opts.p;
    let x = sample.values();
    let starts = location_starts(sample, k, opts)?;
    let step = opts.step_for(sample);
    let mut steps = vec![1.0; k - 1];
    steps.extend(std::iter::repeat(step).take(k));
    let simplex = SimplexOptions {
        max_iterations: opts.max_iterations,
        tolerance: opts.tolerance,
        initial_step: InitialStep::PerCoordinate(steps),
    };
    let unpack = |theta: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let weights = softmax_weights(&theta[..k - 1]);
        let mut pairs: Vec<(f64, f64)> = weights.into_iter().zip(theta[k - 1..].iter().copied()).collect();
        pairs.sort_by(|a, b| a.1.total_cmp(&b.1));
        pairs.into_iter().unzip()
    };
    let runs: Vec<Option<Minimum>> = starts
        .par_iter()
        .map(|s| {
            let mut theta = vec![0.0; k - 1];
            theta.extend_from_slice(s);
            nelder_mead(
                |t| {
                    let (w, m) = unpack(t);
                    objective::dn_raw(x, &w, &m, p)
                },
                &theta,
                &simplex,
            )
            .ok()
        })
        .collect();
    let per_start: Vec<StartDiagnostics> = starts
        .iter()
        .zip(&runs)
        .map(|(s, r)| StartDiagnostics {
            start: s.clone(),
            converged: r.as_ref().is_some_and(|m| m.converged),
            iterations: r.as_ref().map_or(0, |m| m.iterations),
            objective: r.as_ref().map_or(f64::NAN, |m| m.value),
        })
        .collect();
    let best = best_index(per_start.iter().map(|d| d.objective)).ok_or(Error::AllStartsFailed)?;
    let (w, m) = unpack(&runs[best].as_ref().expect("finite").argmin);
    let (params, collapsed) = ordered_params(w.into_iter().zip(m).collect());
    let warnings = if collapsed {
        vec![FitWarning::DegenerateLocations]
    } else {
        Vec::new()
    };
    let objective = per_start[best].objective;
    Ok(finish(sample, params, objective, p, per_start, warnings))
}
