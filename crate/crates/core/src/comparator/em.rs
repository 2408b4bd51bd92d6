use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::quantile_starts;
use crate::sample::Sample;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Parameters of a two-component normal mixture with a shared variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalMixState {
    pub lambda1: f64,
    pub mu: [f64; 2],
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalMixFit {
    pub lambda1: f64,
    /// Increasing after relabeling.
    pub mu: [f64; 2],
    pub sigma2: f64,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood at the start and after every iteration.
    pub loglik_trace: Vec<f64>,
}

impl NormalMixFit {
    /// `(mu_1, mu_2, lambda_1, sigma^2)`.
    pub fn table_row(&self) -> [f64; 4] {
        [self.mu[0], self.mu[1], self.lambda1, self.sigma2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    pub max_iterations: usize,
    /// Stop once the log-likelihood gains less than this in one iteration.
    pub tolerance: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            tolerance: 1e-9,
        }
    }
}

fn check_state(s: &NormalMixState) -> Result<()> {
    let ok = s.lambda1 > 0.0
        && s.lambda1 < 1.0
        && s.sigma2 > 0.0
        && s.sigma2.is_finite()
        && s.mu.iter().all(|m| m.is_finite());
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("degenerate normal mixture state {s:?}")))
    }
}

/// Log densities of both components, weighted by their mixing proportions.
fn weighted_log_densities(x: f64, s: &NormalMixState) -> (f64, f64) {
    let norm = -0.5 * (LN_2PI + s.sigma2.ln());
    let a = s.lambda1.ln() + norm - 0.5 * (x - s.mu[0]).powi(2) / s.sigma2;
    let b = (1.0 - s.lambda1).ln() + norm - 0.5 * (x - s.mu[1]).powi(2) / s.sigma2;
    (a, b)
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub fn log_likelihood(x: &[f64], s: &NormalMixState) -> f64 {
    x.iter()
        .map(|&xi| {
            let (a, b) = weighted_log_densities(xi, s);
            log_sum_exp(a, b)
        })
        .sum()
}

/// One EM iteration. Returns the updated state and the first-component
/// responsibilities computed in the E-step.
pub fn em_step(x: &[f64], s: &NormalMixState) -> (NormalMixState, Vec<f64>) {
    let resp: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let (a, b) = weighted_log_densities(xi, s);
            (a - log_sum_exp(a, b)).exp()
        })
        .collect();
    let n = x.len() as f64;
    let w1: f64 = resp.iter().sum();
    let w2 = n - w1;
    let mu1 = resp.iter().zip(x).map(|(r, xi)| r * xi).sum::<f64>() / w1;
    let mu2 = resp.iter().zip(x).map(|(r, xi)| (1.0 - r) * xi).sum::<f64>() / w2;
    let sigma2 = resp
        .iter()
        .zip(x)
        .map(|(r, xi)| r * (xi - mu1).powi(2) + (1.0 - r) * (xi - mu2).powi(2))
        .sum::<f64>()
        / n;
    (
        NormalMixState {
            lambda1: w1 / n,
            mu: [mu1, mu2],
            sigma2,
        },
        resp,
    )
}

/// EM for an equal-variance two-component normal mixture from one start.
pub fn em_fit_normal2(sample: &Sample, start: NormalMixState, opts: &EmOptions) -> Result<NormalMixFit> {
    if sample.len() < 3 {
        return Err(Error::TooFewObservations {
            need: 3,
            got: sample.len(),
        });
    }
    if opts.max_iterations == 0 || !(opts.tolerance > 0.0) {
        return Err(Error::InvalidOption("EM needs max_iterations >= 1 and tolerance > 0".into()));
    }
    check_state(&start)?;
    let x = sample.values();
    let mut state = start;
    let mut ll = log_likelihood(x, &state);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        let (next, _) = em_step(x, &state);
        check_state(&next)?;
        let next_ll = log_likelihood(x, &next);
        if !next_ll.is_finite() {
            return Err(Error::InvalidParams("EM log-likelihood is not finite".into()));
        }
        iterations += 1;
        trace.push(next_ll);
        let gain = next_ll - ll;
        state = next;
        ll = next_ll;
        if gain < opts.tolerance {
            converged = true;
            break;
        }
    }
    let (lambda1, mu) = if state.mu[0] <= state.mu[1] {
        (state.lambda1, state.mu)
    } else {
        (1.0 - state.lambda1, [state.mu[1], state.mu[0]])
    };
    Ok(NormalMixFit {
        lambda1,
        mu,
        sigma2: state.sigma2,
        loglik: ll,
        iterations,
        converged,
        loglik_trace: trace,
    })
}

/// Normal-mixture maximum likelihood: EM from `lambda_1 = 1/2`,
/// `sigma^2 = S^2 / 2` and each quantile start pair; the highest
/// log-likelihood wins (earlier start on ties).
pub fn fit_nmle(sample: &Sample, opts: &EmOptions) -> Result<NormalMixFit> {
    let starts = quantile_starts(sample, 2);
    fit_nmle_from(sample, &starts, opts)
}

/// [`fit_nmle`] from explicit location pairs.
pub fn fit_nmle_from(sample: &Sample, starts: &[Vec<f64>], opts: &EmOptions) -> Result<NormalMixFit> {
    if sample.len() < 3 {
        return Err(Error::TooFewObservations {
            need: 3,
            got: sample.len(),
        });
    }
    let half_var = 0.5 * sample.variance()?;
    let runs: Vec<Option<NormalMixFit>> = starts
        .par_iter()
        .map(|m| {
            let start = NormalMixState {
                lambda1: 0.5,
                mu: [m[0], m[1]],
                sigma2: half_var,
            };
            em_fit_normal2(sample, start, opts).ok()
        })
        .collect();
    let mut best: Option<&NormalMixFit> = None;
    for fit in runs.iter().flatten() {
        if best.map_or(true, |b| fit.loglik > b.loglik + 1e-12) {
            best = Some(fit);
        }
    }
    best.cloned().ok_or(Error::AllStartsFailed)
}
