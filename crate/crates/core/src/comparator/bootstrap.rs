use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::em::{em_fit_normal2, fit_nmle, EmOptions, NormalMixState};
use crate::error::{Error, Result};
use crate::optimize::{fit_k1, fit_k2, FitOptions, Starts};
use crate::sample::Sample;

/// Resamples whose weight is this close to 0 or 1 are counted as failures.
const DEGENERATE_WEIGHT: f64 = 1e-6;
/// A component must carry at least this many effective observations.
const MIN_EFFECTIVE_POINTS: f64 = 2.0;

/// The estimator refitted on each resample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Estimator {
    /// Two-component semiparametric fit.
    Sp(FitOptions),
    /// Equal-variance normal mixture by EM.
    Nmle(EmOptions),
    /// One-component location estimate.
    K1,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sp(_) => "SP",
            Self::Nmle(_) => "NMLE",
            Self::K1 => "K1",
        }
    }

    pub fn parameter_names(&self) -> &'static [&'static str] {
        match self {
            Self::Sp(_) | Self::Nmle(_) => &["mu1", "mu2", "lambda1", "sigma2"],
            Self::K1 => &["mu"],
        }
    }

    /// Parameter vector on `sample`. With `warm`, two-component estimators
    /// start only from the given point instead of the full start protocol.
    pub fn estimate(&self, sample: &Sample, warm: Option<&[f64]>) -> Result<Vec<f64>> {
        let row = match self {
            Self::Sp(opts) => {
                let mut opts = opts.clone();
                if let Some(p) = warm {
                    opts.starts = Starts::Explicit(vec![p[..2].to_vec()]);
                }
                fit_k2(sample, &opts)?.table_row().expect("two components").to_vec()
            }
            Self::Nmle(opts) => match warm {
                Some(p) => em_fit_normal2(
                    sample,
                    NormalMixState {
                        lambda1: p[2],
                        mu: [p[0], p[1]],
                        sigma2: p[3],
                    },
                    opts,
                )?
                .table_row()
                .to_vec(),
                None => fit_nmle(sample, opts)?.table_row().to_vec(),
            },
            Self::K1 => vec![fit_k1(sample)],
        };
        if row.len() == 4 {
            let (l, n) = (row[2], sample.len() as f64);
            let minor = l.min(1.0 - l);
            if minor <= DEGENERATE_WEIGHT || n * minor < MIN_EFFECTIVE_POINTS {
                return Err(Error::InvalidParams(format!("degenerate fit with lambda1 = {l}")));
            }
        }
        Ok(row)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub resamples: usize,
    pub seed: u64,
    /// Refit each resample from the point estimate only.
    pub warm_start: bool,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            resamples: 200,
            seed: 0,
            warm_start: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub method: String,
    pub parameters: Vec<String>,
    #[serde(rename = "B")]
    pub resamples: usize,
    pub seed: u64,
    pub point: Vec<f64>,
    /// Standard deviation (divisor `m - 1`) over the successful resamples.
    pub se: Vec<f64>,
    pub failures: usize,
}

impl BootstrapReport {
    /// One row shaped like a published estimate table: `value (se)` per parameter.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<8}", "");
        for p in &self.parameters {
            let _ = write!(out, "{p:>20}");
        }
        out.push('\n');
        let _ = write!(out, "{:<8}", self.method);
        for (name, (v, s)) in self.parameters.iter().zip(self.point.iter().zip(&self.se)) {
            let cell = if name == "lambda1" {
                format!("{v:.3} ({s:.3})")
            } else {
                format!("{v:.2} ({s:.2})")
            };
            let _ = write!(out, "{cell:>20}");
        }
        out.push('\n');
        out
    }
}

fn resample(sample: &Sample, seed: u64) -> Sample {
    let x = sample.values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = (0..x.len()).map(|_| x[rng.gen_range(0..x.len())]).collect();
    Sample::new(draws).expect("values drawn from a valid sample")
}

/// Nonparametric bootstrap standard errors. Resample `b` draws `n` values with
/// replacement from a generator seeded with `seed ^ b`; refits that fail or
/// degenerate are counted and left out. Parameters are ordered with
/// increasing locations, so labels are aligned by sorting.
pub fn bootstrap_se(sample: &Sample, estimator: &Estimator, opts: &BootstrapOptions) -> Result<BootstrapReport> {
    if opts.resamples < 2 {
        return Err(Error::InvalidOption("bootstrap needs at least 2 resamples".into()));
    }
    let point = estimator.estimate(sample, None)?;
    let warm = opts.warm_start.then_some(point.as_slice());
    let fits: Vec<Result<Vec<f64>>> = (0..opts.resamples)
        .into_par_iter()
        .map(|b| estimator.estimate(&resample(sample, opts.seed ^ b as u64), warm))
        .collect();

    let failures = fits.iter().filter(|f| f.is_err()).count();
    if 2 * failures > opts.resamples {
        let first_error = fits
            .iter()
            .find_map(|f| f.as_ref().err())
            .map(ToString::to_string)
            .unwrap_or_default();
        return Err(Error::BootstrapFailed {
            failures,
            resamples: opts.resamples,
            first_error,
        });
    }
    let ok: Vec<&Vec<f64>> = fits.iter().flatten().collect();
    let m = ok.len() as f64;
    let se = (0..point.len())
        .map(|j| {
            if ok.len() < 2 {
                return 0.0;
            }
            let mean = ok.iter().map(|v| v[j]).sum::<f64>() / m;
            let ss: f64 = ok.iter().map(|v| (v[j] - mean).powi(2)).sum();
            (ss / (m - 1.0)).sqrt()
        })
        .collect();
    Ok(BootstrapReport {
        method: estimator.name().to_string(),
        parameters: estimator.parameter_names().iter().map(|s| s.to_string()).collect(),
        resamples: opts.resamples,
        seed: opts.seed,
        point,
        se,
        failures,
    })
}
