//! Simulation designs: data generation and replicated estimator comparisons.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparator::{fit_nmle, EmOptions};
use crate::error::{Error, Result};
use crate::objective::MixtureParams;
use crate::optimize::{fit_k2, FitOptions};
use crate::sample::Sample;

/// Odd multiplier spreading replication indices over the seed space.
const REPLICATION_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
/// Replication count used when a scenario does not set one.
pub const DEFAULT_REPLICATIONS: usize = 50;
pub const FULL_REPLICATIONS: usize = 200;

/// Zero-symmetric component shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    /// Standard deviation `scale`.
    Normal,
    /// Double exponential with standard deviation `scale`.
    Laplace,
    /// Uniform on `[-sqrt(3) scale, sqrt(3) scale]`.
    Uniform,
    /// Student t, multiplied by `scale`.
    T { df: u32 },
}

/// Asymmetric or unequal-variance two-component designs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Misspecification {
    /// 1: chi-square(df1) and chi-square(df2); 2: chi-square(df1) and
    /// (df2 - df1) + chi-square(df1); 3: N(df1, 2 df1) and N(df2, 2 df2).
    pub case: u8,
    pub df1: u32,
    pub df2: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EstimatorKind {
    Sp,
    Nmle,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sp => "SP",
            Self::Nmle => "NMLE",
        }
    }
}

fn default_scale() -> f64 {
    1.0
}

fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

fn default_estimators() -> Vec<EstimatorKind> {
    vec![EstimatorKind::Sp, EstimatorKind::Nmle]
}

/// A replicated simulation design. For misspecification cases the truth
/// weights set the mixing proportion and the truth locations are the
/// reference values for error summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub component: Shape,
    pub truth: MixtureParams,
    #[serde(default = "default_scale")]
    pub scale: f64,
    pub n: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<Misspecification>,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2 (got {})", self.n));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return bad(format!("scale must be positive (got {})", self.scale));
        }
        if self.estimators.is_empty() {
            return bad("no estimators requested".into());
        }
        if let Shape::T { df: 0 } = self.component {
            return bad("t degrees of freedom must be positive".into());
        }
        if let Some(c) = &self.case {
            if !(1..=3).contains(&c.case) {
                return bad(format!("unknown case {}", c.case));
            }
            if c.df1 == 0 || c.df1 >= c.df2 {
                return bad(format!("need 0 < df1 < df2 (got {}, {})", c.df1, c.df2));
            }
            if self.truth.k() != 2 {
                return bad("misspecification cases have two components".into());
            }
        }
        Ok(())
    }

    pub fn from_json_path(path: impl AsRef<Path>) -> Result<Self> {
        let spec: Self = serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Seed of the generator for replication `replication`.
pub fn replication_seed(seed: u64, replication: usize) -> u64 {
    seed ^ (replication as u64).wrapping_mul(REPLICATION_STRIDE)
}

/// Standard t quantile on two degrees of freedom.
pub fn t2_quantile(u: f64) -> f64 {
    let w = 2.0 * u - 1.0;
    w * (2.0 / (1.0 - w * w)).sqrt()
}

/// Laplace quantile with scale `b`.
pub fn laplace_quantile(u: f64, b: f64) -> f64 {
    let v = u - 0.5;
    -b * v.signum() * (1.0 - 2.0 * v.abs()).ln()
}

fn open01(rng: &mut impl Rng) -> f64 {
    rng.sample(Open01)
}

/// Standard normal draw from two uniforms (Box-Muller, cosine branch).
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1 = open01(rng);
    let u2 = open01(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn chi_square(df: u32, rng: &mut impl Rng) -> f64 {
    (0..df).map(|_| standard_normal(rng).powi(2)).sum()
}

/// One draw of a centered component of the given shape.
pub fn sample_component(shape: Shape, scale: f64, rng: &mut impl Rng) -> f64 {
    match shape {
        Shape::Normal => scale * standard_normal(rng),
        Shape::Laplace => laplace_quantile(open01(rng), scale / 2f64.sqrt()),
        Shape::Uniform => scale * 3f64.sqrt() * (2.0 * open01(rng) - 1.0),
        Shape::T { df: 2 } => scale * t2_quantile(open01(rng)),
        Shape::T { df } => {
            let z = standard_normal(rng);
            scale * z / (chi_square(df, rng) / df as f64).sqrt()
        }
    }
}

fn draw_index(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (j, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return j;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// The sample of replication `replication`, independent of every other replication.
pub fn generate(spec: &ScenarioSpec, replication: usize) -> Result<Sample> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(spec.seed, replication));
    let weights = spec.truth.weights();
    let values = (0..spec.n)
        .map(|_| {
            let j = draw_index(weights, rng.gen::<f64>());
            match spec.case {
                None => spec.truth.locations()[j] + sample_component(spec.component, spec.scale, &mut rng),
                Some(Misspecification { case, df1, df2 }) => match (case, j) {
                    (1 | 2, 0) => chi_square(df1, &mut rng),
                    (1, _) => chi_square(df2, &mut rng),
                    (2, _) => (df2 - df1) as f64 + chi_square(df1, &mut rng),
                    (_, j) => {
                        let df = if j == 0 { df1 } else { df2 } as f64;
                        df + (2.0 * df).sqrt() * standard_normal(&mut rng)
                    }
                },
            }
        })
        .collect();
    Sample::new(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub replication: usize,
    pub estimator: EstimatorKind,
    pub lambda1: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma2: f64,
    /// `d_n` for SP, the log-likelihood for NMLE.
    pub objective: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub estimator: EstimatorKind,
    pub parameter: String,
    pub truth: f64,
    pub mean: f64,
    pub sd: f64,
    pub mse: f64,
    /// Replications with a successful fit.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ScenarioSpec,
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

fn fit_row(sample: &Sample, replication: usize, estimator: EstimatorKind) -> ResultRow {
    let fitted = match estimator {
        EstimatorKind::Sp => fit_k2(sample, &FitOptions::default()).map(|f| {
            let r = f.table_row().expect("two components");
            let converged = f.per_start.iter().any(|d| d.converged && d.objective == f.objective);
            (r, f.objective, converged)
        }),
        EstimatorKind::Nmle => {
            fit_nmle(sample, &EmOptions::default()).map(|f| (f.table_row(), f.loglik, f.converged))
        }
    };
    match fitted {
        Ok(([mu1, mu2, lambda1, sigma2], objective, converged)) => ResultRow {
            replication,
            estimator,
            lambda1,
            mu1,
            mu2,
            sigma2,
            objective,
            converged,
            error: None,
        },
        Err(e) => ResultRow {
            replication,
            estimator,
            lambda1: f64::NAN,
            mu1: f64::NAN,
            mu2: f64::NAN,
            sigma2: f64::NAN,
            objective: f64::NAN,
            converged: false,
            error: Some(e.to_string()),
        },
    }
}

type Getter = fn(&ResultRow) -> f64;

fn summarize(spec: &ScenarioSpec, rows: &[ResultRow]) -> Vec<SummaryRow> {
    let truth = spec.truth.weights()[0];
    let locs = spec.truth.locations();
    let params: [(&str, f64, Getter); 3] = [
        ("lambda1", truth, |r| r.lambda1),
        ("mu1", locs[0], |r| r.mu1),
        ("mu2", locs[locs.len() - 1], |r| r.mu2),
    ];
    let mut out = Vec::new();
    for &est in &spec.estimators {
        let ok: Vec<&ResultRow> = rows.iter().filter(|r| r.estimator == est && r.error.is_none()).collect();
        for (name, t, get) in params {
            let v: Vec<f64> = ok.iter().map(|r| get(r)).collect();
            let m = v.len() as f64;
            let mean = v.iter().sum::<f64>() / m;
            let sd = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
            } else {
                0.0
            };
            let mse = v.iter().map(|x| (x - t).powi(2)).sum::<f64>() / m;
            out.push(SummaryRow {
                estimator: est,
                parameter: name.to_string(),
                truth: t,
                mean,
                sd,
                mse,
                count: v.len(),
            });
        }
    }
    out
}

/// Fits every requested estimator on every replication. Rows are ordered by
/// replication, then by the order of `spec.estimators`.
pub fn run_experiment(spec: &ScenarioSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let per_rep: Vec<Result<Vec<ResultRow>>> = (0..spec.replications)
        .into_par_iter()
        .map(|rep| {
            let sample = generate(spec, rep)?;
            Ok(spec.estimators.iter().map(|&e| fit_row(&sample, rep, e)).collect())
        })
        .collect();
    let mut rows = Vec::with_capacity(spec.replications * spec.estimators.len());
    for r in per_rep {
        rows.extend(r?);
    }
    let summary = summarize(spec, &rows);
    Ok(ExperimentResult {
        spec: spec.clone(),
        rows,
        summary,
    })
}

fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

impl ExperimentResult {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "replication",
            "estimator",
            "lambda1",
            "mu1",
            "mu2",
            "sigma2",
            "objective",
            "converged",
            "error",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.replication.to_string(),
                r.estimator.name().to_string(),
                fmt_num(r.lambda1),
                fmt_num(r.mu1),
                fmt_num(r.mu2),
                fmt_num(r.sigma2),
                fmt_num(r.objective),
                r.converged.to_string(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `<stem>_seed<seed>.csv` and `<stem>_seed<seed>_summary.json`
    /// into `dir` and returns both paths.
    pub fn write_files(&self, dir: impl AsRef<Path>, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let base = format!("{stem}_seed{}", self.spec.seed);
        let csv_path = dir.join(format!("{base}.csv"));
        let json_path = dir.join(format!("{base}_summary.json"));
        self.write_csv(BufWriter::new(File::create(&csv_path)?))?;
        let summary = serde_json::json!({ "spec": self.spec, "summary": self.summary });
        let mut f = BufWriter::new(File::create(&json_path)?);
        serde_json::to_writer_pretty(&mut f, &summary)?;
        f.write_all(b"\n")?;
        f.flush()?;
        Ok((csv_path, json_path))
    }
}
