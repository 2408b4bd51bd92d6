//! Derivative-free simplex minimization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Size of the initial simplex around the start point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialStep {
    /// Coordinate `i` is perturbed by `max(0.05 |x_i|, 0.1)`.
    Relative,
    /// The same step in every coordinate.
    Uniform(f64),
    /// One step per coordinate.
    PerCoordinate(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Convergence requires both the simplex diameter (max-norm distance of
    /// every vertex from the best one) and the spread of objective values to
    /// fall below this.
    pub tolerance: f64,
    pub initial_step: InitialStep,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-8,
            initial_step: InitialStep::Relative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub argmin: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from `start` with the standard Nelder-Mead moves
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
/// Non-finite values met after the start are treated as `+inf`.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    opts: &SimplexOptions,
) -> Result<Minimum> {
    let d = start.len();
    if d == 0 {
        return Err(Error::InvalidOption("nelder_mead needs at least one dimension".into()));
    }
    if opts.max_iterations == 0 || !(opts.tolerance > 0.0) {
        return Err(Error::InvalidOption(format!(
            "max_iterations must be >= 1 and tolerance > 0 (got {}, {})",
            opts.max_iterations, opts.tolerance
        )));
    }
    let f0 = f(start);
    if !f0.is_finite() {
        return Err(Error::NonFiniteStart);
    }

    let steps: Vec<f64> = match &opts.initial_step {
        InitialStep::Relative => start.iter().map(|x| (0.05 * x.abs()).max(0.1)).collect(),
        InitialStep::Uniform(h) => vec![*h; d],
        InitialStep::PerCoordinate(h) => {
            if h.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    got: h.len(),
                });
            }
            h.clone()
        }
    };
    if steps.iter().any(|h| !(h.is_finite() && *h != 0.0)) {
        return Err(Error::InvalidOption(format!("invalid initial steps {steps:?}")));
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut values: Vec<f64> = Vec::with_capacity(d + 1);
    simplex.push(start.to_vec());
    values.push(f0);
    for (i, h) in steps.iter().enumerate() {
        let mut v = start.to_vec();
        v[i] += h;
        values.push(finite_or_inf(f(&v)));
        simplex.push(v);
    }

    let mut order: Vec<usize> = (0..=d).collect();
    let mut centroid = vec![0.0; d];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        // Stable sort keeps earlier vertices first among ties.
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[d];
        let second_worst = order[d - 1];

        let spread = values[worst] - values[best];
        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            })
            .fold(0.0f64, f64::max);
        if diameter < opts.tolerance && spread < opts.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..d] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= d as f64);

        let along = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, x)| c + coef * (x - c))
                .collect()
        };

        let reflected = along(-REFLECTION, &simplex[worst]);
        let fr = finite_or_inf(f(&reflected));

        if fr < values[best] {
            let expanded = along(-EXPANSION, &simplex[worst]);
            let fe = finite_or_inf(f(&expanded));
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        let (contracted, fc, accept) = if fr < values[worst] {
            let c = along(CONTRACTION, &reflected);
            let fc = finite_or_inf(f(&c));
            let ok = fc <= fr;
            (c, fc, ok)
        } else {
            let c = along(CONTRACTION, &simplex[worst]);
            let fc = finite_or_inf(f(&c));
            let ok = fc < values[worst];
            (c, fc, ok)
        };
        if accept {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                *x = a + SHRINK * (*x - a);
            }
            values[i] = finite_or_inf(f(&simplex[i]));
        }
    }

    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let best = order[0];
    Ok(Minimum {
        argmin: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic() {
        let m = nelder_mead(|x| (x[0] - 3.0).powi(2), &[0.0], &SimplexOptions::default()).unwrap();
        assert!((m.argmin[0] - 3.0).abs() < 1e-6, "{m:?}");
        assert!(m.converged);
    }

    #[test]
    fn anisotropic_quadratic() {
        let m = nelder_mead(
            |x| x[0] * x[0] + 10.0 * x[1] * x[1],
            &[1.0, 1.0],
            &SimplexOptions::default(),
        )
        .unwrap();
        assert!(m.argmin[0].abs() < 1e-5 && m.argmin[1].abs() < 1e-5, "{m:?}");
    }

    #[test]
    fn rosenbrock() {
        let rosen = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let opts = SimplexOptions {
            max_iterations: 2000,
            ..SimplexOptions::default()
        };
        let m = nelder_mead(rosen, &[-1.2, 1.0], &opts).unwrap();
        assert!(m.value < 1e-6, "{m:?}");
        // Known minimizer, checked by direct evaluation.
        assert_eq!(rosen(&[1.0, 1.0]), 0.0);
        assert!((m.argmin[0] - 1.0).abs() < 1e-3 && (m.argmin[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_non_finite_start() {
        let r = nelder_mead(|_| f64::NAN, &[0.0], &SimplexOptions::default());
        assert!(matches!(r, Err(Error::NonFiniteStart)));
    }

    #[test]
    fn non_finite_regions_are_avoided() {
        let f = |x: &[f64]| if x[0] < -0.5 { f64::NAN } else { (x[0] - 2.0).powi(2) };
        let m = nelder_mead(f, &[0.0], &SimplexOptions::default()).unwrap();
        assert!((m.argmin[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn iteration_cap() {
        let opts = SimplexOptions {
            max_iterations: 3,
            ..SimplexOptions::default()
        };
        let m = nelder_mead(|x| (x[0] - 100.0).powi(2), &[0.0], &opts).unwrap();
        assert_eq!(m.iterations, 3);
        assert!(!m.converged);
    }
}
