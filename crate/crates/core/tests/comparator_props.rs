use symmix::comparator::{
    bootstrap_se, em_fit_normal2, em_step, fit_nmle, BootstrapOptions, EmOptions, Estimator, NormalMixState,
};
use symmix::harness::{generate, EstimatorKind, ScenarioSpec, Shape};
use symmix::optimize::{fit_k2, FitOptions};
use symmix::{MixtureParams, Sample};

fn laplace_spec(n: usize, seed: u64, replications: usize) -> ScenarioSpec {
    ScenarioSpec {
        component: Shape::Laplace,
        truth: MixtureParams::two(0.3, -1.0, 1.0).unwrap(),
        scale: 1.0,
        n,
        replications,
        seed,
        estimators: vec![EstimatorKind::Sp],
        case: None,
    }
}

#[test]
fn em_traces_are_monotone() {
    let spec = laplace_spec(150, 77, 20);
    for rep in 0..20 {
        let s = generate(&spec, rep).unwrap();
        for m in symmix::optimize::quantile_starts(&s, 2) {
            let start = NormalMixState {
                lambda1: 0.5,
                mu: [m[0], m[1]],
                sigma2: 0.5 * s.variance().unwrap(),
            };
            if let Ok(f) = em_fit_normal2(&s, start, &EmOptions::default()) {
                assert!(f.loglik_trace.windows(2).all(|w| w[1] >= w[0] - 1e-10), "rep {rep}");
                assert!(f.mu[0] <= f.mu[1] && f.sigma2 > 0.0);
            }
        }
    }
}

#[test]
fn pooled_variance_is_the_weighted_average() {
    let s = generate(&laplace_spec(80, 3, 1), 0).unwrap();
    let x = s.values();
    let state = NormalMixState {
        lambda1: 0.4,
        mu: [-0.5, 1.2],
        sigma2: 1.3,
    };
    let (next, r) = em_step(x, &state);
    // The pooled variance maximizes sum_i r_i log phi(x_i; mu1, v) + (1 - r_i) log phi(x_i; mu2, v).
    let q = |v: f64| -> f64 {
        x.iter()
            .zip(&r)
            .map(|(xi, ri)| {
                let a = -0.5 * v.ln() - 0.5 * (xi - next.mu[0]).powi(2) / v;
                let b = -0.5 * v.ln() - 0.5 * (xi - next.mu[1]).powi(2) / v;
                ri * a + (1.0 - ri) * b
            })
            .sum()
    };
    let ss: f64 = x
        .iter()
        .zip(&r)
        .map(|(xi, ri)| ri * (xi - next.mu[0]).powi(2) + (1.0 - ri) * (xi - next.mu[1]).powi(2))
        .sum();
    assert!((next.sigma2 - ss / x.len() as f64).abs() < 1e-12);
    assert!(q(next.sigma2) >= q(next.sigma2 * 1.001) && q(next.sigma2) >= q(next.sigma2 * 0.999));
}

#[test]
fn bootstrap_is_deterministic_and_ordered() {
    let s = generate(&laplace_spec(120, 8, 1), 0).unwrap();
    let opts = BootstrapOptions {
        resamples: 16,
        seed: 123,
        warm_start: false,
    };
    for est in [Estimator::Sp(FitOptions::default()), Estimator::Nmle(EmOptions::default())] {
        let a = bootstrap_se(&s, &est, &opts).unwrap();
        let b = bootstrap_se(&s, &est, &opts).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.point[0] < a.point[1]);
        assert!(a.se.iter().all(|v| *v >= 0.0) && a.failures <= a.resamples);
    }
    let warm = BootstrapOptions { warm_start: true, ..opts };
    assert!(bootstrap_se(&s, &Estimator::Sp(FitOptions::default()), &warm).is_ok());
}

#[test]
fn bootstrap_se_tracks_monte_carlo_spread() {
    let fresh = laplace_spec(200, 31, 50);
    let mu1: Vec<f64> = (0..50)
        .map(|rep| fit_k2(&generate(&fresh, rep).unwrap(), &FitOptions::default()).unwrap().params.locations()[0])
        .collect();
    let mean = mu1.iter().sum::<f64>() / 50.0;
    let sd = (mu1.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / 49.0).sqrt();

    let s = generate(&laplace_spec(200, 1_000_003, 1), 0).unwrap();
    let opts = BootstrapOptions {
        resamples: 50,
        seed: 5,
        warm_start: false,
    };
    let report = bootstrap_se(&s, &Estimator::Sp(FitOptions::default()), &opts).unwrap();
    let ratio = report.se[0] / sd;
    assert!((0.5..=1.5).contains(&ratio), "bootstrap {} vs Monte Carlo {sd}", report.se[0]);
}

#[test]
fn nmle_on_tiny_samples() {
    assert!(fit_nmle(&Sample::new(vec![1.0, 2.0]).unwrap(), &EmOptions::default()).is_err());
    let s = Sample::new(vec![0.0, 0.1, 5.0, 5.2, 5.1, 0.2]).unwrap();
    let f = fit_nmle(&s, &EmOptions::default()).unwrap();
    assert!((f.mu[0] - 0.1).abs() < 1e-6 && (f.mu[1] - 5.1).abs() < 1e-6);
}
