//! Right-continuous piecewise-constant functions on the real line.
//!
//! A [`StepFunction`] stores strictly increasing breakpoints `b[0] < b[1] < ...`
//! and one level per open interval: `levels[0]` holds on `(-inf, b[0])`,
//! `levels[i]` on `[b[i-1], b[i])` and the last level on `[b[last], inf)`.
//! Every operation here is exact up to floating-point rounding of the levels
//! themselves: integrals are sums of `|level|^p * width`, never grid samples.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Relative tolerance under which two abscissae are treated as one breakpoint.
pub const MERGE_TOLERANCE: f64 = 1e-12;

#[inline]
pub(crate) fn abscissae_close(a: f64, b: f64) -> bool {
    (b - a).abs() <= MERGE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// How a function is mirrored about the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reflection {
    /// Distribution-function reflection `g(t) = 1 - f((-t)-)`.
    Cdf,
    /// Plain mirror `g(t) = f(-t)`, made right-continuous.
    Mirror,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl StepFunction {
    /// Builds a step function from explicit parts. Breakpoints must be sorted;
    /// near-duplicates are merged (the rightmost level wins) and breakpoints
    /// that do not change the level are dropped.
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.len() != breakpoints.len() + 1 {
            return Err(Error::LengthMismatch {
                expected: breakpoints.len() + 1,
                got: levels.len(),
            });
        }
        if breakpoints.iter().chain(&levels).any(|v| !v.is_finite()) {
            let (index, &value) = breakpoints
                .iter()
                .chain(&levels)
                .enumerate()
                .find(|(_, v)| !v.is_finite())
                .expect("checked above");
            return Err(Error::NonFinite { index, value });
        }
        if breakpoints.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParams("breakpoints must be sorted".into()));
        }
        let pairs = breakpoints.into_iter().zip(levels[1..].iter().copied());
        Ok(Self::canonical(levels[0], pairs))
    }

    pub fn constant(value: f64) -> Self {
        Self {
            breakpoints: Vec::new(),
            levels: vec![value],
        }
    }

    /// `height` on `[start, end)`, zero elsewhere.
    pub fn indicator(start: f64, end: f64, height: f64) -> Result<Self> {
        if !(start < end) {
            return Err(Error::InvalidParams(format!(
                "indicator needs start < end, got [{start}, {end})"
            )));
        }
        Self::new(vec![start, end], vec![0.0, height, 0.0])
    }

    /// Merges near-duplicate abscissae of an already sorted `(t, level after t)`
    /// sequence and drops redundant breakpoints.
    fn canonical(first_level: f64, pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut breakpoints: Vec<f64> = Vec::new();
        let mut levels = vec![first_level];
        let mut group_start = f64::NAN;
        for (t, level) in pairs {
            if !breakpoints.is_empty() && abscissae_close(group_start, t) {
                *levels.last_mut().expect("non-empty") = level;
                continue;
            }
            breakpoints.push(t);
            levels.push(level);
            group_start = t;
        }
        Self::drop_flat(breakpoints, levels)
    }

    fn drop_flat(breakpoints: Vec<f64>, levels: Vec<f64>) -> Self {
        let mut out_b = Vec::with_capacity(breakpoints.len());
        let mut out_l = Vec::with_capacity(levels.len());
        out_l.push(levels[0]);
        for (b, &l) in breakpoints.into_iter().zip(&levels[1..]) {
            if l != *out_l.last().expect("non-empty") {
                out_b.push(b);
                out_l.push(l);
            }
        }
        Self {
            breakpoints: out_b,
            levels: out_l,
        }
    }

    /// Builds a function whose value is `(running count) / denom`, where each
    /// event `(t, delta)` adds the integer `delta` to the count at `t`.
    /// Levels are formed from exact integer counts, so no rounding accumulates.
    pub(crate) fn from_count_events(mut events: Vec<(f64, i64)>, denom: f64) -> Self {
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut count = 0i64;
        let pairs: Vec<(f64, f64)> = events
            .into_iter()
            .map(|(t, delta)| {
                count += delta;
                (t, count as f64 / denom)
            })
            .collect();
        Self::canonical(0.0, pairs)
    }

    /// Empirical distribution function of `sample`.
    pub fn ecdf(sample: &Sample) -> Self {
        let n = sample.len() as f64;
        let events = sample.values().iter().map(|&x| (x, 1)).collect();
        Self::from_count_events(events, n)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn left_tail(&self) -> f64 {
        self.levels[0]
    }

    pub fn right_tail(&self) -> f64 {
        self.levels[self.levels.len() - 1]
    }

    /// Value at `t`, taking the right limit at a jump.
    pub fn eval(&self, t: f64) -> f64 {
        self.levels[self.breakpoints.partition_point(|&b| b <= t)]
    }

    /// `t -> f(t - shift)`: moves every breakpoint right by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        let breakpoints = self.breakpoints.iter().map(|b| b + shift);
        Self::canonical(self.levels[0], breakpoints.zip(self.levels[1..].iter().copied()))
    }

    pub fn reflect(&self, role: Reflection) -> Self {
        let breakpoints = self.breakpoints.iter().rev().map(|b| -b).collect();
        let levels = self.levels.iter().rev();
        let levels = match role {
            Reflection::Mirror => levels.copied().collect(),
            Reflection::Cdf => levels.map(|l| 1.0 - l).collect(),
        };
        Self::drop_flat(breakpoints, levels)
    }

    /// Pointwise `op` over several functions, evaluated on the merged
    /// breakpoint set.
    pub fn combine(fs: &[&StepFunction], op: impl Fn(&[f64]) -> f64) -> Self {
        let mut all: Vec<f64> = fs.iter().flat_map(|f| f.breakpoints.iter().copied()).collect();
        all.sort_by(f64::total_cmp);

        let mut cursor = vec![0usize; fs.len()];
        let mut values: Vec<f64> = fs.iter().map(|f| f.levels[0]).collect();
        let first = op(&values);

        let mut pairs = Vec::new();
        let mut i = 0;
        while i < all.len() {
            let start = all[i];
            let mut j = i;
            while j + 1 < all.len() && abscissae_close(start, all[j + 1]) {
                j += 1;
            }
            let last = all[j];
            for (k, f) in fs.iter().enumerate() {
                while cursor[k] < f.breakpoints.len() && f.breakpoints[cursor[k]] <= last {
                    cursor[k] += 1;
                }
                values[k] = f.levels[cursor[k]];
            }
            pairs.push((start, op(&values)));
            i = j + 1;
        }
        // Groups are already separated by more than the merge tolerance.
        let mut breakpoints = Vec::with_capacity(pairs.len());
        let mut levels = Vec::with_capacity(pairs.len() + 1);
        levels.push(first);
        for (t, l) in pairs {
            breakpoints.push(t);
            levels.push(l);
        }
        Self::drop_flat(breakpoints, levels)
    }

    /// `sum_j coeffs[j] * fs[j]`, exact on every interval of the merged breakpoints.
    pub fn linear_combination(coeffs: &[f64], fs: &[&StepFunction]) -> Result<Self> {
        if coeffs.len() != fs.len() {
            return Err(Error::LengthMismatch {
                expected: fs.len(),
                got: coeffs.len(),
            });
        }
        if fs.is_empty() {
            return Err(Error::InvalidParams("linear combination of zero functions".into()));
        }
        Ok(Self::combine(fs, |v| {
            coeffs.iter().zip(v).map(|(c, x)| c * x).sum()
        }))
    }

    fn check_integrable(&self) -> Result<()> {
        let (left, right) = (self.left_tail(), self.right_tail());
        if left != 0.0 || right != 0.0 {
            return Err(Error::NonIntegrable { left, right });
        }
        Ok(())
    }

    /// `integral |f(t)|^p dt` for finite `p >= 1`.
    pub fn lp_integral(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidExponent(p));
        }
        self.check_integrable()?;
        let power = |x: f64| {
            if p == 1.0 {
                x.abs()
            } else if p == 2.0 {
                x * x
            } else {
                x.abs().powf(p)
            }
        };
        Ok(self
            .breakpoints
            .windows(2)
            .zip(&self.levels[1..])
            .map(|(w, &l)| power(l) * (w[1] - w[0]))
            .sum())
    }

    pub fn sup_norm(&self) -> f64 {
        self.levels.iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    /// `integral f(t) g(t) dt` for integrable `f` and `g`.
    pub fn inner_product(&self, other: &StepFunction) -> Result<f64> {
        self.check_integrable()?;
        other.check_integrable()?;
        let product = Self::combine(&[self, other], |v| v[0] * v[1]);
        Ok(product
            .breakpoints
            .windows(2)
            .zip(&product.levels[1..])
            .map(|(w, &l)| l * (w[1] - w[0]))
            .sum())
    }

    /// `sup_t |f(t) - cdf(t)|` for a continuous `cdf`. The supremum of the
    /// difference of a step function and a monotone continuous function is
    /// attained at a breakpoint from one side, so only those are inspected.
    /// The tails are taken into account through `cdf(-inf) = 0`, `cdf(inf) = 1`.
    pub fn sup_distance_to_cdf(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let mut sup = (self.left_tail() - 0.0).abs().max((self.right_tail() - 1.0).abs());
        for (i, &b) in self.breakpoints.iter().enumerate() {
            let g = cdf(b);
            sup = sup
                .max((self.levels[i] - g).abs())
                .max((self.levels[i + 1] - g).abs());
        }
        sup
    }

    /// Largest decrease between consecutive levels; zero for a nondecreasing function.
    pub fn monotone_violation(&self) -> f64 {
        self.levels
            .windows(2)
            .fold(0.0, |m, w| m.max(w[0] - w[1]))
    }

    /// Two-column CSV (`t,value`): each breakpoint with the level that holds
    /// from it onwards, 17 significant digits.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "t,value")?;
        for (t, l) in self.breakpoints.iter().zip(&self.levels[1..]) {
            writeln!(out, "{t:.16e},{l:.16e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn ecdf_single_point() {
        let f = StepFunction::ecdf(&sample(&[1.0]));
        assert_eq!(f.breakpoints(), &[1.0]);
        assert_eq!(f.levels(), &[0.0, 1.0]);
        assert_eq!(f.eval(0.999), 0.0);
        assert_eq!(f.eval(1.0), 1.0);
    }

    #[test]
    fn ecdf_ties() {
        let f = StepFunction::ecdf(&sample(&[2.0, 2.0, 5.0]));
        assert_eq!(f.breakpoints(), &[2.0, 5.0]);
        assert_eq!(f.levels(), &[0.0, 2.0 / 3.0, 1.0]);
    }

    #[test]
    fn reflect_atom_and_symmetric_fixed_point() {
        let atom = StepFunction::ecdf(&sample(&[3.0]));
        let r = atom.reflect(Reflection::Cdf);
        assert_eq!(r.breakpoints(), &[-3.0]);
        assert_eq!(r.levels(), &[0.0, 1.0]);

        let sym = StepFunction::ecdf(&sample(&[-1.0, 1.0]));
        assert_eq!(sym.reflect(Reflection::Cdf), sym);
    }

    #[test]
    fn reflect_four_point_mass() {
        let f = StepFunction::ecdf(&sample(&[0.0, 2.0, 4.0, 6.0]));
        let r = f.reflect(Reflection::Cdf);
        assert_eq!(r.breakpoints(), &[-6.0, -4.0, -2.0, -0.0]);
        assert_eq!(r.levels(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn linear_combination_identities() {
        let f = StepFunction::new(vec![-1.0, 0.5, 2.0], vec![0.0, 0.3, -0.2, 0.0]).unwrap();
        assert_eq!(StepFunction::linear_combination(&[1.0], &[&f]).unwrap(), f);
        assert_eq!(
            StepFunction::linear_combination(&[0.5, 0.5], &[&f, &f]).unwrap(),
            f
        );
        assert!(matches!(
            StepFunction::linear_combination(&[1.0, 2.0], &[&f]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn lp_integral_basics() {
        let bx = StepFunction::indicator(0.0, 1.0, 1.0).unwrap();
        assert_eq!(bx.lp_integral(2.0).unwrap(), 1.0);
        assert_eq!(StepFunction::constant(0.0).lp_integral(1.0).unwrap(), 0.0);
        let cdf = StepFunction::ecdf(&sample(&[0.0]));
        assert!(matches!(cdf.lp_integral(2.0), Err(Error::NonIntegrable { .. })));
        assert!(matches!(bx.lp_integral(0.5), Err(Error::InvalidExponent(_))));
        let tall = StepFunction::indicator(0.0, 2.0, -3.0).unwrap();
        assert!((tall.lp_integral(3.5).unwrap() - 2.0 * 3f64.powf(3.5)).abs() < 1e-9);
    }

    #[test]
    fn sup_norm_levels() {
        assert_eq!(StepFunction::constant(0.0).sup_norm(), 0.0);
        let f = StepFunction::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.4, -0.7, 0.0]).unwrap();
        assert_eq!(f.sup_norm(), 0.7);
    }

    #[test]
    fn inner_product_disjoint_and_norm() {
        let a = StepFunction::indicator(0.0, 1.0, 2.0).unwrap();
        let b = StepFunction::indicator(1.0, 3.0, 5.0).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), 0.0);
        let f = StepFunction::new(vec![-1.0, 0.25, 4.0], vec![0.0, 0.3, -0.2, 0.0]).unwrap();
        assert_eq!(f.inner_product(&f).unwrap(), f.lp_integral(2.0).unwrap());
    }

    #[test]
    fn near_duplicate_breakpoints_merge() {
        let f = StepFunction::new(vec![1.0, 1.0 + 1e-14, 2.0], vec![0.0, 0.5, 0.7, 0.0]).unwrap();
        assert_eq!(f.breakpoints(), &[1.0, 2.0]);
        assert_eq!(f.levels(), &[0.0, 0.7, 0.0]);
    }

    #[test]
    fn csv_export() {
        let f = StepFunction::ecdf(&sample(&[1.0, 3.0]));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,value");
        assert_eq!(lines.len(), 3);
        let parsed: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(parsed, vec![1.0, 0.5]);
    }

    fn arb_step() -> impl Strategy<Value = StepFunction> {
        (1usize..8)
            .prop_flat_map(|m| {
                (
                    prop::collection::vec(-10.0f64..10.0, m),
                    prop::collection::vec(-2.0f64..2.0, m - 1),
                )
            })
            .prop_map(|(mut b, inner)| {
                b.sort_by(f64::total_cmp);
                let mut levels = vec![0.0];
                levels.extend(inner);
                levels.push(0.0);
                StepFunction::new(b, levels).unwrap()
            })
    }

    proptest! {
        #[test]
        fn cauchy_schwarz_and_symmetry(f in arb_step(), g in arb_step()) {
            let fg = f.inner_product(&g).unwrap();
            let gf = g.inner_product(&f).unwrap();
            prop_assert!((fg - gf).abs() <= 1e-12 * (1.0 + fg.abs()));
            let ff = f.lp_integral(2.0).unwrap();
            let gg = g.lp_integral(2.0).unwrap();
            prop_assert!(fg * fg <= ff * gg * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn bilinear(f in arb_step(), g in arb_step(), h in arb_step(), c in -3.0f64..3.0) {
            let combo = StepFunction::linear_combination(&[c, 1.0], &[&f, &g]).unwrap();
            let lhs = combo.inner_product(&h).unwrap();
            let rhs = c * f.inner_product(&h).unwrap() + g.inner_product(&h).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }

        #[test]
        fn norm_nonnegative_and_zero_iff_zero(f in arb_step(), p in 1.0f64..4.0) {
            let v = f.lp_integral(p).unwrap();
            prop_assert!(v >= 0.0);
            let all_zero = f.levels().iter().all(|&l| l == 0.0);
            prop_assert_eq!(v == 0.0, all_zero);
        }

        #[test]
        fn mirror_reflection_is_an_involution(f in arb_step()) {
            prop_assert_eq!(f.reflect(Reflection::Mirror).reflect(Reflection::Mirror), f);
        }

        #[test]
        fn cdf_reflection_is_an_involution(v in prop::collection::vec(-50.0f64..50.0, 1..40)) {
            let f = StepFunction::ecdf(&Sample::new(v).unwrap());
            let back = f.reflect(Reflection::Cdf).reflect(Reflection::Cdf);
            prop_assert_eq!(back.breakpoints(), f.breakpoints());
            for (a, b) in back.levels().iter().zip(f.levels()) {
                prop_assert!((a - b).abs() <= f64::EPSILON);
            }
        }

        #[test]
        fn ecdf_at_observations_is_rank_over_n(v in prop::collection::vec(-5i32..5, 1..30)) {
            let values: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            let f = StepFunction::ecdf(&Sample::new(values.clone()).unwrap());
            let n = values.len() as f64;
            for &x in &values {
                let rank = values.iter().filter(|&&y| y <= x).count() as f64;
                prop_assert_eq!(f.eval(x), rank / n);
            }
        }
    }
}
