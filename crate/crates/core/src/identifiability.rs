//! Identifiability of location mixtures of a common symmetric distribution.
//!
//! A parameter point `(lambda, mu)` is identifiable for every symmetric
//! component exactly when the reflected point distribution
//! `Delta^-(lambda, mu)` is the only `k`-point distribution whose convolution
//! with `Delta(lambda, mu)` is symmetric about zero. This module provides the
//! finite-distribution algebra behind that criterion, closed-form membership
//! tests for `k <= 3`, and an exhaustive search for symmetrizers on small
//! lattices that can be used to check the closed forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::MixtureParams;

/// Tolerance of all membership predicates (relative for gaps and weight
/// identities, absolute for weights).
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;
/// Points this close to a non-identifiable set are flagged, not rejected.
pub const NEAR_BOUNDARY: f64 = 1e-6;
/// Atom sums closer than this are merged by [`convolve_finite`].
pub const ATOM_MERGE: f64 = 1e-12;

/// A distribution on finitely many points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitePointDistribution {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl FinitePointDistribution {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: atoms.len().max(1),
                got: weights.len(),
            });
        }
        if atoms.iter().any(|a| !a.is_finite()) || atoms.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams(format!(
                "atoms must be finite and strictly increasing: {atoms:?}"
            )));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParams(format!("weights must be positive: {weights:?}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms, weights })
    }

    pub fn point_mass(at: f64) -> Self {
        Self {
            atoms: vec![at],
            weights: vec![1.0],
        }
    }

    /// `Delta_k(lambda, mu)`; atoms with zero weight are left out.
    pub fn from_params(params: &MixtureParams) -> Self {
        let (atoms, weights) = params
            .locations()
            .iter()
            .zip(params.weights())
            .filter(|(_, &w)| w > 0.0)
            .map(|(&a, &w)| (a, w))
            .unzip();
        Self { atoms, weights }
    }

    /// Sorts, merges atoms within [`ATOM_MERGE`] and drops empty atoms.
    /// Weights are taken as given.
    fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut anchor = f64::NAN;
        for (a, w) in pairs {
            if !atoms.is_empty() && (a - anchor).abs() <= ATOM_MERGE {
                *weights.last_mut().expect("non-empty") += w;
            } else {
                atoms.push(a);
                weights.push(w);
                anchor = a;
            }
        }
        Self { atoms, weights }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Mirror image about the origin.
    pub fn reflect(&self) -> Self {
        Self {
            atoms: self.atoms.iter().rev().map(|a| -a).collect(),
            weights: self.weights.iter().rev().copied().collect(),
        }
    }
}

/// Distribution of the sum of independent draws from `a` and `b`.
pub fn convolve_finite(a: &FinitePointDistribution, b: &FinitePointDistribution) -> FinitePointDistribution {
    let mut pairs = Vec::with_capacity(a.len() * b.len());
    for (xa, wa) in a.atoms.iter().zip(&a.weights) {
        for (xb, wb) in b.atoms.iter().zip(&b.weights) {
            pairs.push((xa + xb, wa * wb));
        }
    }
    FinitePointDistribution::from_pairs(pairs)
}

/// Whether atoms pair up as `a <-> -a` with equal weights, within `tol`.
pub fn is_zero_symmetric(d: &FinitePointDistribution, tol: f64) -> bool {
    let n = d.len();
    (0..n.div_ceil(2)).all(|i| {
        let j = n - 1 - i;
        (d.atoms[i] + d.atoms[j]).abs() <= tol && (d.weights[i] - d.weights[j]).abs() <= tol
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reason {
    Ok,
    ZeroWeight,
    Symmetric,
    LambdaHalf,
    CaseA2,
    CaseA3,
    CaseA4,
    CaseA5,
    ReflectedCase,
    UnsupportedK,
}

/// The four three-point families that admit a nontrivial symmetrizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseFamily {
    A2,
    A3,
    A4,
    A5,
}

impl CaseFamily {
    pub const ALL: [CaseFamily; 4] = [Self::A2, Self::A3, Self::A4, Self::A5];

    fn reason(self) -> Reason {
        match self {
            Self::A2 => Reason::CaseA2,
            Self::A3 => Reason::CaseA3,
            Self::A4 => Reason::CaseA4,
            Self::A5 => Reason::CaseA5,
        }
    }

    /// The family whose reflected members symmetrize members of this one.
    pub fn companion(self) -> Self {
        match self {
            Self::A2 => Self::A3,
            Self::A3 => Self::A2,
            Self::A4 => Self::A5,
            Self::A5 => Self::A4,
        }
    }

    /// The family member with offset `c`, unit gap `d > 0` and ratio `r > 1`.
    pub fn point(self, c: f64, d: f64, r: f64) -> Result<MixtureParams> {
        if !(d > 0.0) || !(r > 1.0) {
            return Err(Error::InvalidParams(format!(
                "family members need d > 0 and r > 1 (got d = {d}, r = {r})"
            )));
        }
        let (weights, offsets) = match self {
            Self::A2 => ([r * r, r * r - 1.0, r], [0.0, 4.0, 6.0]),
            Self::A3 => ([r, r + 1.0, 1.0], [1.0, 3.0, 5.0]),
            Self::A4 => (
                [r * r.sqrt(), (r - 1.0) * (r + 1.0).sqrt(), r.sqrt()],
                [0.0, 3.0, 4.0],
            ),
            Self::A5 => ([r, (r + r * r).sqrt(), 1.0], [1.0, 2.0, 3.0]),
        };
        MixtureParams::from_proportional(
            weights.to_vec(),
            offsets.iter().map(|o| c + o * d).collect(),
        )
    }
}

/// `(c, d, r)` such that the point is `family.point(c, d, r)`; for a
/// reflected case the triple refers to the reflected point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub family: CaseFamily,
    pub c: f64,
    pub d: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilityVerdict {
    pub member: bool,
    pub reason: Reason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Within [`NEAR_BOUNDARY`] of an excluded set without being excluded.
    pub near_boundary: bool,
}

impl IdentifiabilityVerdict {
    fn member(near_boundary: bool) -> Self {
        Self {
            member: true,
            reason: Reason::Ok,
            witness: None,
            near_boundary,
        }
    }

    fn excluded(reason: Reason, witness: Option<Witness>) -> Self {
        Self {
            member: false,
            reason,
            witness,
            near_boundary: false,
        }
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn require_k(params: &MixtureParams, k: usize) -> Result<()> {
    if params.k() == k {
        Ok(())
    } else {
        Err(Error::UnsupportedK(params.k()))
    }
}

/// Two components: identifiable unless `lambda_1` is 0, 1/2 or 1.
pub fn in_omega2_star(params: &MixtureParams) -> Result<IdentifiabilityVerdict> {
    require_k(params, 2)?;
    let l1 = params.weights()[0];
    let to_edge = l1.min(1.0 - l1);
    let to_half = (l1 - 0.5).abs();
    if to_edge <= MEMBERSHIP_TOLERANCE {
        return Ok(IdentifiabilityVerdict::excluded(Reason::ZeroWeight, None));
    }
    if to_half <= MEMBERSHIP_TOLERANCE {
        return Ok(IdentifiabilityVerdict::excluded(Reason::LambdaHalf, None));
    }
    Ok(IdentifiabilityVerdict::member(to_edge.min(to_half) < NEAR_BOUNDARY))
}

/// Sufficient condition for three components: all weights positive and the
/// gap ratio `(mu_2 - mu_1) / (mu_3 - mu_2)` outside `{1/3, 1/2, 1, 2, 3}`.
pub fn corollary1_check(params: &MixtureParams) -> Result<bool> {
    require_k(params, 3)?;
    if params.weights().iter().any(|&w| w <= MEMBERSHIP_TOLERANCE) {
        return Ok(false);
    }
    let m = params.locations();
    let ratio = (m[1] - m[0]) / (m[2] - m[1]);
    Ok([1.0 / 3.0, 0.5, 1.0, 2.0, 3.0]
        .iter()
        .all(|&excluded| rel_gap(ratio, excluded) > MEMBERSHIP_TOLERANCE))
}

/// How far a three-point parameter is from each family, as the larger of the
/// relative errors in its gap relation and its weight identity. `None` when
/// `r = lambda_1 / lambda_3` is not above one.
///
/// The weight identities come from eliminating `r` from the proportional
/// forms, with `r = lambda_1 / lambda_3`:
///
/// * A2, `lambda ~ (r^2, r^2 - 1, r)`: `lambda_1 lambda_2 = lambda_1^2 - lambda_3^2`.
/// * A3, `lambda ~ (r, r + 1, 1)`: `lambda_2 = lambda_1 + lambda_3`.
/// * A4, `lambda ~ (r sqrt r, (r - 1) sqrt(r + 1), sqrt r)`:
///   `lambda_2^2 r^3 = lambda_1^2 (r - 1)^2 (r + 1)`.
/// * A5, `lambda ~ (r, sqrt(r + r^2), 1)`: `lambda_2^2 = lambda_1^2 + lambda_1 lambda_3`.
fn family_discrepancy(family: CaseFamily, w: &[f64], m: &[f64]) -> Option<(f64, Witness)> {
    let (g1, g2) = (m[1] - m[0], m[2] - m[1]);
    let r = w[0] / w[2];
    if !(r > 1.0 + MEMBERSHIP_TOLERANCE) {
        return None;
    }
    let (gap, weight, c, d) = match family {
        CaseFamily::A2 => (
            rel_gap(g1, 2.0 * g2),
            rel_gap(w[0] * w[1], w[0] * w[0] - w[2] * w[2]),
            m[0],
            g2 / 2.0,
        ),
        CaseFamily::A3 => (
            rel_gap(g1, g2),
            rel_gap(w[1], w[0] + w[2]),
            m[0] - g1 / 2.0,
            g1 / 2.0,
        ),
        CaseFamily::A4 => (
            rel_gap(g1, 3.0 * g2),
            rel_gap(
                w[1] * w[1] * r * r * r,
                w[0] * w[0] * (r - 1.0) * (r - 1.0) * (r + 1.0),
            ),
            m[0],
            g2,
        ),
        CaseFamily::A5 => (
            rel_gap(g1, g2),
            rel_gap(w[1] * w[1], w[0] * w[0] + w[0] * w[2]),
            m[0] - g1,
            g1,
        ),
    };
    Some((gap.max(weight), Witness { family, c, d, r }))
}

fn closest_family(params: &MixtureParams) -> Option<(f64, Witness)> {
    CaseFamily::ALL
        .iter()
        .filter_map(|&f| family_discrepancy(f, params.weights(), params.locations()))
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

/// Three components: excluded when a weight vanishes or `Delta_3` is
/// symmetric, when the point or its mirror image lies in one of the
/// families A2 to A5; identifiable otherwise.
pub fn in_omega3_star(params: &MixtureParams) -> Result<IdentifiabilityVerdict> {
    require_k(params, 3)?;
    let w = params.weights();
    let m = params.locations();

    let min_weight = w.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min_weight <= MEMBERSHIP_TOLERANCE {
        return Ok(IdentifiabilityVerdict::excluded(Reason::ZeroWeight, None));
    }
    let symmetry = ((w[0] - w[2]).abs()).max(rel_gap(m[1] - m[0], m[2] - m[1]));
    if symmetry <= MEMBERSHIP_TOLERANCE {
        return Ok(IdentifiabilityVerdict::excluded(Reason::Symmetric, None));
    }

    let direct = closest_family(params);
    if let Some((gap, witness)) = direct {
        if gap <= MEMBERSHIP_TOLERANCE {
            return Ok(IdentifiabilityVerdict::excluded(witness.family.reason(), Some(witness)));
        }
    }
    let mirrored = closest_family(&params.reflected());
    if let Some((gap, witness)) = mirrored {
        if gap <= MEMBERSHIP_TOLERANCE {
            return Ok(IdentifiabilityVerdict::excluded(Reason::ReflectedCase, Some(witness)));
        }
    }

    let nearest = [direct.map(|d| d.0), mirrored.map(|d| d.0)]
        .into_iter()
        .flatten()
        .fold(min_weight.min(symmetry), f64::min);
    Ok(IdentifiabilityVerdict::member(nearest < NEAR_BOUNDARY))
}

/// Membership for any `k`: `k = 1` is always identifiable and `k >= 4` is
/// reported as unsupported.
pub fn verdict(params: &MixtureParams) -> IdentifiabilityVerdict {
    match params.k() {
        1 => IdentifiabilityVerdict::member(false),
        2 => in_omega2_star(params).expect("k = 2"),
        3 => in_omega3_star(params).expect("k = 3"),
        _ => IdentifiabilityVerdict::excluded(Reason::UnsupportedK, None),
    }
}

/// Candidate lattice for [`brute_force_symmetrizer`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizerGrid {
    /// Lattice steps are the pairwise gaps of the input divided by these.
    pub divisors: Vec<u32>,
    /// Candidate atoms lie within `window * span` outside the reflected support.
    pub window: f64,
    /// Weight mesh `1/mesh`, used only when the symmetry equations leave the
    /// weights of an atom set undetermined.
    pub weight_mesh: u32,
    pub max_candidates: u128,
    pub tolerance: f64,
}

impl Default for SymmetrizerGrid {
    fn default() -> Self {
        Self {
            divisors: vec![1, 2, 3, 4, 6],
            window: 1.0,
            weight_mesh: 60,
            max_candidates: 10_000_000,
            tolerance: 1e-9,
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

fn lattice(d: &FinitePointDistribution, grid: &SymmetrizerGrid, tol: f64) -> Vec<f64> {
    let atoms = d.atoms();
    let mut gaps = Vec::new();
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            gaps.push(atoms[j] - atoms[i]);
        }
    }
    let span = gaps.iter().fold(0.0f64, |a, &b| a.max(b));
    let (steps, span) = if span > 0.0 {
        let steps: Vec<f64> = gaps
            .iter()
            .flat_map(|g| grid.divisors.iter().map(move |&q| g / q as f64))
            .collect();
        (steps, span)
    } else {
        (vec![1.0], 1.0)
    };
    let lo = -atoms[atoms.len() - 1] - grid.window * span - tol;
    let hi = -atoms[0] + grid.window * span + tol;

    let mut points = Vec::new();
    for &anchor in atoms.iter().map(|a| -a).collect::<Vec<_>>().iter() {
        for &h in &steps {
            let first = ((lo - anchor) / h).ceil() as i64;
            let last = ((hi - anchor) / h).floor() as i64;
            points.extend((first..=last).map(|i| anchor + i as f64 * h));
        }
    }
    points.sort_by(f64::total_cmp);
    let mut unique: Vec<f64> = Vec::with_capacity(points.len());
    for p in points {
        if unique.last().map_or(true, |&u| p - u > tol) {
            unique.push(p);
        }
    }
    unique
}

/// Solves the linear symmetry equations for the weights of atom set `q`.
/// Returns `Ok(Some(w))` for a unique solution, `Ok(None)` when infeasible and
/// `Err(())` when the weights are not determined.
fn solve_weights(
    d: &FinitePointDistribution,
    q: &[f64],
    tol: f64,
) -> std::result::Result<Option<Vec<f64>>, ()> {
    let m = q.len();
    let mut terms: Vec<(f64, usize, f64)> = Vec::with_capacity(d.len() * m);
    for (a, lam) in d.atoms().iter().zip(d.weights()) {
        for (j, qj) in q.iter().enumerate() {
            terms.push((a + qj, j, *lam));
        }
    }
    terms.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Group positions; each group keeps its coefficient vector over w.
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for (s, j, lam) in terms {
        match groups.last_mut() {
            Some((anchor, coef)) if (s - *anchor).abs() <= tol => coef[j] += lam,
            _ => {
                let mut coef = vec![0.0; m];
                coef[j] = lam;
                groups.push((s, coef));
            }
        }
    }
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let g = groups.len();
    for i in 0..g.div_ceil(2) {
        let j = g - 1 - i;
        if (groups[i].0 + groups[j].0).abs() > tol {
            return Ok(None);
        }
        if i != j {
            let row = groups[i].1.iter().zip(&groups[j].1).map(|(a, b)| a - b).collect();
            rows.push((row, 0.0));
        }
    }
    rows.push((vec![1.0; m], 1.0));

    // Gaussian elimination with partial pivoting on the augmented system.
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(*b);
            v
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m {
        let Some(p) = (row..a.len())
            .filter(|&r| a[r][col].abs() > 1e-12)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
        else {
            continue;
        };
        a.swap(row, p);
        let pivot = a[row][col];
        for v in a[row].iter_mut() {
            *v /= pivot;
        }
        for r in 0..a.len() {
            if r != row {
                let factor = a[r][col];
                if factor != 0.0 {
                    let pivot_row = a[row].clone();
                    for (v, p) in a[r].iter_mut().zip(&pivot_row) {
                        *v -= factor * p;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if a[row..].iter().any(|r| r[m].abs() > tol) {
        return Ok(None);
    }
    if pivots.len() < m {
        return Err(());
    }
    let w: Vec<f64> = (0..m).map(|i| a[i][m]).collect();
    Ok(w.iter().all(|&x| x > tol).then_some(w))
}

fn mesh_compositions(total: u32, parts: usize, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if parts == 1 {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for first in 1..=total.saturating_sub(parts as u32 - 1) {
        cur.push(first);
        mesh_compositions(total - first, parts - 1, out, cur);
        cur.pop();
    }
}

/// All `m`-point distributions `Q` on the candidate lattice for which
/// `d * Q` is symmetric about zero. For each set of `m` lattice atoms the
/// symmetry conditions are linear in the weights of `Q`; a unique positive
/// solution is accepted directly, and an undetermined system is resolved on
/// the weight mesh. Results are sorted by atoms, then weights.
pub fn brute_force_symmetrizer(
    d: &FinitePointDistribution,
    m: usize,
    grid: &SymmetrizerGrid,
) -> Result<Vec<FinitePointDistribution>> {
    if d.len() > 4 || m == 0 || m > 3 {
        return Err(Error::InvalidOption(format!(
            "symmetrizer search supports at most 4 input atoms and 1 <= m <= 3 (got {}, {m})",
            d.len()
        )));
    }
    if grid.divisors.is_empty() || grid.divisors.contains(&0) || grid.weight_mesh < m as u32 {
        return Err(Error::InvalidOption("invalid symmetrizer grid".into()));
    }
    let scale = d.atoms().iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    let tol = grid.tolerance * scale;
    let points = lattice(d, grid, tol);
    let candidates = binomial(points.len() as u128, m as u128);
    if candidates > grid.max_candidates {
        return Err(Error::GridTooLarge {
            candidates,
            cap: grid.max_candidates,
        });
    }
    let mut mesh = Vec::new();
    mesh_compositions(grid.weight_mesh, m, &mut mesh, &mut Vec::new());

    let (a_min, a_max) = (d.atoms()[0], d.atoms()[d.len() - 1]);
    let mut found = Vec::new();
    let mut evaluated = candidates;
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let q: Vec<f64> = idx.iter().map(|&i| points[i]).collect();
        // The extreme sums must mirror each other.
        if (q[m - 1] + a_max + q[0] + a_min).abs() <= tol {
            let weight_sets = match solve_weights(d, &q, tol) {
                Ok(Some(w)) => vec![w],
                Ok(None) => Vec::new(),
                Err(()) => {
                    evaluated += mesh.len() as u128;
                    if evaluated > grid.max_candidates {
                        return Err(Error::GridTooLarge {
                            candidates: evaluated,
                            cap: grid.max_candidates,
                        });
                    }
                    mesh.iter()
                        .map(|c| c.iter().map(|&k| k as f64 / grid.weight_mesh as f64).collect())
                        .collect()
                }
            };
            for w in weight_sets {
                let total: f64 = w.iter().sum();
                let w: Vec<f64> = w.iter().map(|x| x / total).collect();
                let cand = FinitePointDistribution {
                    atoms: q.clone(),
                    weights: w,
                };
                if is_zero_symmetric(&convolve_finite(d, &cand), tol) {
                    found.push(cand);
                }
            }
        }
        // Next m-subset in lexicographic order.
        let mut i = m;
        loop {
            if i == 0 {
                found.sort_by(|a, b| {
                    a.atoms
                        .iter()
                        .zip(&b.atoms)
                        .map(|(x, y)| x.total_cmp(y))
                        .chain(a.weights.iter().zip(&b.weights).map(|(x, y)| x.total_cmp(y)))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                return Ok(found);
            }
            i -= 1;
            if idx[i] < points.len() - m + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fpd(atoms: &[f64], weights: &[f64]) -> FinitePointDistribution {
        FinitePointDistribution::new(atoms.to_vec(), weights.to_vec()).unwrap()
    }

    fn params(w: &[f64], m: &[f64]) -> MixtureParams {
        MixtureParams::from_proportional(w.to_vec(), m.to_vec()).unwrap()
    }

    #[test]
    fn convolution_examples() {
        let a = fpd(&[-1.0, 2.0, 3.0], &[0.2, 0.5, 0.3]);
        assert_eq!(convolve_finite(&FinitePointDistribution::point_mass(0.0), &a), a);

        let pm = fpd(&[-1.0, 1.0], &[0.5, 0.5]);
        let c = convolve_finite(&pm, &pm);
        assert_eq!(c.atoms(), &[-2.0, 0.0, 2.0]);
        assert_eq!(c.weights(), &[0.25, 0.5, 0.25]);

        let mix = FinitePointDistribution::from_params(&params(&[0.5, 0.5], &[1.0, 5.0]));
        let four = convolve_finite(&mix, &pm);
        assert_eq!(four.atoms(), &[0.0, 2.0, 4.0, 6.0]);
        assert_eq!(four.weights(), &[0.25; 4]);
    }

    #[test]
    fn symmetry_examples() {
        assert!(is_zero_symmetric(&fpd(&[-3.0, 3.0], &[0.5, 0.5]), 1e-12));
        assert!(!is_zero_symmetric(&fpd(&[-1.0, 1.0], &[0.3, 0.7]), 1e-12));
        let lam = FinitePointDistribution::from_params(&params(&[4.0, 3.0, 2.0], &[0.0, 4.0, 6.0]));
        let other = FinitePointDistribution::from_params(&params(&[2.0, 3.0, 1.0], &[1.0, 3.0, 5.0]));
        let conv = convolve_finite(&lam, &other.reflect());
        assert_eq!(conv.atoms(), &[-5.0, -3.0, -1.0, 1.0, 3.0, 5.0]);
        let tau = [4.0, 12.0, 11.0, 11.0, 12.0, 4.0];
        let total: f64 = tau.iter().sum();
        for (w, t) in conv.weights().iter().zip(tau) {
            assert!((w - t / total).abs() < 1e-15);
        }
        assert!(is_zero_symmetric(&conv, 1e-12));
    }

    #[test]
    fn omega2() {
        let v = in_omega2_star(&params(&[0.3, 0.7], &[-1.0, 1.0])).unwrap();
        assert!(v.member && v.reason == Reason::Ok);
        let v = in_omega2_star(&params(&[0.5, 0.5], &[2.0, 7.0])).unwrap();
        assert_eq!((v.member, v.reason), (false, Reason::LambdaHalf));
        let v = in_omega2_star(&MixtureParams::two(1e-15, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!((v.member, v.reason), (false, Reason::ZeroWeight));
        let v = in_omega2_star(&MixtureParams::two(0.5 + 1e-7, 0.0, 1.0).unwrap()).unwrap();
        assert!(v.member && v.near_boundary);
        assert!(in_omega2_star(&params(&[1.0], &[0.0])).is_err());
    }

    #[test]
    fn corollary1() {
        let third = [1.0, 1.0, 1.0];
        assert!(corollary1_check(&params(&third, &[0.0, 1.0, 5.0])).unwrap());
        assert!(!corollary1_check(&params(&third, &[0.0, 2.0, 4.0])).unwrap());
        assert!(!corollary1_check(&params(&third, &[0.0, 4.0, 6.0])).unwrap());
        assert!(!corollary1_check(&params(&[1.0, 0.0, 1.0], &[0.0, 1.0, 5.0])).unwrap());
    }

    #[test]
    fn omega3_examples() {
        let v = in_omega3_star(&params(&[4.0, 3.0, 2.0], &[0.0, 4.0, 6.0])).unwrap();
        assert_eq!(v.reason, Reason::CaseA2);
        let w = v.witness.unwrap();
        assert!((w.c - 0.0).abs() < 1e-12 && (w.d - 1.0).abs() < 1e-12 && (w.r - 2.0).abs() < 1e-12);

        let v = in_omega3_star(&params(&[2.0, 3.0, 1.0], &[1.0, 3.0, 5.0])).unwrap();
        assert_eq!(v.reason, Reason::CaseA3);
        let w = v.witness.unwrap();
        assert!((w.c - 0.0).abs() < 1e-12 && (w.d - 1.0).abs() < 1e-12 && (w.r - 2.0).abs() < 1e-12);

        let v = in_omega3_star(&params(&[1.0, 1.0, 1.0], &[0.0, 1.0, 5.0])).unwrap();
        assert!(v.member);

        let v = in_omega3_star(&params(&[0.3, 0.4, 0.3], &[0.0, 1.0, 2.0])).unwrap();
        assert_eq!(v.reason, Reason::Symmetric);

        let mirrored = params(&[4.0, 3.0, 2.0], &[0.0, 4.0, 6.0]).reflected();
        let v = in_omega3_star(&mirrored).unwrap();
        assert_eq!(v.reason, Reason::ReflectedCase);
        assert_eq!(v.witness.unwrap().family, CaseFamily::A2);
    }

    #[test]
    fn family_points_match_their_tags() {
        for family in CaseFamily::ALL {
            let p = family.point(-1.5, 0.7, 3.3).unwrap();
            let v = in_omega3_star(&p).unwrap();
            assert_eq!(v.reason, family.reason(), "{family:?}");
            let w = v.witness.unwrap();
            assert!((w.c + 1.5).abs() < 1e-9 && (w.d - 0.7).abs() < 1e-9 && (w.r - 3.3).abs() < 1e-9);
        }
        assert!(CaseFamily::A2.point(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn symmetrizer_search_small_cases() {
        let grid = SymmetrizerGrid::default();
        let d = FinitePointDistribution::from_params(&params(&[0.3, 0.7], &[-1.0, 1.0]));
        let found = brute_force_symmetrizer(&d, 2, &grid).unwrap();
        assert_eq!(found.len(), 1, "{found:?}");
        assert_eq!(found[0].atoms(), d.reflect().atoms());
        for (a, b) in found[0].weights().iter().zip(d.reflect().weights()) {
            assert!((a - b).abs() < 1e-12);
        }

        let d = FinitePointDistribution::from_params(&params(&[0.5, 0.5], &[1.0, 5.0]));
        let found = brute_force_symmetrizer(&d, 2, &grid).unwrap();
        assert!(found.len() >= 2);
        assert!(found.iter().any(|q| q.atoms() == [-5.0, -1.0]));
        assert!(found.iter().any(|q| q.atoms() == [-4.0, -2.0]));
    }

    #[test]
    fn symmetrizer_search_finds_companion() {
        let d = FinitePointDistribution::from_params(&params(&[4.0, 3.0, 2.0], &[0.0, 4.0, 6.0]));
        let found = brute_force_symmetrizer(&d, 3, &SymmetrizerGrid::default()).unwrap();
        let companion = found.iter().find(|q| q.atoms() == [-5.0, -3.0, -1.0]).expect("companion");
        for (w, t) in companion.weights().iter().zip([1.0, 3.0, 2.0]) {
            assert!((w - t / 6.0).abs() < 1e-9);
        }
        assert!(found.iter().any(|q| q.atoms() == [-6.0, -4.0, 0.0]));
    }

    #[test]
    fn grid_cap() {
        let d = FinitePointDistribution::from_params(&params(&[0.2, 0.3, 0.5], &[0.0, 1.0, 7.0]));
        let grid = SymmetrizerGrid {
            max_candidates: 10,
            ..SymmetrizerGrid::default()
        };
        assert!(matches!(
            brute_force_symmetrizer(&d, 3, &grid),
            Err(Error::GridTooLarge { .. })
        ));
    }
}
