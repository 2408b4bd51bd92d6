use proptest::prelude::*;
use symmix::identifiability::{
    convolve_finite, corollary1_check, in_omega2_star, in_omega3_star, is_zero_symmetric, CaseFamily,
    FinitePointDistribution, Reason,
};
use symmix::MixtureParams;

fn arb_fpd() -> impl Strategy<Value = FinitePointDistribution> {
    prop::collection::btree_set(-20i32..20, 1..5).prop_flat_map(|atoms| {
        let k = atoms.len();
        prop::collection::vec(0.05f64..1.0, k).prop_map(move |w| {
            let total: f64 = w.iter().sum();
            let w: Vec<f64> = w.iter().map(|x| x / total).collect();
            let fixed: f64 = w[..k - 1].iter().sum();
            let mut w = w;
            w[k - 1] = 1.0 - fixed;
            FinitePointDistribution::new(atoms.iter().map(|&a| a as f64).collect(), w).unwrap()
        })
    })
}

fn arb_omega3() -> impl Strategy<Value = MixtureParams> {
    (
        prop::collection::vec(0.01f64..1.0, 3),
        -10.0f64..10.0,
        0.01f64..5.0,
        0.01f64..5.0,
    )
        .prop_map(|(w, m0, g1, g2)| MixtureParams::from_proportional(w, vec![m0, m0 + g1, m0 + g1 + g2]).unwrap())
}

fn close(a: &FinitePointDistribution, b: &FinitePointDistribution, tol: f64) -> bool {
    a.len() == b.len()
        && a.atoms().iter().zip(b.atoms()).all(|(x, y)| (x - y).abs() <= tol)
        && a.weights().iter().zip(b.weights()).all(|(x, y)| (x - y).abs() <= tol)
}

fn delta(p: &MixtureParams) -> FinitePointDistribution {
    FinitePointDistribution::from_params(p)
}

/// Case 1 (families A2/A3) and Case 2 (A4/A5) convolution weights.
fn tau(case: u8, r: f64) -> Vec<f64> {
    let raw = if case == 1 {
        let (a, b) = (r * r, r * r * r + r * r);
        vec![a, b, b - 1.0, b - 1.0, b, a]
    } else {
        let (s, s1) = (r.sqrt(), (r + 1.0).sqrt());
        vec![r * s, r * r * s1, r * r * s, (r - 1.0) * s1, r * r * s, r * r * s1, r * s]
    };
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn convolution_commutes_and_associates(a in arb_fpd(), b in arb_fpd(), c in arb_fpd()) {
        prop_assert!(close(&convolve_finite(&a, &b), &convolve_finite(&b, &a), 1e-15));
        let left = convolve_finite(&convolve_finite(&a, &b), &c);
        let right = convolve_finite(&a, &convolve_finite(&b, &c));
        prop_assert!(close(&left, &right, 1e-15));
    }

    #[test]
    fn own_reflection_symmetrizes(a in arb_fpd()) {
        prop_assert!(is_zero_symmetric(&convolve_finite(&a, &a.reflect()), 1e-12));
    }

    #[test]
    fn reflection_duality(p in arb_omega3()) {
        let a = in_omega3_star(&p).unwrap();
        let b = in_omega3_star(&p.reflected()).unwrap();
        prop_assert_eq!(a.member, b.member);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn corollary_implies_membership(p in arb_omega3()) {
        if corollary1_check(&p).unwrap() {
            prop_assert!(in_omega3_star(&p).unwrap().member);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn family_closure(c in -10.0f64..10.0, d in 0.05f64..5.0, r in 1.01f64..10.0) {
        for family in CaseFamily::ALL {
            let p = family.point(c, d, r).unwrap();
            let v = in_omega3_star(&p).unwrap();
            prop_assert!(!v.member);
            let tag = match family {
                CaseFamily::A2 => Reason::CaseA2,
                CaseFamily::A3 => Reason::CaseA3,
                CaseFamily::A4 => Reason::CaseA4,
                CaseFamily::A5 => Reason::CaseA5,
            };
            prop_assert_eq!(v.reason, tag);
            let w = v.witness.unwrap();
            prop_assert!((w.c - c).abs() < 1e-9 * c.abs().max(1.0));
            prop_assert!((w.d - d).abs() < 1e-9 * d && (w.r - r).abs() < 1e-9 * r);
            let mirrored = in_omega3_star(&p.reflected()).unwrap();
            prop_assert_eq!(mirrored.reason, Reason::ReflectedCase);
        }
        for (case, fam, step) in [(1u8, CaseFamily::A2, 2.0), (2, CaseFamily::A4, 1.0)] {
            let p = delta(&fam.point(c, d, r).unwrap());
            let q = delta(&fam.companion().point(c, d, r).unwrap());
            let conv = convolve_finite(&p, &q.reflect());
            let t = tau(case, r);
            prop_assert_eq!(conv.len(), t.len());
            let half = (t.len() - 1) as f64 / 2.0;
            for (i, (a, w)) in conv.atoms().iter().zip(conv.weights()).enumerate() {
                prop_assert!((a - (i as f64 - half) * step * d).abs() < 1e-9 * (1.0 + c.abs()));
                prop_assert!((w - t[i]).abs() < 1e-12, "case {} tau {:?} got {:?}", case, t, conv.weights());
            }
            prop_assert!(is_zero_symmetric(&conv, 1e-9));
        }
    }
}

#[test]
fn two_component_boundary_grid() {
    for (l, member, reason) in [
        (0.0, false, Reason::ZeroWeight),
        (0.3, true, Reason::Ok),
        (0.5, false, Reason::LambdaHalf),
        (0.7, true, Reason::Ok),
        (1.0, false, Reason::ZeroWeight),
    ] {
        let v = in_omega2_star(&MixtureParams::two(l, -1.0, 1.0).unwrap()).unwrap();
        assert_eq!((v.member, v.reason), (member, reason), "lambda1 = {l}");
    }
}
