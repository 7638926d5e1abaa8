//! Absolute norms against a floating-point product over complex embeddings.

use num_traits::ToPrimitive;
use proptest::prelude::*;

use kmv_core::exactpoly::{RingId, TowerElem};
use kmv_core::normtower::abs_norm;

/// `prod_{gcd(j, p) = 1} a(ζ^j)` for `ζ = exp(2πi / p^m)`.
fn numeric_norm(p: u32, m: u32, coeffs: &[i64]) -> f64 {
    let q = p.pow(m);
    let mut re = 1.0f64;
    let mut im = 0.0f64;
    for j in (1..q).filter(|j| j % p != 0) {
        let (mut sr, mut si) = (0.0, 0.0);
        for (i, &c) in coeffs.iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * ((i as u64 * j as u64) % q as u64) as f64 / q as f64;
            sr += c as f64 * th.cos();
            si += c as f64 * th.sin();
        }
        (re, im) = (re * sr - im * si, re * si + im * sr);
    }
    assert!(im.abs() < 1e-3 * re.abs().max(1.0));
    re
}

fn case() -> impl Strategy<Value = (u32, u32, Vec<i64>)> {
    prop_oneof![Just((3u32, 1u32)), Just((3, 2)), Just((5, 1)), Just((7, 1))]
        .prop_flat_map(|(p, m)| (Just(p), Just(m), prop::collection::vec(-3i64..=3, 1..=p.pow(m) as usize)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn abs_norm_matches_embeddings((p, m, coeffs) in case()) {
        let want = numeric_norm(p, m, &coeffs);
        // `cyclo(p, j)` is the ring of `p^{j+1}`-th roots of unity.
        let a = TowerElem::from_i64s(RingId::cyclo(p, m - 1).unwrap(), &coeffs);
        let got = abs_norm(&a).unwrap().to_f64().unwrap();
        prop_assert!((got - want).abs() < 1e-6 * want.abs().max(1.0), "exact {got}, numeric {want}");
    }
}
