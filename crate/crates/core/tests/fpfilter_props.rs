//! Ring laws and unit-group maps of F_p[x]/(x-1)^N.

use proptest::prelude::*;

use kmv_core::fpfilter::{dlog, unit_basis, BasisPart, FpFilterElem};

fn params() -> impl Strategy<Value = (u32, usize)> {
    (prop_oneof![Just(3u32), Just(5), Just(7)], 2usize..24)
}

fn elem(p: u32, n: usize) -> impl Strategy<Value = FpFilterElem> {
    prop::collection::vec(0..p as u64, n).prop_map(move |c| FpFilterElem::from_t_coeffs(p, n, &c))
}

fn one_unit(p: u32, n: usize) -> impl Strategy<Value = FpFilterElem> {
    prop::collection::vec(0..p as u64, n - 1).prop_map(move |mut c| {
        c.insert(0, 1);
        FpFilterElem::from_t_coeffs(p, n, &c)
    })
}

fn triple() -> impl Strategy<Value = (FpFilterElem, FpFilterElem, FpFilterElem)> {
    params().prop_flat_map(|(p, n)| (elem(p, n), elem(p, n), elem(p, n)))
}

fn unit_pair() -> impl Strategy<Value = (FpFilterElem, FpFilterElem)> {
    params().prop_flat_map(|(p, n)| (one_unit(p, n), one_unit(p, n)))
}

proptest! {
    #[test]
    fn commutative_ring_laws((a, b, c) in triple()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.sub(&a), FpFilterElem::zero(a.p(), a.modulus_exp()));
    }

    #[test]
    fn monomial_round_trip((a, _, _) in triple()) {
        let back = FpFilterElem::from_monomials(a.p(), a.modulus_exp(), &a.to_monomials().iter().map(|&c| c as u64).collect::<Vec<_>>());
        prop_assert_eq!(back, a);
    }

    #[test]
    fn frobenius_is_pth_power((a, _, _) in triple()) {
        prop_assert_eq!(a.frobenius(), a.pow(a.p() as u128));
    }

    #[test]
    fn units_invert((u, v) in unit_pair()) {
        let one = FpFilterElem::one(u.p(), u.modulus_exp());
        prop_assert_eq!(u.mul(&u.inverse().unwrap()), one.clone());
        prop_assert_eq!(u.conj().conj(), u.clone());
        prop_assert_eq!(u.mul(&v).conj(), u.conj().mul(&v.conj()));
        prop_assert!(u.mul(&u.conj()).is_plus());
    }

    #[test]
    fn dlog_reconstructs_and_is_additive((u, v) in unit_pair()) {
        let basis = unit_basis(u.p(), u.modulus_exp(), BasisPart::Full);
        let eu = dlog(&u, &basis).unwrap();
        let ev = dlog(&v, &basis).unwrap();
        prop_assert_eq!(basis.evaluate(&eu), u.clone());
        let euv = dlog(&u.mul(&v), &basis).unwrap();
        for (i, e) in basis.order_exps().iter().enumerate() {
            let order = (u.p() as u64).pow(*e);
            prop_assert_eq!(euv[i] % order, (eu[i] + ev[i]) % order);
        }
    }
}
