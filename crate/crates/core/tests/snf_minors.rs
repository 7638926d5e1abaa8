//! Smith normal form against gcds of minors computed by cofactor expansion.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use kmv_core::abgroup::snf;

fn det(m: &[Vec<BigInt>]) -> BigInt {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut acc = BigInt::zero();
    for j in 0..m.len() {
        let minor: Vec<Vec<BigInt>> =
            m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect()).collect();
        let term = &m[0][j] * det(&minor);
        acc = if j % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|s| s.count_ones() as usize == k).map(|s| (0..n).filter(|i| s >> i & 1 == 1).collect()).collect()
}

/// `g_k` = gcd of all k-by-k minors.
fn minor_gcds(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let (r, c) = (m.len(), m[0].len());
    (1..=r.min(c))
        .map(|k| {
            let mut g = BigInt::zero();
            for rows in subsets(r, k) {
                for cols in subsets(c, k) {
                    let sub: Vec<Vec<BigInt>> = rows.iter().map(|&i| cols.iter().map(|&j| m[i][j].clone()).collect()).collect();
                    g = g.gcd(&det(&sub));
                }
            }
            g
        })
        .collect()
}

fn matrix() -> impl Strategy<Value = Vec<Vec<BigInt>>> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec((-9i64..=9).prop_map(BigInt::from), c), r)
    })
}

proptest! {
    #[test]
    fn diagonal_matches_minor_gcds(m in matrix()) {
        let d = snf(&m).diagonal();
        let g = minor_gcds(&m);
        let mut prod = BigInt::from(1);
        for (k, dk) in d.iter().enumerate() {
            prop_assert!(!dk.is_negative());
            if k > 0 && !dk.is_zero() {
                prop_assert!((dk % &d[k - 1]).is_zero());
            }
            prod *= dk;
            prop_assert_eq!(&prod, &g[k], "k = {}", k + 1);
        }
    }
}
