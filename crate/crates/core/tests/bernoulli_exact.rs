//! Irregular primes against Bernoulli numbers computed exactly over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use kmv_core::bernoulli::irregularity;

/// Reduced fraction `num / den` with `den > 0`.
#[derive(Clone)]
struct Q {
    num: BigInt,
    den: BigInt,
}

impl Q {
    fn new(num: BigInt, den: BigInt) -> Self {
        let g = num.gcd(&den);
        let s = if den < BigInt::zero() { -BigInt::one() } else { BigInt::one() };
        Q { num: &num / &g * &s, den: &den / &g * &s }
    }

    fn add(&self, o: &Q) -> Q {
        Q::new(&self.num * &o.den + &o.num * &self.den, &self.den * &o.den)
    }

    fn scale(&self, c: &BigInt) -> Q {
        Q::new(&self.num * c, self.den.clone())
    }
}

/// `B_0, ..., B_m` from `sum_{j<=k} C(k+1, j) B_j = 0`.
fn bernoulli_exact(m: usize) -> Vec<Q> {
    let mut binom = vec![vec![BigInt::one()]];
    for n in 1..=m + 1 {
        let prev = &binom[n - 1];
        let mut row = vec![BigInt::one(); n + 1];
        for j in 1..n {
            row[j] = &prev[j - 1] + &prev[j];
        }
        binom.push(row);
    }
    let mut b: Vec<Q> = vec![Q::new(BigInt::one(), BigInt::one())];
    for k in 1..=m {
        let mut s = Q::new(BigInt::zero(), BigInt::one());
        for (j, bj) in b.iter().enumerate() {
            s = s.add(&bj.scale(&binom[k + 1][j]));
        }
        b.push(Q::new(-s.num, s.den * &binom[k + 1][k]));
    }
    b
}

fn odd_primes_below(n: u64) -> Vec<u64> {
    (3..n).step_by(2).filter(|&q| (2..q).take_while(|d| d * d <= q).all(|d| q % d != 0)).collect()
}

#[test]
fn irregular_indices_match_exact_bernoulli_numbers() {
    let primes = odd_primes_below(200);
    let b = bernoulli_exact(200);
    for p in primes {
        let pb = BigInt::from(p);
        let want: Vec<u64> =
            (2..p - 2).step_by(2).filter(|&m| (&b[m as usize].num % &pb).is_zero()).collect();
        let got = irregularity(p).unwrap();
        assert_eq!(got.indices, want, "p = {p}");
        assert_eq!(got.r, want.len());
    }
}

#[test]
fn exact_values_are_right() {
    let b = bernoulli_exact(12);
    let as_pair = |q: &Q| (q.num.to_string(), q.den.to_string());
    assert_eq!(as_pair(&b[1]), ("-1".into(), "2".into()));
    assert_eq!(as_pair(&b[2]), ("1".into(), "6".into()));
    assert_eq!(as_pair(&b[12]), ("-691".into(), "2730".into()));
    assert!(b[3].num.is_zero());
}
