//! Bernoulli numbers modulo p and the index of irregularity.
//!
//! Two independent algorithms are run and compared: the recurrence
//! `sum_{k<=m} C(m+1,k) B_k = 0` over `F_p`, and the power sum congruence
//! `sum_{a<p} a^m ≡ p·B_m (mod p^2)` for even `2 <= m <= p-3`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, mod_inv, mod_pow};
use crate::error::{Error, Result};

/// Irregular indices of a prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrregularityReport {
    /// The prime.
    pub p: u64,
    /// Even `2i` in `[2, p-3]` with `p` dividing the numerator of `B_{2i}`.
    pub indices: Vec<u64>,
    /// Index of irregularity.
    pub r: usize,
}

fn check_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidParameter(format!("p = {p} is not an odd prime")));
    }
    if p > 1 << 20 {
        return Err(Error::UnsupportedScale(format!("p = {p} is too large for the quadratic algorithms")));
    }
    Ok(())
}

/// `B_0, ..., B_{p-3}` modulo p from the binomial recurrence.
pub fn bernoulli_by_recurrence(p: u64) -> Result<Vec<u64>> {
    check_prime(p)?;
    let top = (p - 3) as usize;
    let mut b = vec![0u64; top + 1];
    b[0] = 1;
    // Pascal row C(m+1, .) modulo p, advanced one row per index.
    let mut row = vec![1u64, 1];
    for m in 1..=top {
        let mut next = vec![1u64; row.len() + 1];
        for k in 1..row.len() {
            next[k] = (row[k - 1] + row[k]) % p;
        }
        row = next;
        let s = (0..m).fold(0u64, |acc, k| (acc + row[k] * b[k]) % p);
        let inv = mod_inv((m + 1) as u64, p).expect("m + 1 < p");
        b[m] = (p - s) % p * inv % p;
    }
    Ok(b)
}

/// `B_m` modulo p for even `2 <= m <= p-3` from `sum_{a<p} a^m ≡ p·B_m (mod p^2)`.
pub fn bernoulli_by_power_sums(p: u64) -> Result<BTreeMap<u64, u64>> {
    check_prime(p)?;
    let p2 = p * p;
    let mut out = BTreeMap::new();
    let mut m = 2;
    while m + 3 <= p {
        let s = (1..p).fold(0u64, |acc, a| (acc + mod_pow(a, m, p2)) % p2);
        if s % p != 0 {
            return Err(Error::AlgorithmMismatch { p, index: m });
        }
        out.insert(m, s / p);
        m += 2;
    }
    Ok(out)
}

/// `{2i -> B_{2i} mod p}` for `2 <= 2i <= p-3`, computed by both algorithms.
pub fn bernoulli_mod_p(p: u64) -> Result<BTreeMap<u64, u64>> {
    let rec = bernoulli_by_recurrence(p)?;
    let sums = bernoulli_by_power_sums(p)?;
    for (&m, &v) in &sums {
        if rec[m as usize] != v {
            return Err(Error::AlgorithmMismatch { p, index: m });
        }
    }
    Ok(sums)
}

/// Irregular indices and `r(p)`.
pub fn irregularity(p: u64) -> Result<IrregularityReport> {
    let indices: Vec<u64> = bernoulli_mod_p(p)?.into_iter().filter(|&(_, v)| v == 0).map(|(m, _)| m).collect();
    Ok(IrregularityReport { p, r: indices.len(), indices })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(bernoulli_mod_p(5).unwrap(), BTreeMap::from([(2, 1)]));
        assert!(bernoulli_mod_p(3).unwrap().is_empty());
        // B_2 = 1/6, B_4 = -1/30 modulo 7.
        let m = bernoulli_mod_p(7).unwrap();
        assert_eq!(m[&2], mod_inv(6, 7).unwrap());
        assert_eq!(m[&4], (7 - mod_inv(30 % 7, 7).unwrap()) % 7);
    }

    #[test]
    fn irregular_primes() {
        assert_eq!(irregularity(37).unwrap().indices, vec![32]);
        assert_eq!(irregularity(157).unwrap().indices, vec![62, 110]);
        assert_eq!(irregularity(13).unwrap().r, 0);
        assert!(irregularity(9).is_err());
    }
}
