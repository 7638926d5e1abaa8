//! Small-integer number theory helpers: primality, modular powers and
//! inverses, binomial coefficients mod p, primitive roots.

/// Deterministic primality test for `u64` by trial division (inputs here are small).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// `base^exp mod m`.
pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc = 1u128 % m128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Inverse of `a` modulo `m` (requires `gcd(a, m) = 1`).
pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u64)
}

/// `p`-adic valuation of a nonzero integer.
pub fn vp(mut n: u64, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// `p^e` as `u64`, panicking on overflow.
pub fn ipow(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("prime power overflows u64")
}

/// Smallest `e` with `j * p^e >= n` (the order exponent of `1 + t^j` in
/// `F_p[t]/t^n`).
pub fn order_exponent(j: usize, p: u64, n: usize) -> u32 {
    let mut e = 0;
    let mut v = j as u128;
    while v < n as u128 {
        v *= p as u128;
        e += 1;
    }
    e
}

/// A primitive root modulo `p^k` for an odd prime `p`.
pub fn primitive_root_prime_power(p: u64, k: u32) -> u64 {
    let factors = prime_factors(p - 1);
    let g = (2..p)
        .find(|&g| factors.iter().all(|&q| mod_pow(g, (p - 1) / q, p) != 1))
        .expect("odd primes have primitive roots");
    // g generates (Z/p^k)^* unless g^{p-1} = 1 mod p^2, in which case g + p does.
    if k >= 2 && mod_pow(g, p - 1, p * p) == 1 {
        g + p
    } else {
        g
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Binomial coefficients modulo a small prime via Lucas' theorem.
#[derive(Debug, Clone)]
pub struct LucasBinom {
    p: u64,
    fact: Vec<u64>,
    inv_fact: Vec<u64>,
}

impl LucasBinom {
    /// Precompute factorial tables modulo `p`.
    pub fn new(p: u64) -> Self {
        let n = p as usize;
        let mut fact = vec![1u64; n];
        for i in 1..n {
            fact[i] = fact[i - 1] * i as u64 % p;
        }
        let mut inv_fact = vec![1u64; n];
        inv_fact[n - 1] = mod_inv(fact[n - 1], p).expect("p prime");
        for i in (1..n).rev() {
            inv_fact[i - 1] = inv_fact[i] * i as u64 % p;
        }
        Self { p, fact, inv_fact }
    }

    /// The prime modulus.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// `C(n, k) mod p`; zero when `k > n`.
    pub fn binom(&self, mut n: u64, mut k: u64) -> u64 {
        if k > n {
            return 0;
        }
        let p = self.p;
        let mut acc = 1u64;
        while k > 0 || n > 0 {
            let (nd, kd) = ((n % p) as usize, (k % p) as usize);
            if kd > nd {
                return 0;
            }
            acc = acc * self.fact[nd] % p * self.inv_fact[kd] % p * self.inv_fact[nd - kd] % p;
            n /= p;
            k /= p;
        }
        acc
    }

    /// `C(-a, j) mod p = (-1)^j C(a + j - 1, j)` for `a >= 1`.
    pub fn binom_neg(&self, a: u64, j: u64) -> u64 {
        if j == 0 {
            return 1;
        }
        let c = self.binom(a + j - 1, j);
        if j % 2 == 0 || c == 0 {
            c
        } else {
            self.p - c
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_inverses() {
        let primes: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        for a in 1..37 {
            assert_eq!(a * mod_inv(a, 37).unwrap() % 37, 1);
        }
        assert_eq!(mod_inv(6, 9), None);
    }

    #[test]
    fn lucas_matches_pascal() {
        let lb = LucasBinom::new(5);
        let mut row = vec![1u64];
        for n in 0..60u64 {
            for (k, &c) in row.iter().enumerate() {
                assert_eq!(lb.binom(n, k as u64), c % 5, "C({n},{k})");
            }
            let mut next = vec![1u64; row.len() + 1];
            for k in 1..row.len() {
                next[k] = (row[k - 1] + row[k]) % 5;
            }
            row = next;
        }
    }

    #[test]
    fn primitive_roots_generate() {
        for &(p, k) in &[(3u64, 2u32), (5, 3), (7, 2), (37, 3)] {
            let m = ipow(p, k);
            let g = primitive_root_prime_power(p, k);
            let order = (1..=m).find(|&e| mod_pow(g, e, m) == 1).unwrap();
            assert_eq!(order, m / p * (p - 1));
        }
    }

    #[test]
    fn order_exponents() {
        assert_eq!(order_exponent(1, 3, 8), 2);
        assert_eq!(order_exponent(4, 3, 8), 1);
        assert_eq!(order_exponent(7, 3, 8), 1);
    }
}
