//! Arithmetic in the local rings `F_p[x]/(x-1)^N`: units, the conjugation
//! `x -> x^{-1}`, plus parts, filtration valuations, truncated exp/log and
//! discrete logarithms over explicit bases of the 1-unit group.
//!
//! Elements are stored in the `(x-1)`-adic basis: coefficient `j` multiplies
//! `t^j` with `t = x - 1`. In that basis the ring is the truncated power
//! series ring `F_p[[t]]/t^N`, so multiplication is a truncated convolution,
//! valuations are read off directly and the Frobenius is a coefficient
//! spread. Conversion to and from monomials is a Taylor shift.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::abgroup::ExpVector;
use crate::arith::{ipow, mod_inv, order_exponent, vp, LucasBinom};
use crate::error::{Error, Result};

/// An element of `F_p[x]/(x-1)^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FpFilterWire", into = "FpFilterWire")]
pub struct FpFilterElem {
    p: u32,
    n: usize,
    c: Vec<u32>,
}

/// Wire format: monomial coefficients `a_i` of `sum a_i x^i`, `i < N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct FpFilterWire {
    p: u32,
    #[serde(rename = "N")]
    n: usize,
    coeffs: Vec<u32>,
}

impl From<FpFilterElem> for FpFilterWire {
    fn from(e: FpFilterElem) -> Self {
        FpFilterWire { p: e.p, n: e.n, coeffs: e.to_monomials() }
    }
}

impl TryFrom<FpFilterWire> for FpFilterElem {
    type Error = Error;
    fn try_from(w: FpFilterWire) -> Result<Self> {
        if w.p < 3 || !crate::arith::is_prime(w.p as u64) {
            return Err(Error::InvalidParameter(format!("p = {} is not an odd prime", w.p)));
        }
        if w.coeffs.len() > w.n {
            return Err(Error::InvalidParameter("more coefficients than N".into()));
        }
        let a: Vec<u64> = w.coeffs.iter().map(|&v| v as u64).collect();
        Ok(FpFilterElem::from_monomials(w.p, w.n, &a))
    }
}

/// Which power base a valuation is measured against.
///
/// `y = x - x^{-1} = x^{-1}(x-1)(x+1)` and `x + 1` is a unit (p is odd), so
/// both bases give the same valuation; the distinction is kept for callers
/// that mirror the two filtrations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValBase {
    /// Powers of `x - 1`.
    XMinus1,
    /// Powers of `y = x - x^{-1}`.
    Y,
}

impl FpFilterElem {
    fn check(p: u32, n: usize) {
        assert!(p >= 3 && p % 2 == 1, "p must be an odd prime");
        assert!(n >= 1, "modulus exponent must be positive");
    }

    /// The zero element.
    pub fn zero(p: u32, n: usize) -> Self {
        Self::check(p, n);
        Self { p, n, c: vec![0; n] }
    }

    /// The identity.
    pub fn one(p: u32, n: usize) -> Self {
        let mut e = Self::zero(p, n);
        e.c[0] = 1;
        e
    }

    /// The class of `x = 1 + t`.
    pub fn x(p: u32, n: usize) -> Self {
        let mut e = Self::one(p, n);
        if n > 1 {
            e.c[1] = 1;
        }
        e
    }

    /// `1 + c·t^j`.
    pub fn one_plus_monomial(p: u32, n: usize, j: usize, coeff: u64) -> Self {
        let mut e = Self::one(p, n);
        if j < n {
            e.c[j] = ((e.c[j] as u64 + coeff) % p as u64) as u32;
        }
        e
    }

    /// Build from `(x-1)`-adic coefficients (reduced mod p, truncated or padded to N).
    pub fn from_t_coeffs(p: u32, n: usize, coeffs: &[u64]) -> Self {
        let mut e = Self::zero(p, n);
        for (d, &s) in e.c.iter_mut().zip(coeffs) {
            *d = (s % p as u64) as u32;
        }
        e
    }

    /// Build from signed `(x-1)`-adic coefficients.
    pub fn from_t_coeffs_i64(p: u32, n: usize, coeffs: &[i64]) -> Self {
        let mut e = Self::zero(p, n);
        for (d, &s) in e.c.iter_mut().zip(coeffs) {
            *d = s.rem_euclid(p as i64) as u32;
        }
        e
    }

    /// Build from monomial coefficients `sum a_i x^i` of any length (Taylor shift).
    pub fn from_monomials(p: u32, n: usize, a: &[u64]) -> Self {
        Self::check(p, n);
        let pm = p as u64;
        let mut r = vec![0u64; n];
        for &ai in a.iter().rev() {
            // r <- r·(1 + t) + a_i
            for j in (1..n).rev() {
                r[j] = (r[j] + r[j - 1]) % pm;
            }
            r[0] = (r[0] + ai % pm) % pm;
        }
        Self { p, n, c: r.into_iter().map(|v| v as u32).collect() }
    }

    /// The prime `p`.
    pub fn p(&self) -> u32 {
        self.p
    }

    /// The modulus exponent `N`.
    pub fn modulus_exp(&self) -> usize {
        self.n
    }

    /// The `(x-1)`-adic coefficients.
    pub fn t_coeffs(&self) -> &[u32] {
        &self.c
    }

    /// Monomial coefficients of the degree-reduced representative (length N).
    pub fn to_monomials(&self) -> Vec<u32> {
        let pm = self.p as u64;
        let n = self.n;
        let mut r = vec![0u64; n];
        for &cj in self.c.iter().rev() {
            // r <- r·(x - 1) + c_j
            for i in (1..n).rev() {
                r[i] = (r[i - 1] + pm - r[i]) % pm;
            }
            r[0] = (pm - r[0] + cj as u64) % pm;
        }
        r.into_iter().map(|v| v as u32).collect()
    }

    /// Value at `x = 1` (the constant `(x-1)`-adic coefficient).
    pub fn value_at_one(&self) -> u32 {
        self.c[0]
    }

    /// Whether the element is zero.
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&v| v == 0)
    }

    /// Whether the element is the identity.
    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&v| v == 0)
    }

    /// Units are exactly the elements with nonzero value at `x = 1`.
    pub fn is_unit(&self) -> bool {
        self.c[0] != 0
    }

    /// 1-units have value 1 at `x = 1`.
    pub fn is_one_unit(&self) -> bool {
        self.c[0] == 1
    }

    fn same_ring(&self, other: &Self) {
        assert!(
            self.p == other.p && self.n == other.n,
            "D-ring mismatch: (p={}, N={}) vs (p={}, N={})",
            self.p,
            self.n,
            other.p,
            other.n
        );
    }

    /// Sum.
    pub fn add(&self, other: &Self) -> Self {
        self.same_ring(other);
        let p = self.p;
        let c = self.c.iter().zip(&other.c).map(|(&a, &b)| (a + b) % p).collect();
        Self { p, n: self.n, c }
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.same_ring(other);
        let p = self.p;
        let c = self.c.iter().zip(&other.c).map(|(&a, &b)| (a + p - b) % p).collect();
        Self { p, n: self.n, c }
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        let p = self.p;
        Self { p, n: self.n, c: self.c.iter().map(|&a| (p - a) % p).collect() }
    }

    /// Multiplication by a scalar of `F_p`.
    pub fn scale(&self, s: u64) -> Self {
        let p = self.p as u64;
        let s = s % p;
        Self { p: self.p, n: self.n, c: self.c.iter().map(|&a| (a as u64 * s % p) as u32).collect() }
    }

    /// Product (truncated convolution).
    pub fn mul(&self, other: &Self) -> Self {
        self.same_ring(other);
        Self { p: self.p, n: self.n, c: mul_trunc(&self.c, &other.c, self.p, self.n) }
    }

    /// Inverse of a unit.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotAUnit("value at x = 1 is zero".into()));
        }
        let p = self.p as u64;
        let n = self.n;
        let c0inv = mod_inv(self.c[0] as u64, p).expect("p prime");
        let nz: Vec<usize> = (1..n).filter(|&i| self.c[i] != 0).collect();
        let mut inv = vec![0u64; n];
        inv[0] = c0inv;
        for k in 1..n {
            let mut s = 0u64;
            for &i in &nz {
                if i > k {
                    break;
                }
                s += self.c[i] as u64 * inv[k - i];
                if s >= 1 << 62 {
                    s %= p;
                }
            }
            inv[k] = (p - s % p) % p * c0inv % p;
        }
        Ok(Self { p: self.p, n, c: inv.into_iter().map(|v| v as u32).collect() })
    }

    /// `self^e` for a nonnegative exponent (square-and-multiply).
    pub fn pow(&self, e: u128) -> Self {
        let mut e = e;
        if self.is_one_unit() {
            e %= self.one_unit_exponent() as u128;
        }
        let mut base = self.clone();
        let mut acc = Self::one(self.p, self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `self^e` for a signed exponent; negative exponents require a unit.
    pub fn pow_signed(&self, e: i128) -> Result<Self> {
        if e >= 0 {
            Ok(self.pow(e as u128))
        } else {
            Ok(self.inverse()?.pow(e.unsigned_abs()))
        }
    }

    /// The p-th power map, which in characteristic p sends `sum c_j t^j` to
    /// `sum c_j t^{jp}`.
    pub fn frobenius(&self) -> Self {
        let mut out = Self::zero(self.p, self.n);
        let p = self.p as usize;
        for (j, &cj) in self.c.iter().enumerate() {
            if j * p >= self.n {
                break;
            }
            out.c[j * p] = cj;
        }
        out
    }

    /// Exponent `p^m` of the 1-unit group: the order of `x = 1 + t`.
    pub fn one_unit_exponent(&self) -> u64 {
        ipow(self.p as u64, order_exponent(1, self.p as u64, self.n))
    }

    /// Valuation of a nonzero element: largest `s` with `(x-1)^s | u`.
    pub fn val_elem(&self) -> Result<usize> {
        self.c.iter().position(|&v| v != 0).ok_or(Error::ZeroInput)
    }

    /// Valuation of `u - 1` for a 1-unit; returns N when `u = 1`.
    pub fn val_unit(&self, _base: ValBase) -> Result<usize> {
        if !self.is_one_unit() {
            return Err(Error::InvalidParameter("valuation of u - 1 needs a 1-unit".into()));
        }
        Ok(self.c[1..].iter().position(|&v| v != 0).map_or(self.n, |i| i + 1))
    }

    /// Leading valuation of `u - 1` without the 1-unit check (N if `u = 1`).
    pub(crate) fn lead_val(&self) -> usize {
        self.c[1..].iter().position(|&v| v != 0).map_or(self.n, |i| i + 1)
    }

    /// The conjugation `x -> x^{-1}`.
    pub fn conj(&self) -> Self {
        // x^{p^m} = 1 + t^{p^m} = 1 once p^m >= N, so x^{-i} = x^{p^m - i}.
        let e = self.one_unit_exponent() as usize;
        let mono = self.to_monomials();
        let mut rev = vec![0u64; e];
        for (i, &a) in mono.iter().enumerate() {
            rev[(e - i) % e] = a as u64;
        }
        Self::from_monomials(self.p, self.n, &rev)
    }

    /// Whether `c(u) = u`.
    pub fn is_plus(&self) -> bool {
        self.conj() == *self
    }

    /// Plus projection `(u·c(u))^{(p^m+1)/2}` of a 1-unit.
    pub fn plus_project(&self) -> Result<Self> {
        if !self.is_one_unit() {
            return Err(Error::NotAUnit("plus projection needs a 1-unit".into()));
        }
        let v = self.mul(&self.conj());
        Ok(v.pow((self.one_unit_exponent() as u128).div_ceil(2)))
    }

    /// Divide a unit by its value at `x = 1`, giving a 1-unit.
    pub fn normalize_to_one_unit(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotAUnit("value at x = 1 is zero".into()));
        }
        let inv = mod_inv(self.c[0] as u64, self.p as u64).expect("p prime");
        Ok(self.scale(inv))
    }

    /// Truncated exponential `sum_{i<p} a^i / i!` for `val(a) >= 1`.
    pub fn trunc_exp(a: &Self) -> Result<Self> {
        if a.c[0] != 0 {
            return Err(Error::InvalidParameter("truncated exp needs val(a) >= 1".into()));
        }
        let p = a.p as u64;
        let one = Self::one(a.p, a.n);
        let mut r = one.clone();
        for i in (1..p).rev() {
            r = one.add(&a.mul(&r).scale(mod_inv(i, p).expect("i < p")));
        }
        Ok(r)
    }

    /// Truncated logarithm `sum_{i=1}^{p-1} (-1)^{i+1} (u-1)^i / i` of a 1-unit.
    pub fn trunc_log(u: &Self) -> Result<Self> {
        if !u.is_one_unit() {
            return Err(Error::InvalidParameter("truncated log needs a 1-unit".into()));
        }
        let p = u.p as u64;
        let y = u.sub(&Self::one(u.p, u.n));
        let mut r = Self::zero(u.p, u.n);
        for i in (1..p).rev() {
            let inv = mod_inv(i, p).expect("i < p");
            let coef = if i % 2 == 1 { inv } else { p - inv };
            let mut s = r.clone();
            s.c[0] = ((s.c[0] as u64 + coef) % p) as u32;
            r = y.mul(&s);
        }
        Ok(r)
    }

    /// `(1 + c·t^j)^s` for any integer `s`, expanded as a binomial series.
    pub fn binomial_power(p: u32, n: usize, j: usize, coeff: u64, s: i64) -> Self {
        assert!(j >= 1);
        let lb = lucas(p);
        let pm = p as u64;
        let mut out = Self::zero(p, n);
        let coeff = coeff % pm;
        let mut cpow = 1u64;
        let mut i = 0usize;
        while i * j < n {
            let b = if s >= 0 { lb.binom(s as u64, i as u64) } else { lb.binom_neg(s.unsigned_abs(), i as u64) };
            out.c[i * j] = (b * cpow % pm) as u32;
            cpow = cpow * coeff % pm;
            i += 1;
        }
        out
    }

    /// Truncate to a smaller modulus exponent.
    pub fn truncate(&self, n_new: usize) -> Self {
        assert!(n_new <= self.n && n_new >= 1);
        Self { p: self.p, n: n_new, c: self.c[..n_new].to_vec() }
    }

    /// The ring map `t -> t^p` into `F_p[[t]]/t^{n_new}`; well defined when `p·N >= n_new`.
    pub fn substitute_t_pow_p(&self, n_new: usize) -> Result<Self> {
        let p = self.p as usize;
        if p * self.n < n_new {
            return Err(Error::InvalidParameter(format!(
                "t -> t^p is not defined from modulus {} to {}",
                self.n, n_new
            )));
        }
        let mut out = Self::zero(self.p, n_new);
        for (j, &cj) in self.c.iter().enumerate() {
            if j * p >= n_new {
                break;
            }
            out.c[j * p] = cj;
        }
        Ok(out)
    }
}

/// Truncated product of two `(x-1)`-adic coefficient vectors mod p.
pub(crate) fn mul_trunc(a: &[u32], b: &[u32], p: u32, n: usize) -> Vec<u32> {
    let nz_a = a.iter().filter(|&&v| v != 0).count();
    let nz_b = b.iter().filter(|&&v| v != 0).count();
    let (sparse, dense, nz) = if nz_a <= nz_b { (a, b, nz_a) } else { (b, a, nz_b) };
    let Some(first) = dense.iter().position(|&v| v != 0) else {
        return vec![0; n];
    };
    let bound = ((p as u64 - 1) * (p as u64 - 1)).saturating_mul(nz as u64);
    if bound < u32::MAX as u64 {
        let mut acc = vec![0u32; n];
        for (i, &ai) in sparse.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            if i + first >= n {
                break;
            }
            let len = n - i - first;
            let src = &dense[first..first + len];
            let dst = &mut acc[i + first..n];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = d.wrapping_add(ai.wrapping_mul(s));
            }
        }
        acc.into_iter().map(|v| v % p).collect()
    } else {
        let pm = p as u64;
        let mut acc = vec![0u64; n];
        let mut pending = 0u64;
        let limit = u64::MAX / ((pm - 1) * (pm - 1)).max(1) - 1;
        for (i, &ai) in sparse.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            if i + first >= n {
                break;
            }
            if pending >= limit {
                acc.iter_mut().for_each(|v| *v %= pm);
                pending = 0;
            }
            pending += 1;
            let len = n - i - first;
            let src = &dense[first..first + len];
            let dst = &mut acc[i + first..n];
            let ai = ai as u64;
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = d.wrapping_add(ai.wrapping_mul(s as u64));
            }
        }
        acc.into_iter().map(|v| (v % pm) as u32).collect()
    }
}

/// Shared Lucas tables per prime.
pub(crate) fn lucas(p: u32) -> Arc<LucasBinom> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<LucasBinom>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(lb) = cache.read().expect("lucas cache poisoned").get(&p) {
        return lb.clone();
    }
    let lb = Arc::new(LucasBinom::new(p as u64));
    cache.write().expect("lucas cache poisoned").insert(p, lb.clone());
    lb
}

/// Which 1-unit group a basis spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisPart {
    /// All 1-units, basis `{1 + (x-1)^j : p ∤ j}`.
    Full,
    /// Plus 1-units, basis `{1 + y^{2i} : p ∤ i}` with `y = x - x^{-1}`.
    Plus,
}

/// One basis element of a 1-unit group.
#[derive(Debug, Clone)]
pub struct BasisEntry {
    /// Leading `(x-1)`-valuation `j` (or `2i` for the plus basis).
    pub label: usize,
    /// The element has order `p^order_exp`.
    pub order_exp: u32,
    /// The element itself.
    pub elem: FpFilterElem,
    /// Leading coefficient of `elem - 1` at valuation `label`.
    pub lead: u32,
}

/// Explicit basis of the full or plus 1-unit group of `F_p[x]/(x-1)^N`.
#[derive(Debug, Clone)]
pub struct UnitBasis {
    /// The prime.
    pub p: u32,
    /// The modulus exponent.
    pub n: usize,
    /// Full or plus part.
    pub part: BasisPart,
    /// Basis elements ordered by label.
    pub entries: Vec<BasisEntry>,
    index: HashMap<usize, usize>,
}

impl UnitBasis {
    /// The orders `p^{e_i}` as exponents.
    pub fn order_exps(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.order_exp).collect()
    }

    /// `log_p` of the group order.
    pub fn log_order(&self) -> u32 {
        self.entries.iter().map(|e| e.order_exp).sum()
    }

    /// Product `prod b_i^{e_i}`.
    pub fn evaluate(&self, exps: &[u64]) -> FpFilterElem {
        assert_eq!(exps.len(), self.entries.len());
        let mut acc = FpFilterElem::one(self.p, self.n);
        for (entry, &e) in self.entries.iter().zip(exps) {
            if e != 0 {
                acc = acc.mul(&entry.elem.pow(e as u128));
            }
        }
        acc
    }

    /// Index of the basis element with the given label.
    pub fn position(&self, label: usize) -> Option<usize> {
        self.index.get(&label).copied()
    }
}

/// `y = x - x^{-1}` in the `(x-1)`-adic basis: `2t - t^2 + t^3 - ...`.
pub fn y_element(p: u32, n: usize) -> FpFilterElem {
    let mut coeffs = vec![0i64; n];
    if n > 1 {
        coeffs[1] = 2;
    }
    for (j, c) in coeffs.iter_mut().enumerate().skip(2) {
        *c = if j % 2 == 0 { -1 } else { 1 };
    }
    FpFilterElem::from_t_coeffs_i64(p, n, &coeffs)
}

/// Explicit basis of the 1-unit group (memoized per `(p, N, part)`).
pub fn unit_basis(p: u32, n: usize, part: BasisPart) -> Arc<UnitBasis> {
    type Key = (u32, usize, BasisPart);
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<UnitBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(b) = cache.read().expect("basis cache poisoned").get(&(p, n, part)) {
        return b.clone();
    }
    let b = Arc::new(build_unit_basis(p, n, part));
    cache.write().expect("basis cache poisoned").insert((p, n, part), b.clone());
    b
}

fn build_unit_basis(p: u32, n: usize, part: BasisPart) -> UnitBasis {
    assert!(n >= 1, "N must be positive");
    let pu = p as u64;
    let mut entries = Vec::new();
    match part {
        BasisPart::Full => {
            for j in (1..n).filter(|j| *j as u64 % pu != 0) {
                entries.push(BasisEntry {
                    label: j,
                    order_exp: order_exponent(j, pu, n),
                    elem: FpFilterElem::one_plus_monomial(p, n, j, 1),
                    lead: 1,
                });
            }
            let total: u32 = entries.iter().map(|e| e.order_exp).sum();
            assert_eq!(total as usize, n - 1, "full basis order product must be p^(N-1)");
        }
        BasisPart::Plus => {
            let y = y_element(p, n);
            let y2 = y.mul(&y);
            let mut ypow = FpFilterElem::one(p, n);
            let mut i = 1usize;
            while 2 * i < n {
                ypow = ypow.mul(&y2);
                if i as u64 % pu != 0 {
                    let label = 2 * i;
                    let one = FpFilterElem::one(p, n);
                    entries.push(BasisEntry {
                        label,
                        order_exp: order_exponent(label, pu, n),
                        elem: one.add(&ypow),
                        lead: crate::arith::mod_pow(2, label as u64, pu) as u32,
                    });
                }
                i += 1;
            }
            let total: u32 = entries.iter().map(|e| e.order_exp).sum();
            assert_eq!(total as usize, (n - 1) / 2, "plus basis order product must match the plus part");
        }
    }
    let index = entries.iter().enumerate().map(|(i, e)| (e.label, i)).collect();
    UnitBasis { p, n, part, entries, index }
}

/// Discrete logarithm of a 1-unit over `basis` by filtration descent.
///
/// The leading term `a·t^v` with `v = j0·p^e`, `p ∤ j0`, is cancelled by
/// `(b_{j0}^{p^e})^{-a/lead}`, which strictly raises the valuation.
pub fn dlog(u: &FpFilterElem, basis: &UnitBasis) -> Result<ExpVector> {
    if u.p != basis.p || u.n != basis.n {
        return Err(Error::RingMismatch("element and basis live in different D-rings".into()));
    }
    if !u.is_one_unit() {
        return Err(Error::InvalidParameter("dlog needs a 1-unit".into()));
    }
    let p = basis.p as u64;
    let mut exps = vec![0u64; basis.entries.len()];
    let mut cur = u.clone();
    loop {
        let v = cur.lead_val();
        if v >= basis.n {
            break;
        }
        let e = vp(v as u64, p);
        let j0 = v / ipow(p, e) as usize;
        let idx = basis
            .position(j0)
            .ok_or_else(|| Error::NotInSpan(format!("no basis element reaches valuation {v}")))?;
        let entry = &basis.entries[idx];
        let a = cur.c[v] as u64 * mod_inv(entry.lead as u64, p).expect("lead nonzero") % p;
        let factor = match basis.part {
            BasisPart::Full => FpFilterElem::binomial_power(basis.p, basis.n, v, 1, -(a as i64)),
            BasisPart::Plus => {
                let mut b = entry.elem.clone();
                for _ in 0..e {
                    b = b.frobenius();
                }
                b.inverse()?.pow(a as u128)
            }
        };
        cur = cur.mul(&factor);
        let order = ipow(p, entry.order_exp);
        exps[idx] = (exps[idx] + a * ipow(p, e)) % order;
    }
    Ok(exps)
}

/// Length `ceil(N/2)` of the plus subring written in `w = x + x^{-1} - 2`.
///
/// The conjugation-fixed elements of `F_p[x]/(x-1)^N` are exactly the
/// polynomials in `w = t^2/(1+t)`, and `w^k` has `(x-1)`-valuation `2k`, so
/// the plus subring is `F_p[[w]]/w^{ceil(N/2)}`. Plus 1-units become the full
/// 1-unit group of that smaller truncated series ring.
pub fn w_model_len(n: usize) -> usize {
    n.div_ceil(2)
}

/// Coefficient of `t^{2k+j}` in `w^k = t^{2k}(1+t)^{-k}`.
fn w_pow_coeff(lb: &LucasBinom, k: usize, j: usize) -> u64 {
    if k == 0 {
        return u64::from(j == 0);
    }
    lb.binom_neg(k as u64, j as u64)
}

/// Rewrite a plus element of `F_p[x]/(x-1)^N` as a series in `w`.
pub fn plus_to_w(u: &FpFilterElem) -> Result<FpFilterElem> {
    let p = u.p as u64;
    let n = u.n;
    let m = w_model_len(n);
    let lb = lucas(u.p);
    let mut r: Vec<u64> = u.c.iter().map(|&v| v as u64).collect();
    let mut out = vec![0u64; m];
    for k in 0..m {
        let b = r[2 * k];
        out[k] = b;
        if b == 0 {
            continue;
        }
        for j in 0..n - 2 * k {
            let w = w_pow_coeff(&lb, k, j);
            if w != 0 {
                r[2 * k + j] = (r[2 * k + j] + p - b * w % p) % p;
            }
        }
    }
    if r.iter().any(|&v| v != 0) {
        return Err(Error::NotInSpan("element is not conjugation invariant".into()));
    }
    Ok(FpFilterElem::from_t_coeffs(u.p, m, &out))
}

/// Inverse of [`plus_to_w`]: expand a `w`-series into `F_p[x]/(x-1)^N`.
pub fn w_to_plus(v: &FpFilterElem, n: usize) -> FpFilterElem {
    assert_eq!(v.n, w_model_len(n), "w-series length must be ceil(N/2)");
    let p = v.p as u64;
    let lb = lucas(v.p);
    let mut out = vec![0u64; n];
    for (k, &b) in v.c.iter().enumerate() {
        if b == 0 {
            continue;
        }
        for j in 0..n - 2 * k {
            out[2 * k + j] = (out[2 * k + j] + b as u64 * w_pow_coeff(&lb, k, j)) % p;
        }
    }
    FpFilterElem::from_t_coeffs(v.p, n, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_round_trip() {
        let a = [3u64, 1, 4, 1, 5, 9, 2, 6];
        let e = FpFilterElem::from_monomials(7, 8, &a);
        let back: Vec<u64> = e.to_monomials().iter().map(|&v| v as u64).collect();
        let expect: Vec<u64> = a.iter().map(|v| v % 7).collect();
        assert_eq!(back, expect);
    }

    #[test]
    fn x_times_conj_is_one() {
        let x = FpFilterElem::x(5, 12);
        assert!(x.mul(&x.conj()).is_one());
        assert_eq!(x.conj(), x.inverse().unwrap());
    }

    #[test]
    fn val_examples() {
        let u = FpFilterElem::one_plus_monomial(5, 10, 3, 1);
        assert_eq!(u.val_unit(ValBase::XMinus1).unwrap(), 3);
        assert_eq!(FpFilterElem::one(5, 10).val_unit(ValBase::Y).unwrap(), 10);
        assert_eq!(FpFilterElem::zero(5, 10).val_elem(), Err(Error::ZeroInput));
    }

    #[test]
    fn y_is_x_minus_x_inverse() {
        let x = FpFilterElem::x(7, 15);
        assert_eq!(y_element(7, 15), x.sub(&x.inverse().unwrap()));
        assert_eq!(y_element(7, 15).conj(), y_element(7, 15).neg());
    }

    #[test]
    fn basis_orders() {
        let b = unit_basis(3, 8, BasisPart::Full);
        let labels: Vec<usize> = b.entries.iter().map(|e| e.label).collect();
        assert_eq!(labels, vec![1, 2, 4, 5, 7]);
        assert_eq!(b.order_exps(), vec![2, 2, 1, 1, 1]);
        let plus = unit_basis(5, 4, BasisPart::Plus);
        assert_eq!(plus.entries.len(), 1);
        assert_eq!(plus.entries[0].label, 2);
        assert_eq!(plus.entries[0].order_exp, 1);
        assert_eq!(unit_basis(3, 2, BasisPart::Plus).log_order(), 0);
    }

    #[test]
    fn w_model_round_trip() {
        let y = y_element(5, 13);
        let u = FpFilterElem::one(5, 13).add(&y.mul(&y).scale(3));
        let w = plus_to_w(&u).unwrap();
        assert_eq!(w.modulus_exp(), 7);
        assert_eq!(w_to_plus(&w, 13), u);
        assert!(plus_to_w(&FpFilterElem::x(5, 13)).is_err());
    }

    #[test]
    fn binomial_power_matches_pow() {
        let b = FpFilterElem::one_plus_monomial(5, 30, 3, 2);
        assert_eq!(FpFilterElem::binomial_power(5, 30, 3, 2, 7), b.pow(7));
        assert_eq!(FpFilterElem::binomial_power(5, 30, 3, 2, -4), b.pow_signed(-4).unwrap());
    }
}
