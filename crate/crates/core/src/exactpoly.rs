//! Exact arithmetic in the tower rings `A_{k,l} = Z[x]/M_{k,l}` with
//! `M_{k,l} = (x^{p^{k+l}} - 1)/(x^{p^k} - 1) = sum_{j<p^l} x^{j p^k}`, the
//! cyclotomic integers `Z[ζ_m] = A_{m,1}`, the pullback maps between them and
//! the tuple decomposition of an element of `A_{k,l+1}`.
//!
//! `M_{k,l}` is the product of `Φ_{p^j}` for `k < j <= k+l`, so the pullback
//! of `A_{k,l+1} -> Z[ζ_{k+l}]` and `A_{k,l+1} -> A_{k,l}` over
//! `D_{k,l} = F_p[x]/(x-1)^{p^{k+l}-p^k}` is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{ipow, is_prime};
use crate::error::{Error, Result};
use crate::fpfilter::FpFilterElem;

/// Identifies the ring `A_{k,l}`; `A_{m,1}` is `Z[ζ_m]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RingId {
    /// Odd prime.
    pub p: u32,
    /// Level offset.
    pub k: u32,
    /// Height.
    pub l: u32,
}

impl RingId {
    /// `A_{k,l}` after validating `p` and `l`.
    pub fn new(p: u32, k: u32, l: u32) -> Result<Self> {
        if p < 3 || !is_prime(p as u64) {
            return Err(Error::InvalidParameter(format!("p = {p} is not an odd prime")));
        }
        if l == 0 {
            return Err(Error::InvalidParameter("height l must be at least 1".into()));
        }
        let r = Self { p, k, l };
        if (p as u128).checked_pow(k + l).is_none_or(|v| v > 1 << 24) {
            return Err(Error::UnsupportedScale(format!("p^(k+l) too large for exact arithmetic at {r}")));
        }
        Ok(r)
    }

    /// `Z[ζ_m]`, i.e. `A_{m,1}`.
    pub fn cyclo(p: u32, m: u32) -> Result<Self> {
        Self::new(p, m, 1)
    }

    /// `p^k`.
    pub fn stride(&self) -> usize {
        ipow(self.p as u64, self.k) as usize
    }

    /// `p^{k+l}`, the order of `x`.
    pub fn period(&self) -> usize {
        ipow(self.p as u64, self.k + self.l) as usize
    }

    /// Degree `p^{k+l} - p^k` of the modulus.
    pub fn degree(&self) -> usize {
        self.period() - self.stride()
    }

    /// Whether this is a cyclotomic ring `Z[ζ_k]`.
    pub fn is_cyclotomic(&self) -> bool {
        self.l == 1
    }

    /// The modulus `sum_{j<p^l} x^{j p^k}` as coefficients (length degree + 1).
    pub fn modulus(&self) -> Vec<BigInt> {
        let mut m = vec![BigInt::zero(); self.degree() + 1];
        let s = self.stride();
        for j in 0..ipow(self.p as u64, self.l) as usize {
            m[j * s] = BigInt::one();
        }
        m
    }

    /// Whether the modulus of `target` divides the modulus of `self`, so that
    /// reduction is a ring map `self -> target`.
    pub fn reduces_to(&self, target: &RingId) -> bool {
        self.p == target.p && self.k <= target.k && target.k + target.l <= self.k + self.l
    }

    /// The residue ring `D_{k,l}` of `A_{k,l}` modulo p.
    pub fn d_ring(&self) -> DRingId {
        DRingId { p: self.p, k: self.k, l: self.l }
    }
}

impl std::fmt::Display for RingId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "A_{{{},{}}}(p={})", self.k, self.l, self.p)
    }
}

/// Identifies `D_{k,l} = F_p[x]/(x-1)^{p^{k+l}-p^k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DRingId {
    /// Odd prime.
    pub p: u32,
    /// Level offset.
    pub k: u32,
    /// Height.
    pub l: u32,
}

impl DRingId {
    /// Modulus exponent `p^{k+l} - p^k`.
    pub fn modulus_exp(&self) -> usize {
        (ipow(self.p as u64, self.k + self.l) - ipow(self.p as u64, self.k)) as usize
    }
}

/// An element of `A_{k,l}` in canonical form: coefficients of the unique
/// representative of degree below the modulus degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TowerWire", into = "TowerWire")]
pub struct TowerElem {
    ring: RingId,
    coeffs: Vec<BigInt>,
}

/// A cyclotomic integer: a [`TowerElem`] whose ring has height 1.
pub type CycloElem = TowerElem;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TowerWire {
    ring: RingId,
    coeffs: Vec<String>,
}

impl From<TowerElem> for TowerWire {
    fn from(e: TowerElem) -> Self {
        TowerWire { ring: e.ring, coeffs: e.coeffs.iter().map(|c| c.to_string()).collect() }
    }
}

impl TryFrom<TowerWire> for TowerElem {
    type Error = Error;
    fn try_from(w: TowerWire) -> Result<Self> {
        let ring = RingId::new(w.ring.p, w.ring.k, w.ring.l)?;
        if w.coeffs.len() != ring.degree() {
            return Err(Error::InvalidParameter(format!(
                "{ring} needs {} coefficients, got {}",
                ring.degree(),
                w.coeffs.len()
            )));
        }
        let coeffs = w
            .coeffs
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(|e| Error::InvalidParameter(format!("bad coefficient {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(TowerElem { ring, coeffs })
    }
}

/// Components `(a_l, ..., a_0)` of an element of `A_{k,l+1}`, where `a_i`
/// lies in `Z[ζ_{k+i}]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleRep {
    /// Components at descending levels `k+l, ..., k`.
    pub components: Vec<CycloElem>,
}

impl TowerElem {
    /// Reduce an arbitrary polynomial into `ring`.
    pub fn from_coeffs(ring: RingId, poly: Vec<BigInt>) -> Self {
        let period = ring.period();
        let mut folded = if poly.len() <= period {
            let mut v = poly;
            v.resize(period, BigInt::zero());
            v
        } else {
            let mut v = vec![BigInt::zero(); period];
            for (i, c) in poly.into_iter().enumerate() {
                v[i % period] += c;
            }
            v
        };
        reduce_folded(&ring, &mut folded);
        folded.truncate(ring.degree());
        Self { ring, coeffs: folded }
    }

    /// Reduce a polynomial with small coefficients into `ring`.
    pub fn from_i64s(ring: RingId, poly: &[i64]) -> Self {
        Self::from_coeffs(ring, poly.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `sum c_e x^e` over `(exponent, coefficient)` pairs; exponents are taken mod `p^{k+l}`.
    pub fn from_terms(ring: RingId, terms: &[(u64, i64)]) -> Self {
        let period = ring.period();
        let mut v = vec![BigInt::zero(); period];
        for &(e, c) in terms {
            v[(e % period as u64) as usize] += c;
        }
        Self::from_coeffs(ring, v)
    }

    /// Zero of `ring`.
    pub fn zero(ring: RingId) -> Self {
        Self { ring, coeffs: vec![BigInt::zero(); ring.degree()] }
    }

    /// One of `ring`.
    pub fn one(ring: RingId) -> Self {
        Self::from_integer(ring, BigInt::one())
    }

    /// An integer constant.
    pub fn from_integer(ring: RingId, c: BigInt) -> Self {
        let mut e = Self::zero(ring);
        e.coeffs[0] = c;
        e
    }

    /// The generator `x` (`ζ_k` when the ring is cyclotomic).
    pub fn x(ring: RingId) -> Self {
        Self::x_pow(ring, 1)
    }

    /// `x^e`.
    pub fn x_pow(ring: RingId, e: u64) -> Self {
        Self::from_terms(ring, &[(e, 1)])
    }

    /// The ring.
    pub fn ring(&self) -> RingId {
        self.ring
    }

    /// Canonical coefficients.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Whether zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Whether one.
    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(format!("{} vs {}", self.ring, other.ring)));
        }
        Ok(())
    }

    /// Sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(Self { ring: self.ring, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() })
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(Self { ring: self.ring, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() })
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        Self { ring: self.ring, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    /// Multiplication by an integer.
    pub fn scale(&self, s: &BigInt) -> Self {
        Self { ring: self.ring, coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }

    /// Product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let period = self.ring.period();
        let mut acc = cyclic_product(&self.coeffs, &other.coeffs, period);
        reduce_folded(&self.ring, &mut acc);
        acc.truncate(self.ring.degree());
        Ok(Self { ring: self.ring, coeffs: acc })
    }

    /// `self^e`.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.ring);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same ring");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same ring");
            }
        }
        acc
    }

    /// Exact division of every coefficient by `d`.
    pub fn div_exact(&self, d: &BigInt) -> Result<Self> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return Err(Error::NotDivisible(format!("coefficient {c} is not divisible by {d}")));
            }
            out.push(q);
        }
        Ok(Self { ring: self.ring, coeffs: out })
    }

    /// The substitution `x -> x^e`; a ring automorphism when `p ∤ e`.
    pub fn substitute_pow(&self, e: u64) -> Self {
        let period = self.ring.period() as u64;
        let mut v = vec![BigInt::zero(); period as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[((i as u64 % period) * (e % period) % period) as usize] += c;
        }
        Self::from_coeffs(self.ring, v)
    }

    /// The conjugation `x -> x^{-1}`.
    pub fn conj(&self) -> Self {
        self.substitute_pow(self.ring.period() as u64 - 1)
    }

    /// Reduction into a ring whose modulus divides this ring's modulus.
    pub fn reduce_to(&self, target: RingId) -> Result<Self> {
        if !self.ring.reduces_to(&target) {
            return Err(Error::RingMismatch(format!("{} does not map onto {target}", self.ring)));
        }
        Ok(Self::from_coeffs(target, self.coeffs.clone()))
    }

    /// The image in `F_p[x]/(x-1)^n`; requires `n` at most the modulus degree,
    /// since the modulus is `(x-1)^{degree}` mod p.
    pub fn mod_p_image_exp(&self, n: usize) -> Result<FpFilterElem> {
        if n == 0 || n > self.ring.degree() {
            return Err(Error::RingMismatch(format!(
                "F_p[x]/(x-1)^{n} is not a quotient of {}",
                self.ring
            )));
        }
        let p = BigInt::from(self.ring.p);
        let small: Vec<u64> =
            self.coeffs.iter().map(|c| c.mod_floor(&p).to_u64().expect("residue fits")).collect();
        Ok(FpFilterElem::from_monomials(self.ring.p, n, &small))
    }

    /// Largest absolute coefficient, in bits.
    pub fn max_bits(&self) -> u64 {
        self.coeffs.iter().map(|c| c.bits()).max().unwrap_or(0)
    }
}

/// Fold the degree `>= D` part of a length-`p^{k+l}` coefficient vector using
/// `x^{D+r} = -sum_{j<p^l-1} x^{j p^k + r}` for `r < p^k`.
fn reduce_folded(ring: &RingId, v: &mut [BigInt]) {
    let d = ring.degree();
    let s = ring.stride();
    let blocks = ipow(ring.p as u64, ring.l) as usize - 1;
    for r in 0..s {
        let c = std::mem::take(&mut v[d + r]);
        if c.is_zero() {
            continue;
        }
        for j in 0..blocks {
            v[j * s + r] -= &c;
        }
    }
}

/// Product modulo `x^period - 1`, with an `i128` fast path when no overflow is possible.
fn cyclic_product(a: &[BigInt], b: &[BigInt], period: usize) -> Vec<BigInt> {
    let bits_a = a.iter().map(|c| c.bits()).max().unwrap_or(0);
    let bits_b = b.iter().map(|c| c.bits()).max().unwrap_or(0);
    let len_bits = (usize::BITS - a.len().max(1).leading_zeros()) as u64;
    if bits_a + bits_b + len_bits < 126 {
        let sa: Vec<i128> = a.iter().map(|c| c.to_i128().expect("fits")).collect();
        let sb: Vec<i128> = b.iter().map(|c| c.to_i128().expect("fits")).collect();
        let mut acc = vec![0i128; period];
        for (i, &x) in sa.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in sb.iter().enumerate() {
                let idx = if i + j >= period { i + j - period } else { i + j };
                acc[idx] += x * y;
            }
        }
        acc.into_iter().map(BigInt::from).collect()
    } else {
        let mut acc = vec![BigInt::zero(); period];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let idx = if i + j >= period { i + j - period } else { i + j };
                acc[idx] += x * y;
            }
        }
        acc
    }
}

/// `split: A_{k,l+1} -> Z[ζ_{k+l}] × A_{k,l}`.
pub fn split(a: &TowerElem) -> Result<(CycloElem, TowerElem)> {
    let r = a.ring;
    if r.l < 2 {
        return Err(Error::InvalidParameter("split needs height at least 2".into()));
    }
    let top = RingId { p: r.p, k: r.k + r.l - 1, l: 1 };
    let rest = RingId { p: r.p, k: r.k, l: r.l - 1 };
    Ok((a.reduce_to(top)?, a.reduce_to(rest)?))
}

/// The unique `c` in `A_{k,l+1}` with `split(c) = (a, b)`.
///
/// With `M = M_{k,l}`, the answer is `b + t·M` where `t = (a - b)/M` in
/// `Z[ζ_{k+l}]`. The inverse of `M(ζ) = prod_j Φ_{p^j}(ζ)` is written down in
/// closed form: `1/Φ_{p^j}(ζ) = (ω - 1)/(u - 1)` with `ω = ζ^{p^{j-1}}`,
/// `u = ζ^{p^j}` of order `q = p^r`, and `1/(u - 1) = (1/q) sum_{i<q} i·u^i`.
pub fn reconstruct(a: &CycloElem, b: &TowerElem) -> Result<TowerElem> {
    let rb = b.ring;
    let ra = a.ring;
    if ra.p != rb.p || ra.l != 1 || ra.k != rb.k + rb.l {
        return Err(Error::RingMismatch(format!("cannot glue {ra} with {rb}")));
    }
    let n = rb.degree();
    if a.mod_p_image_exp(n)? != b.mod_p_image_exp(n)? {
        return Err(Error::NotCompatible);
    }
    let (w, d) = modulus_inverse_numerator(rb);
    // The degree-reduced lift of b, read modulo Φ_{p^{k+l+1}}.
    let diff = a.sub(&TowerElem::from_coeffs(ra, b.coeffs.clone()))?;
    let t = diff.mul(&w)?.div_exact(&d).map_err(|_| {
        Error::NotIntegral(format!("(a - b)/M is not integral when gluing into A_{{{},{}}}", rb.k, rb.l + 1))
    })?;
    let out_ring = RingId { p: rb.p, k: rb.k, l: rb.l + 1 };
    let stride = rb.stride();
    let mut coeffs = vec![BigInt::zero(); out_ring.degree()];
    for (i, c) in b.coeffs.iter().enumerate() {
        coeffs[i] += c;
    }
    for j in 0..ipow(rb.p as u64, rb.l) as usize {
        for (i, c) in t.coeffs.iter().enumerate() {
            if !c.is_zero() {
                coeffs[j * stride + i] += c;
            }
        }
    }
    Ok(TowerElem { ring: out_ring, coeffs })
}

/// `(W, d)` with `W/d = 1/M_{k,l}(ζ_{k+l})` in `Q(ζ_{k+l})`.
fn modulus_inverse_numerator(rb: RingId) -> (CycloElem, BigInt) {
    let p = rb.p as u64;
    let top = RingId { p: rb.p, k: rb.k + rb.l, l: 1 };
    let level_exp = rb.k + rb.l + 1;
    let mut w = TowerElem::one(top);
    let mut d = BigInt::one();
    for j in rb.k + 1..=rb.k + rb.l {
        let q = ipow(p, level_exp - j);
        let u_step = ipow(p, j);
        let omega = TowerElem::from_terms(top, &[(ipow(p, j - 1), 1), (0, -1)]);
        let terms: Vec<(u64, i64)> = (1..q).map(|i| (i * u_step, i as i64)).collect();
        let series = TowerElem::from_terms(top, &terms);
        w = w.mul(&omega).expect("same ring").mul(&series).expect("same ring");
        d *= BigInt::from(q);
    }
    (w, d)
}

/// Components `(a_l, ..., a_0)` by repeated splitting.
pub fn to_tuple(a: &TowerElem) -> TupleRep {
    let mut comps = Vec::new();
    let mut cur = a.clone();
    while cur.ring.l > 1 {
        let (top, rest) = split(&cur).expect("height >= 2");
        comps.push(top);
        cur = rest;
    }
    comps.push(cur);
    TupleRep { components: comps }
}

/// Inverse of [`to_tuple`] by iterated [`reconstruct`].
pub fn from_tuple(t: &TupleRep) -> Result<TowerElem> {
    let mut it = t.components.iter().rev();
    let mut cur = it.next().ok_or_else(|| Error::InvalidParameter("empty tuple".into()))?.clone();
    for a in it {
        cur = reconstruct(a, &cur)?;
    }
    Ok(cur)
}

/// `mod_p_image(a, target)`: the map `g` when `a` lies in `A_{k,l}` and the map
/// `f` (`ζ_{k+l} -> x`) when `a` lies in `Z[ζ_{k+l}]`, with target `D_{k,l}`.
pub fn mod_p_image(a: &TowerElem, target: DRingId) -> Result<FpFilterElem> {
    let r = a.ring;
    let is_g = r.k == target.k && r.l == target.l;
    let is_f = r.l == 1 && r.k == target.k + target.l;
    if r.p != target.p || !(is_g || is_f) {
        return Err(Error::RingMismatch(format!(
            "no pullback map from {r} to D_{{{},{}}}(p={})",
            target.k, target.l, target.p
        )));
    }
    a.mod_p_image_exp(target.modulus_exp())
}

/// Symmetric residue of `c` modulo `m`.
pub(crate) fn symmetric_mod(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

/// Whether every coefficient is divisible by `d`.
pub(crate) fn all_divisible(a: &TowerElem, d: &BigInt) -> bool {
    a.coeffs.iter().all(|c| c.mod_floor(d).is_zero())
}


#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u32, k: u32, l: u32) -> RingId {
        RingId::new(p, k, l).unwrap()
    }

    #[test]
    fn x_times_x_squared_in_zeta3() {
        let r = ring(3, 0, 1);
        let x = TowerElem::x(r);
        assert_eq!(x.mul(&x.pow(2)).unwrap(), TowerElem::one(r));
        assert_eq!(x.pow(2), TowerElem::from_i64s(r, &[-1, -1]));
    }

    #[test]
    fn split_and_reconstruct_generator() {
        let r = ring(3, 0, 2);
        let x = TowerElem::x(r);
        let (a, b) = split(&x).unwrap();
        assert_eq!(a, TowerElem::x(ring(3, 1, 1)));
        assert_eq!(b, TowerElem::x(ring(3, 0, 1)));
        assert_eq!(reconstruct(&a, &b).unwrap(), x);
        let one = TowerElem::one(r);
        let (a1, b1) = split(&one).unwrap();
        assert!(a1.is_one() && b1.is_one());
        assert_eq!(reconstruct(&a1, &b1).unwrap(), one);
    }

    #[test]
    fn incompatible_pair_rejected() {
        let a = TowerElem::x(ring(5, 1, 1));
        let b = TowerElem::one(ring(5, 0, 1));
        assert_eq!(reconstruct(&a, &b), Err(Error::NotCompatible));
    }

    #[test]
    fn serde_round_trip() {
        let a = TowerElem::from_i64s(ring(5, 0, 2), &[3, -7, 0, 12345678901234]);
        let s = serde_json::to_string(&a).unwrap();
        let b: TowerElem = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
