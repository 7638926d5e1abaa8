//! Explicit real units of `Z[ζ_n]`: cyclotomic units `ξ_a`, η-units, their
//! products, λ-adic valuations and the filtration `U_{n,k}`.
//!
//! With `P = p^{n+1}` and `h = (P+1)/2` (so `ζ^h` squares to `ζ`):
//!
//! * `ξ_a = ζ^{(1-a)h} (1 + ζ + ... + ζ^{a-1})`, real, and `ξ_{P-a} = -ξ_a`;
//! * `ε_{s,k} = η^{-p^s} sum_{i=0}^{p^{s-k}} ζ^{i p^k}` with `η = ζ^h`, the
//!   quotient `(η^{p^s+p^k} - η^{-(p^s+p^k)}) / (η^{p^k} - η^{-p^k})`.
//!
//! Both are Laurent polynomials in `ζ` with coefficients `0, 1`, so their
//! images mod p have closed forms in the `(x-1)`-adic and `w` bases.
//! `N(ξ_a) = ξ_{a mod p^n}` one level down, which makes the embedding of `ξ_a`
//! into `A_{0,n+1}` the same group-ring polynomial read modulo
//! `1 + x + ... + x^{P-1}`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{ipow, is_prime, mod_inv};
use crate::error::{Error, Result};
use crate::exactpoly::{mod_p_image, CycloElem, DRingId, RingId, TowerElem};
use crate::fpfilter::{lucas, plus_to_w, FpFilterElem};
use crate::normtower::{abs_norm, embed_unit, exact_inverse};

/// Largest field degree for which exact evaluation is attempted.
pub const EXACT_DEGREE_LIMIT: u64 = 2500;

/// Which explicit unit a descriptor denotes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitKind {
    /// `ξ_a`.
    Cyclotomic { a: u64 },
    /// `ε_{s,k}`.
    Eta { s: u32, k: u32 },
    /// `prod u_i^{e_i}` over units of the same level.
    PowerProduct { factors: Vec<Factor> },
}

/// One factor of a power product.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    /// The base unit.
    pub unit: UnitDescriptor,
    /// Its exponent.
    pub exp: i64,
}

/// A real unit of `Z[ζ_level]` given by a term tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitDescriptor {
    /// The prime.
    pub p: u32,
    /// Cyclotomic level `n` (the field is `Q(ζ_{p^{n+1}})`).
    pub level: u32,
    /// The construction.
    #[serde(flatten)]
    pub kind: UnitKind,
}

fn check_prime(p: u32) -> Result<()> {
    if p < 3 || !is_prime(p as u64) {
        return Err(Error::InvalidParameter(format!("p = {p} is not an odd prime")));
    }
    Ok(())
}

fn order(p: u32, level: u32) -> Result<u64> {
    let e = level + 1;
    if (e as f64) * (p as f64).log2() > 62.0 {
        return Err(Error::UnsupportedScale(format!("p^{e} overflows 64 bits")));
    }
    Ok(ipow(p as u64, e))
}

/// `ξ_a` at the given level; `a` is taken in `[1, P)` with `p ∤ a`.
pub fn cyclotomic_unit(p: u32, level: u32, a: u64) -> Result<UnitDescriptor> {
    check_prime(p)?;
    let big_p = order(p, level)?;
    if a == 0 || a >= big_p || a % p as u64 == 0 {
        return Err(Error::InvalidParameter(format!("index a = {a} must satisfy 1 <= a < {big_p}, p ∤ a")));
    }
    Ok(UnitDescriptor { p, level, kind: UnitKind::Cyclotomic { a } })
}

/// `ε_{s,k}` for `0 <= k < s <= level`.
///
/// `s = level + 1` is rejected: `η^{p^{level+1}} = 1` collapses the quotient to 1.
pub fn eta_unit(p: u32, level: u32, s: u32, k: u32) -> Result<UnitDescriptor> {
    check_prime(p)?;
    order(p, level)?;
    if k >= s || s > level {
        return Err(Error::InvalidParameter(format!(
            "η-unit needs 0 <= k < s <= n; got (s, k) = ({s}, {k}) at n = {level}"
        )));
    }
    Ok(UnitDescriptor { p, level, kind: UnitKind::Eta { s, k } })
}

/// `prod u_i^{e_i}`; all factors must share `p` and the level.
pub fn power_product(factors: Vec<(UnitDescriptor, i64)>) -> Result<UnitDescriptor> {
    let (first, _) = factors.first().ok_or_else(|| Error::InvalidParameter("empty power product".into()))?;
    let (p, level) = (first.p, first.level);
    if factors.iter().any(|(u, _)| u.p != p || u.level != level) {
        return Err(Error::RingMismatch("power product factors live at different levels".into()));
    }
    let factors = factors.into_iter().map(|(unit, exp)| Factor { unit, exp }).collect();
    Ok(UnitDescriptor { p, level, kind: UnitKind::PowerProduct { factors } })
}

/// `(P + 1)/2`, the exponent with `(ζ^h)^2 = ζ`.
fn half(big_p: u64) -> u64 {
    big_p.div_ceil(2)
}

/// Exponent `e` with `ξ_a = ζ^e (1 + ... + ζ^{a-1})`.
fn xi_shift(big_p: u64, a: u64) -> u64 {
    let h = half(big_p) as u128;
    let one_minus_a = (1 + big_p as u128 - (a % big_p) as u128) % big_p as u128;
    (one_minus_a * h % big_p as u128) as u64
}

/// Exponent list of `ε_{s,k}`: `ζ^{E + i p^k}` for `i = 0..=p^{s-k}`.
fn eta_terms(p: u32, big_p: u64, s: u32, k: u32) -> Vec<u64> {
    let h = half(big_p) as u128;
    let ps = ipow(p as u64, s) as u128;
    let base = ((big_p as u128 - ps * h % big_p as u128) % big_p as u128) as u64;
    let step = ipow(p as u64, k);
    let q = ipow(p as u64, s - k);
    (0..=q).map(|i| ((base as u128 + (i * step) as u128) % big_p as u128) as u64).collect()
}

impl UnitDescriptor {
    /// `p^{level+1}`.
    pub fn big_p(&self) -> u64 {
        ipow(self.p as u64, self.level + 1)
    }

    /// The ring `Z[ζ_level]`.
    pub fn ring(&self) -> Result<RingId> {
        RingId::cyclo(self.p, self.level)
    }

    /// Exact element of `Z[ζ_level]`; the result is checked to be real.
    pub fn exact(&self) -> Result<CycloElem> {
        let r = self.ring()?;
        if r.degree() as u64 > EXACT_DEGREE_LIMIT {
            return Err(Error::UnsupportedScale(format!("exact arithmetic in {r} exceeds degree {EXACT_DEGREE_LIMIT}")));
        }
        let big_p = self.big_p();
        let out = match &self.kind {
            UnitKind::Cyclotomic { a } => {
                let e = xi_shift(big_p, *a);
                let terms: Vec<(u64, i64)> = (0..*a).map(|i| ((e + i) % big_p, 1)).collect();
                TowerElem::from_terms(r, &terms)
            }
            UnitKind::Eta { s, k } => {
                let terms: Vec<(u64, i64)> = eta_terms(self.p, big_p, *s, *k).into_iter().map(|e| (e, 1)).collect();
                TowerElem::from_terms(r, &terms)
            }
            UnitKind::PowerProduct { factors } => {
                let mut acc = TowerElem::one(r);
                for f in factors {
                    let base = f.unit.exact()?;
                    let base = if f.exp < 0 { exact_inverse(&base)? } else { base };
                    acc = acc.mul(&base.pow(f.exp.unsigned_abs()))?;
                }
                acc
            }
        };
        if out.conj() != out {
            return Err(Error::InternalMismatch("constructed unit is not conjugation invariant".into()));
        }
        Ok(out)
    }

    /// Image under `ζ -> x` in `F_p[x]/(x-1)^n`, `n <= p^{level+1} - p^level`.
    pub fn image(&self, n: usize) -> Result<FpFilterElem> {
        let r = self.ring()?;
        if n == 0 || n > r.degree() {
            return Err(Error::RingMismatch(format!("F_p[x]/(x-1)^{n} is not a quotient of {r}")));
        }
        self.group_ring_image(n)
    }

    /// `g_{level+1}` of the embedding into `A_{0,level+1}`, an element of
    /// `F_p[x]/(x-1)^{P-1}`.
    ///
    /// Cyclotomic units and their products use the group-ring closed form;
    /// η-units go through the exact embedding.
    pub fn tower_image(&self) -> Result<FpFilterElem> {
        let n = self.big_p() as usize - 1;
        match &self.kind {
            UnitKind::Cyclotomic { .. } => self.group_ring_image(n),
            UnitKind::Eta { .. } => self.tower_image_exact(),
            UnitKind::PowerProduct { factors } => {
                let mut acc = FpFilterElem::one(self.p, n);
                for f in factors {
                    acc = acc.mul(&f.unit.tower_image()?.pow_signed(f.exp as i128)?);
                }
                Ok(acc)
            }
        }
    }

    /// `g_{level+1}(embed_unit(ε))` computed through exact norms.
    pub fn tower_image_exact(&self) -> Result<FpFilterElem> {
        let eps = self.exact()?;
        let emb = embed_unit(&eps, 0, self.level + 1)?;
        mod_p_image(&emb, DRingId { p: self.p, k: 0, l: self.level + 1 })
    }

    /// Image of the defining Laurent polynomial in `F_p[x]/(x-1)^n`, `n <= P`.
    fn group_ring_image(&self, n: usize) -> Result<FpFilterElem> {
        let big_p = self.big_p();
        match &self.kind {
            UnitKind::Cyclotomic { a } => Ok(xi_t_image(self.p, big_p, *a, n)),
            UnitKind::Eta { s, k } => Ok(eta_t_image(self.p, big_p, *s, *k, n)),
            UnitKind::PowerProduct { factors } => {
                let mut acc = FpFilterElem::one(self.p, n);
                for f in factors {
                    acc = acc.mul(&f.unit.group_ring_image(n)?.pow_signed(f.exp as i128)?);
                }
                Ok(acc)
            }
        }
    }
}

/// `x^e (1 + ... + x^{a-1})` with `e = (1-a)h mod P`, in the `(x-1)`-adic basis
/// of `F_p[x]/(x-1)^n`; needs `n <= P` so that `x^P = 1`.
///
/// `x^e (x^a - 1)/(x - 1) = sum_j [C(e+a, j+1) - C(e, j+1)] t^j`.
pub fn xi_t_image(p: u32, big_p: u64, a: u64, n: usize) -> FpFilterElem {
    assert!(n as u64 <= big_p, "x^P = 1 needs N <= P");
    let e = xi_shift(big_p, a);
    let lb = lucas(p);
    let pm = p as u64;
    let coeffs: Vec<u64> =
        (0..n as u64).map(|j| (lb.binom(e + a, j + 1) + pm - lb.binom(e, j + 1)) % pm).collect();
    FpFilterElem::from_t_coeffs(p, n, &coeffs)
}

/// `ε_{s,k}` in the `(x-1)`-adic basis of `F_p[x]/(x-1)^n`, `n <= P`:
/// `x^E · sum_j C(q+1, j+1) T^j` with `T = t^{p^k}`, `q = p^{s-k}`.
pub fn eta_t_image(p: u32, big_p: u64, s: u32, k: u32, n: usize) -> FpFilterElem {
    assert!(n as u64 <= big_p, "x^P = 1 needs N <= P");
    let lb = lucas(p);
    let base = eta_terms(p, big_p, s, k)[0];
    let shift: Vec<u64> = (0..n as u64).map(|j| lb.binom(base, j)).collect();
    let step = ipow(p as u64, k) as usize;
    let q = ipow(p as u64, s - k);
    let mut sum = vec![0u64; n];
    for (j, slot) in sum.iter_mut().step_by(step).enumerate() {
        *slot = lb.binom(q + 1, j as u64 + 1);
    }
    FpFilterElem::from_t_coeffs(p, n, &shift).mul(&FpFilterElem::from_t_coeffs(p, n, &sum))
}

/// Tilde-normalised `ξ_a` as a 1-unit of `F_p[[w]]/w^m`, `w = x + x^{-1} - 2`.
///
/// For odd `a' = 2j+1` (`a' = a` or `P - a`), `ξ_{a'} = sum_{|i|<=j} x^i` and
/// the coefficient of `w^k` is `C(j+k+1, 2k+1) + C(j+k, 2k+1)`; the constant
/// term `a'` is divided out. Valid when the t-modulus `2m - 1` is at most `P`.
pub fn xi_w_image(p: u32, big_p: u64, a: u64, m: usize) -> FpFilterElem {
    assert!(2 * m as u64 - 1 <= big_p, "x^P = 1 needs N <= P");
    let a_odd = if a % 2 == 1 { a } else { big_p - a };
    let j = (a_odd - 1) / 2;
    let lb = lucas(p);
    let pm = p as u64;
    let inv = mod_inv(a_odd % pm, pm).expect("p does not divide a");
    let coeffs: Vec<u64> = (0..m as u64)
        .map(|k| (lb.binom(j + k + 1, 2 * k + 1) + lb.binom(j + k, 2 * k + 1)) % pm * inv % pm)
        .collect();
    FpFilterElem::from_t_coeffs(p, m, &coeffs)
}

/// Tilde-normalised, plus, `w`-model image of a unit image: `u / u(1)` rewritten in `w`.
pub fn tilde_w(u: &FpFilterElem) -> Result<FpFilterElem> {
    plus_to_w(&tilde_normalize(u)?)
}

/// Divide a unit of `F_p[x]/(x-1)^N` by its value at `x = 1`.
pub fn tilde_normalize(u: &FpFilterElem) -> Result<FpFilterElem> {
    u.normalize_to_one_unit()
}

/// λ-adic valuation of a nonzero element of `Z[ζ_n]`, `λ = ζ - 1`.
///
/// With `(p) = λ^φ`, `φ = p^{n+1} - p^n`, write `a = p^m·b` with `b` not in
/// `pZ[ζ_n]` (the power basis is a Z-basis, so this is coefficient content);
/// `b` is nonzero in `Z[ζ_n]/p = F_p[x]/(x-1)^φ` and its valuation is read there.
pub fn lambda_val(a: &CycloElem) -> Result<u64> {
    let r = a.ring();
    if r.l != 1 {
        return Err(Error::InvalidParameter("λ-valuation needs a cyclotomic integer".into()));
    }
    if a.is_zero() {
        return Err(Error::ZeroInput);
    }
    let phi = r.degree();
    let pb = BigInt::from(r.p);
    let m = a.coeffs().iter().filter(|c| !c.is_zero()).map(|c| big_vp(c, r.p as u64)).min().unwrap_or(0);
    let b = a.div_exact(&num_traits::pow(pb, m as usize))?;
    let v = b.mod_p_image_exp(phi)?.val_elem()?;
    Ok(m * phi as u64 + v as u64)
}

/// `v_p` of a nonzero integer.
pub fn big_vp(n: &BigInt, p: u64) -> u64 {
    let pb = BigInt::from(p);
    let mut cur = n.clone();
    let mut v = 0;
    while (&cur % &pb).is_zero() {
        cur /= &pb;
        v += 1;
    }
    v
}

/// `v_λ(ε - 1)`, or `None` when `ε = 1`.
pub fn unit_depth(eps: &CycloElem) -> Result<Option<u64>> {
    let d = eps.sub(&TowerElem::one(eps.ring()))?;
    if d.is_zero() {
        return Ok(None);
    }
    lambda_val(&d).map(Some)
}

/// Membership of a real unit in `U_{n,k}`: `ε ≡ 1 mod λ^k`.
pub fn in_filtration(eps: &CycloElem, k: u64) -> Result<bool> {
    if eps.conj() != *eps {
        return Err(Error::InvalidParameter("U_{n,k} consists of real units".into()));
    }
    Ok(unit_depth(eps)?.is_none_or(|v| v >= k))
}

/// Whether a cyclotomic integer is a unit with real conjugation symmetry.
pub fn is_real_unit(eps: &CycloElem) -> Result<bool> {
    Ok(eps.conj() == *eps && abs_norm(eps)?.magnitude().is_one())
}

/// Indices `a` of the canonical real cyclotomic units at a level, listed
/// along the powers of a primitive root so that consecutive generators are
/// Galois conjugates: `a = min(g^i, P - g^i)` for `i < φ(P)/2`, `a != 1`.
pub fn cyclotomic_indices(p: u32, level: u32) -> Result<Vec<u64>> {
    check_prime(p)?;
    let big_p = order(p, level)?;
    let g = crate::arith::primitive_root_prime_power(p as u64, level + 1);
    let half_count = (big_p - big_p / p as u64) / 2;
    let mut out = Vec::with_capacity(half_count as usize);
    let mut cur = 1u64;
    for _ in 0..half_count {
        let a = cur.min(big_p - cur);
        if a != 1 {
            out.push(a);
        }
        cur = (cur as u128 * g as u128 % big_p as u128) as u64;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_match_exact_images() {
        for &(p, level) in &[(5u32, 0u32), (3, 1), (5, 1)] {
            let big_p = ipow(p as u64, level + 1);
            let phi = (big_p - big_p / p as u64) as usize;
            for a in cyclotomic_indices(p, level).unwrap() {
                let u = cyclotomic_unit(p, level, a).unwrap();
                let exact = u.exact().unwrap().mod_p_image_exp(phi).unwrap();
                assert_eq!(u.image(phi).unwrap(), exact);
                let w = xi_w_image(p, big_p, a, phi.div_ceil(2));
                assert_eq!(tilde_w(&exact).unwrap(), w);
            }
        }
    }

    #[test]
    fn eta_closed_form_matches_exact() {
        let u = eta_unit(5, 2, 2, 1).unwrap();
        let e = u.exact().unwrap();
        assert_eq!(u.image(100).unwrap(), e.mod_p_image_exp(100).unwrap());
        assert_eq!(unit_depth(&e).unwrap(), Some(20));
    }

    #[test]
    fn lambda_val_examples() {
        let r = RingId::cyclo(5, 1).unwrap();
        let lambda = TowerElem::from_terms(r, &[(1, 1), (0, -1)]);
        assert_eq!(lambda_val(&lambda).unwrap(), 1);
        assert_eq!(lambda_val(&TowerElem::from_integer(r, BigInt::from(5))).unwrap(), 20);
        assert_eq!(lambda_val(&TowerElem::zero(r)), Err(Error::ZeroInput));
    }

    #[test]
    fn tower_closed_form_matches_embedding() {
        for a in cyclotomic_indices(3, 1).unwrap() {
            let u = cyclotomic_unit(3, 1, a).unwrap();
            assert_eq!(u.tower_image().unwrap(), u.tower_image_exact().unwrap());
        }
    }

    #[test]
    fn parameter_checks() {
        assert!(cyclotomic_unit(5, 0, 10).is_err());
        assert!(eta_unit(5, 1, 2, 1).is_err());
        assert!(eta_unit(5, 1, 1, 1).is_err());
        assert_eq!(cyclotomic_indices(3, 0).unwrap(), Vec::<u64>::new());
        assert_eq!(cyclotomic_indices(5, 0).unwrap(), vec![2]);
    }
}
