//! Norm maps of the tower: the determinant norm `A_{k+1,l} -> A_{k,l}`, the
//! usual norms of cyclotomic integers, the multiplicative map
//! `N_{k,l}: Z[ζ_{k+l}] -> A_{k,l}`, the unit embedding and exact inverses.
//!
//! `A_{k+1,l}` is free of rank p over `A_{k,l}` on `1, X, ..., X^{p-1}` with
//! `X^p = x`. Determinants over `A_{k,l}` use the division-free Berkowitz
//! algorithm because `A_{k,l}` has zero divisors once `l >= 2`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactpoly::{
    all_divisible, from_tuple, reconstruct, symmetric_mod, CycloElem, RingId, TowerElem, TupleRep,
};

/// Commutative ring operations needed by the determinant.
pub trait DetRing: Clone {
    /// Sum.
    fn add(&self, o: &Self) -> Self;
    /// Product.
    fn mul(&self, o: &Self) -> Self;
    /// Negation.
    fn neg(&self) -> Self;
}

impl DetRing for TowerElem {
    fn add(&self, o: &Self) -> Self {
        TowerElem::add(self, o).expect("matrix entries share a ring")
    }
    fn mul(&self, o: &Self) -> Self {
        TowerElem::mul(self, o).expect("matrix entries share a ring")
    }
    fn neg(&self) -> Self {
        TowerElem::neg(self)
    }
}

impl DetRing for BigInt {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Determinant of a square matrix over a commutative ring (Berkowitz).
///
/// The characteristic polynomial of the leading `(r+1)×(r+1)` block is the
/// Toeplitz matrix with first column `1, -a, -R·C, -R·A·C, ...` applied to
/// that of the leading `r×r` block.
pub fn berkowitz_det<T: DetRing>(m: &[Vec<T>], zero: &T, one: &T) -> T {
    let n = m.len();
    if n == 0 {
        return one.clone();
    }
    let mut cp = vec![one.clone(), m[0][0].neg()];
    for r in 1..n {
        let mut t = Vec::with_capacity(r + 2);
        t.push(one.clone());
        t.push(m[r][r].neg());
        let mut v: Vec<T> = (0..r).map(|i| m[i][r].clone()).collect();
        for step in 0..r {
            if step > 0 {
                v = (0..r)
                    .map(|i| (0..r).fold(zero.clone(), |acc, j| acc.add(&m[i][j].mul(&v[j]))))
                    .collect();
            }
            let rv = (0..r).fold(zero.clone(), |acc, j| acc.add(&m[r][j].mul(&v[j])));
            t.push(rv.neg());
        }
        let next: Vec<T> = (0..=r + 1)
            .map(|i| (0..=i.min(r)).fold(zero.clone(), |acc, j| acc.add(&t[i - j].mul(&cp[j]))))
            .collect();
        cp = next;
    }
    if n % 2 == 0 {
        cp[n].clone()
    } else {
        cp[n].neg()
    }
}

/// Matrix of multiplication by `a ∈ A_{k+1,l}` on the basis `X^0..X^{p-1}` over `A_{k,l}`.
pub fn mult_operator_matrix(a: &TowerElem) -> Result<Vec<Vec<TowerElem>>> {
    let r = a.ring();
    if r.k == 0 {
        return Err(Error::InvalidParameter("A_{0,l} has no level below it in the tower".into()));
    }
    let p = r.p as usize;
    let below = RingId::new(r.p, r.k - 1, r.l)?;
    let parts: Vec<TowerElem> = (0..p)
        .map(|i| {
            let c: Vec<BigInt> = a.coeffs().iter().skip(i).step_by(p).cloned().collect();
            TowerElem::from_coeffs(below, c)
        })
        .collect();
    let x = TowerElem::x(below);
    let shifted: Vec<TowerElem> = parts.iter().map(|q| q.mul(&x).expect("same ring")).collect();
    Ok((0..p)
        .map(|row| (0..p).map(|col| if row >= col { parts[row - col].clone() } else { shifted[row + p - col].clone() }).collect())
        .collect())
}

/// Determinant norm `N: A_{k+1,l} -> A_{k,l}`.
pub fn norm_det(a: &TowerElem) -> Result<TowerElem> {
    let m = mult_operator_matrix(a)?;
    let below = m[0][0].ring();
    Ok(berkowitz_det(&m, &TowerElem::zero(below), &TowerElem::one(below)))
}

/// Usual norm `Z[ζ_m] -> Z[ζ_{m-j}]` as `j` one-step norms; `j <= m`.
pub fn usual_norm(a: &CycloElem, steps: u32) -> Result<CycloElem> {
    let r = a.ring();
    if r.l != 1 {
        return Err(Error::InvalidParameter("usual norm needs a cyclotomic integer".into()));
    }
    if steps > r.k {
        return Err(Error::InvalidParameter(format!(
            "cannot take {steps} norm steps from level {}; use abs_norm to reach Z",
            r.k
        )));
    }
    let mut cur = a.clone();
    for _ in 0..steps {
        cur = norm_det(&cur)?;
    }
    Ok(cur)
}

/// Absolute norm `Z[ζ_m] -> Z`.
pub fn abs_norm(a: &CycloElem) -> Result<BigInt> {
    let bottom = usual_norm(a, a.ring().k)?;
    let r = bottom.ring();
    let n = r.degree();
    let x = TowerElem::x(r);
    let mut cols = Vec::with_capacity(n);
    let mut cur = bottom;
    for _ in 0..n {
        cols.push(cur.coeffs().to_vec());
        cur = cur.mul(&x)?;
    }
    let m: Vec<Vec<BigInt>> = (0..n).map(|row| (0..n).map(|col| cols[col][row].clone()).collect()).collect();
    Ok(berkowitz_det(&m, &BigInt::zero(), &BigInt::one()))
}

/// `N_{k,l}: Z[ζ_{k+l}] -> A_{k,l}` by the inductive construction.
fn norm_kl_inductive(a: &CycloElem, l: u32) -> Result<TowerElem> {
    if l == 1 {
        return norm_det(a);
    }
    let upper = norm_kl_inductive(a, l - 1)?;
    norm_det(&reconstruct(a, &upper)?)
}

/// `N_{k,l}` from its tuple of iterated usual norms.
fn norm_kl_tuple(a: &CycloElem, l: u32) -> Result<TowerElem> {
    let comps = (1..=l).map(|j| usual_norm(a, j)).collect::<Result<Vec<_>>>()?;
    from_tuple(&TupleRep { components: comps })
}

/// The multiplicative map `N_{k,l}: Z[ζ_{k+l}] -> A_{k,l}`, computed twice
/// (inductively and from the tuple of usual norms) and cross-checked.
pub fn norm_kl(a: &CycloElem, k: u32, l: u32) -> Result<TowerElem> {
    let r = a.ring();
    if r.l != 1 || r.k != k + l || l == 0 {
        return Err(Error::InvalidParameter(format!("N_{{{k},{l}}} needs an element of Z[ζ_{}]", k + l)));
    }
    let inductive = norm_kl_inductive(a, l)?;
    let tuple = norm_kl_tuple(a, l)?;
    if inductive != tuple {
        return Err(Error::InternalMismatch(format!("inductive and tuple constructions of N_{{{k},{l}}} differ")));
    }
    Ok(inductive)
}

/// The unit embedding `ε -> (ε, N_{k,l-1}(ε))` of `Z[ζ_{k+l-1}]^*` into `A_{k,l}^*`.
pub fn embed_unit(eps: &CycloElem, k: u32, l: u32) -> Result<TowerElem> {
    let r = eps.ring();
    if r.l != 1 || l == 0 || r.k + 1 != k + l {
        return Err(Error::InvalidParameter(format!("embedding into A_{{{k},{l}}} needs level {}", k + l - 1)));
    }
    if !is_unit(eps)? {
        return Err(Error::NotAUnit("absolute norm is not ±1".into()));
    }
    embed_unchecked(eps, k, l)
}

/// The pair `(a, N_{k,l-1}(a))` glued without the unit check; defined for any `a`.
pub fn embed_unchecked(a: &CycloElem, k: u32, l: u32) -> Result<TowerElem> {
    if l == 1 {
        return Ok(a.clone());
    }
    reconstruct(a, &norm_kl(a, k, l - 1)?)
}

/// Whether a cyclotomic integer is a unit (absolute norm ±1).
pub fn is_unit(a: &CycloElem) -> Result<bool> {
    Ok(abs_norm(a)?.abs().is_one())
}

/// Whether an element of `A_{k,l}` is a unit: every tuple component is.
pub fn is_tower_unit(a: &TowerElem) -> Result<bool> {
    if a.ring().l == 1 {
        return is_unit(a);
    }
    for c in crate::exactpoly::to_tuple(a).components {
        if !is_unit(&c)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact inverse of a unit of `A_{k,l}` by p-adic Newton lifting from the
/// inverse modulo p, finished when the symmetric lift multiplies to 1.
pub fn exact_inverse(a: &TowerElem) -> Result<TowerElem> {
    if !is_tower_unit(a)? {
        return Err(Error::NotAUnit(format!("element of {} has a non-unit component", a.ring())));
    }
    let r = a.ring();
    let d = r.degree();
    let inv_mod_p = a.mod_p_image_exp(d)?.inverse()?;
    let mono: Vec<BigInt> = inv_mod_p.to_monomials().into_iter().map(BigInt::from).collect();
    let mut v = TowerElem::from_coeffs(r, mono);
    let mut modulus = BigInt::from(r.p);
    let two = TowerElem::from_integer(r, BigInt::from(2));
    for _ in 0..64 {
        if a.mul(&v)?.is_one() {
            return Ok(v);
        }
        modulus = &modulus * &modulus;
        let next = v.mul(&two.sub(&a.mul(&v)?)?)?;
        v = TowerElem::from_coeffs(r, next.coeffs().iter().map(|c| symmetric_mod(c, &modulus)).collect());
    }
    Err(Error::InternalMismatch("Newton lifting of a unit inverse did not terminate".into()))
}

/// `(a - 1)/p` exactly, or `NotDivisible`.
pub fn minus_one_over_p(a: &TowerElem) -> Result<TowerElem> {
    let r = a.ring();
    let pb = BigInt::from(r.p);
    let d = a.sub(&TowerElem::one(r))?;
    if !all_divisible(&d, &pb) {
        return Err(Error::NotDivisible("a - 1 is not divisible by p".into()));
    }
    d.div_exact(&pb)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u32, k: u32, l: u32) -> RingId {
        RingId::new(p, k, l).unwrap()
    }

    #[test]
    fn norm_of_generator() {
        for p in [3, 5] {
            assert_eq!(norm_det(&TowerElem::x(ring(p, 1, 1))).unwrap(), TowerElem::x(ring(p, 0, 1)));
            assert!(norm_det(&TowerElem::one(ring(p, 1, 2))).unwrap().is_one());
        }
    }

    #[test]
    fn abs_norm_of_lambda_is_p() {
        for (p, m) in [(3, 0), (3, 1), (5, 1)] {
            let r = ring(p, m, 1);
            let lam = TowerElem::x(r).sub(&TowerElem::one(r)).unwrap();
            assert_eq!(abs_norm(&lam).unwrap(), BigInt::from(p));
        }
    }

    #[test]
    fn berkowitz_small_integer_matrix() {
        let m: Vec<Vec<BigInt>> =
            vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]].into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
        assert_eq!(berkowitz_det(&m, &BigInt::zero(), &BigInt::one()), BigInt::from(4));
    }

    #[test]
    fn embed_minus_zeta_has_inverse() {
        let z = TowerElem::x(ring(3, 1, 1)).neg();
        let e = embed_unit(&z, 0, 2).unwrap();
        let inv = exact_inverse(&e).unwrap();
        assert!(e.mul(&inv).unwrap().is_one());
        assert!(embed_unit(&TowerElem::one(ring(3, 1, 1)), 0, 2).unwrap().is_one());
    }
}
