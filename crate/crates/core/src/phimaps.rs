//! The maps `φ`, `ω` and `Φ = φ - ω` on `U_{n-1, p^n - p^{n-1}}`:
//!
//! * `φ(ε) = g_{n-1}(N_{n-1}((ε - 1)/p))`,
//! * `ω(ε) = g_{n-1}((N_{n-1}(ε) - 1)/p)`,
//!
//! with `N_{n-1} = N_{0,n-1}: Z[ζ_{n-1}] -> A_{0,n-1}` and values in
//! `D_{n-1} = F_p[x]/(x-1)^{p^{n-1}-1}`. Domain elements are real units that
//! are `≡ 1 mod p`; they are built as products of `ξ_a^{p-1}` whose exponents
//! come from an echelon of their images in `D_n`.
//!
//! Both maps only see `ε mod p^2`: `N_{n-1}` is a polynomial in the
//! coefficients, so `N(a) mod p` depends on `a mod p` and `N(ε) mod p^2` on
//! `ε mod p^2`. Inputs are reduced to balanced residues mod `p^2` first,
//! which keeps the norm computations small for high powers.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::abgroup::EchelonState;
use crate::arith::{ipow, is_prime, mod_inv};
use crate::error::{Error, Result};
use crate::exactpoly::{mod_p_image, CycloElem, DRingId, RingId, TowerElem};
use crate::fpfilter::{plus_to_w, w_model_len, FpFilterElem};
use crate::normtower::{exact_inverse, minus_one_over_p, norm_kl};
use crate::units::{cyclotomic_indices, cyclotomic_unit, unit_depth};

/// Largest `p^n` for which the exact domain construction is attempted.
pub const MAX_PHI_ORDER: u64 = 49;

/// A verified element of `U_{n-1, p^n - p^{n-1}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiInput {
    /// The index `n` (the unit lives in `Z[ζ_{n-1}]`).
    pub n: u32,
    /// The unit.
    pub eps: CycloElem,
    /// `v_λ(ε - 1)`, `None` for `ε = 1`.
    pub depth: Option<u64>,
}

impl PhiInput {
    /// Check level, reality and depth `>= p^n - p^{n-1}`.
    pub fn new(eps: CycloElem, n: u32) -> Result<Self> {
        let r = eps.ring();
        if n < 2 || r.l != 1 || r.k + 1 != n {
            return Err(Error::InvalidParameter(format!("Φ at n = {n} needs a unit of Z[ζ_{}]", n.saturating_sub(1))));
        }
        if eps.conj() != eps {
            return Err(Error::InvalidParameter("Φ is defined on real units".into()));
        }
        let depth = unit_depth(&eps)?;
        let q = ipow(r.p as u64, n);
        let floor = q - q / r.p as u64;
        if depth.is_some_and(|d| d < floor) {
            return Err(Error::InvalidParameter(format!("ε - 1 has λ-valuation {} < {floor}", depth.unwrap_or(0))));
        }
        Ok(Self { n, eps, depth })
    }

    fn target(&self) -> DRingId {
        DRingId { p: self.eps.ring().p, k: 0, l: self.n - 1 }
    }
}

/// `ε` with coefficients reduced to `(-p^2/2, p^2/2]`.
fn reduce_mod_p2(eps: &CycloElem) -> CycloElem {
    let q = BigInt::from(eps.ring().p).pow(2);
    let half = &q / 2;
    let c = eps
        .coeffs()
        .iter()
        .map(|c| {
            let r = c.mod_floor(&q);
            if r > half {
                r - &q
            } else {
                r
            }
        })
        .collect();
    TowerElem::from_coeffs(eps.ring(), c)
}

/// `φ(ε)` in `D_{n-1}`.
pub fn phi_small(inp: &PhiInput) -> Result<FpFilterElem> {
    phi_small_exact(&reduce_mod_p2(&inp.eps), inp)
}

/// `ω(ε)` in `D_{n-1}`.
pub fn omega(inp: &PhiInput) -> Result<FpFilterElem> {
    omega_exact(&reduce_mod_p2(&inp.eps), inp)
}

/// `φ` evaluated on a given representative of `ε mod p^2`.
fn phi_small_exact(eps: &CycloElem, inp: &PhiInput) -> Result<FpFilterElem> {
    let a = minus_one_over_p(eps)?;
    let nrm = norm_kl(&a, 0, inp.n - 1)?;
    mod_p_image(&nrm, inp.target())
}

/// `ω` evaluated on a given representative of `ε mod p^2`.
fn omega_exact(eps: &CycloElem, inp: &PhiInput) -> Result<FpFilterElem> {
    let nrm = norm_kl(eps, 0, inp.n - 1)?;
    mod_p_image(&minus_one_over_p(&nrm)?, inp.target())
}

/// `Φ(ε) = φ(ε) - ω(ε)`.
pub fn phi_big(inp: &PhiInput) -> Result<FpFilterElem> {
    Ok(phi_small(inp)?.sub(&omega(inp)?))
}

/// `(x - x^{-1})`-adic valuation in `D_{n-1}`, equal to the `(x-1)`-adic one;
/// the modulus exponent for 0.
pub fn big_o(a: &FpFilterElem) -> usize {
    a.val_elem().unwrap_or(a.modulus_exp())
}

/// Coordinates of a plus element of `D_{n-1}` in the basis `w^j`.
pub fn plus_coordinates(a: &FpFilterElem) -> Result<Vec<u64>> {
    Ok(plus_to_w(a)?.t_coeffs().iter().map(|&c| c as u64).collect())
}

/// Constructed domain for `Φ` at a given `(p, n)`.
#[derive(Debug, Clone)]
pub struct PhiDomain {
    /// The prime.
    pub p: u32,
    /// The index `n`.
    pub n: u32,
    /// One element per place `s` in `[p^n - p^{n-1}, p^n - 3]`, even, with `v_λ(ε - 1) = s`.
    pub basis: Vec<PhiInput>,
    /// The places of `basis`.
    pub places: Vec<u64>,
    /// Elements of `U_{n-1, p^n - 1}`: p-th powers of the basis.
    pub kernel: Vec<PhiInput>,
}

impl PhiDomain {
    /// `dim D_{n-1}^+ = (p^{n-1} - 1)/2`.
    pub fn target_dimension(&self) -> usize {
        w_model_len(ipow(self.p as u64, self.n - 1) as usize - 1)
    }

    /// `prod basis_i^{c_i}` as a domain element.
    pub fn combine(&self, exps: &[u64]) -> Result<PhiInput> {
        let r = RingId::cyclo(self.p, self.n - 1)?;
        let mut acc = TowerElem::one(r);
        for (b, &c) in self.basis.iter().zip(exps) {
            if c > 0 {
                acc = acc.mul(&b.eps.pow(c))?;
            }
        }
        PhiInput::new(acc, self.n)
    }
}

/// Build domain elements at every place of `[p^n - p^{n-1}, p^n - 3]`.
///
/// The images of `γ_a = ξ_a^{p-1}` in `D_n` are echelonised with provenance;
/// the pivot at place `s` is realised exactly as `prod γ_a^{e_a}` (balanced
/// exponents, negative ones through exact inverses) and its λ-valuation is
/// checked to be `s`. Fails if some place has no pivot.
pub fn build_domain(p: u32, n: u32) -> Result<PhiDomain> {
    if p < 3 || !is_prime(p as u64) || n < 2 {
        return Err(Error::InvalidParameter(format!("Φ needs an odd prime and n >= 2; got p = {p}, n = {n}")));
    }
    let q = ipow(p as u64, n);
    if q > MAX_PHI_ORDER {
        return Err(Error::UnsupportedScale(format!("exact Φ domain for p^n = {q} exceeds {MAX_PHI_ORDER}")));
    }
    let level = n - 1;
    let indices = cyclotomic_indices(p, level)?;
    let units = indices.iter().map(|&a| cyclotomic_unit(p, level, a)).collect::<Result<Vec<_>>>()?;
    let m = w_model_len(q as usize - 1);
    let mut ech = EchelonState::with_provenance(p, m, units.len());
    for (i, u) in units.iter().enumerate() {
        let img = u.tower_image()?.pow(p as u128 - 1);
        ech.insert_generator(&plus_to_w(&img)?, i)?;
    }
    let exponent = ech.group_exponent();
    let lo = q - q / p as u64;
    let places: Vec<u64> = (lo..=q - 3).step_by(2).collect();
    let mut exact_units = Vec::with_capacity(units.len());
    for u in &units {
        exact_units.push(u.exact()?);
    }
    let mut inverses: Vec<Option<CycloElem>> = vec![None; units.len()];
    let r = RingId::cyclo(p, level)?;
    let mut basis = Vec::with_capacity(places.len());
    for &s in &places {
        let k = (s / 2) as usize;
        let (_, piv) = ech
            .pivots()
            .find(|(v, _)| **v == k)
            .ok_or_else(|| Error::NotInSpan(format!("no product of cyclotomic units reaches place {s}")))?;
        let prov = piv.provenance.as_ref().expect("tracked echelon");
        let mut acc = TowerElem::one(r);
        for (i, &e) in prov.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let (neg, mag) = if e > exponent / 2 { (true, exponent - e) } else { (false, e) };
            let base = if neg {
                if inverses[i].is_none() {
                    inverses[i] = Some(exact_inverse(&exact_units[i])?);
                }
                inverses[i].clone().expect("just filled")
            } else {
                exact_units[i].clone()
            };
            acc = acc.mul(&base.pow(mag * (p as u64 - 1)))?;
        }
        let inp = PhiInput::new(acc, n)?;
        if inp.depth != Some(s) {
            return Err(Error::InternalMismatch(format!(
                "constructed unit for place {s} has λ-valuation {:?}",
                inp.depth
            )));
        }
        basis.push(inp);
    }
    let kernel = basis.iter().map(|b| PhiInput::new(b.eps.pow(p as u64), n)).collect::<Result<Vec<_>>>()?;
    Ok(PhiDomain { p, n, basis, places, kernel })
}

/// Numerical checks of the valuation and triangularity statements on a domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiAnalysis {
    /// The prime.
    pub p: u32,
    /// The index `n`.
    pub n: u32,
    /// Places of the domain basis.
    pub places: Vec<u64>,
    /// `O(φ(ε_i))`.
    pub phi_orders: Vec<usize>,
    /// `O(ω(ε_i))`.
    pub omega_orders: Vec<usize>,
    /// Whether `p^{n-1} - p^k <= O(φ) < p^{n-1} - p^{k-1} <= O(ω)` holds for
    /// every basis element, `k` determined by its place.
    pub interlacing: bool,
    /// `dim D_{n-1}^+`.
    pub target_dimension: usize,
    /// Rank of `{φ(ε_i)}`.
    pub phi_rank: usize,
    /// Rank of `{Φ(ε_i)}`.
    pub big_phi_rank: usize,
    /// Matrix of `Φ` in the `φ`-basis, column `i` = coordinates of `Φ(ε_i)`.
    pub matrix: Vec<Vec<u64>>,
    /// Whether `matrix` is unitriangular for the order of increasing `O(φ)`.
    pub unitriangular: bool,
}

impl PhiAnalysis {
    /// `Φ` maps onto `D_{n-1}^+`.
    pub fn surjective(&self) -> bool {
        self.big_phi_rank == self.target_dimension
    }

    /// `φ` is injective on the domain modulo `U_{n-1, p^n - 1}`: full rank on a
    /// basis whose size equals `dim D_{n-1}^+`.
    pub fn phi_injective(&self) -> bool {
        self.phi_rank == self.places.len() && self.places.len() == self.target_dimension
    }
}

/// Evaluate `φ`, `ω`, `Φ` on the domain basis and check the structural claims.
pub fn analyze(dom: &PhiDomain) -> Result<PhiAnalysis> {
    let p = dom.p;
    let pu = p as u64;
    let q1 = ipow(pu, dom.n - 1);
    let mut phi_vecs = Vec::new();
    let mut big_vecs = Vec::new();
    let mut phi_orders = Vec::new();
    let mut omega_orders = Vec::new();
    let mut interlacing = true;
    for (b, &s) in dom.basis.iter().zip(&dom.places) {
        let f = phi_small(b)?;
        let w = omega(b)?;
        let (of, ow) = (big_o(&f), big_o(&w));
        // The k with p^n - p^k <= s < p^n - p^{k-1}.
        let qn = q1 * pu;
        let k = (1..dom.n).find(|&k| qn - ipow(pu, k) <= s && s < qn - ipow(pu, k - 1)).unwrap_or(dom.n - 1);
        let lo = (q1 - ipow(pu, k)) as usize;
        let hi = (q1 - ipow(pu, k - 1)) as usize;
        interlacing &= lo <= of && of < hi && hi <= ow;
        phi_orders.push(of);
        omega_orders.push(ow);
        phi_vecs.push(plus_coordinates(&f)?);
        big_vecs.push(plus_coordinates(&f.sub(&w))?);
    }
    let target_dimension = dom.target_dimension();
    let phi_rank = rank_mod_p(&phi_vecs, pu);
    let big_phi_rank = rank_mod_p(&big_vecs, pu);
    let mut order: Vec<usize> = (0..phi_vecs.len()).collect();
    order.sort_by_key(|&i| phi_orders[i]);
    let (matrix, unitriangular) = if phi_rank == phi_vecs.len() {
        let cols: Vec<Vec<u64>> = big_vecs.iter().map(|v| solve_in_span(&phi_vecs, v, pu)).collect::<Result<_>>()?;
        let d = cols.len();
        let mut ok = true;
        for (ci, &i) in order.iter().enumerate() {
            for (rj, &j) in order.iter().enumerate() {
                let entry = cols[i][j];
                if rj == ci {
                    ok &= entry == 1;
                } else if rj < ci {
                    ok &= entry == 0;
                }
            }
        }
        let matrix = (0..d).map(|j| (0..d).map(|i| cols[i][j]).collect()).collect();
        (matrix, ok)
    } else {
        (Vec::new(), false)
    };
    Ok(PhiAnalysis {
        p,
        n: dom.n,
        places: dom.places.clone(),
        phi_orders,
        omega_orders,
        interlacing,
        target_dimension,
        phi_rank,
        big_phi_rank,
        matrix,
        unitriangular,
    })
}

/// Row-reduce a copy of `rows` over `F_p`, returning the echelon rows and pivot columns.
fn echelon_mod_p(rows: &[Vec<u64>], p: u64) -> (Vec<Vec<u64>>, Vec<usize>) {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        let Some(pr) = (row..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(row, pr);
        let inv = mod_inv(m[row][c], p).expect("nonzero mod p");
        for x in m[row].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..m.len() {
            if i != row && m[i][c] != 0 {
                let f = m[i][c];
                let pivot_row = m[row].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x = (*x + p - f * y % p) % p;
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    m.truncate(row);
    (m, pivots)
}

/// Rank over `F_p`.
pub fn rank_mod_p(rows: &[Vec<u64>], p: u64) -> usize {
    echelon_mod_p(rows, p).1.len()
}

/// Coefficients `c` with `sum c_i basis_i = v` over `F_p`.
fn solve_in_span(basis: &[Vec<u64>], v: &[u64], p: u64) -> Result<Vec<u64>> {
    // Columns = basis vectors, augmented by v; reduce the transposed system.
    let d = basis.len();
    let len = v.len();
    let rows: Vec<Vec<u64>> = (0..len)
        .map(|r| {
            let mut row: Vec<u64> = basis.iter().map(|b| b[r] % p).collect();
            row.push(v[r] % p);
            row
        })
        .collect();
    let (m, pivots) = echelon_mod_p(&rows, p);
    if pivots.contains(&d) {
        return Err(Error::NotInSpan("vector is not in the span of the φ-images".into()));
    }
    let mut sol = vec![0u64; d];
    for (row, &c) in m.iter().zip(&pivots) {
        sol[c] = row[d];
    }
    Ok(sol)
}

/// `φ(1) = ω(1) = 0` helper for callers that need the identity input.
pub fn identity_input(p: u32, n: u32) -> Result<PhiInput> {
    PhiInput::new(TowerElem::one(RingId::cyclo(p, n.saturating_sub(1))?), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_mod_p2_is_invisible() {
        let dom = build_domain(5, 2).unwrap();
        let big = dom.combine(&vec![4; dom.basis.len()]).unwrap();
        for b in dom.basis.iter().chain([&big]) {
            assert_eq!(phi_small(b).unwrap(), phi_small_exact(&b.eps, b).unwrap());
            assert_eq!(omega(b).unwrap(), omega_exact(&b.eps, b).unwrap());
        }
    }

    #[test]
    fn p3_domain() {
        let dom = build_domain(3, 2).unwrap();
        assert_eq!(dom.places, vec![6]);
        let an = analyze(&dom).unwrap();
        assert!(an.interlacing && an.unitriangular && an.surjective() && an.phi_injective(), "{an:?}");
        for k in &dom.kernel {
            assert!(phi_big(k).unwrap().is_zero());
        }
        // Reduction mod p^2 does not change the values.
        for b in &dom.basis {
            assert_eq!(phi_small(b).unwrap(), phi_small_exact(&b.eps, b).unwrap());
            assert_eq!(omega(b).unwrap(), omega_exact(&b.eps, b).unwrap());
        }
        let one = identity_input(3, 2).unwrap();
        assert!(phi_small(&one).unwrap().is_zero());
        assert!(omega(&one).unwrap().is_zero());
    }
}
