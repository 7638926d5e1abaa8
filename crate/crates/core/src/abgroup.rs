//! Finite abelian p-groups: presentations, Smith normal form, cyclic
//! decomposition of quotients, and multiplicative echelon forms of subgroups
//! of the 1-unit group of `F_p[t]/t^n`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{ipow, mod_inv, order_exponent, vp};
use crate::error::{Error, Result};
use crate::fpfilter::{mul_trunc, FpFilterElem};

/// Exponent coordinates of a group element on a basis, each reduced mod the basis order.
pub type ExpVector = Vec<u64>;

/// `⊕ Z/p^{e_i}` with labelled generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PGroupPresentation {
    /// The prime.
    pub p: u64,
    /// Generator labels.
    pub labels: Vec<usize>,
    /// Generator orders as exponents of p.
    pub order_exps: Vec<u32>,
}

impl PGroupPresentation {
    /// Presentation from labels and order exponents.
    pub fn new(p: u64, labels: Vec<usize>, order_exps: Vec<u32>) -> Self {
        assert_eq!(labels.len(), order_exps.len());
        Self { p, labels, order_exps }
    }

    /// Presentation of the group spanned by a unit basis.
    pub fn from_basis(b: &crate::fpfilter::UnitBasis) -> Self {
        Self::new(b.p as u64, b.entries.iter().map(|e| e.label).collect(), b.order_exps())
    }

    /// `log_p` of the group order.
    pub fn log_order(&self) -> u32 {
        self.order_exps.iter().sum()
    }

    /// Rank.
    pub fn rank(&self) -> usize {
        self.order_exps.len()
    }
}

/// Smith normal form `U·M·V = D` with unimodular `U`, `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snf {
    /// Left transform.
    pub u: Vec<Vec<BigInt>>,
    /// Diagonal form with `d_1 | d_2 | ...`, nonnegative.
    pub d: Vec<Vec<BigInt>>,
    /// Right transform.
    pub v: Vec<Vec<BigInt>>,
}

impl Snf {
    /// The diagonal entries.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.len().min(self.d.first().map_or(0, Vec::len))).map(|i| self.d[i][i].clone()).collect()
    }
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

/// Smith normal form over the integers with tracked transforms.
pub fn snf(m: &[Vec<BigInt>]) -> Snf {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);

    let swap_rows = |a: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
        a.swap(i, j);
        u.swap(i, j);
    };
    let swap_cols = |a: &mut Vec<Vec<BigInt>>, v: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in v.iter_mut() {
            row.swap(i, j);
        }
    };
    // row_i -= q·row_j
    let row_op = |a: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, i: usize, j: usize, q: &BigInt| {
        for c in 0..a[0].len() {
            let t = &a[j][c] * q;
            a[i][c] -= t;
        }
        for c in 0..u[0].len() {
            let t = &u[j][c] * q;
            u[i][c] -= t;
        }
    };
    // col_i -= q·col_j
    let col_op = |a: &mut Vec<Vec<BigInt>>, v: &mut Vec<Vec<BigInt>>, i: usize, j: usize, q: &BigInt| {
        for row in a.iter_mut() {
            let t = &row[j] * q;
            row[i] -= t;
        }
        for row in v.iter_mut() {
            let t = &row[j] * q;
            row[i] -= t;
        }
    };

    for t in 0..rows.min(cols) {
        loop {
            // Smallest nonzero entry of the trailing block becomes the pivot.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return finish(a, u, v);
            };
            swap_rows(&mut a, &mut u, t, bi);
            swap_cols(&mut a, &mut v, t, bj);
            let mut clean = true;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    row_op(&mut a, &mut u, i, t, &q);
                    clean &= a[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    col_op(&mut a, &mut v, j, t, &q);
                    clean &= a[t][j].is_zero();
                }
            }
            if !clean {
                continue;
            }
            // Enforce divisibility of the remaining block by the pivot.
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].mod_floor(&a[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_op(&mut a, &mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }
    finish(a, u, v)
}

fn finish(d: Vec<Vec<BigInt>>, u: Vec<Vec<BigInt>>, v: Vec<Vec<BigInt>>) -> Snf {
    Snf { u, d, v }
}

/// Cyclic orders (descending, trivial factors dropped) of the cokernel of the
/// integer relation matrix whose rows are relations among `cols` generators.
pub fn cokernel_orders(rows: &[Vec<BigInt>], cols: usize) -> Vec<BigInt> {
    if rows.is_empty() {
        return vec![BigInt::zero(); cols];
    }
    let s = snf(rows);
    let diag = s.diagonal();
    let mut out: Vec<BigInt> = diag.into_iter().filter(|d| !d.is_one()).collect();
    out.extend(std::iter::repeat_n(BigInt::zero(), cols - rows.len().min(cols)));
    out.sort_by(|a, b| {
        // Zero stands for an infinite cyclic factor and sorts first.
        match (a.is_zero(), b.is_zero()) {
            (true, true) => std::cmp::Ordering::Equal,
            (true, false) => std::cmp::Ordering::Less,
            (false, true) => std::cmp::Ordering::Greater,
            _ => b.cmp(a),
        }
    });
    out
}

/// Cyclic decomposition of `ambient / <subgroup>` by elimination over the
/// local ring `Z/p^E` with `E` the ambient exponent; orders sorted descending.
pub fn quotient_structure(ambient: &PGroupPresentation, subgroup: &[ExpVector]) -> Vec<u64> {
    let m = ambient.rank();
    let e_max = ambient.order_exps.iter().copied().max().unwrap_or(0);
    if m == 0 || e_max == 0 {
        return Vec::new();
    }
    let p = ambient.p;
    let q = ipow(p, e_max);
    let mut rows: Vec<Vec<u64>> = subgroup
        .iter()
        .map(|v| {
            assert_eq!(v.len(), m, "exponent vector length must equal the ambient rank");
            v.iter().map(|&x| x % q).collect()
        })
        .collect();
    for (i, &e) in ambient.order_exps.iter().enumerate() {
        let mut r = vec![0u64; m];
        r[i] = ipow(p, e) % q;
        rows.push(r);
    }
    let vals = local_smith_valuations(&mut rows, m, p, e_max);
    let mut out: Vec<u64> = vals.into_iter().filter(|&v| v > 0).map(|v| ipow(p, v)).collect();
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Diagonal valuations of the Smith form over `Z/p^E`; unpivoted columns count as `E`.
fn local_smith_valuations(rows: &mut [Vec<u64>], m: usize, p: u64, e_max: u32) -> Vec<u32> {
    let q = ipow(p, e_max) as u128;
    let val = |x: u64| if x == 0 { e_max } else { vp(x, p).min(e_max) };
    let mut col_done = vec![false; m];
    let mut row_done = vec![false; rows.len()];
    let mut out = Vec::with_capacity(m);
    loop {
        let mut best: Option<(usize, usize, u32)> = None;
        for (i, r) in rows.iter().enumerate() {
            if row_done[i] {
                continue;
            }
            for (j, &x) in r.iter().enumerate() {
                if col_done[j] || x == 0 {
                    continue;
                }
                let v = val(x);
                if best.is_none_or(|b| v < b.2) {
                    best = Some((i, j, v));
                    if v == 0 {
                        break;
                    }
                }
            }
            if best.is_some_and(|b| b.2 == 0) {
                break;
            }
        }
        let Some((pi, pj, v)) = best else { break };
        let pv = ipow(p, v) as u128;
        let unit = (rows[pi][pj] as u128 / pv) as u64;
        let unit_inv = mod_inv(unit, q as u64).expect("unit mod p^E") as u128;
        let prow: Vec<u64> = rows[pi].iter().map(|&x| (x as u128 * unit_inv % q) as u64).collect();
        for (i, r) in rows.iter_mut().enumerate() {
            if i == pi || row_done[i] || r[pj] == 0 {
                continue;
            }
            let f = (r[pj] as u128 / pv) % q;
            for (x, &y) in r.iter_mut().zip(&prow) {
                *x = ((*x as u128 + q * q - f * y as u128 % q) % q) as u64;
            }
        }
        row_done[pi] = true;
        col_done[pj] = true;
        out.push(v);
    }
    out.extend(col_done.iter().filter(|d| !**d).map(|_| e_max));
    out
}

/// Cyclic decomposition via the integer Smith form of `[subgroup; diag(p^{e_i})]`.
pub fn quotient_structure_snf(ambient: &PGroupPresentation, subgroup: &[ExpVector]) -> Vec<u64> {
    let m = ambient.rank();
    if m == 0 {
        return Vec::new();
    }
    let mut rows: Vec<Vec<BigInt>> = subgroup.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()).collect();
    for (i, &e) in ambient.order_exps.iter().enumerate() {
        let mut r = vec![BigInt::zero(); m];
        r[i] = BigInt::from(ipow(ambient.p, e));
        rows.push(r);
    }
    cokernel_orders(&rows, m).into_iter().map(|d| d.to_u64().expect("finite p-group order")).collect()
}

/// Cyclic orders of the subgroup `H` generated by `gens` inside the finite
/// p-group `G = Z^cols / <relations>`, descending.
///
/// Uses `|p^j H| = |G| / |G / p^j H|`: the number of cyclic factors of `H`
/// of order at least `p^{j+1}` is `log_p |p^j H| - log_p |p^{j+1} H|`.
pub fn subgroup_structure(relations: &[Vec<BigInt>], gens: &[Vec<BigInt>], cols: usize, p: u64) -> Vec<u64> {
    let log_coker = |extra: &[Vec<BigInt>]| -> u32 {
        let mut rows = relations.to_vec();
        rows.extend_from_slice(extra);
        if rows.is_empty() {
            return 0;
        }
        cokernel_orders(&rows, cols)
            .iter()
            .map(|d| {
                let d = d.to_u64().expect("finite p-group");
                assert!(d != 0, "relations must present a finite group");
                vp(d, p)
            })
            .sum()
    };
    let log_g = log_coker(&[]);
    // log |p^j H| for j = 0, 1, ... until it vanishes.
    let mut logs = Vec::new();
    let mut scale = BigInt::one();
    loop {
        let scaled: Vec<Vec<BigInt>> = gens.iter().map(|g| g.iter().map(|x| x * &scale).collect()).collect();
        let l = log_g - log_coker(&scaled);
        logs.push(l);
        if l == 0 {
            break;
        }
        scale *= BigInt::from(p);
    }
    let at_least: Vec<u32> = logs.windows(2).map(|w| w[0] - w[1]).collect();
    let mut out = Vec::new();
    for (j, &c) in at_least.iter().enumerate() {
        let next = at_least.get(j + 1).copied().unwrap_or(0);
        out.extend(std::iter::repeat_n(ipow(p, j as u32 + 1), (c - next) as usize));
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// One pivot of an [`EchelonState`].
#[derive(Debug, Clone)]
pub struct Pivot {
    /// The normalised pivot element: `1 + t^v + O(t^{v+1})`.
    pub elem: FpFilterElem,
    /// `g^{-c} - 1` for `c = 1, 2, ...`, filled on demand.
    neg_powers: Vec<Vec<u32>>,
    /// `g^{-1}`.
    inverse: FpFilterElem,
    /// Exponents over the inserted generators, when tracked.
    pub provenance: Option<Vec<u64>>,
}

impl Pivot {
    fn new(elem: FpFilterElem, provenance: Option<Vec<u64>>) -> Self {
        let inverse = elem.inverse().expect("pivot is a 1-unit");
        Self { elem, neg_powers: Vec::new(), inverse, provenance }
    }

    fn neg_power_minus_one(&mut self, c: u32) -> &[u32] {
        while self.neg_powers.len() < c as usize {
            let next = match self.neg_powers.last() {
                None => self.inverse.clone(),
                Some(prev) => {
                    let mut v = prev.clone();
                    v[0] = 1;
                    FpFilterElem::from_t_coeffs(self.inverse.p(), self.inverse.modulus_exp(), &to_u64(&v))
                        .mul(&self.inverse)
                }
            };
            let mut c = next.t_coeffs().to_vec();
            c[0] = 0;
            self.neg_powers.push(c);
        }
        &self.neg_powers[c as usize - 1]
    }
}

fn to_u64(v: &[u32]) -> Vec<u64> {
    v.iter().map(|&x| x as u64).collect()
}

/// Result of inserting an element into an [`EchelonState`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsertOutcome {
    /// The element already lay in the span.
    Absorbed,
    /// New pivots were installed at these valuations (the element and its p-power chain).
    NewPivots(Vec<usize>),
}

/// Multiplicative echelon form of a subgroup of the 1-units of `F_p[t]/t^n`.
///
/// Pivots have pairwise distinct leading valuations and leading coefficient
/// one. Whenever a pivot is installed its p-th power is inserted as well, so
/// the pivot set equals the set of valuations of nontrivial subgroup
/// elements and the subgroup has order `p^{#pivots}`.
#[derive(Debug, Clone)]
pub struct EchelonState {
    p: u32,
    n: usize,
    pivots: BTreeMap<usize, Pivot>,
    processed: usize,
    track: Option<usize>,
    relations: Vec<Vec<u64>>,
    exponent: u64,
}

impl EchelonState {
    /// Empty state for 1-units of `F_p[t]/t^n`.
    pub fn new(p: u32, n: usize) -> Self {
        let exponent = ipow(p as u64, order_exponent(1, p as u64, n));
        Self { p, n, pivots: BTreeMap::new(), processed: 0, track: None, relations: Vec::new(), exponent }
    }

    /// Empty state recording, for every pivot and absorbed element, its
    /// exponents over `num_gens` inserted generators.
    pub fn with_provenance(p: u32, n: usize, num_gens: usize) -> Self {
        let mut s = Self::new(p, n);
        s.track = Some(num_gens);
        s
    }

    /// The prime.
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Truncation exponent `n`.
    pub fn modulus_exp(&self) -> usize {
        self.n
    }

    /// Number of insertions so far.
    pub fn processed(&self) -> usize {
        self.processed
    }

    /// Sorted pivot valuations.
    pub fn pivot_valuations(&self) -> Vec<usize> {
        self.pivots.keys().copied().collect()
    }

    /// Pivots by valuation.
    pub fn pivots(&self) -> impl Iterator<Item = (&usize, &Pivot)> {
        self.pivots.iter()
    }

    /// `log_p` of the subgroup order.
    pub fn log_order(&self) -> usize {
        self.pivots.len()
    }

    /// Tracked relations: exponent vectors over generators whose product is 1.
    pub fn relations(&self) -> &[Vec<u64>] {
        &self.relations
    }

    /// Exponent of the ambient 1-unit group.
    pub fn group_exponent(&self) -> u64 {
        self.exponent
    }

    fn check(&self, u: &FpFilterElem) -> Result<()> {
        if u.p() != self.p || u.modulus_exp() != self.n {
            return Err(Error::RingMismatch("element and echelon live in different rings".into()));
        }
        if !u.is_one_unit() {
            return Err(Error::InvalidParameter("echelon elements must be 1-units".into()));
        }
        Ok(())
    }

    fn combine(&self, acc: &mut [u64], src: &[u64], factor: u64) {
        let e = self.exponent as u128;
        for (a, &s) in acc.iter_mut().zip(src) {
            *a = ((*a as u128 + s as u128 * factor as u128) % e) as u64;
        }
    }

    /// Insert an untracked element.
    pub fn insert(&mut self, u: &FpFilterElem) -> Result<InsertOutcome> {
        let prov = self.track.map(|k| vec![0u64; k]);
        self.insert_inner(u, prov)
    }

    /// Insert generator number `index` (tracked states).
    pub fn insert_generator(&mut self, u: &FpFilterElem, index: usize) -> Result<InsertOutcome> {
        let k = self.track.ok_or_else(|| Error::InvalidParameter("state does not track provenance".into()))?;
        if index >= k {
            return Err(Error::InvalidParameter(format!("generator index {index} out of range")));
        }
        let mut prov = vec![0u64; k];
        prov[index] = 1;
        self.insert_inner(u, Some(prov))
    }

    fn insert_inner(&mut self, u: &FpFilterElem, prov: Option<Vec<u64>>) -> Result<InsertOutcome> {
        self.check(u)?;
        self.processed += 1;
        let mut queue = vec![(u.clone(), prov)];
        let mut installed = Vec::new();
        while let Some((cur, prov)) = queue.pop() {
            let (res, prov) = self.reduce_mut(cur, prov);
            let v = res.lead_val();
            if v >= self.n {
                if let Some(pv) = prov {
                    if pv.iter().any(|&x| x != 0) {
                        self.relations.push(pv);
                    }
                }
                continue;
            }
            let lead = res.t_coeffs()[v] as u64;
            let e = mod_inv(lead, self.p as u64).expect("nonzero lead");
            let g = res.pow(e as u128);
            let prov = prov.map(|pv| {
                let mut z = vec![0u64; pv.len()];
                self.combine(&mut z, &pv, e);
                z
            });
            let frob = g.frobenius();
            let frob_prov = prov.as_ref().map(|pv| {
                let mut z = vec![0u64; pv.len()];
                self.combine(&mut z, pv, self.p as u64);
                z
            });
            self.pivots.insert(v, Pivot::new(g, prov));
            installed.push(v);
            if frob.lead_val() < self.n || frob_prov.as_ref().is_some_and(|pv| pv.iter().any(|&x| x != 0)) {
                queue.push((frob, frob_prov));
            }
        }
        Ok(if installed.is_empty() {
            InsertOutcome::Absorbed
        } else {
            installed.sort_unstable();
            InsertOutcome::NewPivots(installed)
        })
    }

    fn reduce_mut(&mut self, mut cur: FpFilterElem, mut prov: Option<Vec<u64>>) -> (FpFilterElem, Option<Vec<u64>>) {
        let (p, n) = (self.p, self.n);
        let exponent = self.exponent;
        loop {
            let v = cur.lead_val();
            if v >= n {
                return (cur, prov);
            }
            let Some(piv) = self.pivots.get_mut(&v) else {
                return (cur, prov);
            };
            let c = cur.t_coeffs()[v];
            let gm1 = piv.neg_power_minus_one(c);
            let prod = mul_trunc(gm1, cur.t_coeffs(), p, n);
            let sum: Vec<u64> = cur.t_coeffs().iter().zip(&prod).map(|(&a, &b)| ((a + b) % p) as u64).collect();
            cur = FpFilterElem::from_t_coeffs(p, n, &sum);
            if let (Some(pv), Some(gp)) = (prov.as_mut(), piv.provenance.as_ref()) {
                let neg = exponent - (c as u64 % exponent);
                for (a, &s) in pv.iter_mut().zip(gp) {
                    *a = ((*a as u128 + s as u128 * neg as u128) % exponent as u128) as u64;
                }
            }
        }
    }

    /// Reduce against the pivots; the result is 1 exactly for members.
    pub fn reduce(&self, u: &FpFilterElem) -> Result<FpFilterElem> {
        self.check(u)?;
        let mut cur = u.clone();
        loop {
            let v = cur.lead_val();
            if v >= self.n {
                return Ok(cur);
            }
            let Some(piv) = self.pivots.get(&v) else {
                return Ok(cur);
            };
            let c = cur.t_coeffs()[v];
            cur = cur.mul(&piv.inverse.pow(c as u128));
        }
    }

    /// Membership test.
    pub fn contains(&self, u: &FpFilterElem) -> Result<bool> {
        Ok(self.reduce(u)?.is_one())
    }

    /// Places `1..n` carrying no pivot.
    pub fn missing_places(&self) -> Vec<usize> {
        (1..self.n).filter(|v| !self.pivots.contains_key(v)).collect()
    }

    /// Cyclic decomposition of (1-units of `F_p[t]/t^n`) / (span).
    ///
    /// The quotient is generated by `b_k = 1 + t^k` at the missing places.
    /// Reducing `b_k^p = 1 + t^{kp}` against the pivots and the `b`'s
    /// gives `b_k^p ≡ prod_{k'>k} b_{k'}^{c_{k'}}` with digits `c < p`; the
    /// rows `p·e_k - c` form a triangular relation matrix of determinant
    /// `p^{#missing}` = quotient order, so they generate all relations.
    pub fn quotient(&self) -> QuotientStructure {
        let missing = self.missing_places();
        let idx: BTreeMap<usize, usize> = missing.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let p = self.p as u64;
        let mut rows = Vec::with_capacity(missing.len());
        for &k in &missing {
            let mut row = vec![BigInt::zero(); missing.len()];
            row[idx[&k]] = BigInt::from(p);
            let mut cur = FpFilterElem::one_plus_monomial(self.p, self.n, k * self.p as usize, 1);
            loop {
                let v = cur.lead_val();
                if v >= self.n {
                    break;
                }
                let c = cur.t_coeffs()[v];
                if let Some(piv) = self.pivots.get(&v) {
                    cur = cur.mul(&piv.inverse.pow(c as u128));
                } else {
                    let j = idx[&v];
                    row[j] -= BigInt::from(c);
                    cur = cur.mul(&FpFilterElem::binomial_power(self.p, self.n, v, 1, -(c as i64)));
                }
            }
            rows.push(row);
        }
        let orders: Vec<u64> = if rows.is_empty() {
            Vec::new()
        } else {
            cokernel_orders(&rows, missing.len()).into_iter().map(|d| d.to_u64().expect("finite order")).collect()
        };
        QuotientStructure { missing, relation_rows: rows, cyclic_orders: orders }
    }
}

/// Quotient of the full 1-unit group by an echelonised subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientStructure {
    /// Places without pivot; `1 + t^k` at these places generate the quotient.
    pub missing: Vec<usize>,
    /// Relation rows over the missing-place generators.
    pub relation_rows: Vec<Vec<BigInt>>,
    /// Cyclic orders, descending.
    pub cyclic_orders: Vec<u64>,
}

impl QuotientStructure {
    /// `log_p` of the quotient order.
    pub fn log_order(&self, p: u64) -> u32 {
        self.cyclic_orders.iter().map(|&o| vp(o, p)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn snf_examples() {
        let s = snf(&big(&[&[2, 0], &[0, 3]]));
        assert_eq!(s.diagonal(), vec![BigInt::from(1), BigInt::from(6)]);
        let s = snf(&big(&[&[1, 0], &[0, 1]]));
        assert_eq!(s.diagonal(), vec![BigInt::one(), BigInt::one()]);
    }

    #[test]
    fn quotient_examples() {
        let amb = PGroupPresentation::new(3, vec![1, 2], vec![3, 2]);
        assert_eq!(quotient_structure(&amb, &[]), vec![27, 9]);
        assert_eq!(quotient_structure(&amb, &[vec![1, 0], vec![0, 1]]), Vec::<u64>::new());
        assert_eq!(quotient_structure(&amb, &[vec![3, 1]]), vec![27]);
        assert_eq!(quotient_structure_snf(&amb, &[vec![3, 1]]), vec![27]);
    }

    #[test]
    fn subgroup_examples() {
        // G = Z/27 x Z/9; H = <(3, 1)> has order 9 and is cyclic.
        let rel = big(&[&[27, 0], &[0, 9]]);
        assert_eq!(subgroup_structure(&rel, &big(&[&[3, 1]]), 2, 3), vec![9]);
        assert_eq!(subgroup_structure(&rel, &big(&[&[9, 0], &[0, 3]]), 2, 3), vec![3, 3]);
        assert_eq!(subgroup_structure(&rel, &[], 2, 3), Vec::<u64>::new());
    }

    #[test]
    fn echelon_absorbs_powers() {
        let y = crate::fpfilter::y_element(5, 12);
        let u = FpFilterElem::one(5, 12).add(&y.mul(&y));
        let mut st = EchelonState::new(5, 12);
        assert_eq!(st.insert(&FpFilterElem::one(5, 12)).unwrap(), InsertOutcome::Absorbed);
        assert!(matches!(st.insert(&u).unwrap(), InsertOutcome::NewPivots(_)));
        assert_eq!(st.insert(&u.pow(2)).unwrap(), InsertOutcome::Absorbed);
        assert_eq!(st.pivot_valuations(), vec![2, 10]);
    }
}
