//! The plus part of the unit cokernel `V_n^+`: its cyclic structure, the
//! sequence `r_k`, missed places per strip, the maps `π` and `α`, and the
//! derived class-group and Picard-group statements.
//!
//! Two models are supported:
//!
//! * `Km`: the 1-units of `F_p[x]/(x-1)^{p^n}` modulo the images of the real
//!   cyclotomic units of `Z[ζ_n]` under `ζ -> x`;
//! * `Tower`: the 1-units of `F_p[x]/(x-1)^{p^n - 1}` modulo `g` of the
//!   embedded real cyclotomic units of `Z[ζ_{n-1}]`.
//!
//! Plus 1-units are rewritten in `w = x + x^{-1} - 2`, where they form the
//! full 1-unit group of `F_p[[w]]/w^M`, `M = ceil(N/2)`; `w^k` sits at the
//! `(x-1)`-adic place `2k`. The subgroup is echelonised by leading place.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::abgroup::{quotient_structure, subgroup_structure, EchelonState, PGroupPresentation, QuotientStructure};
use crate::arith::{ipow, is_prime, vp};
use crate::bernoulli::irregularity;
use crate::error::{Error, Result};
use crate::fpfilter::{dlog, unit_basis, w_model_len, BasisPart, FpFilterElem};
use crate::units::{cyclotomic_indices, cyclotomic_unit, tilde_w, xi_w_image};

/// Largest `w`-length handled by the echelon.
pub const MAX_W_LEN: usize = 4000;

/// Above this `w`-length the dlog cross-check of the structure is skipped.
const DLOG_CHECK_LEN: usize = 200;

/// Generators whose closed-form image is re-derived by a second route.
const IMAGE_CHECK_SAMPLE: usize = 12;

/// Which model of `V_n^+` to compute in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `F_p[x]/(x-1)^{p^n}` with level-n units.
    Km,
    /// `F_p[x]/(x-1)^{p^n - 1}` with embedded level-(n-1) units.
    Tower,
}

impl Model {
    /// Modulus exponent `N` of the D-ring.
    pub fn modulus_exp(self, p: u32, n: u32) -> usize {
        let q = ipow(p as u64, n) as usize;
        match self {
            Model::Km => q,
            Model::Tower => q - 1,
        }
    }

    /// Level of the cyclotomic units used.
    pub fn unit_level(self, n: u32) -> u32 {
        match self {
            Model::Km => n,
            Model::Tower => n - 1,
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Km => "km",
            Model::Tower => "tower",
        })
    }
}

/// Knobs for the echelon scan.
#[derive(Debug, Clone, Default)]
pub struct VPlusConfig {
    /// Stop after this many consecutive insertions without a new pivot
    /// (default `2N`).
    pub window: Option<usize>,
    /// Wall-clock budget; exceeding it yields an unsaturated report.
    pub budget: Option<Duration>,
    /// Insert every generator regardless of the window.
    pub exhaustive: bool,
}

/// Instantiated Picard-group formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicFormula {
    /// The group described.
    pub group: String,
    /// The formula in terms of `p`, `r(p)` and `r_1`.
    pub formula: String,
    /// The formula evaluated on the computed data.
    pub value: String,
    /// Cyclic orders of the evaluated group, descending.
    pub cyclic_orders: Vec<u64>,
}

/// Statements derived from the computed structure, not independently verified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derived {
    /// Which class group `class_group` describes.
    pub class_group_of: String,
    /// Cyclic orders of the p-part of that class group.
    pub class_group: Vec<u64>,
    /// Picard group of `Z C_{p^n}` (p-part), for `n <= 2`.
    pub pic_formula: Option<PicFormula>,
    /// `r(p)` from Bernoulli numbers, for comparison with `r_0`.
    pub r_p_bernoulli: usize,
    /// What these lines rest on.
    pub conditional_on: String,
}

/// Result of a `V_n^+` computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VPlusReport {
    /// The prime.
    pub p: u32,
    /// The index `n`.
    pub n: u32,
    /// Model used.
    pub model: Model,
    /// Modulus exponent `N` of the D-ring.
    #[serde(rename = "N")]
    pub modulus_exp: usize,
    /// Cyclic orders, descending; empty for the trivial group.
    pub cyclic_orders: Vec<u64>,
    /// `r_0, ..., r_{n-1}`.
    pub r: Vec<u32>,
    /// Missed `(x-1)`-adic places grouped by strip.
    pub missed: BTreeMap<u32, Vec<u64>>,
    /// Whether the pivot set was shown stable (window) or all generators were used.
    pub saturated: bool,
    /// Whether every generator of the family was inserted.
    pub exhaustive: bool,
    /// Size of the generator family.
    pub generators_total: usize,
    /// Generators actually inserted.
    pub generators_inserted: usize,
    /// Conditional consequences.
    pub derived: Derived,
}

impl VPlusReport {
    /// `log_p |V_n^+|`.
    pub fn log_order(&self) -> u32 {
        self.cyclic_orders.iter().map(|&o| vp(o, self.p as u64)).sum()
    }

    /// Cyclic orders predicted from `r` by `⊕_j (Z/p^{n-j})^{r_j - r_{j-1}}`.
    pub fn orders_from_r(&self) -> Vec<u64> {
        orders_from_r(self.p, self.n, &self.r)
    }

    /// `Err(SaturationUnverified)` unless the report is saturated.
    pub fn require_saturated(&self) -> Result<&Self> {
        if self.saturated {
            Ok(self)
        } else {
            Err(Error::SaturationUnverified(format!(
                "p = {}, n = {}: pivot set not stable after {} of {} generators",
                self.p, self.n, self.generators_inserted, self.generators_total
            )))
        }
    }
}

/// `⊕_j (Z/p^{n-j})^{r_j - r_{j-1}}`, descending; empty if `r` decreases.
pub fn orders_from_r(p: u32, n: u32, r: &[u32]) -> Vec<u64> {
    let mut out = Vec::new();
    let mut prev = 0u32;
    for (j, &rj) in r.iter().enumerate() {
        if rj < prev {
            return Vec::new();
        }
        out.extend(std::iter::repeat_n(ipow(p as u64, n - j as u32), (rj - prev) as usize));
        prev = rj;
    }
    out
}

/// A finished computation with the data needed for `π`, `α` and membership.
#[derive(Debug, Clone)]
pub struct VPlusComputation {
    /// The report.
    pub report: VPlusReport,
    /// Echelon of the unit images in `F_p[[w]]/w^M`.
    pub echelon: EchelonState,
    /// Quotient presentation over the missing places.
    pub quotient: QuotientStructure,
}

impl VPlusComputation {
    /// Length `M` of the `w`-model.
    pub fn w_len(&self) -> usize {
        self.echelon.modulus_exp()
    }

    /// Whether a `w`-model 1-unit is trivial in `V_n^+`.
    pub fn is_trivial_class(&self, v: &FpFilterElem) -> Result<bool> {
        self.echelon.contains(v)
    }

    /// Cyclic orders of `ker(π: V_n^+ -> V_{n-1}^+)`: the subgroup generated by
    /// the missing-place generators `1 + w^k` with `k` at least the `w`-length
    /// of the smaller model.
    pub fn pi_kernel_orders(&self) -> Result<Vec<u64>> {
        let r = &self.report;
        if r.n < 2 {
            return Err(Error::InvalidParameter("π needs n >= 2".into()));
        }
        let m_small = w_model_len(r.model.modulus_exp(r.p, r.n - 1));
        let cols = self.quotient.missing.len();
        let gens: Vec<Vec<BigInt>> = self
            .quotient
            .missing
            .iter()
            .enumerate()
            .filter(|(_, &k)| k >= m_small)
            .map(|(i, _)| {
                let mut g = vec![BigInt::from(0); cols];
                g[i] = BigInt::from(1);
                g
            })
            .collect();
        Ok(subgroup_structure(&self.quotient.relation_rows, &gens, cols, r.p as u64))
    }
}

/// `π`: truncate a `w`-model representative from `V_n^+` to `V_{n-1}^+`.
pub fn pi_map(v: &FpFilterElem, p: u32, n: u32, model: Model) -> Result<FpFilterElem> {
    if n < 2 {
        return Err(Error::InvalidParameter("π needs n >= 2".into()));
    }
    let m_big = w_model_len(model.modulus_exp(p, n));
    if v.p() != p || v.modulus_exp() != m_big {
        return Err(Error::RingMismatch(format!("π expects an element of F_{p}[[w]]/w^{m_big}")));
    }
    Ok(v.truncate(w_model_len(model.modulus_exp(p, n - 1))))
}

/// `α`: `x -> x^p` from `V_{n-1}^+` to `V_n^+` on `w`-model representatives
/// of the `Km` model. In characteristic p, `w -> w^p`.
pub fn alpha_map(v: &FpFilterElem, p: u32, n: u32) -> Result<FpFilterElem> {
    if n < 2 {
        return Err(Error::InvalidParameter("α needs n >= 2".into()));
    }
    let m_small = w_model_len(Model::Km.modulus_exp(p, n - 1));
    if v.p() != p || v.modulus_exp() != m_small {
        return Err(Error::RingMismatch(format!("α expects an element of F_{p}[[w]]/w^{m_small}")));
    }
    v.substitute_t_pow_p(w_model_len(Model::Km.modulus_exp(p, n)))
}

/// Validate `(p, n, model)` and return `(N, M)`.
fn check_scale(p: u32, n: u32, model: Model) -> Result<(usize, usize)> {
    if p < 3 || !is_prime(p as u64) {
        return Err(Error::InvalidParameter(format!("p = {p} is not an odd prime")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if (n as f64 + 1.0) * (p as f64).log2() > 40.0 {
        return Err(Error::UnsupportedScale(format!("p^{} is too large", n + 1)));
    }
    let big_n = model.modulus_exp(p, n);
    let m = w_model_len(big_n);
    if m > MAX_W_LEN {
        return Err(Error::UnsupportedScale(format!(
            "w-length {m} for p = {p}, n = {n} exceeds the supported {MAX_W_LEN}"
        )));
    }
    Ok((big_n, m))
}

/// Strip of an `(x-1)`-adic place `s >= 2`: the `j` with `p^j < s < p^{j+1}`.
pub fn strip_of(p: u32, s: u64) -> u32 {
    let mut j = 0;
    while ipow(p as u64, j + 1) < s {
        j += 1;
    }
    j
}

/// `V_n^+` in the given model with default settings.
pub fn v_plus(p: u32, n: u32, model: Model) -> Result<VPlusReport> {
    compute(p, n, model, &VPlusConfig::default()).map(|c| c.report)
}

/// Full computation, keeping the echelon for further queries.
pub fn compute(p: u32, n: u32, model: Model, cfg: &VPlusConfig) -> Result<VPlusComputation> {
    let (big_n, m) = check_scale(p, n, model)?;
    let level = model.unit_level(n);
    let big_p = ipow(p as u64, level + 1);
    let indices = cyclotomic_indices(p, level)?;
    check_images(p, level, model, big_n, m, &indices)?;

    let started = Instant::now();
    let window = cfg.window.unwrap_or(2 * big_n).max(1);
    let mut ech = EchelonState::new(p, m);
    let full = m.saturating_sub(1);
    let mut since_new = 0usize;
    let mut inserted = 0usize;
    let mut saturated = false;
    let mut out_of_budget = false;
    for &a in &indices {
        if ech.log_order() == full {
            saturated = true;
            break;
        }
        if !cfg.exhaustive && since_new >= window {
            saturated = true;
            break;
        }
        if cfg.budget.is_some_and(|b| started.elapsed() > b) {
            out_of_budget = true;
            break;
        }
        let img = xi_w_image(p, big_p, a, m);
        inserted += 1;
        if ech.insert(&img)? == crate::abgroup::InsertOutcome::Absorbed {
            since_new += 1;
        } else {
            since_new = 0;
        }
    }
    let exhaustive = inserted == indices.len();
    if exhaustive && !out_of_budget {
        saturated = true;
    }

    let quotient = ech.quotient();
    if m <= DLOG_CHECK_LEN {
        cross_check_structure(&ech, &quotient)?;
    }

    let mut missed: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    let mut r = vec![0u32; n as usize];
    for &k in &quotient.missing {
        let s = 2 * k as u64;
        let j = strip_of(p, s);
        if (j as usize) < r.len() {
            r[j as usize] += 1;
        }
        missed.entry(j).or_default().push(s);
    }
    let derived = derive(p, n, &quotient.cyclic_orders, &r)?;
    let report = VPlusReport {
        p,
        n,
        model,
        modulus_exp: big_n,
        cyclic_orders: quotient.cyclic_orders.clone(),
        r,
        missed,
        saturated,
        exhaustive,
        generators_total: indices.len(),
        generators_inserted: inserted,
        derived,
    };
    Ok(VPlusComputation { report, echelon: ech, quotient })
}

/// Re-derive a sample of generator images by a second route: the
/// `(x-1)`-adic closed form (Km) or the exact embedding (Tower, small p).
fn check_images(p: u32, level: u32, model: Model, big_n: usize, m: usize, indices: &[u64]) -> Result<()> {
    let big_p = ipow(p as u64, level + 1);
    let exact_ok = big_p <= 49;
    for &a in indices.iter().take(IMAGE_CHECK_SAMPLE) {
        let u = cyclotomic_unit(p, level, a)?;
        let t_image = match model {
            Model::Km => u.image(big_n)?,
            Model::Tower if exact_ok => u.tower_image_exact()?,
            Model::Tower => u.tower_image()?,
        };
        if tilde_w(&t_image)? != xi_w_image(p, big_p, a, m) {
            return Err(Error::InternalMismatch(format!("two routes to the image of ξ_{a} disagree")));
        }
    }
    Ok(())
}

/// Compare the echelon quotient with dlog coordinates and local elimination.
fn cross_check_structure(ech: &EchelonState, quotient: &QuotientStructure) -> Result<()> {
    let basis = unit_basis(ech.p(), ech.modulus_exp(), BasisPart::Full);
    let ambient = PGroupPresentation::from_basis(&basis);
    let gens = ech.pivots().map(|(_, piv)| dlog(&piv.elem, &basis)).collect::<Result<Vec<_>>>()?;
    let orders = quotient_structure(&ambient, &gens);
    if orders != quotient.cyclic_orders {
        return Err(Error::InternalMismatch(format!(
            "echelon quotient {:?} differs from dlog quotient {:?}",
            quotient.cyclic_orders, orders
        )));
    }
    Ok(())
}

fn power_term(p: u32, e: u32, mult: i64) -> Option<String> {
    match mult {
        0 => None,
        1 if e == 1 => Some(format!("Z/{p}")),
        _ if e == 1 => Some(format!("(Z/{p})^{mult}")),
        1 => Some(format!("Z/{p}^{e}")),
        _ => Some(format!("(Z/{p}^{e})^{mult}")),
    }
}

fn derive(p: u32, n: u32, orders: &[u64], r: &[u32]) -> Result<Derived> {
    let r_p_bernoulli = irregularity(p as u64)?.r;
    let rp = r[0] as i64;
    let pic_formula = match n {
        1 => Some(PicFormula {
            group: format!("Pic^(p) Z C_{p}"),
            formula: "(Z/p)^{r(p)}".into(),
            value: power_term(p, 1, rp).unwrap_or_else(|| "0".into()),
            cyclic_orders: vec![p as u64; rp as usize],
        }),
        2 => {
            let a = (p as i64 - 3) / 2 + r[1] as i64 - rp;
            let b = 2 * rp;
            let value = [power_term(p, 2, b), power_term(p, 1, a)].into_iter().flatten().collect::<Vec<_>>();
            let mut cyc = vec![(p as u64).pow(2); b as usize];
            cyc.extend(std::iter::repeat_n(p as u64, a.max(0) as usize));
            Some(PicFormula {
                group: format!("Pic^(p) Z C_{{{p}^2}}"),
                formula: "(Z/p)^{(p-3)/2 + r_1 - r(p)} + (Z/p^2)^{2 r(p)}".into(),
                value: if value.is_empty() { "0".into() } else { value.join(" + ") },
                cyclic_orders: cyc,
            })
        }
        _ => None,
    };
    Ok(Derived {
        class_group_of: format!("Cl^(p) Q(zeta_{{{p}^{n}}})"),
        class_group: orders.to_vec(),
        pic_formula,
        r_p_bernoulli,
        conditional_on: "the isomorphism between the character group of V_n^+ and the p-part of the class group, \
                         and the Picard-group formulas built on it; not computed independently, r(p) taken as r_0"
            .into(),
    })
}

/// Missed places at a level, grouped by strip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissedReport {
    /// The prime.
    pub p: u32,
    /// Cyclotomic level of the units.
    pub level: u32,
    /// Missed places by strip.
    pub missed: BTreeMap<u32, Vec<u64>>,
    /// Count per strip.
    pub r: Vec<u32>,
    /// Saturation flag of the underlying scan.
    pub saturated: bool,
}

/// Missed places of the real units of `Z[ζ_level]` up to `p^{level+1} - 3`.
pub fn missed_places(p: u32, level: u32, cfg: &VPlusConfig) -> Result<MissedReport> {
    let c = compute(p, level + 1, Model::Tower, cfg)?;
    Ok(MissedReport { p, level, missed: c.report.missed, r: c.report.r, saturated: c.report.saturated })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_primes_are_trivial() {
        for p in [3, 5, 7] {
            for model in [Model::Km, Model::Tower] {
                let r = v_plus(p, 1, model).unwrap();
                assert!(r.cyclic_orders.is_empty(), "p = {p} {model}");
                assert!(r.saturated);
            }
        }
    }

    #[test]
    fn p37_level_one() {
        let r = v_plus(37, 1, Model::Km).unwrap();
        assert_eq!(r.cyclic_orders, vec![37]);
        assert_eq!(r.r, vec![1]);
        assert_eq!(r.missed[&0], vec![32]);
        let t = v_plus(37, 1, Model::Tower).unwrap();
        assert_eq!(t.cyclic_orders, vec![37]);
    }

    #[test]
    fn orders_from_r_shapes() {
        assert_eq!(orders_from_r(37, 2, &[1, 1]), vec![1369]);
        assert_eq!(orders_from_r(5, 2, &[0, 2]), vec![5, 5]);
        assert_eq!(strip_of(37, 32), 0);
        assert_eq!(strip_of(37, 1184), 1);
    }
}
