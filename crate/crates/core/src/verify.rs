//! Seeded property suites over every module. Each check records how many
//! trials ran and the first counterexample, if any.
//!
//! Randomness comes from one 64-bit seed; every check draws from its own
//! ChaCha stream derived from the seed and the check name, so adding or
//! reordering checks does not perturb the others.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abgroup::{
    cokernel_orders, quotient_structure, quotient_structure_snf, snf, EchelonState, PGroupPresentation,
};
use crate::arith::{ipow, is_prime, vp};
use crate::bernoulli::{bernoulli_mod_p, irregularity};
use crate::error::{Error, Result};
use crate::exactpoly::{mod_p_image, reconstruct, split, to_tuple, CycloElem, DRingId, RingId, TowerElem};
use crate::fpfilter::{dlog, unit_basis, BasisPart, FpFilterElem, ValBase};
use crate::normtower::{berkowitz_det, embed_unchecked, embed_unit, exact_inverse, norm_det, norm_kl, usual_norm};
use crate::phimaps::{analyze, build_domain, omega, phi_big, phi_small, PhiInput};
use crate::units::{
    cyclotomic_indices, cyclotomic_unit, eta_unit, in_filtration, is_real_unit, power_product, tilde_w,
    unit_depth, xi_w_image, UnitDescriptor,
};
use crate::vplus::{compute, pi_map, alpha_map, Model, VPlusComputation, VPlusConfig};

/// The property suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Pullback squares, split/reconstruct, modulus identities.
    Pullback,
    /// Norm laws.
    Norms,
    /// Residue rings, unit bases, dlog, exp/log.
    Fpfilter,
    /// Smith normal form, echelon, order accounting.
    Groups,
    /// Units, filtrations, explicit congruences.
    Units,
    /// The groups `V_n^+`, strips, `π` and `α`.
    Vplus,
    /// The maps `φ`, `ω`, `Φ`.
    Phimaps,
    /// Bernoulli numbers mod p.
    Bernoulli,
}

impl Suite {
    /// All suites in run order.
    pub const ALL: [Suite; 8] = [
        Suite::Bernoulli,
        Suite::Pullback,
        Suite::Norms,
        Suite::Fpfilter,
        Suite::Groups,
        Suite::Units,
        Suite::Vplus,
        Suite::Phimaps,
    ];

    /// Lowercase name.
    pub fn name(self) -> &'static str {
        match self {
            Suite::Pullback => "pullback",
            Suite::Norms => "norms",
            Suite::Fpfilter => "fpfilter",
            Suite::Groups => "groups",
            Suite::Units => "units",
            Suite::Vplus => "vplus",
            Suite::Phimaps => "phimaps",
            Suite::Bernoulli => "bernoulli",
        }
    }

    /// Parse a lowercase name.
    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    fn default_primes(self) -> Vec<u32> {
        match self {
            Suite::Norms => vec![3, 5],
            Suite::Pullback | Suite::Fpfilter | Suite::Units | Suite::Phimaps => vec![3, 5, 7],
            Suite::Vplus => vec![3, 5, 7, 11, 13, 37],
            Suite::Groups => vec![3, 5],
            Suite::Bernoulli => (3..1000).filter(|&p| is_prime(p as u64)).collect(),
        }
    }
}

/// Settings shared by all suites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Master seed.
    pub seed: u64,
    /// Restrict the prime grid; suites skip primes outside their tested scale.
    pub primes: Option<Vec<u32>>,
    /// Trials for the large randomized checks (norm laws, dlog round trips, Frobenius).
    pub trials: usize,
    /// Trials for the expensive randomized checks (unit products, Φ pairs).
    pub small_trials: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 0, primes: None, trials: 1000, small_trials: 200 }
    }
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    /// Suite name.
    pub suite: String,
    /// Check name.
    pub name: String,
    /// The statement being tested, in words.
    pub anchor: String,
    /// Whether every trial passed.
    pub passed: bool,
    /// Whether the check had nothing in scale to run on.
    pub skipped: bool,
    /// Number of trials or cases run.
    pub trials: u64,
    /// The grid the trials ran over.
    pub grid: String,
    /// First counterexample or error, otherwise a summary.
    pub detail: String,
}

/// All checks of one suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    /// Suite name.
    pub suite: String,
    /// Master seed.
    pub seed: u64,
    /// The checks.
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    /// Whether no check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Look up a check by name.
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Run one suite.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> SuiteReport {
    let primes = match &cfg.primes {
        None => suite.default_primes(),
        Some(req) if suite == Suite::Bernoulli => req.clone(),
        Some(req) => suite.default_primes().into_iter().filter(|p| req.contains(p)).collect(),
    };
    let mut ctx = Ctx { suite, seed: cfg.seed, cfg: cfg.clone(), primes, out: Vec::new() };
    match suite {
        Suite::Pullback => pullback_suite(&mut ctx),
        Suite::Norms => norms_suite(&mut ctx),
        Suite::Fpfilter => fpfilter_suite(&mut ctx),
        Suite::Groups => groups_suite(&mut ctx),
        Suite::Units => units_suite(&mut ctx),
        Suite::Vplus => vplus_suite(&mut ctx),
        Suite::Phimaps => phimaps_suite(&mut ctx),
        Suite::Bernoulli => bernoulli_suite(&mut ctx),
    }
    SuiteReport { suite: suite.name().into(), seed: cfg.seed, checks: ctx.out }
}

/// Run several suites.
pub fn run_suites(suites: &[Suite], cfg: &VerifyConfig) -> Vec<SuiteReport> {
    suites.iter().map(|&s| run_suite(s, cfg)).collect()
}

/// Trials and failures of one check.
#[derive(Debug, Default)]
struct Tally {
    trials: u64,
    assertions: u64,
    failures: u64,
    first: Option<String>,
    grid: String,
    note: Option<String>,
}

impl Tally {
    fn grid(grid: impl Into<String>) -> Self {
        Self { grid: grid.into(), ..Self::default() }
    }

    /// Count one randomized trial; checks without trials count assertions.
    fn trial(&mut self) {
        self.trials += 1;
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.assertions += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    /// Record an equality, describing both sides on failure.
    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, a: &T, b: &T, ctx: impl FnOnce() -> String) {
        let ok = a == b;
        self.check(ok, || format!("{}: {a:?} != {b:?}", ctx()));
    }
}

struct Ctx {
    suite: Suite,
    seed: u64,
    cfg: VerifyConfig,
    primes: Vec<u32>,
    out: Vec<CheckResult>,
}

impl Ctx {
    fn rng(&self, name: &str) -> ChaCha8Rng {
        child_rng(self.seed, self.suite.name(), name)
    }

    fn has(&self, p: u32) -> bool {
        self.primes.contains(&p)
    }

    fn run(&mut self, name: &str, anchor: &str, f: impl FnOnce(&Ctx, &mut ChaCha8Rng) -> Result<Tally>) {
        let mut rng = self.rng(name);
        let res = f(self, &mut rng).map(|mut t| {
            if t.trials == 0 {
                t.trials = t.assertions;
            }
            t
        });
        let (passed, skipped, trials, grid, detail) = match res {
            Ok(t) if t.trials == 0 => (true, true, 0, t.grid, "no cases in scale for the selected primes".to_string()),
            Ok(t) => {
                let detail = match (&t.first, &t.note) {
                    (Some(f), _) => format!("{} of {} assertions failed; first: {f}", t.failures, t.assertions),
                    (None, Some(n)) => n.clone(),
                    (None, None) => format!("{} trials, {} assertions passed", t.trials, t.assertions),
                };
                (t.failures == 0, false, t.trials, t.grid, detail)
            }
            Err(e) => (false, false, 0, String::new(), format!("error: {e}")),
        };
        self.out.push(CheckResult {
            suite: self.suite.name().into(),
            name: name.into(),
            anchor: anchor.into(),
            passed,
            skipped,
            trials,
            grid,
            detail,
        });
    }
}

/// Independent stream per `(seed, suite, check)`: FNV-1a of the labels mixed
/// into the seed, then a SplitMix64 finaliser.
pub fn child_rng(seed: u64, suite: &str, check: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in suite.bytes().chain([0u8]).chain(check.bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

fn ring(p: u32, k: u32, l: u32) -> Result<RingId> {
    RingId::new(p, k, l)
}

/// Uniform coefficients in `[-b, b]`.
pub fn random_elem(rng: &mut impl Rng, r: RingId, b: i64) -> TowerElem {
    let c: Vec<i64> = (0..r.degree()).map(|_| rng.random_range(-b..=b)).collect();
    TowerElem::from_i64s(r, &c)
}

/// Uniform element of `F_p[x]/(x-1)^n`.
pub fn random_fp(rng: &mut impl Rng, p: u32, n: usize) -> FpFilterElem {
    let c: Vec<u64> = (0..n).map(|_| rng.random_range(0..p as u64)).collect();
    FpFilterElem::from_t_coeffs(p, n, &c)
}

/// Uniform 1-unit of `F_p[x]/(x-1)^n`.
pub fn random_one_unit(rng: &mut impl Rng, p: u32, n: usize) -> FpFilterElem {
    let mut c: Vec<u64> = (0..n).map(|_| rng.random_range(0..p as u64)).collect();
    c[0] = 1;
    FpFilterElem::from_t_coeffs(p, n, &c)
}

/// The `(p, k, l)` cells with `l >= 1` and `k + l <= max_level`.
fn norm_cells(primes: &[u32], max_level: u32) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for &p in primes {
        for s in 1..=max_level {
            for l in 1..=s {
                out.push((p, s - l, l));
            }
        }
    }
    out
}

/// Trial schedule over norm cells: each cell appears four times per cycle,
/// except cells whose top ring has degree above 64, which appear once (their
/// norms cost 20-100x more).
fn norm_schedule(cells: &[(u32, u32, u32)]) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for round in 0..4 {
        for &(p, k, l) in cells {
            let deg = ipow(p as u64, k + l + 1) - ipow(p as u64, k + l);
            if round == 0 || deg <= 64 {
                out.push((p, k, l));
            }
        }
    }
    out
}

fn cells_label(cells: &[(u32, u32, u32)]) -> String {
    cells.iter().map(|(p, k, l)| format!("({p},{k},{l})")).collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------- pullback

fn pullback_cells(primes: &[u32]) -> Vec<(u32, u32, u32)> {
    // (p, k, l) with A_{k,l+1} the glued ring; kept to degree <= 124.
    let mut out = Vec::new();
    for &p in primes {
        let cand: &[(u32, u32)] = if p <= 5 { &[(0, 1), (1, 1), (0, 2)] } else { &[(0, 1)] };
        out.extend(cand.iter().map(|&(k, l)| (p, k, l)));
    }
    out
}

fn pullback_suite(ctx: &mut Ctx) {
    let cells = pullback_cells(&ctx.primes);
    let per_cell = (ctx.cfg.trials / 2).max(1);
    ctx.run("split_reconstruct_roundtrip", "split and reconstruct are mutually inverse on compatible pairs", |_, rng| {
        let mut t = Tally::grid(format!("{} per cell over {}", per_cell, cells_label(&cells)));
        for &(p, k, l) in &cells {
            let big = ring(p, k, l + 1)?;
            for _ in 0..per_cell {
                t.trial();
                let c = random_elem(rng, big, 3);
                let (a, b) = split(&c)?;
                let back = reconstruct(&a, &b)?;
                t.eq(&back, &c, || format!("p={p} k={k} l={l}"));
                let (a2, b2) = split(&back)?;
                t.eq(&(a2, b2), &(a, b), || format!("split after reconstruct, p={p} k={k} l={l}"));
            }
        }
        Ok(t)
    });
    ctx.run("pullback_square_commutes", "both routes of the pullback square agree mod p", |_, rng| {
        let mut t = Tally::grid(format!("{} per cell over {}", per_cell, cells_label(&cells)));
        for &(p, k, l) in &cells {
            let big = ring(p, k, l + 1)?;
            let target = DRingId { p, k, l };
            for _ in 0..per_cell {
                t.trial();
                let c = random_elem(rng, big, 3);
                let (a, b) = split(&c)?;
                t.eq(&mod_p_image(&a, target)?, &mod_p_image(&b, target)?, || format!("p={p} k={k} l={l}"));
            }
        }
        Ok(t)
    });
    ctx.run("incompatible_pairs_rejected", "gluing requires agreement mod p", |_, rng| {
        let mut t = Tally::grid(cells_label(&cells));
        for &(p, k, l) in &cells {
            let big = ring(p, k, l + 1)?;
            for _ in 0..20 {
                let (a, b) = split(&random_elem(rng, big, 3))?;
                let shift = rng.random_range(1..p as i64);
                let bad = b.add(&TowerElem::from_integer(b.ring(), BigInt::from(shift)))?;
                let res = reconstruct(&a, &bad);
                t.check(matches!(res, Err(Error::NotCompatible)), || format!("p={p} k={k} l={l}: {res:?}"));
            }
        }
        Ok(t)
    });
    ctx.run("modulus_is_power_of_x_minus_1", "the modulus of A_{k,l} is (x-1)^{p^{k+l}-p^k} mod p", |c, _| {
        let mut t = Tally::grid("k+l <= 3 for each prime");
        for &p in &c.primes {
            for (pp, k, l) in norm_cells(&[p], if p <= 5 { 3 } else { 2 }) {
                let r = ring(pp, k, l)?;
                let m = r.modulus();
                let e = (ipow(p as u64, k + l) - ipow(p as u64, k)) as usize;
                let expect: Vec<i64> = (0..=e).map(|i| binom_signed(e, i, p)).collect();
                let got: Vec<i64> = m.iter().map(|c| c.mod_floor(&BigInt::from(p)).try_into().unwrap_or(-1)).collect();
                t.eq(&got, &expect, || format!("p={p} k={k} l={l}"));
            }
        }
        Ok(t)
    });
    ctx.run("embedded_unit_invertible", "embedded units have exact inverses", |_, _| {
        let mut t = Tally::grid(cells_label(&cells));
        for &(p, k, l) in &cells {
            // -ζ at level k+l, embedded into A_{k,l+1}.
            let r = ring(p, k + l, 1)?;
            let eps = TowerElem::x(r).neg();
            let e = embed_unit(&eps, k, l + 1)?;
            let inv = exact_inverse(&e)?;
            t.check(e.mul(&inv)?.is_one(), || format!("p={p} k={k} l={l}"));
        }
        Ok(t)
    });
}

/// `C(e, i)·(-1)^{e-i}` reduced into `[0, p)`.
fn binom_signed(e: usize, i: usize, p: u32) -> i64 {
    let lb = crate::arith::LucasBinom::new(p as u64);
    let b = lb.binom(e as u64, i as u64) as i64;
    let v = if (e - i) % 2 == 0 { b } else { -b };
    v.rem_euclid(p as i64)
}

// ------------------------------------------------------------------- norms

/// `∏_{j<p} σ_j(a)` with `σ_j(ζ) = ζ^{1 + j p^m}`, returned in `Z[ζ_{m-1}]`.
/// This is the relative norm computed from Galois conjugates, independent
/// of the determinant route.
pub fn galois_norm_step(a: &CycloElem) -> Result<CycloElem> {
    let r = a.ring();
    let m = r.k;
    if r.l != 1 || m == 0 {
        return Err(Error::InvalidParameter("Galois norm step needs Z[ζ_m] with m >= 1".into()));
    }
    let p = r.p as u64;
    let mut prod = TowerElem::one(r);
    for j in 0..p {
        prod = prod.mul(&a.substitute_pow(1 + j * ipow(p, m)))?;
    }
    // The product is fixed by the relative Galois group, hence a polynomial in ζ^p.
    let coeffs = prod.coeffs();
    if coeffs.iter().enumerate().any(|(i, c)| i as u64 % p != 0 && !c.is_zero()) {
        return Err(Error::InternalMismatch("Galois norm is not a polynomial in ζ^p".into()));
    }
    let down: Vec<BigInt> = coeffs.iter().step_by(p as usize).cloned().collect();
    Ok(TowerElem::from_coeffs(RingId::cyclo(r.p, m - 1)?, down))
}

fn norms_suite(ctx: &mut Ctx) {
    let cells = norm_schedule(&norm_cells(&ctx.primes, 3));
    let trials = ctx.cfg.trials;
    let label = format!(
        "{trials} trials over {}, top degree > 64 at quarter weight",
        cells_label(&norm_cells(&ctx.primes, 3))
    );
    ctx.run("multiplicativity", "N_{k,l} and the determinant norm are multiplicative", |_, rng| {
        let mut t = Tally::grid(label.clone());
        for i in 0..trials {
            let Some(&(p, k, l)) = cells.get(i % cells.len().max(1)) else { break };
            t.trial();
            let r = RingId::cyclo(p, k + l)?;
            let (a, b) = (random_elem(rng, r, 2), random_elem(rng, r, 2));
            let lhs = norm_kl(&a.mul(&b)?, k, l)?;
            let rhs = norm_kl(&a, k, l)?.mul(&norm_kl(&b, k, l)?)?;
            t.eq(&lhs, &rhs, || format!("N_{{{k},{l}}} at p={p}"));
            if k >= 1 {
                let ar = ring(p, k, l)?;
                let (x, y) = (random_elem(rng, ar, 2), random_elem(rng, ar, 2));
                t.eq(&norm_det(&x.mul(&y)?)?, &norm_det(&x)?.mul(&norm_det(&y)?)?, || {
                    format!("determinant norm on A_{{{k},{l}}} at p={p}")
                });
            }
        }
        Ok(t)
    });
    ctx.run("additivity_mod_p", "N_{k,l}(a+b) = N_{k,l}(a) + N_{k,l}(b) mod p", |_, rng| {
        let mut t = Tally::grid(label.clone());
        for i in 0..trials {
            let Some(&(p, k, l)) = cells.get(i % cells.len().max(1)) else { break };
            t.trial();
            let r = RingId::cyclo(p, k + l)?;
            let d = DRingId { p, k, l };
            let (a, b) = (random_elem(rng, r, 2), random_elem(rng, r, 2));
            let lhs = mod_p_image(&norm_kl(&a.add(&b)?, k, l)?, d)?;
            let rhs = mod_p_image(&norm_kl(&a, k, l)?, d)?.add(&mod_p_image(&norm_kl(&b, k, l)?, d)?);
            t.eq(&lhs, &rhs, || format!("p={p} k={k} l={l}"));
            // g ∘ N agrees with ζ -> x.
            t.eq(&lhs, &mod_p_image(&a.add(&b)?, d)?, || format!("g∘N vs f at p={p} k={k} l={l}"));
        }
        Ok(t)
    });
    ctx.run("norm_of_zeta_is_x", "N_{k,l}(ζ^j) = x^j", |_, rng| {
        let mut t = Tally::grid(label.clone());
        for i in 0..trials {
            let Some(&(p, k, l)) = cells.get(i % cells.len().max(1)) else { break };
            t.trial();
            let r = RingId::cyclo(p, k + l)?;
            let period = ipow(p as u64, k + l + 1);
            let j = if i < cells.len() { 1 } else { rng.random_range(0..period) };
            let lhs = norm_kl(&TowerElem::x_pow(r, j), k, l)?;
            t.eq(&lhs, &TowerElem::x_pow(ring(p, k, l)?, j), || format!("j={j} p={p} k={k} l={l}"));
        }
        Ok(t)
    });
    ctx.run("tuple_formula", "the tuple of N_{k,l}(a) is the iterated relative norms of a", |_, rng| {
        let mut t = Tally::grid(label.clone());
        for i in 0..trials {
            let Some(&(p, k, l)) = cells.get(i % cells.len().max(1)) else { break };
            t.trial();
            let r = RingId::cyclo(p, k + l)?;
            let a = random_elem(rng, r, 2);
            let comps = to_tuple(&norm_kl(&a, k, l)?).components;
            let mut cur = a.clone();
            let mut oracle = Vec::new();
            for _ in 0..l {
                cur = galois_norm_step(&cur)?;
                oracle.push(cur.clone());
            }
            t.eq(&comps, &oracle, || format!("p={p} k={k} l={l}"));
            if let Some(first) = comps.first() {
                t.eq(first, &usual_norm(&a, 1)?, || format!("usual norm at p={p} k={k} l={l}"));
            }
        }
        Ok(t)
    });
    let square_cells: Vec<_> = norm_cells(&ctx.primes, 3).into_iter().filter(|&(_, k, _)| k >= 1).collect();
    let sq_label = format!("{trials} trials round-robin over {}", cells_label(&square_cells));
    ctx.run("commuting_square", "the determinant norm after N_{k,l} equals N_{k-1,l} after the relative norm", |_, rng| {
        let mut t = Tally::grid(sq_label);
        for i in 0..trials {
            let Some(&(p, k, l)) = square_cells.get(i % square_cells.len().max(1)) else { break };
            t.trial();
            let r = RingId::cyclo(p, k + l)?;
            let a = random_elem(rng, r, 2);
            let lhs = norm_det(&norm_kl(&a, k, l)?)?;
            let rhs = norm_kl(&usual_norm(&a, 1)?, k - 1, l)?;
            t.eq(&lhs, &rhs, || format!("p={p} k={k} l={l}"));
        }
        Ok(t)
    });
}

// -------------------------------------------------------------- units help

/// A random product of the real 1-units `ξ_a^{p-1}` at a level, raised to
/// `p^j` for a random `j <= max_pow`, so that depths straddle the thresholds.
fn random_unit_product(rng: &mut impl Rng, p: u32, level: u32, max_pow: u32) -> Result<(UnitDescriptor, CycloElem)> {
    let idx = cyclotomic_indices(p, level)?;
    let pm1 = (p - 1) as i64;
    let mut factors = Vec::new();
    if !idx.is_empty() {
        let count = rng.random_range(1..=2usize.min(idx.len()));
        for _ in 0..count {
            let a = idx[rng.random_range(0..idx.len())];
            let e = if rng.random_bool(0.5) { pm1 } else { -pm1 };
            factors.push((cyclotomic_unit(p, level, a)?, e));
        }
    } else {
        factors.push((cyclotomic_unit(p, level, 2)?, pm1));
    }
    let base = power_product(factors)?;
    let j = rng.random_range(0..=max_pow);
    let d = power_product(vec![(base, ipow(p as u64, j) as i64)])?;
    let e = d.exact()?;
    Ok((d, e))
}

/// All admissible η-units at a level and their `p^j` powers, `j <= max_pow`.
fn eta_family(p: u32, level: u32, max_pow: u32) -> Result<Vec<(String, CycloElem)>> {
    let mut out = Vec::new();
    for s in 1..=level {
        for k in 0..s {
            let e = eta_unit(p, level, s, k)?.exact()?;
            for j in 0..=max_pow {
                out.push((format!("η_({s},{k})^{}", ipow(p as u64, j)), e.pow(ipow(p as u64, j))));
            }
        }
    }
    Ok(out)
}

fn kernel_cells(primes: &[u32]) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for &p in primes {
        out.extend([(p, 0, 1), (p, 1, 1), (p, 0, 2)]);
        if p == 3 {
            out.push((p, 1, 2));
        }
    }
    out
}

/// `g_{k,l}(embed(ε)) = 1` against `ε ≡ 1 mod λ^{p^{k+l} - p^k}`.
fn kernel_case(t: &mut Tally, p: u32, k: u32, l: u32, eps: &CycloElem, what: &str) -> Result<()> {
    let img = mod_p_image(&embed_unchecked(eps, k, l)?, DRingId { p, k, l })?;
    let threshold = ipow(p as u64, k + l) - ipow(p as u64, k);
    let deep = unit_depth(eps)?.is_none_or(|d| d >= threshold);
    t.eq(&img.is_one(), &deep, || format!("{what} at p={p} k={k} l={l} (threshold {threshold})"));
    Ok(())
}

fn kernel_lemma_checks(ctx: &mut Ctx) {
    let cells = kernel_cells(&ctx.primes);
    let n_rand = ctx.cfg.small_trials;
    ctx.run("kernel_lemma_eta", "g_{k,l}(ε, N(ε)) = 1 iff ε ≡ 1 mod λ^{p^{k+l}-p^k}, on η-units", |_, _| {
        let mut t = Tally::grid(cells_label(&cells));
        let (mut yes, mut no) = (0, 0);
        for &(p, k, l) in &cells {
            for (what, e) in eta_family(p, k + l - 1, 2)? {
                let before = t.assertions;
                kernel_case(&mut t, p, k, l, &e, &what)?;
                if t.assertions > before {
                    let th = ipow(p as u64, k + l) - ipow(p as u64, k);
                    if unit_depth(&e)?.is_none_or(|d| d >= th) { yes += 1 } else { no += 1 }
                }
            }
        }
        t.note = Some(format!("{} cases passed ({yes} in the kernel, {no} outside)", t.assertions));
        Ok(t)
    });
    ctx.run("kernel_lemma_random", "g_{k,l}(ε, N(ε)) = 1 iff ε ≡ 1 mod λ^{p^{k+l}-p^k}, on random unit products", |_, rng| {
        let mut t = Tally::grid(format!("{n_rand} products round-robin over {}", cells_label(&cells)));
        let (mut yes, mut no) = (0, 0);
        for i in 0..n_rand {
            let Some(&(p, k, l)) = cells.get(i % cells.len().max(1)) else { break };
            t.trial();
            let (d, e) = random_unit_product(rng, p, k + l - 1, 2)?;
            kernel_case(&mut t, p, k, l, &e, &describe(&d))?;
            let th = ipow(p as u64, k + l) - ipow(p as u64, k);
            if unit_depth(&e)?.is_none_or(|v| v >= th) { yes += 1 } else { no += 1 }
        }
        if t.failures == 0 {
            t.note = Some(format!("{} products passed ({yes} in the kernel, {no} outside)", t.trials));
        }
        Ok(t)
    });
}

fn describe(d: &UnitDescriptor) -> String {
    serde_json::to_string(d).unwrap_or_else(|_| format!("{d:?}"))
}

// ---------------------------------------------------------------- fpfilter

fn fp_grid(primes: &[u32]) -> Vec<(u32, usize)> {
    let mut out = Vec::new();
    for &p in primes {
        let q = p as usize;
        out.extend([(p, q - 1), (p, q), (p, q * q - 1), (p, q * q)]);
        if p == 3 {
            out.extend([(3, 8), (3, 26)]);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn fp_label(grid: &[(u32, usize)]) -> String {
    grid.iter().map(|(p, n)| format!("(p={p},N={n})")).collect::<Vec<_>>().join(" ")
}

fn fpfilter_suite(ctx: &mut Ctx) {
    let grid = fp_grid(&ctx.primes);
    let trials = ctx.cfg.trials;
    let label = format!("{trials} trials round-robin over {}", fp_label(&grid));
    ctx.run("frobenius", "(1+u)^p = 1 + u^p", |_, rng| {
        let mut t = Tally::grid(label.clone());
        for i in 0..trials {
            let Some(&(p, n)) = grid.get(i % grid.len().max(1)) else { break };
            t.trial();
            let u = random_fp(rng, p, n);
            let one = FpFilterElem::one(p, n);
            let lhs = one.add(&u).pow(p as u128);
            t.eq(&lhs, &one.add(&u.pow(p as u128)), || format!("p={p} N={n}"));
            t.eq(&u.pow(p as u128), &u.frobenius(), || format!("frobenius at p={p} N={n}"));
        }
        Ok(t)
    });
    ctx.run("conjugation_involution", "x -> x^{-1} is a ring involution", |_, rng| {
        let mut t = Tally::grid(label.clone());
        for i in 0..trials {
            let Some(&(p, n)) = grid.get(i % grid.len().max(1)) else { break };
            t.trial();
            let (u, v) = (random_fp(rng, p, n), random_fp(rng, p, n));
            t.eq(&u.conj().conj(), &u, || format!("c∘c at p={p} N={n}"));
            t.eq(&u.mul(&v).conj(), &u.conj().mul(&v.conj()), || format!("c(uv) at p={p} N={n}"));
            t.eq(&u.add(&v).conj(), &u.conj().add(&v.conj()), || format!("c(u+v) at p={p} N={n}"));
        }
        Ok(t)
    });
    ctx.run("plus_minus_factorization", "every 1-unit is plus part times minus part; plus parts have even valuation", |_, rng| {
        let mut t = Tally::grid(label.clone());
        for i in 0..trials {
            let Some(&(p, n)) = grid.get(i % grid.len().max(1)) else { break };
            t.trial();
            let u = random_one_unit(rng, p, n);
            let plus = u.plus_project()?;
            let minus = u.mul(&plus.inverse()?);
            t.check(plus.is_plus(), || format!("plus part not conjugation-fixed at p={p} N={n}"));
            t.check(minus.mul(&minus.conj()).is_one(), || format!("minus part not anti-fixed at p={p} N={n}"));
            let v = plus.val_unit(ValBase::XMinus1)?;
            t.check(v == n || v % 2 == 0, || format!("plus part has odd valuation {v} at p={p} N={n}"));
        }
        Ok(t)
    });
    ctx.run("valuation_ultrametric", "val(uv-1) >= min(val(u-1), val(v-1)), with equality when they differ", |_, rng| {
        let mut t = Tally::grid(label.clone());
        for i in 0..trials {
            let Some(&(p, n)) = grid.get(i % grid.len().max(1)) else { break };
            t.trial();
            let (u, v) = (sparse_one_unit(rng, p, n), sparse_one_unit(rng, p, n));
            let (a, b) = (u.val_unit(ValBase::XMinus1)?, v.val_unit(ValBase::XMinus1)?);
            let c = u.mul(&v).val_unit(ValBase::XMinus1)?;
            let ok = c >= a.min(b) && (a == b || c == a.min(b));
            t.check(ok, || format!("vals {a}, {b} -> {c} at p={p} N={n}"));
        }
        Ok(t)
    });
    ctx.run("dlog_roundtrip", "dlog inverts evaluation on the unit basis, both ways", |_, rng| {
        let mut t = Tally::grid(label.clone());
        for i in 0..trials {
            let Some(&(p, n)) = grid.get(i % grid.len().max(1)) else { break };
            t.trial();
            let part = if i % 2 == 0 { BasisPart::Full } else { BasisPart::Plus };
            let basis = unit_basis(p, n, part);
            let u = match part {
                BasisPart::Full => random_one_unit(rng, p, n),
                BasisPart::Plus => random_one_unit(rng, p, n).plus_project()?,
            };
            let e = dlog(&u, &basis)?;
            t.eq(&basis.evaluate(&e), &u, || format!("evaluate(dlog) at p={p} N={n} {part:?}"));
            let exps: Vec<u64> =
                basis.entries.iter().map(|en| rng.random_range(0..ipow(p as u64, en.order_exp))).collect();
            t.eq(&dlog(&basis.evaluate(&exps), &basis)?, &exps, || format!("dlog(evaluate) at p={p} N={n} {part:?}"));
        }
        Ok(t)
    });
    ctx.run("dlog_homomorphism", "dlog(uv) = dlog(u) + dlog(v) in the product of cyclic groups", |_, rng| {
        let mut t = Tally::grid(label.clone());
        for i in 0..trials {
            let Some(&(p, n)) = grid.get(i % grid.len().max(1)) else { break };
            t.trial();
            let basis = unit_basis(p, n, BasisPart::Full);
            let (u, v) = (random_one_unit(rng, p, n), random_one_unit(rng, p, n));
            let (a, b, c) = (dlog(&u, &basis)?, dlog(&v, &basis)?, dlog(&u.mul(&v), &basis)?);
            let sum: Vec<u64> =
                basis.entries.iter().enumerate().map(|(j, en)| (a[j] + b[j]) % ipow(p as u64, en.order_exp)).collect();
            t.eq(&c, &sum, || format!("p={p} N={n}"));
        }
        Ok(t)
    });
    if ctx.has(3) {
        ctx.run("dlog_exhaustive_p3_n8", "dlog agrees with enumeration on every 1-unit of F_3[x]/(x-1)^8", |_, _| {
            let mut t = Tally::grid("p=3, N=8, all 2187 one-units");
            exhaustive_dlog(&mut t, 3, 8)?;
            Ok(t)
        });
        ctx.run("plus_minus_exhaustive_p3_n8", "plus and minus 1-units of F_3[x]/(x-1)^8 multiply bijectively onto all 1-units", |_, _| {
            let mut t = Tally::grid("p=3, N=8");
            let all = all_one_units(3, 8);
            let plus: Vec<_> = all.iter().filter(|u| u.is_plus()).cloned().collect();
            let minus: Vec<_> = all.iter().filter(|u| u.mul(&u.conj()).is_one()).cloned().collect();
            let mut products = HashSet::new();
            for a in &plus {
                for b in &minus {
                    products.insert(a.mul(b));
                }
            }
            t.eq(&products.len(), &all.len(), || format!("{} plus x {} minus", plus.len(), minus.len()));
            t.eq(&(plus.len() * minus.len()), &all.len(), || "plus·minus count".into());
            for u in &plus {
                let v = u.val_unit(ValBase::XMinus1)?;
                t.check(v == 8 || v % 2 == 0, || format!("plus unit with odd valuation {v}"));
            }
            Ok(t)
        });
    }
    ctx.run("exp_log_inverse_d1", "truncated exp∘log is the identity on every 1-unit of D_1", |c, _| {
        let ps: Vec<u32> = c.primes.clone();
        let mut t = Tally::grid(format!("all 1-units of F_p[x]/(x-1)^(p-1), p in {ps:?}"));
        for &p in &ps {
            for u in all_one_units(p, p as usize - 1) {
                let back = FpFilterElem::trunc_exp(&FpFilterElem::trunc_log(&u)?)?;
                t.eq(&back, &u, || format!("p={p}"));
            }
        }
        Ok(t)
    });
    if ctx.has(3) {
        ctx.run("exp_log_counterexample_d2", "exp∘log fails in D_2 at p=3 (below the validity threshold)", |_, _| {
            let mut t = Tally::grid("p=3, N=8");
            let mut found = None;
            let mut fixed = 0u64;
            let all = all_one_units(3, 8);
            for u in &all {
                let back = FpFilterElem::trunc_exp(&FpFilterElem::trunc_log(u)?)?;
                if back == *u {
                    fixed += 1;
                } else if found.is_none() {
                    found = Some((u.t_coeffs().to_vec(), back.t_coeffs().to_vec()));
                }
            }
            t.check(found.is_some(), || "exp∘log is the identity on all of D_2".into());
            if let Some((u, b)) = &found {
                let x = FpFilterElem::x(3, 8);
                let xb = FpFilterElem::trunc_exp(&FpFilterElem::trunc_log(&x)?)?;
                t.check(xb != x, || "x = 1 + t is not a counterexample".into());
                t.note = Some(format!(
                    "counterexample t-coeffs {u:?} maps to {b:?}; x = 1+t maps to {:?}; {fixed} of {} units fixed",
                    xb.t_coeffs(),
                    all.len()
                ));
            }
            Ok(t)
        });
    }
}

/// A 1-unit `1 + c t^j + ...` with a random leading place, so valuations vary.
fn sparse_one_unit(rng: &mut impl Rng, p: u32, n: usize) -> FpFilterElem {
    let mut c = vec![0u64; n];
    c[0] = 1;
    let j = rng.random_range(1..n.max(2));
    for (i, slot) in c.iter_mut().enumerate().skip(j.min(n)) {
        *slot = if i == j { rng.random_range(1..p as u64) } else { rng.random_range(0..p as u64) };
    }
    FpFilterElem::from_t_coeffs(p, n, &c)
}

/// Every 1-unit of `F_p[x]/(x-1)^n`.
pub fn all_one_units(p: u32, n: usize) -> Vec<FpFilterElem> {
    let count = ipow(p as u64, n as u32 - 1);
    (0..count)
        .map(|mut idx| {
            let mut c = vec![0u64; n];
            c[0] = 1;
            for slot in c.iter_mut().skip(1) {
                *slot = idx % p as u64;
                idx /= p as u64;
            }
            FpFilterElem::from_t_coeffs(p, n, &c)
        })
        .collect()
}

fn exhaustive_dlog(t: &mut Tally, p: u32, n: usize) -> Result<()> {
    let basis = unit_basis(p, n, BasisPart::Full);
    let all = all_one_units(p, n);
    // Enumerate the basis products.
    let orders: Vec<u64> = basis.entries.iter().map(|e| ipow(p as u64, e.order_exp)).collect();
    let total: u64 = orders.iter().product();
    t.eq(&(total as usize), &all.len(), || format!("basis order product vs |U_1| at p={p} N={n}"));
    let mut table: HashMap<FpFilterElem, Vec<u64>> = HashMap::new();
    let mut exps = vec![0u64; orders.len()];
    for _ in 0..total {
        table.insert(basis.evaluate(&exps), exps.clone());
        for (e, &o) in exps.iter_mut().zip(&orders) {
            *e += 1;
            if *e < o {
                break;
            }
            *e = 0;
        }
    }
    t.eq(&table.len(), &all.len(), || "basis products are not distinct".into());
    for u in &all {
        let got = dlog(u, &basis)?;
        let want = table.get(u).cloned();
        t.eq(&Some(got), &want, || format!("u = {:?}", u.t_coeffs()));
    }
    Ok(())
}

// ------------------------------------------------------------------ groups

/// `d_k` = gcd of the `k x k` minors; the Smith diagonal is `d_k / d_{k-1}`.
pub fn determinantal_divisors(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for k in 1..=rows.min(cols) {
        let mut g = BigInt::zero();
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                let sub: Vec<Vec<BigInt>> = rs.iter().map(|&r| cs.iter().map(|&c| m[r][c].clone()).collect()).collect();
                g = g.gcd(&berkowitz_det(&sub, &BigInt::zero(), &BigInt::one()));
            }
        }
        out.push(g);
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn matmul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum()).collect())
        .collect()
}

/// `|{x in Z^c/(rows + qZ^c) : m·x = 0}|` for each divisor `m` of `q`, by
/// enumerating `(Z/q)^c`.
fn torsion_counts_by_enumeration(rows: &[Vec<i64>], q: i64) -> BTreeMap<i64, u64> {
    let c = rows.first().map_or(0, Vec::len);
    let size = (q as u64).pow(c as u32);
    let encode = |v: &[i64]| v.iter().fold(0u64, |acc, &x| acc * q as u64 + x.rem_euclid(q) as u64);
    let decode = |mut code: u64| {
        let mut v = vec![0i64; c];
        for slot in v.iter_mut().rev() {
            *slot = (code % q as u64) as i64;
            code /= q as u64;
        }
        v
    };
    // Span of the rows mod q by closure.
    let mut span: HashSet<u64> = HashSet::from([0]);
    let mut frontier = vec![vec![0i64; c]];
    while let Some(v) = frontier.pop() {
        for r in rows {
            let w: Vec<i64> = v.iter().zip(r).map(|(a, b)| (a + b).rem_euclid(q)).collect();
            if span.insert(encode(&w)) {
                frontier.push(w);
            }
        }
    }
    let mut out = BTreeMap::new();
    for m in (1..=q).filter(|m| q % m == 0) {
        let killed = (0..size).filter(|&code| span.contains(&encode(&decode(code).iter().map(|x| x * m).collect::<Vec<_>>()))).count();
        out.insert(m, killed as u64 / span.len() as u64);
    }
    out
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, b: i64) -> Vec<Vec<i64>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.random_range(-b..=b)).collect()).collect()
}

fn to_big(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn groups_suite(ctx: &mut Ctx) {
    let n_mat = 20usize;
    ctx.run("snf_transforms", "U·M·V = D with det U, det V = ±1 and a divisibility chain", |_, rng| {
        let mut t = Tally::grid(format!("{n_mat} random 6x6 matrices, entries in [-4, 4]"));
        for _ in 0..n_mat {
            let m = to_big(&random_matrix(rng, 6, 6, 4));
            let s = snf(&m);
            t.eq(&matmul(&matmul(&s.u, &m), &s.v), &s.d, || format!("UMV != D for {m:?}"));
            let du = berkowitz_det(&s.u, &BigInt::zero(), &BigInt::one());
            let dv = berkowitz_det(&s.v, &BigInt::zero(), &BigInt::one());
            t.check(du.abs().is_one() && dv.abs().is_one(), || format!("det U = {du}, det V = {dv}"));
            let diag = s.diagonal();
            let chain = diag.windows(2).all(|w| if w[0].is_zero() { w[1].is_zero() } else { (&w[1] % &w[0]).is_zero() });
            let offdiag = s.d.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, x)| i == j || x.is_zero()));
            t.check(chain && offdiag && diag.iter().all(|d| !d.is_negative()), || format!("not a Smith form: {diag:?}"));
        }
        Ok(t)
    });
    ctx.run("snf_vs_determinantal_divisors", "Smith diagonal equals quotients of gcds of minors", |_, rng| {
        let mut t = Tally::grid(format!("{n_mat} random 6x6 matrices, entries in [-4, 4], some rank-deficient"));
        for i in 0..n_mat {
            let mut mi = random_matrix(rng, 6, 6, 4);
            if i % 4 == 3 {
                // Force a rank drop: last row = sum of two others.
                let r: Vec<i64> = (0..6).map(|j| mi[0][j] + 2 * mi[1][j]).collect();
                mi[5] = r;
            }
            let m = to_big(&mi);
            let dd = determinantal_divisors(&m);
            let mut expect = Vec::new();
            let mut prev = BigInt::one();
            for d in &dd {
                expect.push(if d.is_zero() { BigInt::zero() } else { d / &prev });
                if !d.is_zero() {
                    prev = d.clone();
                }
            }
            t.eq(&snf(&m).diagonal(), &expect, || format!("matrix {mi:?}"));
        }
        Ok(t)
    });
    ctx.run("snf_vs_enumeration", "cokernel torsion counts from the Smith form match enumeration mod q", |_, rng| {
        let mut t = Tally::grid(format!("{n_mat} random 6x6 matrices, q in {{4, 6}}"));
        for i in 0..n_mat {
            let q = if i % 2 == 0 { 4 } else { 6 };
            let mi = random_matrix(rng, 6, 6, 4);
            let counts = torsion_counts_by_enumeration(&mi, q);
            let diag = snf(&to_big(&mi)).diagonal();
            for (&m, &got) in &counts {
                // Cokernel of M + qZ^6 is ⊕ Z/gcd(d_i, q); its m-torsion has ∏ gcd(d_i, q, m) elements.
                let want: u64 = diag
                    .iter()
                    .map(|d| {
                        let g = d.gcd(&BigInt::from(q)).gcd(&BigInt::from(m));
                        u64::try_from(g).unwrap_or(0)
                    })
                    .product();
                t.eq(&got, &want, || format!("m={m}, q={q}, matrix {mi:?}"));
            }
        }
        Ok(t)
    });
    ctx.run("cokernel_orders_consistent", "cokernel orders multiply to |det| on nonsingular matrices", |_, rng| {
        let mut t = Tally::grid(format!("{n_mat} random 6x6 matrices"));
        for _ in 0..n_mat {
            let m = to_big(&random_matrix(rng, 6, 6, 4));
            let det = berkowitz_det(&m, &BigInt::zero(), &BigInt::one()).abs();
            let orders = cokernel_orders(&m, 6);
            let prod: BigInt = orders.iter().product();
            if det.is_zero() {
                t.check(orders.iter().any(Zero::is_zero), || "singular matrix with finite cokernel".into());
            } else {
                t.eq(&prod, &det, || format!("orders {orders:?}"));
            }
        }
        Ok(t)
    });
    let shuffle_cases: Vec<(u32, u32)> = ctx.primes.iter().map(|&p| (p, 2)).chain([(37, 1)]).collect();
    ctx.run("echelon_order_invariance", "the pivot set does not depend on insertion order", |_, rng| {
        let mut t = Tally::grid(format!("20 shuffles each of the KM generator images at (p, n) in {shuffle_cases:?}"));
        for &(p, n) in &shuffle_cases {
            let m = crate::fpfilter::w_model_len(Model::Km.modulus_exp(p, n));
            let big_p = ipow(p as u64, n + 1);
            let mut imgs: Vec<FpFilterElem> =
                cyclotomic_indices(p, n)?.into_iter().map(|a| xi_w_image(p, big_p, a, m)).collect();
            let reference = echelon_of(p, m, &imgs)?;
            for _ in 0..20 {
                imgs.shuffle(rng);
                let e = echelon_of(p, m, &imgs)?;
                t.eq(&e.pivot_valuations(), &reference.pivot_valuations(), || format!("p={p} n={n}"));
                t.eq(&e.quotient().cyclic_orders, &reference.quotient().cyclic_orders, || format!("p={p} n={n}"));
            }
        }
        Ok(t)
    });
    ctx.run("order_accounting", "|ambient| = |quotient|·|span|, span counted by enumeration", |_, rng| {
        let mut t = Tally::grid("random subgroups of the 1-units of F_3[x]/(x-1)^8 and F_5[x]/(x-1)^6");
        for &(p, n) in &[(3u32, 8usize), (5, 6)] {
            let basis = unit_basis(p, n, BasisPart::Full);
            let ambient = PGroupPresentation::from_basis(&basis);
            for _ in 0..10 {
                let gens: Vec<FpFilterElem> = (0..rng.random_range(1..=3)).map(|_| sparse_one_unit(rng, p, n)).collect();
                let span = closure(&gens, p, n);
                let coords = gens.iter().map(|g| dlog(g, &basis)).collect::<Result<Vec<_>>>()?;
                let q = quotient_structure(&ambient, &coords);
                let q2 = quotient_structure_snf(&ambient, &coords);
                t.eq(&q, &q2, || format!("two quotient routes at p={p} N={n}"));
                let qlog: u32 = q.iter().map(|&o| vp(o, p as u64)).sum();
                let slog = vp(span.len() as u64, p as u64);
                t.eq(&(qlog + slog), &ambient.log_order(), || format!("p={p} N={n}: quotient {q:?}, span {}", span.len()));
                let ech = echelon_of(p, n, &gens)?;
                t.eq(&(ech.log_order() as u32), &slog, || format!("echelon span order at p={p} N={n}"));
            }
        }
        Ok(t)
    });
}

fn echelon_of(p: u32, m: usize, imgs: &[FpFilterElem]) -> Result<EchelonState> {
    let mut e = EchelonState::new(p, m);
    for u in imgs {
        e.insert(u)?;
    }
    Ok(e)
}

fn closure(gens: &[FpFilterElem], p: u32, n: usize) -> HashSet<FpFilterElem> {
    let one = FpFilterElem::one(p, n);
    let mut set = HashSet::from([one.clone()]);
    let mut frontier = vec![one];
    while let Some(u) = frontier.pop() {
        for g in gens {
            let v = u.mul(g);
            if set.insert(v.clone()) {
                frontier.push(v);
            }
        }
    }
    set
}

// ------------------------------------------------------------------- units

fn units_suite(ctx: &mut Ctx) {
    let primes = ctx.primes.clone();
    ctx.run("cyclotomic_units_real", "ξ_a is real and a unit", |_, _| {
        let mut t = Tally::grid(format!("all canonical ξ_a at levels 0 and 1, p in {primes:?}"));
        for &p in &primes {
            for level in 0..=1 {
                for a in cyclotomic_indices(p, level)? {
                    let e = cyclotomic_unit(p, level, a)?.exact()?;
                    t.check(is_real_unit(&e)?, || format!("ξ_{a} at p={p} level={level}"));
                }
            }
        }
        Ok(t)
    });
    ctx.run("unithood_exact_inverse", "produced units have exact inverses", |c, rng| {
        let mut t = Tally::grid(format!("η-units and random products at level 1, p in {primes:?}"));
        for &p in &primes {
            for (what, e) in eta_family(p, 1, 0)? {
                t.check(e.mul(&exact_inverse(&e)?)?.is_one(), || format!("{what} at p={p}"));
            }
            for _ in 0..(c.cfg.small_trials / 20).max(1) {
                let (d, e) = random_unit_product(rng, p, 1, 0)?;
                t.check(e.mul(&exact_inverse(&e)?)?.is_one(), || describe(&d));
            }
        }
        Ok(t)
    });
    ctx.run("explicit_unit_congruence", "ε = 1 + (ζ-1)^{p^n-1} + t·(ζ-1)^{p^n} for the explicit unit", |_, _| {
        let mut t = Tally::grid(format!("n in {{1, 2}}, p in {primes:?}"));
        for &p in &primes {
            for n in 1..=2u32 {
                // (η^{p^n+1} - η^{-(p^n+1)})/(η - η^{-1}) is the η-unit with (s, k) = (n, 0).
                let e = eta_unit(p, n, n, 0)?.exact()?;
                let q = ipow(p as u64, n) as usize;
                let img = e.mod_p_image_exp(q)?;
                let mut want = vec![0u64; q];
                want[0] = 1;
                want[q - 1] = 1;
                t.eq(&img, &FpFilterElem::from_t_coeffs(p, q, &want), || format!("p={p} n={n}"));
            }
        }
        Ok(t)
    });
    ctx.run("eta_valuation", "v_λ(ε_{s,k} - 1) = p^s - p^k", |_, _| {
        let ps: Vec<u32> = primes.iter().copied().filter(|&p| p >= 5).collect();
        let mut t = Tally::grid(format!("all admissible (s, k) at levels 1 and 2, p in {ps:?}"));
        for &p in &ps {
            for level in 1..=2u32 {
                for s in 1..=level {
                    for k in 0..s {
                        let e = eta_unit(p, level, s, k)?.exact()?;
                        let want = ipow(p as u64, s) - ipow(p as u64, k);
                        t.eq(&unit_depth(&e)?, &Some(want), || format!("p={p} level={level} (s,k)=({s},{k})"));
                    }
                }
            }
        }
        Ok(t)
    });
    ctx.run("filtration_iff", "ε ∈ U_{n-1,s} iff g_n(ε) ≡ 1 mod (x-1)^s", |c, rng| {
        let ps: Vec<u32> = primes.iter().copied().filter(|&p| p >= 5).collect();
        let mut t = Tally::grid(format!("η-units and random products at level 1, every s <= p^2-1, p in {ps:?}"));
        for &p in &ps {
            let mut cases = eta_family(p, 1, 2)?;
            for _ in 0..(c.cfg.small_trials / 10).max(1) {
                let (d, e) = random_unit_product(rng, p, 1, 2)?;
                cases.push((describe(&d), e));
            }
            let big_n = ipow(p as u64, 2) as usize - 1;
            for (what, e) in cases {
                let img = mod_p_image(&embed_unchecked(&e, 0, 2)?, DRingId { p, k: 0, l: 2 })?;
                let v = img.val_unit(ValBase::XMinus1)?;
                for s in 1..=big_n as u64 {
                    let lhs = in_filtration(&e, s)?;
                    t.eq(&lhs, &(v as u64 >= s), || format!("{what}, s={s}, p={p}"));
                }
            }
        }
        Ok(t)
    });
    ctx.run("real_unit_valuations_even", "leading valuations of real 1-units are even", |c, rng| {
        let mut t = Tally::grid(format!("random products at levels 0..2, p in {primes:?}"));
        for &p in &primes {
            for level in 0..=2u32 {
                if p == 7 && level == 2 {
                    continue;
                }
                for _ in 0..(c.cfg.small_trials / 10).max(1) {
                    let (d, e) = random_unit_product(rng, p, level, 0)?;
                    if let Some(v) = unit_depth(&e)? {
                        t.check(v % 2 == 0, || format!("{} has depth {v}", describe(&d)));
                    }
                }
            }
        }
        Ok(t)
    });
    ctx.run("tilde_images", "closed-form w-images equal the tilde-normalised exact images", |_, _| {
        let mut t = Tally::grid(format!("all canonical ξ_a at levels 0 and 1, p in {primes:?}"));
        for &p in &primes {
            for level in 0..=1u32 {
                let big_p = ipow(p as u64, level + 1);
                let phi = (big_p - big_p / p as u64) as usize;
                for a in cyclotomic_indices(p, level)? {
                    let u = cyclotomic_unit(p, level, a)?;
                    let exact = u.exact()?.mod_p_image_exp(phi)?;
                    t.eq(&tilde_w(&exact)?, &xi_w_image(p, big_p, a, phi.div_ceil(2)), || format!("ξ_{a} at p={p} level={level}"));
                    t.eq(&u.image(phi)?, &exact, || format!("t-image of ξ_{a} at p={p} level={level}"));
                }
            }
        }
        Ok(t)
    });
    ctx.run("tower_closed_form", "group-ring images of ξ_a equal the exact embedding", |_, _| {
        let ps: Vec<u32> = primes.iter().copied().filter(|&p| p <= 5).collect();
        let mut t = Tally::grid(format!("all canonical ξ_a at level 1, p in {ps:?}"));
        for &p in &ps {
            for a in cyclotomic_indices(p, 1)? {
                let u = cyclotomic_unit(p, 1, a)?;
                t.eq(&u.tower_image()?, &u.tower_image_exact()?, || format!("ξ_{a} at p={p}"));
            }
        }
        Ok(t)
    });
    kernel_lemma_checks(ctx);
}

// ------------------------------------------------------------------- vplus

fn vplus_cases(primes: &[u32]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for &p in primes {
        out.push((p, 1));
        if p <= 13 {
            out.push((p, 2));
        }
    }
    out
}

fn r_from_orders(p: u32, n: u32, orders: &[u64]) -> Vec<u32> {
    // Z/p^{n-j} appears r_j - r_{j-1} times.
    let mut r = vec![0u32; n as usize];
    let mut acc = 0u32;
    for (j, slot) in r.iter_mut().enumerate() {
        let o = ipow(p as u64, n - j as u32);
        acc += orders.iter().filter(|&&x| x == o).count() as u32;
        *slot = acc;
    }
    r
}

fn vplus_suite(ctx: &mut Ctx) {
    let cases = vplus_cases(&ctx.primes);
    let mut cache: BTreeMap<(u32, u32, Model), VPlusComputation> = BTreeMap::new();
    let mut errors = Vec::new();
    for &(p, n) in &cases {
        for model in [Model::Km, Model::Tower] {
            let cfg = VPlusConfig { exhaustive: model == Model::Tower, ..VPlusConfig::default() };
            match compute(p, n, model, &cfg) {
                Ok(c) => {
                    cache.insert((p, n, model), c);
                }
                Err(e) => errors.push(format!("p={p} n={n} {model}: {e}")),
            }
        }
    }
    let grid = format!("(p, n) in {cases:?}");
    ctx.run("computations_succeed", "every V_n^+ computation in the grid finishes saturated", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for e in &errors {
            t.check(false, || e.clone());
        }
        for ((p, n, m), c) in &cache {
            t.check(c.report.saturated, || format!("p={p} n={n} {m} unsaturated"));
        }
        Ok(t)
    });
    ctx.run("model_agreement", "the two models of V_n^+ are isomorphic", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for &(p, n) in &cases {
            if let (Some(a), Some(b)) = (cache.get(&(p, n, Model::Km)), cache.get(&(p, n, Model::Tower))) {
                t.eq(&a.report.cyclic_orders, &b.report.cyclic_orders, || format!("p={p} n={n}"));
                t.eq(&a.report.missed, &b.report.missed, || format!("missed places at p={p} n={n}"));
            }
        }
        Ok(t)
    });
    ctx.run("order_recursion", "|V_n^+| = |V_{n-1}^+|·p^{r_{n-1}}", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for ((p, n, m), c) in &cache {
            let prev = if *n == 1 { 0 } else { cache.get(&(*p, n - 1, *m)).map_or(0, |c| c.report.log_order()) };
            let r_last = *c.report.r.last().unwrap_or(&0);
            t.eq(&c.report.log_order(), &(prev + r_last), || format!("p={p} n={n} {m}"));
        }
        Ok(t)
    });
    ctx.run("structure_formula", "V_n^+ ≅ ⊕_j (Z/p^{n-j})^{r_j - r_{j-1}} with r non-decreasing", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for ((p, n, m), c) in &cache {
            let r = &c.report.r;
            t.check(r.windows(2).all(|w| w[0] <= w[1]), || format!("r = {r:?} decreases at p={p} n={n} {m}"));
            t.eq(&c.report.cyclic_orders, &c.report.orders_from_r(), || format!("p={p} n={n} {m}"));
        }
        Ok(t)
    });
    ctx.run("strip_counts", "missed places per strip equal r_k read from the group structure", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for ((p, n, m), c) in &cache {
            let counted: Vec<u32> = (0..*n).map(|j| c.report.missed.get(&j).map_or(0, |v| v.len() as u32)).collect();
            t.eq(&counted, &r_from_orders(*p, *n, &c.report.cyclic_orders), || format!("p={p} n={n} {m}"));
        }
        Ok(t)
    });
    ctx.run("r0_is_bernoulli", "r_0 = r(p) and the 0-strip missed places are the irregular indices", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for ((p, n, m), c) in &cache {
            let irr = irregularity(*p as u64)?;
            t.eq(&(c.report.r[0] as usize), &irr.r, || format!("p={p} n={n} {m}"));
            let strip0 = c.report.missed.get(&0).cloned().unwrap_or_default();
            t.eq(&strip0, &irr.indices, || format!("0-strip at p={p} n={n} {m}"));
        }
        Ok(t)
    });
    ctx.run("pi_well_defined", "π sends unit images at n into unit images at n-1", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for ((p, n, m), c) in &cache {
            if *n < 2 {
                continue;
            }
            let Some(small) = cache.get(&(*p, n - 1, *m)) else { continue };
            let big_p = ipow(*p as u64, m.unit_level(*n) + 1);
            for a in cyclotomic_indices(*p, m.unit_level(*n))? {
                let v = xi_w_image(*p, big_p, a, c.w_len());
                t.check(small.is_trivial_class(&pi_map(&v, *p, *n, *m)?)?, || format!("ξ_{a} at p={p} n={n} {m}"));
            }
        }
        Ok(t)
    });
    ctx.run("pi_kernel", "ker π ≅ (Z/p)^{r_{n-1}} and |V_n^+| = |ker π|·|V_{n-1}^+|", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for ((p, n, m), c) in &cache {
            if *n < 2 {
                continue;
            }
            let Some(small) = cache.get(&(*p, n - 1, *m)) else { continue };
            let ker = c.pi_kernel_orders()?;
            let r_last = *c.report.r.last().unwrap_or(&0) as usize;
            t.eq(&ker, &vec![*p as u64; r_last], || format!("p={p} n={n} {m}"));
            let klog: u32 = ker.iter().map(|&o| vp(o, *p as u64)).sum();
            t.eq(&c.report.log_order(), &(klog + small.report.log_order()), || format!("orders at p={p} n={n} {m}"));
        }
        Ok(t)
    });
    ctx.run("alpha_well_defined", "α sends unit images at n-1 into unit images at n", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for ((p, n, m), c) in &cache {
            if *n < 2 || *m != Model::Km {
                continue;
            }
            let Some(small) = cache.get(&(*p, n - 1, *m)) else { continue };
            let big_p = ipow(*p as u64, *n);
            for a in cyclotomic_indices(*p, n - 1)? {
                let v = xi_w_image(*p, big_p, a, small.w_len());
                t.check(c.is_trivial_class(&alpha_map(&v, *p, *n)?)?, || format!("ξ_{a} at p={p} n={n}"));
            }
        }
        Ok(t)
    });
}

// ----------------------------------------------------------------- phimaps

fn phimaps_suite(ctx: &mut Ctx) {
    let primes = ctx.primes.clone();
    let mut domains = Vec::new();
    let mut errors = Vec::new();
    for &p in &primes {
        match build_domain(p, 2).and_then(|d| analyze(&d).map(|a| (d, a))) {
            Ok(x) => domains.push(x),
            Err(e) => errors.push(format!("p={p}: {e}")),
        }
    }
    let grid = format!("n = 2, p in {primes:?}");
    ctx.run("domain_built", "domain units exist at every place of [p^n - p^{n-1}, p^n - 3]", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for e in &errors {
            t.check(false, || e.clone());
        }
        for (d, _) in &domains {
            t.check(d.basis.len() == d.places.len(), || format!("p={}", d.p));
        }
        Ok(t)
    });
    let pairs = ctx.cfg.small_trials;
    ctx.run("homomorphism", "φ, ω and Φ are homomorphisms", |_, rng| {
        let mut t = Tally::grid(format!("{pairs} random pairs round-robin over {grid}"));
        if domains.is_empty() {
            return Ok(t);
        }
        for i in 0..pairs {
            t.trial();
            let (d, _) = &domains[i % domains.len()];
            let p = d.p as u64;
            let e1: Vec<u64> = d.basis.iter().map(|_| rng.random_range(0..p)).collect();
            let e2: Vec<u64> = d.basis.iter().map(|_| rng.random_range(0..p)).collect();
            let (a, b) = (d.combine(&e1)?, d.combine(&e2)?);
            let ab = PhiInput::new(a.eps.mul(&b.eps)?, d.n)?;
            type Map = fn(&PhiInput) -> Result<FpFilterElem>;
            for (name, f) in [("φ", phi_small as Map), ("ω", omega as Map), ("Φ", phi_big as Map)] {
                t.eq(&f(&ab)?, &f(&a)?.add(&f(&b)?), || format!("{name} at p={p}, exps {e1:?} and {e2:?}"));
            }
        }
        Ok(t)
    });
    ctx.run("vanish_on_pth_powers", "φ, ω, Φ vanish on p-th powers of domain units", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for (d, _) in &domains {
            for k in &d.kernel {
                t.check(phi_small(k)?.is_zero() && omega(k)?.is_zero() && phi_big(k)?.is_zero(), || format!("p={}", d.p));
            }
        }
        Ok(t)
    });
    ctx.run("valuation_bounds_interlacing", "O(φ) and O(ω) obey the interlacing bounds", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for (_, a) in &domains {
            t.check(a.interlacing, || format!("p={}: O(φ) = {:?}, O(ω) = {:?}", a.p, a.phi_orders, a.omega_orders));
        }
        Ok(t)
    });
    ctx.run("phi_injective", "φ is injective on the domain modulo deeper units", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for (_, a) in &domains {
            t.check(a.phi_injective(), || format!("p={}: rank {} of {}", a.p, a.phi_rank, a.places.len()));
        }
        Ok(t)
    });
    ctx.run("big_phi_surjective", "Φ maps onto D_{n-1}^+", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for (_, a) in &domains {
            t.check(a.surjective(), || format!("p={}: rank {} of {}", a.p, a.big_phi_rank, a.target_dimension));
        }
        Ok(t)
    });
    ctx.run("unitriangular", "the matrix of Φ in the φ-basis is unitriangular", |_, _| {
        let mut t = Tally::grid(grid.clone());
        for (_, a) in &domains {
            t.check(a.unitriangular, || format!("p={}: {:?}", a.p, a.matrix));
        }
        Ok(t)
    });
}

// --------------------------------------------------------------- bernoulli

fn bernoulli_suite(ctx: &mut Ctx) {
    let primes = ctx.primes.clone();
    ctx.run("dual_algorithm", "recurrence and power-sum Bernoulli residues agree", |_, _| {
        let mut t = Tally::grid(format!("{} primes from {} to {}", primes.len(), primes.first().unwrap_or(&0), primes.last().unwrap_or(&0)));
        for &p in &primes {
            let res = bernoulli_mod_p(p as u64);
            t.check(res.is_ok(), || format!("p={p}: {res:?}"));
        }
        Ok(t)
    });
}
