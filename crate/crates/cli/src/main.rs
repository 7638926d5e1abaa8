//! `kmv`: Bernoulli irregularity, the groups `V_n^+`, missed places, norms,
//! units and the verification suites from the command line.

mod cache;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use kmv_core::bernoulli::irregularity;
use kmv_core::exactpoly::{mod_p_image, to_tuple, DRingId, RingId, TowerElem};
use kmv_core::normtower::{is_unit, norm_kl};
use kmv_core::units::{cyclotomic_unit, eta_unit, is_real_unit, tilde_w, unit_depth, UnitDescriptor};
use kmv_core::verify::{run_suite, Suite, VerifyConfig};
use kmv_core::vplus::{compute, missed_places, Model, VPlusConfig};
use kmv_core::Error;

use crate::cache::Cache;
use crate::render::Format;

/// Version tag carried by every JSON document.
pub const SCHEMA: &str = "kmv/1";

#[derive(Parser, Debug)]
#[command(name = "kmv", version, about = "Unit groups of cyclotomic towers and the p-groups V_n^+")]
struct Cli {
    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV.
    #[arg(long, global = true)]
    csv: bool,
    /// Bypass the result cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Index of irregularity r(p) and the irregular indices.
    Bernoulli {
        /// Odd prime.
        #[arg(short = 'p', long = "prime")]
        p: u64,
    },
    /// Structure of V_n^+.
    Vplus {
        /// Odd prime.
        #[arg(short = 'p', long = "prime")]
        p: u32,
        /// Index n >= 1.
        #[arg(short = 'n', long = "level")]
        n: u32,
        /// Model of the residue ring.
        #[arg(long, value_enum, default_value_t = ModelArg::Km)]
        model: ModelArg,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Missed places of the real units at a cyclotomic level.
    Missed {
        /// Odd prime.
        #[arg(short = 'p', long = "prime")]
        p: u32,
        /// Cyclotomic level of the units.
        #[arg(short = 'n', long = "level")]
        level: u32,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Run property suites.
    Verify {
        /// Suite name or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        /// Restrict the prime grid (repeatable).
        #[arg(short = 'p', long = "prime")]
        primes: Vec<u32>,
        /// Seed for the randomized checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trials for the large randomized checks.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Trials for the expensive randomized checks.
        #[arg(long, default_value_t = 200)]
        small_trials: usize,
    },
    /// N_{k,l}(a) for a in Z[ζ_{k+l}] given by its coefficients.
    Norm {
        /// Odd prime.
        #[arg(short = 'p', long = "prime")]
        p: u32,
        /// Level offset k.
        #[arg(short = 'k', long, default_value_t = 0)]
        k: u32,
        /// Height l >= 1.
        #[arg(short = 'l', long, default_value_t = 1)]
        l: u32,
        /// Coefficients of a in powers of ζ, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        coeffs: Vec<i64>,
    },
    /// Describe a cyclotomic or η-unit.
    Unit {
        /// Odd prime.
        #[arg(short = 'p', long = "prime")]
        p: u32,
        /// Cyclotomic level of the unit.
        #[arg(short = 'n', long = "level")]
        level: u32,
        /// Index a of the cyclotomic unit ξ_a.
        #[arg(long, conflicts_with = "eta")]
        a: Option<u64>,
        /// Indices s,k of the η-unit ε_{s,k}.
        #[arg(long, value_delimiter = ',')]
        eta: Option<Vec<u32>>,
    },
}

#[derive(Args, Debug, Clone)]
struct ScanArgs {
    /// Wall-clock budget in seconds; an exceeded budget gives an unsaturated report.
    #[arg(long)]
    budget_secs: Option<f64>,
    /// Consecutive absorbed generators before the scan is declared saturated.
    #[arg(long)]
    saturation_window: Option<usize>,
    /// Insert every generator of the family.
    #[arg(long)]
    exhaustive: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModelArg {
    Km,
    Tower,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Km => Model::Km,
            ModelArg::Tower => Model::Tower,
        }
    }
}

/// The resolved run: everything that determines the output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Subcommand name.
    pub command: &'static str,
    /// The prime, if the command takes one.
    pub p: Option<u64>,
    /// `n` or the level.
    pub n: Option<u32>,
    /// Model for `vplus`.
    pub model: Option<Model>,
    /// Output format.
    #[serde(skip)]
    pub format: Format,
    /// Seed for `verify`.
    pub seed: Option<u64>,
    /// Cache directory, if caching is on.
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
    /// Saturation window override.
    pub window: Option<usize>,
    /// Whether every generator is inserted.
    pub exhaustive: bool,
    /// Time budget.
    #[serde(skip)]
    pub budget: Option<Duration>,
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Exit {
    Ok = 0,
    Invariant = 1,
    BadInput = 2,
    Unsupported = 3,
    Unsaturated = 4,
}

fn exit_for(e: &Error) -> Exit {
    match e {
        Error::InvalidParameter(_)
        | Error::RingMismatch(_)
        | Error::NotCompatible
        | Error::NotIntegral(_)
        | Error::NotAUnit(_)
        | Error::ZeroInput
        | Error::NotInSpan(_)
        | Error::NotDivisible(_) => Exit::BadInput,
        Error::UnsupportedScale(_) => Exit::Unsupported,
        Error::SaturationUnverified(_) => Exit::Unsaturated,
        Error::InternalMismatch(_) | Error::AlgorithmMismatch { .. } => Exit::Invariant,
    }
}

/// A finished command: the JSON document and its exit code.
struct Outcome {
    doc: Value,
    exit: Exit,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Table
    };
    let cache = if cli.no_cache { None } else { Cache::from_env() };
    match run(&cli.command, format, cache.as_ref()) {
        Ok(out) => {
            print!("{}", render::render(&out.doc, format));
            ExitCode::from(out.exit as u8)
        }
        Err(e) => {
            eprintln!("kmv: {e}");
            ExitCode::from(exit_for(&e) as u8)
        }
    }
}

fn with_schema(command: &str, body: Value) -> Value {
    let mut doc = json!({ "schema": SCHEMA, "command": command });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    doc
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn scan_config(scan: &ScanArgs) -> Result<VPlusConfig, Error> {
    let budget = match scan.budget_secs {
        Some(s) if !(s > 0.0 && s.is_finite()) => {
            return Err(Error::InvalidParameter("--budget-secs must be positive".into()));
        }
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    if scan.saturation_window == Some(0) {
        return Err(Error::InvalidParameter("--saturation-window must be positive".into()));
    }
    Ok(VPlusConfig { window: scan.saturation_window, budget, exhaustive: scan.exhaustive })
}

fn run(cmd: &Command, format: Format, cache: Option<&Cache>) -> Result<Outcome, Error> {
    match cmd {
        Command::Bernoulli { p } => {
            let rep = irregularity(*p)?;
            Ok(Outcome { doc: with_schema("bernoulli", to_value(&rep)), exit: Exit::Ok })
        }
        Command::Vplus { p, n, model, scan } => {
            let cfg = scan_config(scan)?;
            let model = Model::from(*model);
            let rc = RunConfig {
                command: "vplus",
                p: Some(*p as u64),
                n: Some(*n),
                model: Some(model),
                format,
                seed: None,
                cache_dir: cache.map(|c| c.dir().to_path_buf()),
                window: cfg.window,
                exhaustive: cfg.exhaustive,
                budget: cfg.budget,
            };
            let body = cached(cache, &rc, *p, *n, model, || {
                compute(*p, *n, model, &cfg).map(|c| to_value(&c.report))
            })?;
            let saturated = body.get("saturated").and_then(Value::as_bool).unwrap_or(false);
            let exit = if saturated { Exit::Ok } else { Exit::Unsaturated };
            Ok(Outcome { doc: with_schema("vplus", body), exit })
        }
        Command::Missed { p, level, scan } => {
            let cfg = scan_config(scan)?;
            let rc = RunConfig {
                command: "missed",
                p: Some(*p as u64),
                n: Some(*level),
                model: Some(Model::Tower),
                format,
                seed: None,
                cache_dir: cache.map(|c| c.dir().to_path_buf()),
                window: cfg.window,
                exhaustive: cfg.exhaustive,
                budget: cfg.budget,
            };
            let body = cached(cache, &rc, *p, level + 1, Model::Tower, || {
                missed_places(*p, *level, &cfg).map(|m| to_value(&m))
            })?;
            let saturated = body.get("saturated").and_then(Value::as_bool).unwrap_or(false);
            let exit = if saturated { Exit::Ok } else { Exit::Unsaturated };
            Ok(Outcome { doc: with_schema("missed", body), exit })
        }
        Command::Verify { suite, primes, seed, trials, small_trials } => {
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![Suite::parse(suite).ok_or_else(|| {
                    let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                    Error::InvalidParameter(format!("unknown suite {suite:?}; expected one of {} or all", names.join(", ")))
                })?]
            };
            for &p in primes {
                if p < 3 || !kmv_core::arith::is_prime(p as u64) {
                    return Err(Error::InvalidParameter(format!("p = {p} is not an odd prime")));
                }
            }
            let cfg = VerifyConfig {
                seed: *seed,
                primes: if primes.is_empty() { None } else { Some(primes.clone()) },
                trials: *trials,
                small_trials: *small_trials,
            };
            let reports: Vec<_> = suites.iter().map(|&s| run_suite(s, &cfg)).collect();
            let passed = reports.iter().all(|r| r.passed());
            for r in &reports {
                for c in r.checks.iter().filter(|c| !c.passed) {
                    eprintln!("kmv: FAILED {}/{} ({}): {}", c.suite, c.name, c.anchor, c.detail);
                }
            }
            let body = json!({ "seed": seed, "passed": passed, "suites": to_value(&reports) });
            Ok(Outcome { doc: with_schema("verify", body), exit: if passed { Exit::Ok } else { Exit::Invariant } })
        }
        Command::Norm { p, k, l, coeffs } => {
            if *l == 0 {
                return Err(Error::InvalidParameter("l must be at least 1".into()));
            }
            let r = RingId::cyclo(*p, k + l)?;
            if coeffs.len() > r.period() {
                return Err(Error::InvalidParameter(format!("at most {} coefficients for {r}", r.period())));
            }
            let a = TowerElem::from_i64s(r, coeffs);
            let nrm = norm_kl(&a, *k, *l)?;
            let img = mod_p_image(&nrm, DRingId { p: *p, k: *k, l: *l })?;
            let body = json!({
                "p": p, "k": k, "l": l,
                "input": to_value(&a),
                "norm": to_value(&nrm),
                "tuple": to_value(&to_tuple(&nrm)),
                "mod_p": to_value(&img),
            });
            Ok(Outcome { doc: with_schema("norm", body), exit: Exit::Ok })
        }
        Command::Unit { p, level, a, eta } => {
            let d: UnitDescriptor = match (a, eta) {
                (Some(a), None) => cyclotomic_unit(*p, *level, *a)?,
                (None, Some(v)) if v.len() == 2 => eta_unit(*p, *level, v[0], v[1])?,
                _ => return Err(Error::InvalidParameter("give exactly one of --a or --eta s,k".into())),
            };
            let e = d.exact()?;
            let phi = e.ring().degree();
            let img = e.mod_p_image_exp(phi)?;
            // The resultant-based check is cubic in the degree; skip it on large rings.
            let unit_check = if phi <= UNIT_CHECK_MAX_DEGREE { Some(is_unit(&e)?) } else { None };
            let body = json!({
                "unit": to_value(&d),
                "real": is_real_unit(&e)?,
                "unit_check": unit_check,
                "depth": unit_depth(&e)?,
                "t_image": to_value(&img),
                "w_image": to_value(&tilde_w(&img)?),
            });
            Ok(Outcome { doc: with_schema("unit", body), exit: Exit::Ok })
        }
    }
}

/// Largest ring degree on which `unit` runs the exact unit check.
const UNIT_CHECK_MAX_DEGREE: usize = 100;

/// Look up or compute a scan result. Only saturated results are stored.
fn cached(
    cache: Option<&Cache>,
    rc: &RunConfig,
    p: u32,
    n: u32,
    model: Model,
    fresh: impl FnOnce() -> Result<Value, Error>,
) -> Result<Value, Error> {
    let key = cache::key(rc, &cache::family_hash(p, model.unit_level(n))?);
    if let Some(c) = cache {
        if let Some(v) = c.get(&key) {
            return Ok(v);
        }
    }
    let v = fresh()?;
    if let Some(c) = cache {
        if v.get("saturated").and_then(Value::as_bool) == Some(true) {
            // A failed write only costs a recomputation next time.
            let _ = c.put(&key, &v);
        }
    }
    Ok(v)
}
