//! Every verification suite passes at reduced scale and is reproducible from its seed.

use kmv_core::verify::{run_suite, run_suites, Suite, VerifyConfig};

fn small(seed: u64) -> VerifyConfig {
    VerifyConfig { seed, primes: Some(vec![3, 5]), trials: 60, small_trials: 20 }
}

#[test]
fn all_suites_pass_small() {
    for rep in run_suites(&Suite::ALL, &small(11)) {
        for c in &rep.checks {
            assert!(c.passed, "{}/{}: {}", c.suite, c.name, c.detail);
        }
    }
}

#[test]
fn reports_depend_only_on_seed() {
    for s in [Suite::Fpfilter, Suite::Units, Suite::Groups] {
        assert_eq!(run_suite(s, &small(5)), run_suite(s, &small(5)));
    }
}

#[test]
fn suite_names_round_trip() {
    for s in Suite::ALL {
        assert_eq!(Suite::parse(s.name()), Some(s));
    }
    assert_eq!(Suite::parse("nonsense"), None);
}
