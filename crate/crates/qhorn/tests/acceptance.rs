//! Acceptance gate: every criterion runs at its pinned tolerance and prints
//! one pass/fail line (run with `--nocapture` to see the lines on success).
//! The same checks back the `qhorn selftest` subcommand.

use qhorn::cli::DEFAULT_SEED;
use qhorn::selftest::{self, CriterionReport};
use std::time::Instant;

fn assert_criterion(report: CriterionReport) {
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
}

#[test]
fn criterion_01_probe_protocol() {
    assert_criterion(selftest::criterion_1(DEFAULT_SEED));
}

#[test]
fn criterion_02_probe_disturbance() {
    assert_criterion(selftest::criterion_2(DEFAULT_SEED));
}

#[test]
fn criterion_03_walk_oracle_equivalence() {
    assert_criterion(selftest::criterion_3(DEFAULT_SEED));
}

#[test]
fn criterion_04_markov_embedding() {
    assert_criterion(selftest::criterion_4(DEFAULT_SEED));
}

#[test]
fn criterion_05_fock_layer() {
    assert_criterion(selftest::criterion_5(DEFAULT_SEED));
}

#[test]
fn criterion_06_slh_fixtures() {
    assert_criterion(selftest::criterion_6(DEFAULT_SEED));
}

#[test]
fn criterion_07_lindblad_dynamics() {
    assert_criterion(selftest::criterion_7(DEFAULT_SEED));
}

#[test]
fn criterion_08_cascade_entanglement() {
    assert_criterion(selftest::criterion_8(DEFAULT_SEED));
}

#[test]
fn criterion_09_horn_engine() {
    assert_criterion(selftest::criterion_9(DEFAULT_SEED));
}

#[test]
fn criterion_10_full_suite_under_budget() {
    let start = Instant::now();
    let reports = selftest::run_all(DEFAULT_SEED);
    let elapsed = start.elapsed();
    for report in &reports {
        println!("{}", report.line());
        assert!(report.passed, "{}", report.line());
    }
    println!("criterion 10 full suite                  — {elapsed:.2?}");
    assert!(
        elapsed.as_secs_f64() < 180.0,
        "selftest took {elapsed:.2?}, budget is 3 minutes"
    );
}
