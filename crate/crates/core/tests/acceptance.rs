//! Acceptance suite: one test per audit criterion, printing a pass/fail line
//! each (visible with `--nocapture`). The same checks back `audit all` in
//! the CLI.

use shearer_core::audit::{self, CriterionOutcome};

fn run(outcome: CriterionOutcome) {
    let status = if outcome.passed { "PASS" } else { "FAIL" };
    println!(
        "criterion {:>2} [{status}] {}: {}",
        outcome.id, outcome.name, outcome.details
    );
    assert!(outcome.passed, "{}: {}", outcome.name, outcome.details);
}

#[test]
fn criterion_01_oracle_equivalence() {
    run(audit::criterion_oracle_equivalence());
}

#[test]
fn criterion_02_identity_suite() {
    run(audit::criterion_identity_suite());
}

#[test]
fn criterion_03_phase_dichotomy() {
    run(audit::criterion_phase_dichotomy());
}

#[test]
fn criterion_04_critical_values() {
    run(audit::criterion_critical_values());
}

#[test]
fn criterion_05_lll_soundness() {
    run(audit::criterion_lll_soundness());
}

#[test]
fn criterion_06_euclidean_line() {
    run(audit::criterion_euclidean_line());
}

#[test]
fn criterion_07_cluster_expansion() {
    run(audit::criterion_cluster_expansion());
}

#[test]
fn criterion_08_hard_core_field_law() {
    run(audit::criterion_hard_core_field_law());
}

#[test]
fn criterion_09_matern_audit() {
    run(audit::criterion_matern_audit());
}

#[test]
fn criterion_10_hard_sphere() {
    run(audit::criterion_hard_sphere());
}

#[test]
fn criterion_11_zero_phase() {
    run(audit::criterion_zero_phase());
}

#[test]
fn criterion_12_thinning_law() {
    run(audit::criterion_thinning_law());
}

#[test]
fn criterion_13_association() {
    run(audit::criterion_association());
}
