//! End-to-end certification scoreboard. Each test runs one numbered check
//! from `metric_embed::certify`, prints its pass/fail line with the measured
//! detail, and asserts the verdict. Run with `--nocapture` to see the lines
//! for passing checks too.

use metric_embed::certify::{self, CriterionReport};

const SEED: u64 = 7;

fn assert_criterion(report: CriterionReport) {
    println!(
        "[acceptance] criterion {} ({}): {} — {} ({:.0} ms)",
        report.index,
        report.name,
        if report.passed { "PASS" } else { "FAIL" },
        report.detail,
        report.elapsed_ms
    );
    assert!(
        report.passed,
        "criterion {} ({}) failed: {}",
        report.index, report.name, report.detail
    );
}

#[test]
fn criterion_1_full_anchor_isometry() {
    assert_criterion(certify::criterion_1(SEED));
}

#[test]
fn criterion_2_retraction_error_bound() {
    assert_criterion(certify::criterion_2(SEED));
}

#[test]
fn criterion_3_multiscale_interval_bounds() {
    assert_criterion(certify::criterion_3(SEED));
}

#[test]
fn criterion_4_gluing_constant() {
    assert_criterion(certify::criterion_4(SEED));
}

#[test]
fn criterion_5_radius_augmentation_separation() {
    assert_criterion(certify::criterion_5(SEED));
}

#[test]
fn criterion_6_compression_exponent_recovery() {
    assert_criterion(certify::criterion_6(SEED));
}

#[test]
fn criterion_7_interlacing_graph_and_search() {
    assert_criterion(certify::criterion_7(SEED));
}

#[test]
fn criterion_8_double_limit_witnesses() {
    assert_criterion(certify::criterion_8(SEED));
}

#[test]
fn criterion_9_coarse_composition_fit() {
    assert_criterion(certify::criterion_9(SEED));
}
