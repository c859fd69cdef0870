//! Acceptance battery: one test per criterion, each printing its
//! pass/fail line and margin. Run with --nocapture to see every line.

use bmolab_core::suite;

const SEED: u64 = 0;

fn check(id: u32, name: &str) {
    let r = suite::run(id, SEED).expect("criterion battery runs");
    assert_eq!(r.name, name, "criterion {id} is wired to the wrong check");
    println!(
        "criterion {:2} {:<20} {} margin {:+.6e}",
        r.id,
        r.name,
        if r.pass { "pass" } else { "FAIL" },
        r.margin
    );
    assert!(r.pass, "criterion {id} ({name}) failed: {}", r.details);
}

#[test]
fn criterion_01_strip_means() {
    check(1, "strip-means");
}

#[test]
fn criterion_02_two_exponent_split() {
    check(2, "two-exponent-split");
}

#[test]
fn criterion_03_cover_bounds() {
    check(3, "cover-bounds");
}

#[test]
fn criterion_04_iterated_tail() {
    check(4, "iterated-tail");
}

#[test]
fn criterion_05_decay_envelope() {
    check(5, "decay-envelope");
}

#[test]
fn criterion_06_bracket_chain() {
    check(6, "bracket-chain");
}

#[test]
fn criterion_07_verdict_oracle() {
    check(7, "verdict-oracle");
}

#[test]
fn criterion_08_layer_cake() {
    check(8, "layer-cake");
}

#[test]
fn criterion_09_norm_comparability() {
    check(9, "norm-comparability");
}

#[test]
fn criterion_10_spike_floor() {
    check(10, "spike-floor");
}

#[test]
fn criterion_11_audit_concordance() {
    check(11, "audit-concordance");
}

#[test]
fn criterion_12_invariance_fuzz() {
    check(12, "invariance-fuzz");
}
