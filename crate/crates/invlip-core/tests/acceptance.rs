//! Certification suite: one test per criterion, each printing its pass/fail
//! line. Run with `cargo test -p invlip-core --test acceptance`.

use invlip_core::suite;

fn assert_criterion(result: suite::CriterionResult) {
    println!(
        "criterion {:>2} [{}] {} — {}",
        result.id,
        if result.pass { "PASS" } else { "FAIL" },
        result.name,
        result.details
    );
    assert!(result.pass, "criterion {} failed: {}", result.id, result.details);
}

fn seeds_100() -> Vec<u64> {
    suite::seed_range(1, 100)
}

fn seeds_50() -> Vec<u64> {
    suite::seed_range(1, 50)
}

#[test]
fn criterion_01_ramp_reproduction() {
    assert_criterion(suite::criterion_1());
}

#[test]
fn criterion_02_free_group_bound() {
    assert_criterion(suite::criterion_2(&seeds_100()));
}

#[test]
fn criterion_03_optimality() {
    assert_criterion(suite::criterion_3(&seeds_100()));
}

#[test]
fn criterion_04_mean_growth_properties() {
    assert_criterion(suite::criterion_4(&seeds_100()));
}

#[test]
fn criterion_05_kernel_projection() {
    assert_criterion(suite::criterion_5());
}

#[test]
fn criterion_06_presented_pipeline() {
    assert_criterion(suite::criterion_6(&seeds_50()));
}

#[test]
fn criterion_07_norm_collapse() {
    assert_criterion(suite::criterion_7(&seeds_50()));
}

#[test]
fn criterion_08_orbit_collapse() {
    assert_criterion(suite::criterion_8(&seeds_50()));
}

#[test]
fn criterion_09_quasimorphism_implications() {
    assert_criterion(suite::criterion_9(&seeds_100()));
}

#[test]
fn criterion_10_determinism() {
    assert_criterion(suite::criterion_10(&seeds_100()));
}
