//! The acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `cargo test --test acceptance -- --nocapture` to see them
//! all). Tolerances and budgets are pinned inside `thetalocus::acceptance`.

use thetalocus::acceptance::{run_criterion, CriterionResult};

const SEED: u64 = 7;

fn check(id: usize) {
    let r: CriterionResult = run_criterion(id, SEED).expect("known criterion id");
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
    assert!(
        r.within_budget(),
        "C{id} exceeded its budget: {:.1}s > {:.1}s",
        r.seconds,
        r.budget_seconds.unwrap_or(f64::INFINITY)
    );
}

#[test]
fn c01_genus4_hyperelliptic_rank_144() {
    check(1);
}

#[test]
fn c02_varley_debarre_rank_160() {
    check(2);
}

#[test]
fn c03_relation_space_dimensions() {
    check(3);
}

#[test]
fn c04_eigenspace_dimensions() {
    check(4);
}

#[test]
fn c05_m0_quarter_derivative() {
    check(5);
}

#[test]
fn c06_addition_formula() {
    check(6);
}

#[test]
fn c07_frobenius_grushevsky_batch() {
    check(7);
}

#[test]
fn c08_genus1_pipeline_agm() {
    check(8);
}

#[test]
fn c09_genus3_pipeline() {
    check(9);
}

#[test]
fn c10_genus4_pipeline() {
    check(10);
}

#[test]
fn c11_gunning_genus2() {
    check(11);
}

#[test]
fn c12_transformation_law() {
    check(12);
}

#[test]
fn c13_frobenius_kernel_witness() {
    check(13);
}
