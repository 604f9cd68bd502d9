//! Acceptance suite: one test per criterion, each printing one pass/fail
//! line per check (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Two checks are expected to fail and are kept at their stated targets:
//!
//! * `critical-line`: the ratio 1/S(−1/x)/log x for the unit-tail index-1
//!   Pareto law is exactly computable (ψ(z) = z ln(1−1/z)) and equals 1.1244
//!   at x = 1e12 — the second-order log log x/log x term is ~12%, so the 5%
//!   band cannot hold at that abscissa for any faithful evaluator.
//! * `id-laws` constant: the stated π/2 contradicts the value 2/π implied by
//!   the dictionary and by the free-stable-1/2 density; the estimator lands
//!   on 2/π (the `alpha-beta-family` suite asserts 2/π for the identical
//!   S-asymptote).

use freemult::scenarios;

fn run(name: &str) -> bool {
    let reports = scenarios::run_suite(name).expect("suite must run");
    let mut ok = true;
    for r in &reports {
        print!("{}", r.render());
        ok &= r.passed();
    }
    ok
}

#[test]
fn acceptance_01_transform_roundtrip() {
    assert!(run("transform-roundtrip"));
}

#[test]
fn acceptance_02_closed_form_oracle() {
    assert!(run("closed-form"));
}

#[test]
fn acceptance_03_04_pareto_phase_transition() {
    assert!(run("pareto-phase"));
}

#[test]
fn acceptance_05_critical_line() {
    // Expected red: the 1e12 ratio check (see the module comment).
    assert!(run("critical-line"));
}

#[test]
fn acceptance_06_alpha_beta_family() {
    assert!(run("alpha-beta-family"));
}

#[test]
fn acceptance_07_id_laws() {
    // Expected red: the π/2 constant check (see the module comment).
    assert!(run("id-laws"));
}

#[test]
fn acceptance_08_breiman() {
    assert!(run("breiman"));
}

#[test]
fn acceptance_09_matrix_mc() {
    assert!(run("matrix-mc"));
}

#[test]
fn acceptance_10_regvar_toolkit() {
    assert!(run("regvar-toolkit"));
}

#[test]
fn acceptance_11_symmetric_relation() {
    assert!(run("symmetric"));
}
