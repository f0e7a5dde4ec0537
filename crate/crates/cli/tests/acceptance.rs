//! The acceptance suite: one test per reproduction criterion, each
//! printing its pass/fail line. Criterion configurations and tolerances
//! are pinned in `fraclab_cli::repro`.

use fraclab_cli::repro;

fn check(id: &str) {
    let outcome = repro::run_one(id).expect("known criterion id");
    let status = if outcome.passed { "PASS" } else { "FAIL" };
    println!(
        "{:<4} {:<4} {:>7.2}s  {}: {}",
        outcome.id, status, outcome.seconds, outcome.title, outcome.summary
    );
    if let Some(note) = &outcome.soft_note {
        println!("     note          {note}");
    }
    assert!(
        outcome.passed,
        "{} failed: {}{}",
        outcome.id,
        outcome.summary,
        outcome
            .soft_note
            .map(|n| format!(" ({n})"))
            .unwrap_or_default()
    );
}

#[test]
fn a01_cone_flip_equality() {
    check("A1");
}

#[test]
fn a02_balance_dichotomy() {
    check("A2");
}

#[test]
fn a03_halfplane_minimality() {
    check("A3");
}

#[test]
fn a04_cone_non_minimality() {
    check("A4");
}

#[test]
fn a05_small_s_ball_limit() {
    check("A5");
}

#[test]
fn a06_small_s_convex_combination() {
    check("A6");
}

#[test]
fn a07_large_s_ratio() {
    check("A7");
}

#[test]
fn a08_oscillation() {
    check("A8");
}

#[test]
fn a09_brute_force_oracle() {
    check("A9");
}

#[test]
fn a10_branch_multipliers() {
    check("A10");
}

#[test]
fn a11_gradient_check() {
    check("A11");
}

#[test]
fn a12_interface_flatness() {
    check("A12");
}

#[test]
fn a13_density_floor() {
    check("A13");
}

#[test]
fn a14_extension_kernel() {
    check("A14");
}

#[test]
fn a15_submodular_slack() {
    check("A15");
}

// Known red: the glued translate of a minimizing profile is a
// second-order perturbation, so its energy gap decays like R^-(1+2s) and
// the pinned first-order exponent window cannot be met; the criterion is
// asserted as stated rather than loosened. The fitted constants in the
// failure message document that the C/R^2s upper bound itself holds.
#[test]
fn a16_translate_competitor_decay() {
    check("A16");
}
