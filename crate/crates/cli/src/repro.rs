//! The reproduction suite: every headline experiment of the laboratory as
//! a pinned pass/fail criterion. Each criterion fixes its grid, exponent
//! list, and tolerance here; the `repro` subcommand and the acceptance
//! test target both run these.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fraclab_core::allen_cahn::{
    branch_scales, double_well_prime, interface_and_density, interface_deviation_from_line,
    minimize_g_truncated, DescentParams, EnergyContext, ExteriorData, PhaseField,
};
use fraclab_core::euler_lagrange::{el_integral, ElParams};
use fraclab_core::extension::{
    extend, glued_translate, minmax_check_gagliardo, minmax_check_weighted, normalize_kernel,
    weighted_energy, HalfSpaceField, HalfSpaceGeometry, Region,
};
use fraclab_core::geometry::Window;
use fraclab_core::mincut;
use fraclab_core::numerics::linear_extrapolate;
use fraclab_core::perimeter::{
    extrapolate_scaled, frac_perimeter_in, scaled_limits, LimitMode, PerimeterParams,
};
use fraclab_core::shapes::{rasterize, Rect, ShapeSpec};

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub summary: String,
    /// Non-blocking observations recorded alongside the verdict.
    pub soft_note: Option<String>,
    pub seconds: f64,
}

pub fn all_ids() -> Vec<&'static str> {
    vec![
        "A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11", "A12", "A13", "A14",
        "A15", "A16",
    ]
}

pub fn run_one(id: &str) -> Option<CriterionOutcome> {
    let started = Instant::now();
    let mut outcome = match id {
        "A1" => a1_cone_flip_equality(),
        "A2" => a2_balance_dichotomy(),
        "A3" => a3_halfplane_minimality(),
        "A4" => a4_cone_non_minimality(),
        "A5" => a5_small_s_ball_limit(),
        "A6" => a6_small_s_convex_combination(),
        "A7" => a7_large_s_ratio(),
        "A8" => a8_oscillation(),
        "A9" => a9_brute_force_oracle(),
        "A10" => a10_branch_multipliers(),
        "A11" => a11_gradient_check(),
        "A12" => a12_interface_flatness(),
        "A13" => a13_density_floor(),
        "A14" => a14_extension_kernel(),
        "A15" => a15_submodular_slack(),
        "A16" => a16_translate_competitor_decay(),
        _ => return None,
    };
    outcome.seconds = started.elapsed().as_secs_f64();
    Some(outcome)
}

/// Runs the filtered criteria in id order.
pub fn run(filter: Option<&[String]>) -> Vec<CriterionOutcome> {
    all_ids()
        .into_iter()
        .filter(|id| {
            filter
                .map(|list| list.iter().any(|f| f.eq_ignore_ascii_case(id)))
                .unwrap_or(true)
        })
        .filter_map(run_one)
        .collect()
}

fn outcome(
    id: &'static str,
    title: &'static str,
    passed: bool,
    summary: String,
) -> CriterionOutcome {
    CriterionOutcome {
        id,
        title,
        passed,
        summary,
        soft_note: None,
        seconds: 0.0,
    }
}

fn a1_cone_flip_equality() -> CriterionOutcome {
    let h = 0.125;
    let window = Window::new(2, [-1.0, -1.0], [1.0, 1.0], h).unwrap();
    let cross = rasterize(&ShapeSpec::cross_cone(), &window);
    let plus = rasterize(&ShapeSpec::cross_cone_plus_square(h), &window);
    let mut worst = 0.0f64;
    for s in [0.1, 0.25, 0.4] {
        let a = frac_perimeter_in(&cross, &PerimeterParams::new(s, 6.0)).unwrap();
        let b = frac_perimeter_in(&plus, &PerimeterParams::new(s, 6.0)).unwrap();
        worst = worst.max(((a.total - b.total) / a.total).abs());
    }
    outcome(
        "A1",
        "cone flip equality",
        worst <= 1e-10,
        format!("max relative difference {worst:.2e} over s in {{0.1, 0.25, 0.4}} (tol 1e-10)"),
    )
}

fn a2_balance_dichotomy() -> CriterionOutcome {
    let s = 0.25;
    let coarse = ElParams::default();
    let fine = coarse.refined(2);
    let cross = ShapeSpec::cross_cone();
    let plus = ShapeSpec::cross_cone_plus_square(0.1);
    let k1 = el_integral(&cross, [0.0, 0.0], s, 1e-3, 16.0, &coarse).unwrap();
    let k2 = el_integral(&cross, [0.0, 0.0], s, 5e-4, 16.0, &fine).unwrap();
    let p1 = el_integral(&plus, [0.0, 0.0], s, 1e-3, 16.0, &coarse).unwrap();
    let p2 = el_integral(&plus, [0.0, 0.0], s, 5e-4, 16.0, &fine).unwrap();
    let balanced = k1.value.abs() <= 1e-10 && k2.value.abs() <= 1e-10;
    let tipped = p1.value > 0.0 && p2.value > 0.0;
    outcome(
        "A2",
        "balance-integral dichotomy",
        balanced && tipped,
        format!(
            "cross {:.1e}/{:.1e} (tol 1e-10); with square {:.4}/{:.4} (> 0 at both resolutions)",
            k1.value, k2.value, p1.value, p2.value
        ),
    )
}

fn a3_halfplane_minimality() -> CriterionOutcome {
    let window = Window::new(2, [-1.0, -1.0], [1.0, 1.0], 1.0 / 16.0).unwrap();
    let shape = ShapeSpec::half_plane([0.0, 1.0], 0.0);
    let mut all_exact = true;
    let mut worst_cert = 0.0f64;
    for s in [0.1, 0.25, 0.4] {
        let problem = mincut::build_problem(&shape, &window, s, 6.0).unwrap();
        let result = mincut::minimize_exact(&problem).unwrap();
        all_exact &= result.mask == problem.exterior_mask();
        let cert = result.certificate.unwrap();
        worst_cert =
            worst_cert.max((cert - result.objective).abs() / result.objective.max(1.0));
    }
    outcome(
        "A3",
        "half-plane minimality",
        all_exact && worst_cert <= 1e-9,
        format!(
            "argmin equals the rasterized half-plane at all s: {all_exact}; worst flow/cut gap {worst_cert:.1e} (tol 1e-9)"
        ),
    )
}

fn a4_cone_non_minimality() -> CriterionOutcome {
    let window = Window::new(2, [-1.0, -1.0], [1.0, 1.0], 1.0 / 16.0).unwrap();
    let problem = mincut::build_problem(&ShapeSpec::cross_cone(), &window, 0.25, 6.0).unwrap();
    let reference = problem.exterior_mask();
    let base = problem.objective(&reference);
    let best = mincut::minimize_exact(&problem).unwrap();
    let margin = base - best.objective;
    // Window pairs are complete and the far field is the exact angular
    // tail, so the truncation allowance is only quadrature roundoff.
    let truncation_bound = 1e-8;
    let changed = best.mask != reference;
    outcome(
        "A4",
        "cone non-minimality",
        changed && margin > truncation_bound + 1e-6,
        format!(
            "objective drops {margin:.4} below the cone mask (bound {truncation_bound:.0e} + 1e-6); mask changed: {changed}"
        ),
    )
}

fn a5_small_s_ball_limit() -> CriterionOutcome {
    let window = Window::new(2, [-1.5, -1.5], [1.5, 1.5], 1.0 / 32.0).unwrap();
    let spec = ShapeSpec::ball([0.0, 0.0], 0.5);
    let report =
        scaled_limits(&spec, &window, &[0.05, 0.02, 0.01], LimitMode::ToZero, 0.5, 1.0).unwrap();
    let limit = extrapolate_scaled(&report, 0.0, 3);
    let want = PI * PI / 2.0;
    let rel = ((limit - want) / want).abs();
    outcome(
        "A5",
        "small-s ball limit",
        rel <= 0.05,
        format!("extrapolated {limit:.4} vs {want:.4}, rel {rel:.4} (tol 0.05)"),
    )
}

fn a6_small_s_convex_combination() -> CriterionOutcome {
    let window = Window::new(2, [-1.5, -1.5], [1.5, 1.5], 1.0 / 32.0).unwrap();
    let spec = ShapeSpec::cone(FRAC_PI_4, FRAC_PI_2);
    let report =
        scaled_limits(&spec, &window, &[0.05, 0.02, 0.01], LimitMode::ToZero, 0.5, 1.0).unwrap();
    let limit = extrapolate_scaled(&report, 0.0, 3);
    let target = report.rows[0][3];
    let rel = ((limit - target) / target).abs();
    outcome(
        "A6",
        "small-s convex combination",
        rel <= 0.10,
        format!("extrapolated {limit:.4} vs {target:.4}, rel {rel:.4} (tol 0.10)"),
    )
}

fn a7_large_s_ratio() -> CriterionOutcome {
    let window = Window::new(2, [-1.5, -1.5], [1.5, 1.5], 1.0 / 16.0).unwrap();
    let s_list = [0.40, 0.44, 0.47, 0.49];
    let hp = scaled_limits(
        &ShapeSpec::half_plane([0.0, 1.0], 0.0),
        &window,
        &s_list,
        LimitMode::ToHalf,
        0.5,
        1.0,
    )
    .unwrap();
    let cross = scaled_limits(
        &ShapeSpec::cross_cone(),
        &window,
        &s_list,
        LimitMode::ToHalf,
        0.5,
        1.0,
    )
    .unwrap();
    let lim_hp = extrapolate_scaled(&hp, 0.5, 3);
    let lim_cross = extrapolate_scaled(&cross, 0.5, 3);
    let ratio = lim_cross / lim_hp;
    let hard = (ratio - 2.0).abs() <= 0.05 * 2.0;
    let soft_target = TAU * 2.0;
    let soft_rel = ((lim_hp - soft_target) / soft_target).abs();
    let mut out = outcome(
        "A7",
        "perimeter ratio toward the classical regime",
        hard,
        format!("cross/half-plane limit ratio {ratio:.4} (want 2 within 5%)"),
    );
    out.soft_note = Some(format!(
        "soft absolute check: half-plane limit {lim_hp:.3} vs {soft_target:.3}, rel {soft_rel:.2} \
         (informational; at fixed h the scaled perimeter saturates at a lattice constant, so only \
         the shape ratio is meaningful)"
    ));
    out
}

fn a8_oscillation() -> CriterionOutcome {
    let window = Window::new(2, [-1.5, -1.5], [1.5, 1.5], 1.0 / 16.0).unwrap();
    let set = rasterize(&ShapeSpec::oscillating_default(), &window);
    let mut values = Vec::new();
    for s in [0.2, 0.1, 0.05, 0.025, 0.0125] {
        let pv = frac_perimeter_in(&set, &PerimeterParams::new(s, 0.5).in_ball(1.0)).unwrap();
        values.push(2.0 * s * pv.total);
    }
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    let spread = max / min;
    outcome(
        "A8",
        "small-s non-convergence",
        spread >= 1.2,
        format!(
            "scaled values {:?} spread {spread:.3} (floor 1.2)",
            values.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    )
}

fn a9_brute_force_oracle() -> CriterionOutcome {
    let window = Window::new(2, [-0.5, -0.5], [0.5, 0.5], 0.25).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut worst = 0.0f64;
    let mut flip_beats = 0usize;
    let mut flip_matches = 0usize;
    for _ in 0..30 {
        let boxes: Vec<Rect> = (0..3)
            .map(|_| {
                let x0: f64 = rng.random_range(-2.0..1.0);
                let y0: f64 = rng.random_range(-2.0..1.0);
                Rect::new(
                    [x0, y0],
                    [x0 + rng.random_range(0.3..1.5), y0 + rng.random_range(0.3..1.5)],
                )
            })
            .collect();
        let s = rng.random_range(0.05..0.45);
        let seed = rng.random_range(0..1_000_000);
        let problem =
            mincut::build_problem(&ShapeSpec::rect_union(boxes), &window, s, 4.0).unwrap();
        let exact = mincut::minimize_exact(&problem).unwrap();
        let brute = mincut::brute_force(&problem).unwrap();
        worst = worst
            .max((exact.objective - brute.objective).abs() / brute.objective.abs().max(1e-12));
        let descent = mincut::flip_descent(&problem, &vec![false; problem.cells()], seed);
        if descent.objective < brute.objective - 1e-10 {
            flip_beats += 1;
        }
        if (descent.objective - brute.objective).abs() <= 1e-9 * brute.objective.abs().max(1.0) {
            flip_matches += 1;
        }
    }
    outcome(
        "A9",
        "exhaustive-enumeration oracle",
        worst <= 1e-10 && flip_beats == 0,
        format!(
            "max flow-vs-enumeration gap {worst:.1e} over 30 instances; descent never beat the optimum and matched it {flip_matches}/30 times"
        ),
    )
}

fn a10_branch_multipliers() -> CriterionOutcome {
    let (k1, p1, _) = branch_scales(0.25, 0.1);
    let (k2, p2, _) = branch_scales(0.5, (-1.0f64).exp());
    let (k3, p3, _) = branch_scales(0.75, 0.1);
    let checks = [
        (k1, 1.0),
        (p1, 10f64.powf(0.5)),
        (k2, 1.0),
        (p2, 1.0f64.exp()),
        (k3, 10f64.powf(-0.5)),
        (p3, 10.0),
    ];
    let worst = checks
        .iter()
        .map(|(got, want)| ((got - want) / want).abs())
        .fold(0.0, f64::max);

    // And the scaled total composes the parts with those multipliers.
    let w = Window::new(2, [-0.5, -0.5], [0.5, 0.5], 0.125).unwrap();
    let set = rasterize(&ShapeSpec::half_plane([0.0, 1.0], 0.0), &w);
    let mut u = PhaseField::from_set(&set);
    for v in u.values.iter_mut() {
        *v *= 0.7;
    }
    let e = fraclab_core::allen_cahn::energy_g_eps(&u, 0.25, 0.1, 2.0).unwrap();
    let composed =
        ((e.total - (e.kinetic_scale * e.kinetic + e.potential_scale * e.potential)) / e.total)
            .abs();
    outcome(
        "A10",
        "rescaling branch multipliers",
        worst <= 1e-12 && composed <= 1e-12,
        format!("max multiplier error {worst:.1e}; total composition error {composed:.1e}"),
    )
}

fn a11_gradient_check() -> CriterionOutcome {
    let w = Window::new(2, [-0.5, -0.5], [0.5, 0.5], 1.0 / 16.0).unwrap();
    let ext = ExteriorData::SignTrace(ShapeSpec::half_plane([0.0, 1.0], 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let vals: Vec<f64> = (0..w.cell_count()).map(|_| rng.random_range(-0.9..0.9)).collect();
    let delta = 1e-5;
    let mut worst = 0.0f64;
    for (s, eps) in [(0.3, 0.1), (0.75, 0.1)] {
        let ctx = EnergyContext::new(&w, &ext, s, 3.0).unwrap();
        let (ks, ps, _) = branch_scales(s, eps);
        let grad: Vec<f64> = ctx
            .kinetic_grad(&vals)
            .iter()
            .zip(&vals)
            .map(|(g, &v)| ks * g + ps * ctx.cell_measure() * double_well_prime(v))
            .collect();
        for _ in 0..100 {
            let idx = rng.random_range(0..w.cell_count());
            let mut plus = vals.clone();
            plus[idx] += delta;
            let mut minus = vals.clone();
            minus[idx] -= delta;
            let e_plus = ks * ctx.kinetic(&plus) + ps * ctx.potential(&plus);
            let e_minus = ks * ctx.kinetic(&minus) + ps * ctx.potential(&minus);
            let fd = (e_plus - e_minus) / (2.0 * delta);
            worst = worst.max((grad[idx] - fd).abs() / grad[idx].abs().max(1e-8));
        }
    }
    outcome(
        "A11",
        "analytic gradient vs central differences",
        worst <= 1e-5,
        format!("worst relative error {worst:.1e} over 100 random cells x 2 regimes (tol 1e-5)"),
    )
}

/// Shared setup for the interface experiments: a window vertically
/// centered on the trace line, with the density-ball origin sitting in
/// the plus phase above it.
fn interface_setup() -> (Window, ShapeSpec, f64) {
    let line_y = -0.2;
    let window = Window::new(2, [-0.5, -0.7], [0.5, 0.3], 1.0 / 32.0).unwrap();
    let trace = ShapeSpec::half_plane([0.0, -1.0], -line_y); // {y > -0.2}
    (window, trace, line_y)
}

fn tanh_profile(window: &Window, line_y: f64, eps: f64) -> Vec<f64> {
    (0..window.cell_count())
        .map(|idx| ((window.center_of(idx)[1] - line_y) / eps).tanh())
        .collect()
}

fn a12_interface_flatness() -> CriterionOutcome {
    let (window, trace, line_y) = interface_setup();
    let two_h = 2.0 * window.h;
    let mut worst_dev_tight = 0.0f64;
    let mut all_monotone = true;
    for s in [0.3, 0.75] {
        for eps in [0.2, 0.1, 0.05] {
            let u0 = PhaseField::new(
                window.clone(),
                tanh_profile(&window, line_y, eps),
                ExteriorData::SignTrace(trace.clone()),
            );
            let out = minimize_g_truncated(
                &u0,
                s,
                eps,
                2.0,
                &DescentParams {
                    max_iters: 600,
                    tol: 1e-10,
                    ..Default::default()
                },
            )
            .unwrap();
            all_monotone &= out.energies.windows(2).all(|p| p[1] <= p[0]);
            if (eps - 0.05).abs() < 1e-12 {
                let rep = interface_and_density(&out.field, (0.1, 0.0), &[0.25]).unwrap();
                worst_dev_tight =
                    worst_dev_tight.max(interface_deviation_from_line(&rep.interface, line_y));
            }
        }
    }
    outcome(
        "A12",
        "interface flatness across the dichotomy",
        worst_dev_tight <= two_h && all_monotone,
        format!(
            "zero-level deviation at the tightest width {worst_dev_tight:.2e} (tol 2h = {two_h:.4}); energies monotone: {all_monotone}"
        ),
    )
}

fn a13_density_floor() -> CriterionOutcome {
    let (window, trace, line_y) = interface_setup();
    let mut min_ratio = f64::MAX;
    let mut min_center = f64::MAX;
    for eps in [0.2, 0.1, 0.05] {
        let u0 = PhaseField::new(
            window.clone(),
            tanh_profile(&window, line_y, eps),
            ExteriorData::SignTrace(trace.clone()),
        );
        let out = minimize_g_truncated(
            &u0,
            0.3,
            eps,
            2.0,
            &DescentParams {
                max_iters: 600,
                tol: 1e-10,
                ..Default::default()
            },
        )
        .unwrap();
        let rep = interface_and_density(&out.field, (0.1, 0.0), &[0.25, 0.5]).unwrap();
        for (_, _, ratio) in rep.rows {
            min_ratio = min_ratio.min(ratio);
        }
        let center = window.cell_of([0.0, 0.0]).unwrap();
        min_center = min_center.min(out.field.values[window.index(center.0, center.1)]);
    }
    outcome(
        "A13",
        "occupancy density floor",
        min_ratio >= 0.05 && min_center > 0.1,
        format!(
            "min occupancy ratio {min_ratio:.3} over widths and radii (floor 0.05); min center value {min_center:.3} (> 0.1)"
        ),
    )
}

fn a14_extension_kernel() -> CriterionOutcome {
    let mut worst_mass = 0.0f64;
    for (dim, s) in [(1usize, 0.5f64), (2, 0.3)] {
        let k = normalize_kernel(dim, s).unwrap();
        for t in [0.5, 1.0, 2.0] {
            worst_mass = worst_mass.max((k.mass_at_height(t) - 1.0).abs());
        }
    }
    let k = normalize_kernel(1, 0.5).unwrap();
    let c_err = (k.c - 1.0 / PI).abs();
    let mut worst_pt = 0.0f64;
    for i in 0..10 {
        let x = -4.0 + 0.9 * i as f64;
        let classical = (1.0 / PI) / (x * x + 1.0);
        worst_pt = worst_pt.max((k.eval([x, 0.0], 1.0) - classical).abs());
    }
    outcome(
        "A14",
        "extension kernel normalization",
        worst_mass <= 1e-6 && c_err <= 1e-4 && worst_pt <= 1e-4,
        format!(
            "mass error {worst_mass:.1e} (tol 1e-6); critical-line constant error {c_err:.1e} and pointwise error {worst_pt:.1e} (tol 1e-4)"
        ),
    )
}

fn a15_submodular_slack() -> CriterionOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut min_slack = f64::MAX;
    let mut positive = 0usize;
    let mut ordered_exact = true;

    // Pair energy of Gagliardo type over a small window.
    let w = Window::new(2, [-0.5, -0.5], [0.5, 0.5], 0.125).unwrap();
    let ext = ExteriorData::SignTrace(ShapeSpec::half_plane([0.0, 1.0], 0.0));
    for trial in 0..1000 {
        let mk = |rng: &mut ChaCha8Rng| -> PhaseField {
            PhaseField::new(
                w.clone(),
                (0..w.cell_count()).map(|_| rng.random_range(-1.0..1.0)).collect(),
                ext.clone(),
            )
        };
        let u = mk(&mut rng);
        let v = if trial % 10 == 0 {
            // Ordered pair: v dominates u pointwise.
            PhaseField::new(
                w.clone(),
                u.values
                    .iter()
                    .map(|&a| (a + rng.random_range(0.0..0.5)).clamp(-1.0, 1.0))
                    .collect(),
                ext.clone(),
            )
        } else {
            mk(&mut rng)
        };
        let rep = minmax_check_gagliardo(&u, &v, 0.3, 2.0).unwrap();
        min_slack = min_slack.min(rep.slack);
        if rep.slack > 1e-12 {
            positive += 1;
        }
        if trial % 10 == 0 && rep.slack != 0.0 {
            // Ordered fields make min/max the fields themselves.
            let dominated = u.values.iter().zip(&v.values).all(|(a, b)| a <= b);
            if dominated {
                ordered_exact = false;
            }
        }
    }

    // Weighted extension energy over a line grid.
    let geom = HalfSpaceGeometry::geometric(Window::new_1d(-1.0, 1.0, 0.25).unwrap(), 1.0);
    for trial in 0..1000 {
        let mk = |rng: &mut ChaCha8Rng| HalfSpaceField {
            geom: geom.clone(),
            values: (0..geom.node_count()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let u = mk(&mut rng);
        let v = if trial % 10 == 0 {
            HalfSpaceField {
                geom: geom.clone(),
                values: u.values.iter().map(|&a| a + 0.3).collect(),
            }
        } else {
            mk(&mut rng)
        };
        let rep = minmax_check_weighted(&u, &v, 0.3);
        min_slack = min_slack.min(rep.slack);
        if rep.slack > 1e-12 {
            positive += 1;
        }
        if trial % 10 == 0 && rep.slack != 0.0 {
            ordered_exact = false;
        }
    }

    outcome(
        "A15",
        "min/max energy identity",
        min_slack >= -1e-12 && positive > 0 && ordered_exact,
        format!(
            "min slack {min_slack:.1e} over 2000 pairs (floor -1e-12); strictly positive in {positive} crossing pairs; ordered pairs exact: {ordered_exact}"
        ),
    )
}

fn a16_translate_competitor_decay() -> CriterionOutcome {
    let mut summaries = Vec::new();
    let mut all_within = true;
    for s in [0.25, 0.4] {
        let window = Window::new_1d(-48.0, 48.0, 0.25).unwrap();
        let geom = HalfSpaceGeometry::geometric(window, 64.0);
        let kernel = normalize_kernel(1, s).unwrap();
        let trace = ShapeSpec::half_line_1d(-1.0, 0.0);
        let u = extend(&trace, &kernel, &geom, 96.0);
        let mut ln_r = Vec::new();
        let mut ln_gap = Vec::new();
        let mut c_fitted = Vec::new();
        for r in [8.0, 16.0, 32.0] {
            let competitor = glued_translate(&u, 1.0, r);
            let gap = weighted_energy(&competitor, s, Region::Ball { r })
                - weighted_energy(&u, s, Region::Ball { r });
            ln_r.push(r.ln());
            ln_gap.push(gap.ln());
            c_fitted.push(gap * r.powf(2.0 * s));
        }
        let slope =
            linear_extrapolate(&ln_r, &ln_gap, 1.0) - linear_extrapolate(&ln_r, &ln_gap, 0.0);
        let within = (slope + 2.0 * s).abs() <= 0.15;
        all_within &= within;
        summaries.push(format!(
            "s={s}: fitted exponent {slope:.3} vs -2s = {:.2} (window 0.15); upper-bound constants gap*R^2s = {:?}",
            -2.0 * s,
            c_fitted.iter().map(|c| (c * 1e4).round() / 1e4).collect::<Vec<_>>()
        ));
    }
    let mut out = outcome(
        "A16",
        "translated-competitor decay exponent",
        all_within,
        summaries.join("; "),
    );
    if !all_within {
        out.soft_note = Some(
            "the measured gap decays like R^-(1+2s): the base profile minimizes the extension \
             energy, so the glued translate is a second-order perturbation and its gap falls \
             below the first-order C/R^2s envelope (which the decreasing fitted constants \
             confirm as an upper bound); the pinned exponent window cannot be met by this \
             construction"
                .to_string(),
        );
    }
    out
}
