//! Argument grammar and experiment dispatch.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fraclab_core::allen_cahn::{
    energy_g_eps, interface_and_density, interface_deviation_from_line, minimize_g_truncated,
    DescentParams, PhaseField,
};
use fraclab_core::euler_lagrange::{el_integral, ElParams};
use fraclab_core::extension::{extend, normalize_kernel, HalfSpaceGeometry};
use fraclab_core::geometry::Window;
use fraclab_core::mincut;
use fraclab_core::perimeter::{
    extrapolate_scaled, frac_perimeter_in, LimitMode, PerimeterParams,
};
use fraclab_core::report::format_sig;
use fraclab_core::shapes::{rasterize, ShapeKind, ShapeSpec};
use fraclab_core::FracError;

use crate::repro;

/// Numerical laboratory for nonlocal perimeters and fractional phase
/// transitions on uniform grids.
#[derive(Debug, Parser)]
#[command(name = "fraclab", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nonlocal perimeter of a rasterized shape.
    Perimeter(PerimeterArgs),
    /// Scaled-limit sweep over a list of exponents.
    #[command(name = "sweep-s")]
    SweepS(SweepArgs),
    /// Boundary-balance integral at a point.
    El(ElArgs),
    /// Minimize the discrete perimeter with fixed exterior data.
    Minimize(MinimizeArgs),
    /// Minimize the rescaled phase-transition functional.
    #[command(name = "allen-cahn")]
    AllenCahn(AllenCahnArgs),
    /// Interface flatness across a list of transition widths.
    #[command(name = "gamma-sweep")]
    GammaSweep(GammaSweepArgs),
    /// Kernel extension of a sign trace to the upper half-space.
    Extend(ExtendArgs),
    /// The cross-cone story: flip equality, balance integral, minimizer.
    #[command(name = "cone-demo")]
    ConeDemo(ConeDemoArgs),
    /// Run the reproduction suite and print one line per criterion.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Window corners: lox,loy,hix,hiy (two values lo,hi when --dim 1).
    #[arg(long, default_value = "-1,-1,1,1", allow_hyphen_values = true)]
    pub window: String,
    /// Cell side; window sides must be integer multiples of it.
    #[arg(long, default_value_t = 0.0625)]
    pub h: f64,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Handover radius from the rasterized exterior ring to the analytic
    /// tail.
    #[arg(long, default_value_t = 4.0)]
    pub rt: f64,
    /// Optional JSON file supplying defaults for the flags of this
    /// subcommand; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PerimeterArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Shape grammar, e.g. halfplane:ny=1,c=0 | cone:opening=1.0472 |
    /// crosscone | crosscone+sq:l=0.0625 | ball:r=0.5 | rects:... | osccone
    #[arg(long)]
    pub shape: String,
    #[arg(long)]
    pub s: f64,
    /// Restrict the energy domain to the centered ball of this radius.
    #[arg(long)]
    pub domain_r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub shape: String,
    /// Exponents, comma separated and monotone.
    #[arg(long = "s-list", value_delimiter = ',', allow_hyphen_values = true)]
    pub s_list: Vec<f64>,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Radius of the energy domain ball.
    #[arg(long, default_value_t = 1.0)]
    pub domain_r: f64,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    #[value(name = "to_half", alias = "to-half")]
    ToHalf,
    #[value(name = "to_zero", alias = "to-zero")]
    ToZero,
}

#[derive(Debug, Args)]
pub struct ElArgs {
    #[arg(long)]
    pub shape: String,
    /// Evaluation point x,y.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub rho0: f64,
    #[arg(long, default_value_t = 16.0)]
    pub rt: f64,
    #[arg(long, default_value_t = 64)]
    pub radii_per_decade: usize,
    #[arg(long, default_value_t = 256)]
    pub angles: usize,
    /// The side of the glued square defaults to this when the shape is
    /// crosscone+sq without an explicit side.
    #[arg(long, default_value_t = 0.0625)]
    pub l: f64,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Exterior datum shape grammar.
    #[arg(long)]
    pub exterior: String,
    #[arg(long)]
    pub s: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Maxflow)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the minimizing mask as a plain PGM.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a JSON result record.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Maxflow,
    Flip,
    Brute,
}

#[derive(Debug, Args)]
pub struct AllenCahnArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub exterior: String,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 400)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Write the minimizing field as a plain-text matrix.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the ball-occupancy report as CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5")]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub theta1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta2: f64,
}

#[derive(Debug, Args)]
pub struct GammaSweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Exterior datum; a half-plane with a vertical normal, so the
    /// interface line is horizontal.
    #[arg(long)]
    pub exterior: String,
    #[arg(long)]
    pub s: f64,
    #[arg(long = "eps-list", value_delimiter = ',')]
    pub eps_list: Vec<f64>,
    #[arg(long, default_value_t = 400)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub trace: String,
    #[arg(long)]
    pub s: f64,
    /// Top of the vertical level stack.
    #[arg(long)]
    pub height: f64,
    /// Horizontal truncation radius of the trace convolution.
    #[arg(long, default_value_t = 16.0)]
    pub rc: f64,
    /// Level-stacked plain-text output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConeDemoArgs {
    #[arg(long, default_value_t = 0.125)]
    pub h: f64,
    #[arg(long, default_value_t = 0.25)]
    pub s: f64,
    #[arg(long, default_value_t = 6.0)]
    pub rt: f64,
    /// Side of the glued square; defaults to h.
    #[arg(long)]
    pub l: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    /// Comma-separated criterion ids (e.g. A1,A5); all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub id: Option<Vec<String>>,
    /// Write the JSON summary here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Failures carry the exit code contract: 2 for validation, 3 for
/// numerical failures.
#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<FracError> for CliFailure {
    fn from(e: FracError) -> Self {
        CliFailure {
            code: if e.is_validation() { 2 } else { 3 },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliFailure {
    fn from(e: std::io::Error) -> Self {
        CliFailure {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn validation(msg: impl Into<String>) -> CliFailure {
    CliFailure {
        code: 2,
        message: msg.into(),
    }
}

type CliResult = Result<(), CliFailure>;

fn parse_window(text: &str, dim: usize, h: f64) -> Result<Window, CliFailure> {
    let nums: Vec<f64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| validation(format!("bad window coordinate `{t}`")))
        })
        .collect::<Result<_, _>>()?;
    match (dim, nums.len()) {
        (1, 2) => Ok(Window::new_1d(nums[0], nums[1], h)?),
        (2, 4) => Ok(Window::new(2, [nums[0], nums[1]], [nums[2], nums[3]], h)?),
        _ => Err(validation("window needs lox,loy,hix,hiy (or lo,hi with --dim 1)")),
    }
}

fn parse_shape(text: &str, dim: usize, default_side: f64) -> Result<ShapeSpec, CliFailure> {
    let body = if text.trim() == "crosscone+sq" {
        format!("crosscone+sq:l={default_side}")
    } else {
        text.to_string()
    };
    Ok(ShapeSpec::parse(&body, dim)?)
}

fn parse_point(text: &str) -> Result<[f64; 2], CliFailure> {
    let nums: Vec<f64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| validation(format!("bad coordinate `{t}`")))
        })
        .collect::<Result<_, _>>()?;
    match nums.len() {
        1 => Ok([nums[0], 0.0]),
        2 => Ok([nums[0], nums[1]]),
        _ => Err(validation("points are x,y")),
    }
}

fn write_or_print(path: &Option<PathBuf>, contents: &str) -> CliResult {
    match path {
        Some(p) => {
            fs::write(p, contents)?;
            Ok(())
        }
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Perimeter(args) => run_perimeter(args),
        Command::SweepS(args) => run_sweep(args),
        Command::El(args) => run_el(args),
        Command::Minimize(args) => run_minimize(args),
        Command::AllenCahn(args) => run_allen_cahn(args),
        Command::GammaSweep(args) => run_gamma_sweep(args),
        Command::Extend(args) => run_extend(args),
        Command::ConeDemo(args) => run_cone_demo(args),
        Command::Repro(args) => run_repro(args),
    }
}

fn run_perimeter(args: PerimeterArgs) -> CliResult {
    let window = parse_window(&args.grid.window, args.grid.dim, args.grid.h)?;
    let shape = parse_shape(&args.shape, args.grid.dim, args.grid.h)?;
    let set = rasterize(&shape, &window);
    let mut params = PerimeterParams::new(args.s, args.grid.rt);
    if let Some(r) = args.domain_r {
        params = params.in_ball(r);
    }
    let pv = frac_perimeter_in(&set, &params)?;
    println!("shape      = {}", shape.grammar());
    println!("total      = {}", format_sig(pv.total));
    println!("in_in      = {}", format_sig(pv.in_in));
    println!("in_out     = {}", format_sig(pv.in_out));
    println!("out_in     = {}", format_sig(pv.out_in));
    println!("tail_share = {}", format_sig(pv.tail_share));
    Ok(())
}

fn run_sweep(args: SweepArgs) -> CliResult {
    let window = parse_window(&args.grid.window, args.grid.dim, args.grid.h)?;
    let shape = parse_shape(&args.shape, args.grid.dim, args.grid.h)?;
    let mode = match args.mode {
        ModeArg::ToHalf => LimitMode::ToHalf,
        ModeArg::ToZero => LimitMode::ToZero,
    };
    let start = Instant::now();
    let mut report = fraclab_core::perimeter::scaled_limits(
        &shape,
        &window,
        &args.s_list,
        mode,
        args.grid.rt,
        args.domain_r,
    )?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    let limit_point = match mode {
        LimitMode::ToHalf => 0.5,
        LimitMode::ToZero => 0.0,
    };
    let extrapolated = extrapolate_scaled(&report, limit_point, 3);
    let target = report.column("target").unwrap();
    write_or_print(&args.out, &report.to_csv())?;
    // Keep stdout machine-readable when the CSV streams there.
    let mut summary = String::new();
    if args.out.is_some() {
        let _ = writeln!(summary, "rows          = {}", report.rows.len());
    }
    let _ = writeln!(summary, "extrapolated  = {}", format_sig(extrapolated));
    if let Some(&t) = target.last() {
        if t != 0.0 {
            let _ = writeln!(summary, "target        = {}", format_sig(t));
            let _ = writeln!(
                summary,
                "rel_err       = {}",
                format_sig(((extrapolated - t) / t).abs())
            );
        }
    }
    if args.out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn run_el(args: ElArgs) -> CliResult {
    let shape = parse_shape(&args.shape, 2, args.l)?;
    let x0 = parse_point(&args.x0)?;
    let params = ElParams {
        radii_per_decade: args.radii_per_decade,
        angles: args.angles,
    };
    let v = el_integral(&shape, x0, args.s, args.rho0, args.rt, &params)?;
    println!("value          = {}", format_sig(v.value));
    println!("near_annulus   = {}", format_sig(v.near));
    println!("far_tail       = {}", format_sig(v.far));
    println!("error_estimate = {}", format_sig(v.error_estimate));
    Ok(())
}

fn run_minimize(args: MinimizeArgs) -> CliResult {
    let window = parse_window(&args.grid.window, args.grid.dim, args.grid.h)?;
    let exterior = parse_shape(&args.exterior, args.grid.dim, args.grid.h)?;
    let problem = mincut::build_problem(&exterior, &window, args.s, args.grid.rt)?;
    let reference = problem.exterior_mask();
    let result = match args.method {
        MethodArg::Maxflow => mincut::minimize_exact(&problem)?,
        MethodArg::Brute => mincut::brute_force(&problem)?,
        MethodArg::Flip => mincut::flip_descent(&problem, &reference, args.seed),
    };
    let margin = problem.objective(&reference) - result.objective;
    let set = mincut::result_set(&problem, &result.mask);
    if let Some(path) = &args.out {
        fs::write(path, set.to_pgm())?;
    }
    let method_name = match result.method {
        mincut::Method::MaxFlow => "maxflow",
        mincut::Method::Brute => "brute",
        mincut::Method::FlipDescent => "flip-descent",
    };
    let record = serde_json::json!({
        "objective": result.objective,
        "method": method_name,
        "cells": problem.cells(),
        "rt": args.grid.rt,
        "margin_vs_input": margin,
        "certificate": result.certificate,
    });
    if let Some(path) = &args.json {
        fs::write(path, serde_json::to_string_pretty(&record).unwrap())?;
    }
    println!("method          = {method_name}");
    println!("objective       = {}", format_sig(result.objective));
    println!("margin_vs_input = {}", format_sig(margin));
    if let Some(cert) = result.certificate {
        println!("flow_certificate= {}", format_sig(cert));
    }
    Ok(())
}

fn sign_field_from(set: &fraclab_core::GridSet) -> PhaseField {
    PhaseField::from_set(set)
}

fn run_allen_cahn(args: AllenCahnArgs) -> CliResult {
    let window = parse_window(&args.grid.window, args.grid.dim, args.grid.h)?;
    let exterior = parse_shape(&args.exterior, args.grid.dim, args.grid.h)?;
    let set = rasterize(&exterior, &window);
    let u0 = sign_field_from(&set);
    let params = DescentParams {
        max_iters: args.iters,
        tol: args.tol,
        ..Default::default()
    };
    let out = minimize_g_truncated(&u0, args.s, args.eps, args.grid.rt, &params)?;
    let energy = energy_g_eps(&out.field, args.s, args.eps, args.grid.rt)?;
    if let Some(path) = &args.out {
        fs::write(path, field_matrix(&out.field))?;
    }
    if let Some(path) = &args.report {
        let rep = interface_and_density(&out.field, (args.theta1, args.theta2), &args.radii)?;
        let mut csv = String::from("R,measure,ratio\n");
        for (r, measure, ratio) in rep.rows {
            let _ = writeln!(
                csv,
                "{},{},{}",
                format_sig(r),
                format_sig(measure),
                format_sig(ratio)
            );
        }
        fs::write(path, csv)?;
    }
    println!("iterations = {}", out.iterations);
    println!("converged  = {}", out.converged);
    println!("energy     = {}", format_sig(energy.total));
    println!("kinetic    = {}", format_sig(energy.kinetic));
    println!("potential  = {}", format_sig(energy.potential));
    Ok(())
}

fn field_matrix(field: &PhaseField) -> String {
    let w = &field.window;
    let mut out = String::new();
    for iy in (0..w.ny).rev() {
        let row: Vec<String> = (0..w.nx)
            .map(|ix| format_sig(field.values[w.index(ix, iy)]))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// The horizontal interface line of a half-plane datum with a vertical
/// normal.
fn horizontal_line_of(shape: &ShapeSpec) -> Result<f64, CliFailure> {
    match &shape.kind {
        ShapeKind::HalfPlane { normal, offset } if normal[0] == 0.0 && normal[1] != 0.0 => {
            Ok(offset / normal[1])
        }
        _ => Err(validation(
            "gamma-sweep needs a half-plane exterior with a vertical normal",
        )),
    }
}

fn run_gamma_sweep(args: GammaSweepArgs) -> CliResult {
    let window = parse_window(&args.grid.window, args.grid.dim, args.grid.h)?;
    let exterior = parse_shape(&args.exterior, args.grid.dim, args.grid.h)?;
    let line_y = horizontal_line_of(&exterior)?;
    let set = rasterize(&exterior, &window);
    let params = DescentParams {
        max_iters: args.iters,
        tol: args.tol,
        ..Default::default()
    };
    let mut csv = String::from("eps,interface_dev,energy,iterations\n");
    for &eps in &args.eps_list {
        let u0 = sign_field_from(&set);
        let out = minimize_g_truncated(&u0, args.s, eps, args.grid.rt, &params)?;
        let segs = fraclab_core::contour::level_segments(&window, &out.field.values, 0.0);
        let dev = interface_deviation_from_line(&segs, line_y);
        let energy = *out.energies.last().unwrap();
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            format_sig(eps),
            format_sig(dev),
            format_sig(energy),
            out.iterations
        );
    }
    write_or_print(&args.out, &csv)
}

fn run_extend(args: ExtendArgs) -> CliResult {
    let window = parse_window(&args.grid.window, args.grid.dim, args.grid.h)?;
    let trace = parse_shape(&args.trace, args.grid.dim, args.grid.h)?;
    let kernel = normalize_kernel(args.grid.dim, args.s)?;
    let geom = HalfSpaceGeometry::geometric(window.clone(), args.height);
    let field = extend(&trace, &kernel, &geom, args.rc);
    let mut out = String::new();
    for (k, &t) in geom.levels.iter().enumerate() {
        let _ = writeln!(out, "# level {k} t={}", format_sig(t));
        for iy in (0..window.ny).rev() {
            let row: Vec<String> = (0..window.nx)
                .map(|ix| format_sig(field.value(k, window.index(ix, iy))))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    write_or_print(&args.out, &out)
}

fn run_cone_demo(args: ConeDemoArgs) -> CliResult {
    let h = args.h;
    let side = args.l.unwrap_or(h);
    let s = args.s;
    let window = Window::new(2, [-1.0, -1.0], [1.0, 1.0], h)?;
    let cross = ShapeSpec::cross_cone();
    let plus = ShapeSpec::cross_cone_plus_square(side);

    let per_cross = frac_perimeter_in(&rasterize(&cross, &window), &PerimeterParams::new(s, args.rt))?;
    let per_plus = frac_perimeter_in(&rasterize(&plus, &window), &PerimeterParams::new(s, args.rt))?;
    println!("cross cone, window [-1,1]^2, h = {h}, s = {s}");
    println!("  Per_s(cross)        = {}", format_sig(per_cross.total));
    println!("  Per_s(cross+square) = {}", format_sig(per_plus.total));
    println!(
        "  relative difference = {}",
        format_sig(((per_cross.total - per_plus.total) / per_cross.total).abs())
    );

    let params = ElParams::default();
    let el_cross = el_integral(&cross, [0.0, 0.0], s, 1e-3, 16.0, &params)?;
    let el_plus = el_integral(&plus, [0.0, 0.0], s, 1e-3, 16.0, &params)?;
    println!("balance integral at the origin:");
    println!("  cross        = {}", format_sig(el_cross.value));
    println!("  cross+square = {}  (positive: the set side outweighs)", format_sig(el_plus.value));

    let problem = mincut::build_problem(&cross, &window, s, args.rt)?;
    let reference = problem.exterior_mask();
    let best = mincut::minimize_exact(&problem)?;
    let changed = best
        .mask
        .iter()
        .zip(&reference)
        .filter(|(a, b)| a != b)
        .count();
    println!("exact minimizer with cross-cone data:");
    println!("  objective(cone mask) = {}", format_sig(problem.objective(&reference)));
    println!("  objective(argmin)    = {}", format_sig(best.objective));
    println!("  cells changed        = {changed}");
    Ok(())
}

fn run_repro(args: ReproArgs) -> CliResult {
    let outcomes = repro::run(args.id.as_deref());
    if outcomes.is_empty() {
        return Err(validation("no matching criterion ids"));
    }
    let mut failed = 0;
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("{:<4} {:<4} {:>7.2}s  {}: {}", o.id, status, o.seconds, o.title, o.summary);
        if let Some(note) = &o.soft_note {
            println!("     note          {note}");
        }
        if !o.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if let Some(path) = &args.json {
        let criteria: Vec<serde_json::Value> = outcomes
            .iter()
            .map(|o| {
                serde_json::json!({
                    "id": o.id,
                    "title": o.title,
                    "passed": o.passed,
                    "seconds": o.seconds,
                    "summary": o.summary,
                    "soft_note": o.soft_note,
                })
            })
            .collect();
        let doc = serde_json::json!({
            "criteria": criteria,
            "passed": outcomes.len() - failed,
            "failed": failed,
        });
        fs::write(path, serde_json::to_string_pretty(&doc).unwrap())?;
    }
    if failed > 0 {
        Err(CliFailure {
            code: 1,
            message: format!("{failed} criteria failed"),
        })
    } else {
        Ok(())
    }
}
