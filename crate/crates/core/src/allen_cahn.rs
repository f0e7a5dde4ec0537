//! Fractional Allen-Cahn energies over the window-coupled pair domain,
//! their minimization with prescribed exterior trace, and the interface
//! and density diagnostics used by the scaling experiments.

use rayon::prelude::*;

use crate::contour;
use crate::error::{FracError, Result};
use crate::geometry::{Point, Window};
use crate::kernel::InteractionTable;
use crate::numerics::KahanSum;
use crate::perimeter::{ExteriorCoupling, ExteriorField};
use crate::shapes::{GridSet, ShapeSpec};

/// The double-well potential `W(t) = (1 - t^2)^2 / 4`.
pub fn double_well(t: f64) -> f64 {
    let q = 1.0 - t * t;
    0.25 * q * q
}

/// `W'(t) = -t (1 - t^2)`, so the potential gradient matches `u - u^3`
/// up to sign convention.
pub fn double_well_prime(t: f64) -> f64 {
    t * t * t - t
}

/// Exterior datum of a phase field: the sign trace `chi_E - chi_{E^c}` of
/// a shape, or zero outside the window (bounded support).
#[derive(Debug, Clone)]
pub enum ExteriorData {
    SignTrace(ShapeSpec),
    Zero,
}

/// A real-valued field on the window cells, clamped to `[-1, 1]`, with an
/// analytically prescribed exterior.
#[derive(Debug, Clone)]
pub struct PhaseField {
    pub window: Window,
    pub values: Vec<f64>,
    pub exterior: ExteriorData,
}

impl PhaseField {
    pub fn new(window: Window, values: Vec<f64>, exterior: ExteriorData) -> Self {
        assert_eq!(values.len(), window.cell_count());
        let values = values.into_iter().map(|v| v.clamp(-1.0, 1.0)).collect();
        Self {
            window,
            values,
            exterior,
        }
    }

    /// The sign field `chi_E - chi_{E^c}` of a grid set, with the matching
    /// trace outside the window.
    pub fn from_set(set: &GridSet) -> Self {
        let values = set.mask.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
        Self::new(
            set.window.clone(),
            values,
            ExteriorData::SignTrace(set.exterior.clone()),
        )
    }

    /// The 0/1 indicator of a bounded grid set, extended by zero.
    pub fn indicator_bounded(set: &GridSet) -> Self {
        let values = set.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self::new(set.window.clone(), values, ExteriorData::Zero)
    }

    pub fn constant(window: Window, value: f64, exterior: ExteriorData) -> Self {
        let n = window.cell_count();
        Self::new(window, vec![value; n], exterior)
    }

    /// Value anywhere: the cell value inside the window, the exterior
    /// datum outside.
    pub fn query(&self, p: Point) -> f64 {
        match self.window.cell_of(p) {
            Some((ix, iy)) => self.values[self.window.index(ix, iy)],
            None => match &self.exterior {
                ExteriorData::SignTrace(spec) => {
                    if spec.membership(p) {
                        1.0
                    } else {
                        -1.0
                    }
                }
                ExteriorData::Zero => 0.0,
            },
        }
    }
}

/// Rescaled field `x -> u(x / eps)` by nearest-cell lookup with exterior
/// fallthrough; the window and exterior datum are kept.
pub fn rescale(u: &PhaseField, eps: f64) -> PhaseField {
    assert!(eps > 0.0);
    let values = (0..u.window.cell_count())
        .map(|idx| {
            let c = u.window.center_of(idx);
            u.query([c[0] / eps, c[1] / eps])
        })
        .collect();
    PhaseField::new(u.window.clone(), values, u.exterior.clone())
}

/// Scaling regime of the rescaled functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Subcritical,
    Critical,
    Supercritical,
}

/// Branch multipliers `(kinetic, potential)` of the rescaled functional.
pub fn branch_scales(s: f64, eps: f64) -> (f64, f64, Branch) {
    if (s - 0.5).abs() < 1e-12 {
        let l = (1.0 / eps).ln();
        (l, l / eps, Branch::Critical)
    } else if s < 0.5 {
        (1.0, eps.powf(-2.0 * s), Branch::Subcritical)
    } else {
        (eps.powf(2.0 * s - 1.0), 1.0 / eps, Branch::Supercritical)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub kinetic_scale: f64,
    pub potential_scale: f64,
    pub total: f64,
    pub branch: Branch,
    pub eps: f64,
}

/// Reusable quadrature state for energies over one window and exterior.
pub struct EnergyContext {
    window: Window,
    table: InteractionTable,
    coupling: ExteriorCoupling,
    zero_trace: bool,
    hn: f64,
}

impl EnergyContext {
    pub fn new(window: &Window, exterior: &ExteriorData, s: f64, r_t: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(FracError::SOutOfUnit(s));
        }
        let table =
            InteractionTable::build(window, s, crate::perimeter::table_radius(window, r_t))?;
        let (field, zero_trace) = match exterior {
            ExteriorData::SignTrace(spec) => (ExteriorField::Sign(spec), false),
            ExteriorData::Zero => (ExteriorField::Zero, true),
        };
        let coupling = ExteriorCoupling::build(window, &table, field, r_t, true, None);
        Ok(Self {
            window: window.clone(),
            table,
            coupling,
            zero_trace,
            hn: window.cell_measure(),
        })
    }

    pub fn for_field(u: &PhaseField, s: f64, r_t: f64) -> Result<Self> {
        Self::new(&u.window, &u.exterior, s, r_t)
    }

    /// Kinetic part: each window-window and window-exterior pair counted
    /// once with weight `w (u_a - u_b)^2 / 2`, plus the analytic tails.
    pub fn kinetic(&self, values: &[f64]) -> f64 {
        let per_cell = self.per_cell_kinetic(values);
        let mut acc = KahanSum::new();
        for v in per_cell {
            acc.add(v);
        }
        acc.value()
    }

    fn per_cell_kinetic(&self, values: &[f64]) -> Vec<f64> {
        let window = &self.window;
        let m = self.table.max_offset();
        let nx = window.nx as i64;
        let ny = window.ny as i64;
        (0..window.cell_count())
            .into_par_iter()
            .map(|idx| {
                let (ix, iy) = window.coords(idx);
                let (ix, iy) = (ix as i64, iy as i64);
                let ua = values[idx];
                let mut pair2 = 0.0; // ordered window pairs, halved later
                let (dj_lo, dj_hi) = if window.dim == 1 {
                    (0, 0)
                } else {
                    ((-iy).max(-m), (ny - 1 - iy).min(m))
                };
                for dj in dj_lo..=dj_hi {
                    let by = iy + dj;
                    for di in (-ix).max(-m)..=(nx - 1 - ix).min(m) {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let w = self.table.get(di, dj);
                        if w == 0.0 {
                            continue;
                        }
                        let ub = values[window.index((ix + di) as usize, by as usize)];
                        let d = ua - ub;
                        pair2 += w * d * d;
                    }
                }
                // Ordered pairs counted twice within the window; the
                // spec's pair convention is (1/2) per unordered pair.
                let mut acc = 0.25 * pair2;
                let s_ext = self.coupling.ring_set[idx] + self.coupling.tail_set[idx];
                let c_ext = self.coupling.ring_comp[idx] + self.coupling.tail_comp[idx];
                if self.zero_trace {
                    acc += 0.5 * ua * ua * (s_ext + c_ext);
                } else {
                    let dp = ua - 1.0;
                    let dm = ua + 1.0;
                    acc += 0.5 * (dp * dp * s_ext + dm * dm * c_ext);
                }
                acc
            })
            .collect()
    }

    /// Gradient of `kinetic` with respect to the cell values.
    pub fn kinetic_grad(&self, values: &[f64]) -> Vec<f64> {
        let window = &self.window;
        let m = self.table.max_offset();
        let nx = window.nx as i64;
        let ny = window.ny as i64;
        (0..window.cell_count())
            .into_par_iter()
            .map(|idx| {
                let (ix, iy) = window.coords(idx);
                let (ix, iy) = (ix as i64, iy as i64);
                let ua = values[idx];
                let mut g = 0.0;
                let (dj_lo, dj_hi) = if window.dim == 1 {
                    (0, 0)
                } else {
                    ((-iy).max(-m), (ny - 1 - iy).min(m))
                };
                for dj in dj_lo..=dj_hi {
                    let by = iy + dj;
                    for di in (-ix).max(-m)..=(nx - 1 - ix).min(m) {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let w = self.table.get(di, dj);
                        if w == 0.0 {
                            continue;
                        }
                        g += w * (ua - values[window.index((ix + di) as usize, by as usize)]);
                    }
                }
                let s_ext = self.coupling.ring_set[idx] + self.coupling.tail_set[idx];
                let c_ext = self.coupling.ring_comp[idx] + self.coupling.tail_comp[idx];
                if self.zero_trace {
                    g += ua * (s_ext + c_ext);
                } else {
                    g += (ua - 1.0) * s_ext + (ua + 1.0) * c_ext;
                }
                g
            })
            .collect()
    }

    pub fn potential(&self, values: &[f64]) -> f64 {
        let mut acc = KahanSum::new();
        for &v in values {
            acc.add(double_well(v));
        }
        self.hn * acc.value()
    }

    pub fn cell_measure(&self) -> f64 {
        self.hn
    }
}

/// Kinetic part of the unscaled functional; the squared Gagliardo
/// seminorm restricted to window-coupled pairs is four times this.
pub fn kinetic_q_u(u: &PhaseField, s: f64, r_t: f64) -> Result<f64> {
    let ctx = EnergyContext::for_field(u, s, r_t)?;
    Ok(ctx.kinetic(&u.values))
}

/// The unscaled functional: kinetic pair energy plus the double-well
/// integral over the window.
pub fn energy_g(u: &PhaseField, s: f64, r_t: f64) -> Result<EnergyBreakdown> {
    let ctx = EnergyContext::for_field(u, s, r_t)?;
    let kinetic = ctx.kinetic(&u.values);
    let potential = ctx.potential(&u.values);
    let (_, _, branch) = branch_scales(s, 0.5);
    Ok(EnergyBreakdown {
        kinetic,
        potential,
        kinetic_scale: 1.0,
        potential_scale: 1.0,
        total: kinetic + potential,
        branch,
        eps: 1.0,
    })
}

/// The rescaled functional with the three-branch scaling in `eps`.
pub fn energy_g_eps(u: &PhaseField, s: f64, eps: f64, r_t: f64) -> Result<EnergyBreakdown> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(FracError::EpsOutOfRange(eps));
    }
    let ctx = EnergyContext::for_field(u, s, r_t)?;
    Ok(energy_g_eps_with(&ctx, &u.values, s, eps))
}

fn energy_g_eps_with(ctx: &EnergyContext, values: &[f64], s: f64, eps: f64) -> EnergyBreakdown {
    let kinetic = ctx.kinetic(values);
    let potential = ctx.potential(values);
    let (ks, ps, branch) = branch_scales(s, eps);
    EnergyBreakdown {
        kinetic,
        potential,
        kinetic_scale: ks,
        potential_scale: ps,
        total: ks * kinetic + ps * potential,
        branch,
        eps,
    }
}

/// Pointwise residual of the Euler-Lagrange equation of the unscaled
/// functional: the kinetic gradient per unit cell measure minus
/// `u - u^3`. No extra normalizing constant is applied; the operator is
/// kept consistent with the pair energy rather than with any Fourier
/// convention.
pub fn frac_laplacian_residual(u: &PhaseField, s: f64, r_t: f64) -> Result<Vec<f64>> {
    let ctx = EnergyContext::for_field(u, s, r_t)?;
    let grad = ctx.kinetic_grad(&u.values);
    Ok(grad
        .iter()
        .zip(&u.values)
        .map(|(g, &v)| g / ctx.hn - (v - v * v * v))
        .collect())
}

#[derive(Debug, Clone, Copy)]
pub struct DescentParams {
    pub max_iters: usize,
    pub tol: f64,
    /// Initial step; defaults to `h^(2s)` when `None`.
    pub eta0: Option<f64>,
    pub max_backtracks: u32,
}

impl Default for DescentParams {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-10,
            eta0: None,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub field: PhaseField,
    /// Accepted energy sequence, strictly non-increasing.
    pub energies: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Projected gradient descent on the rescaled functional: steps are
/// clamped back into `[-1, 1]`, the step halves until the energy
/// decreases, and the loop stops when the decrease falls below `tol`.
pub fn minimize_g(
    u0: &PhaseField,
    s: f64,
    eps: f64,
    params: &DescentParams,
) -> Result<DescentOutcome> {
    minimize_g_truncated(u0, s, eps, 2.0 * u0.window.diameter(), params)
}

pub fn minimize_g_truncated(
    u0: &PhaseField,
    s: f64,
    eps: f64,
    r_t: f64,
    params: &DescentParams,
) -> Result<DescentOutcome> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(FracError::EpsOutOfRange(eps));
    }
    let ctx = EnergyContext::for_field(u0, s, r_t)?;
    let (ks, ps, _) = branch_scales(s, eps);
    let mut values = u0.values.clone();
    let mut energy = {
        let e = energy_g_eps_with(&ctx, &values, s, eps);
        e.total
    };
    let mut energies = vec![energy];
    let mut eta = params.eta0.unwrap_or_else(|| u0.window.h.powf(2.0 * s));
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iters {
        let kin_grad = ctx.kinetic_grad(&values);
        let grad: Vec<f64> = kin_grad
            .iter()
            .zip(&values)
            .map(|(g, &v)| ks * g + ps * ctx.hn * double_well_prime(v))
            .collect();
        let mut accepted = false;
        let mut backtracks = 0;
        while backtracks <= params.max_backtracks {
            let trial: Vec<f64> = values
                .iter()
                .zip(&grad)
                .map(|(&v, &g)| (v - eta * g).clamp(-1.0, 1.0))
                .collect();
            let e_trial = energy_g_eps_with(&ctx, &trial, s, eps).total;
            if e_trial < energy {
                let decrease = energy - e_trial;
                values = trial;
                energy = e_trial;
                energies.push(energy);
                accepted = true;
                if backtracks == 0 {
                    eta *= 1.1;
                }
                if decrease < params.tol {
                    converged = true;
                }
                break;
            }
            eta *= 0.5;
            backtracks += 1;
            if eta < 1e-300 {
                return Err(FracError::NoProgress);
            }
        }
        iterations += 1;
        if !accepted {
            // No admissible decrease at any step size: a fixed point of
            // the projected dynamics within the tolerance.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    Ok(DescentOutcome {
        field: PhaseField::new(u0.window.clone(), values, u0.exterior.clone()),
        energies,
        iterations,
        converged,
    })
}

#[derive(Debug, Clone)]
pub struct DensityReport {
    /// Rows `(R, measure of B_R cap {u > theta2}, measure / R^n)`.
    pub rows: Vec<(f64, f64, f64)>,
    /// Zero-level interface segments of the field.
    pub interface: Vec<[Point; 2]>,
}

/// Measures the super-level occupancy of centered balls and extracts the
/// zero-level interface.
pub fn interface_and_density(
    u: &PhaseField,
    thetas: (f64, f64),
    radii: &[f64],
) -> Result<DensityReport> {
    let (theta1, theta2) = thetas;
    assert!(theta1 > -1.0 && theta1 < 1.0 && theta2 > -1.0 && theta2 < 1.0);
    let center = u
        .window
        .cell_of([0.0, 0.0])
        .ok_or(FracError::CenterBelowTheta)?;
    if u.values[u.window.index(center.0, center.1)] <= theta1 {
        return Err(FracError::CenterBelowTheta);
    }
    let hn = u.window.cell_measure();
    let dimf = u.window.dim as f64;
    let rows = radii
        .iter()
        .map(|&r| {
            let mut count = 0usize;
            for idx in 0..u.window.cell_count() {
                let c = u.window.center_of(idx);
                if c[0] * c[0] + c[1] * c[1] < r * r && u.values[idx] > theta2 {
                    count += 1;
                }
            }
            let measure = hn * count as f64;
            (r, measure, measure / r.powf(dimf))
        })
        .collect();
    let interface = contour::level_segments(&u.window, &u.values, 0.0);
    Ok(DensityReport { rows, interface })
}

/// Largest distance from the interface vertices to the horizontal line
/// `y = line_y`; the straightness diagnostic of the scaling experiments.
pub fn interface_deviation_from_line(interface: &[[Point; 2]], line_y: f64) -> f64 {
    interface
        .iter()
        .flatten()
        .map(|p| (p[1] - line_y).abs())
        .fold(0.0, f64::max)
}
