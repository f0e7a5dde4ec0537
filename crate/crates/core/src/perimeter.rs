//! The fractional perimeter by the four-region decomposition, the
//! Gagliardo seminorm, classical perimeter and measures, the far-field
//! density, and the scaled limit sweeps.

use rayon::prelude::*;

use crate::allen_cahn::{kinetic_q_u, PhaseField};
use crate::contour;
use crate::error::{FracError, Result};
use crate::geometry::Window;
use crate::kernel::{self, InteractionTable};
use crate::numerics::{linear_extrapolate, KahanSum};
use crate::report::SweepReport;
use crate::shapes::{self, rasterize, Density, GridSet, ShapeSpec};

/// The energy domain `U`: the full window, or a centered ball inside it.
/// Cells outside `U` count as fixed boundary data with the mask's value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainSel {
    FullWindow,
    Ball { r: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct PerimeterParams {
    pub s: f64,
    pub r_t: f64,
    pub domain: DomainSel,
    /// When false, interactions beyond the truncation radius are dropped
    /// instead of replaced by the analytic tail.
    pub tails: bool,
}

impl PerimeterParams {
    pub fn new(s: f64, r_t: f64) -> Self {
        Self {
            s,
            r_t,
            domain: DomainSel::FullWindow,
            tails: true,
        }
    }

    pub fn in_ball(mut self, r: f64) -> Self {
        self.domain = DomainSel::Ball { r };
        self
    }

    pub fn without_tails(mut self) -> Self {
        self.tails = false;
        self
    }
}

/// The window cells split by set membership; the exterior regions stay
/// analytic and are queried through the `GridSet`.
#[derive(Debug, Clone)]
pub struct RegionSplit {
    pub set_in: Vec<usize>,
    pub comp_in: Vec<usize>,
}

impl RegionSplit {
    pub fn of(set: &GridSet, domain: &[bool]) -> Self {
        let mut set_in = Vec::new();
        let mut comp_in = Vec::new();
        for (idx, (&member, &active)) in set.mask.iter().zip(domain).enumerate() {
            if !active {
                continue;
            }
            if member {
                set_in.push(idx);
            } else {
                comp_in.push(idx);
            }
        }
        Self { set_in, comp_in }
    }
}

/// Per-cell interaction sums with everything outside the window: the
/// rasterized ring out to the per-cell handover radius, and the analytic
/// tail beyond it, split by exterior membership. Weights carry the full
/// pair measure `h^{2n}`; tail entries carry the cell measure `h^n`.
///
/// The handover radius is `max(R_t, cover(a))`, where `cover(a)` is the
/// distance from the cell to the farthest window corner: the analytic
/// tail may never start before the window is fully covered, or it would
/// double-count window pairs.
#[derive(Debug, Clone)]
pub struct ExteriorCoupling {
    pub ring_set: Vec<f64>,
    pub ring_comp: Vec<f64>,
    pub tail_set: Vec<f64>,
    pub tail_comp: Vec<f64>,
}

/// Exterior datum for field-valued energies: the sign trace of a shape,
/// or zero (bounded support).
#[derive(Debug, Clone, Copy)]
pub enum ExteriorField<'a> {
    Sign(&'a ShapeSpec),
    Zero,
}

/// Distance from `p` to the farthest corner of the window.
fn cover_radius(window: &Window, p: [f64; 2]) -> f64 {
    if window.dim == 1 {
        (p[0] - window.lo[0]).abs().max((p[0] - window.hi[0]).abs())
    } else {
        let mut best: f64 = 0.0;
        for &cx in &[window.lo[0], window.hi[0]] {
            for &cy in &[window.lo[1], window.hi[1]] {
                let dx = p[0] - cx;
                let dy = p[1] - cy;
                best = best.max((dx * dx + dy * dy).sqrt());
            }
        }
        best
    }
}

/// Table radius needed so window pairs and every per-cell handover radius
/// are covered.
pub fn table_radius(window: &Window, r_t: f64) -> f64 {
    r_t.max(window.diameter())
}

impl ExteriorCoupling {
    /// `active[idx] == false` cells get zero entries and are skipped.
    /// With `analytic_tails` off, the ring is truncated at exactly `r_t`
    /// and the tail entries are zero.
    pub fn build(
        window: &Window,
        table: &InteractionTable,
        exterior: ExteriorField<'_>,
        r_t: f64,
        analytic_tails: bool,
        active: Option<&[bool]>,
    ) -> Self {
        let n = window.cell_count();
        let s = table.s;
        let h = window.h;
        let hn = window.cell_measure();

        // A bounded shape fully inside the window has an empty exterior:
        // every ring cell and the whole tail belong to the complement.
        let (shape, empty_beyond): (Option<&ShapeSpec>, bool) = match exterior {
            ExteriorField::Zero => (None, true),
            ExteriorField::Sign(spec) => (Some(spec), shapes::shape_empty_beyond_window(spec, window)),
        };

        let nx = window.nx as i64;
        let ny = window.ny as i64;
        let fast = shape.map(shapes::FastMembership::new);

        let per_cell: Vec<(f64, f64, f64, f64)> = (0..n)
            .into_par_iter()
            .map(|idx| {
                if let Some(act) = active {
                    if !act[idx] {
                        return (0.0, 0.0, 0.0, 0.0);
                    }
                }
                let (ix, iy) = window.coords(idx);
                let (ix, iy) = (ix as i64, iy as i64);
                let a_center = window.center_of(idx);
                let r_split = if analytic_tails {
                    r_t.max(cover_radius(window, a_center))
                } else {
                    r_t
                };
                debug_assert!(r_split <= table.r_t * (1.0 + 1e-12));
                let m = (r_split / h * (1.0 + 1e-12)).floor() as i64;
                let r2_cells = (r_split / h) * (r_split / h) * (1.0 + 1e-12);

                let mut rs = 0.0;
                let mut rc = 0.0;
                if empty_beyond {
                    // The ring is all complement: the disc sum minus the
                    // in-window part.
                    let mut in_window = 0.0;
                    let (dj_lo, dj_hi) = if window.dim == 1 {
                        (0, 0)
                    } else {
                        ((-iy).max(-m), (ny - 1 - iy).min(m))
                    };
                    for dj in dj_lo..=dj_hi {
                        for di in (-ix).max(-m)..=(nx - 1 - ix).min(m) {
                            if di == 0 && dj == 0 {
                                continue;
                            }
                            if (di * di + dj * dj) as f64 > r2_cells {
                                continue;
                            }
                            in_window += table.get(di, dj);
                        }
                    }
                    rc = table.disc_sum(r2_cells) - in_window;
                } else {
                    let member = fast.as_ref().unwrap();
                    let (dj_lo, dj_hi) = if window.dim == 1 { (0, 0) } else { (-m, m) };
                    for dj in dj_lo..=dj_hi {
                        let by = iy + dj;
                        let y_in = window.dim == 1 || (by >= 0 && by < ny);
                        let cy = if window.dim == 1 {
                            0.0
                        } else {
                            window.lo[1] + (by as f64 + 0.5) * h
                        };
                        // Skip the in-window column span on in-window rows.
                        let spans: [(i64, i64); 2] = if y_in {
                            [(-m, -ix - 1), (nx - ix, m)]
                        } else {
                            [(-m, m), (1, 0)]
                        };
                        for &(lo, hi) in &spans {
                            for di in lo..=hi {
                                if (di * di + dj * dj) as f64 > r2_cells {
                                    continue;
                                }
                                let w = table.get(di, dj);
                                if w == 0.0 {
                                    continue;
                                }
                                let cx = window.lo[0] + ((ix + di) as f64 + 0.5) * h;
                                if member.test([cx, cy]) {
                                    rs += w;
                                } else {
                                    rc += w;
                                }
                            }
                        }
                    }
                }

                if !analytic_tails {
                    return (rs, rc, 0.0, 0.0);
                }
                let tau = hn * kernel::tail(r_split, s, window.dim);
                let tail_set = match (shape, empty_beyond) {
                    (_, true) => 0.0,
                    (Some(spec), false) => hn * spec.tail_interaction(a_center, r_split, s),
                    (None, false) => unreachable!(),
                };
                (rs, rc, tail_set, tau - tail_set)
            })
            .collect();

        let mut out = Self {
            ring_set: vec![0.0; n],
            ring_comp: vec![0.0; n],
            tail_set: vec![0.0; n],
            tail_comp: vec![0.0; n],
        };
        for (idx, (rs, rc, ts, tc)) in per_cell.into_iter().enumerate() {
            out.ring_set[idx] = rs;
            out.ring_comp[idx] = rc;
            out.tail_set[idx] = ts;
            out.tail_comp[idx] = tc;
        }
        out
    }
}

/// The fractional perimeter with its three interaction components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerimeterValue {
    pub total: f64,
    /// Interaction of the set and its complement inside the domain.
    pub in_in: f64,
    /// Set inside the domain against the fixed complement outside it.
    pub in_out: f64,
    /// Fixed set outside the domain against the complement inside it.
    pub out_in: f64,
    pub r_t: f64,
    /// Fraction of the total contributed by analytic tails.
    pub tail_share: f64,
}

pub fn frac_perimeter(set: &GridSet, s: f64, r_t: f64) -> Result<PerimeterValue> {
    frac_perimeter_in(set, &PerimeterParams::new(s, r_t))
}

pub fn frac_perimeter_in(set: &GridSet, params: &PerimeterParams) -> Result<PerimeterValue> {
    if !(params.s > 0.0 && params.s < 0.5) {
        return Err(FracError::SOutOfRange(params.s));
    }
    if params.r_t < 4.0 * set.window.h {
        return Err(FracError::TruncationTooSmall {
            rt: params.r_t,
            min: 4.0 * set.window.h,
        });
    }
    let window = &set.window;
    let domain = domain_mask(window, params.domain)?;
    let table = InteractionTable::build(window, params.s, table_radius(window, params.r_t))?;
    let coupling = ExteriorCoupling::build(
        window,
        &table,
        ExteriorField::Sign(&set.exterior),
        params.r_t,
        params.tails,
        Some(&domain),
    );
    Ok(assemble_perimeter(set, &domain, &table, &coupling, params.tails, params.r_t))
}

fn domain_mask(window: &Window, domain: DomainSel) -> Result<Vec<bool>> {
    match domain {
        DomainSel::FullWindow => Ok(vec![true; window.cell_count()]),
        DomainSel::Ball { r } => {
            if r.is_nan() || r <= 0.0 {
                return Err(FracError::InvalidWindow(format!("ball radius {r}")));
            }
            let fits_x = window.lo[0] <= -r && window.hi[0] >= r;
            let fits = if window.dim == 1 {
                fits_x
            } else {
                fits_x && window.lo[1] <= -r && window.hi[1] >= r
            };
            if !fits {
                return Err(FracError::InvalidWindow(format!(
                    "ball of radius {r} does not fit inside the window"
                )));
            }
            Ok((0..window.cell_count())
                .map(|idx| {
                    let c = window.center_of(idx);
                    c[0] * c[0] + c[1] * c[1] < r * r
                })
                .collect())
        }
    }
}

fn assemble_perimeter(
    set: &GridSet,
    domain: &[bool],
    table: &InteractionTable,
    coupling: &ExteriorCoupling,
    tails: bool,
    r_t: f64,
) -> PerimeterValue {
    let window = &set.window;
    let m = table.max_offset();
    let nx = window.nx as i64;
    let ny = window.ny as i64;
    let mask = &set.mask;

    // With analytic tails every window pair counts (the handover radius
    // covers the window); without them the truncation applies literally.
    let r2_cells = if tails {
        f64::INFINITY
    } else {
        (r_t / window.h) * (r_t / window.h) * (1.0 + 1e-12)
    };
    let per_cell: Vec<(f64, f64, f64)> = (0..window.cell_count())
        .into_par_iter()
        .map(|idx| {
            if !domain[idx] {
                return (0.0, 0.0, 0.0);
            }
            let (ix, iy) = window.coords(idx);
            let (ix, iy) = (ix as i64, iy as i64);
            let ma = mask[idx];
            let mut in_in2 = 0.0;
            let mut in_out = 0.0;
            let mut out_in = 0.0;
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
                    if (di * di + dj * dj) as f64 > r2_cells {
                        continue;
                    }
                    let w = table.get(di, dj);
                    if w == 0.0 {
                        continue;
                    }
                    let b = window.index((ix + di) as usize, by as usize);
                    let mb = mask[b];
                    if domain[b] {
                        if ma != mb {
                            in_in2 += w;
                        }
                    } else if ma && !mb {
                        in_out += w;
                    } else if !ma && mb {
                        out_in += w;
                    }
                }
            }
            (in_in2, in_out, out_in)
        })
        .collect();

    let mut in_in2 = KahanSum::new();
    let mut in_out = KahanSum::new();
    let mut out_in = KahanSum::new();
    let mut tail_abs = KahanSum::new();
    for (idx, (ii, io, oi)) in per_cell.into_iter().enumerate() {
        in_in2.add(ii);
        in_out.add(io);
        out_in.add(oi);
        if !domain[idx] {
            continue;
        }
        if mask[idx] {
            in_out.add(coupling.ring_comp[idx]);
            if tails {
                in_out.add(coupling.tail_comp[idx]);
                tail_abs.add(coupling.tail_comp[idx]);
            }
        } else {
            out_in.add(coupling.ring_set[idx]);
            if tails {
                out_in.add(coupling.tail_set[idx]);
                tail_abs.add(coupling.tail_set[idx]);
            }
        }
    }
    let in_in = 0.5 * in_in2.value();
    let total = in_in + in_out.value() + out_in.value();
    PerimeterValue {
        total,
        in_in,
        in_out: in_out.value(),
        out_in: out_in.value(),
        r_t,
        tail_share: if total > 0.0 { tail_abs.value() / total } else { 0.0 },
    }
}

/// Squared Gagliardo seminorm of a phase field, restricted to the pairs
/// that see the window (exterior-exterior pairs carry no information and
/// may diverge). For an indicator with bounded support this is the full
/// seminorm and equals twice the set/complement interaction.
pub fn gagliardo_seminorm_sq(u: &PhaseField, s: f64, r_t: f64) -> Result<f64> {
    Ok(4.0 * kinetic_q_u(u, s, r_t)?)
}

/// Classical perimeter of the set inside the centered ball `B_r`: exact
/// for shapes with closed-form geometry, marching squares on a smoothed
/// mask otherwise.
pub fn classical_perimeter(set: &GridSet, r: f64) -> f64 {
    if let Ok(q) = set.exterior.exact_local_quantities(r) {
        return q.perimeter;
    }
    mask_perimeter(set, r)
}

/// Marching-squares contour length of the mask inside `B_r`. The binary
/// mask is box-smoothed over 3x3 neighborhoods first so that the linear
/// interpolation recovers sub-cell crossings.
pub fn mask_perimeter(set: &GridSet, r: f64) -> f64 {
    let window = &set.window;
    let mut field = vec![0.0; window.cell_count()];
    for (idx, slot) in field.iter_mut().enumerate() {
        let (ix, iy) = window.coords(idx);
        let mut acc = 0.0;
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                let bx = ix as i64 + di;
                let by = iy as i64 + dj;
                let member = if bx >= 0 && bx < window.nx as i64 && by >= 0 && by < window.ny as i64
                {
                    set.mask[window.index(bx as usize, by as usize)]
                } else {
                    let c = [
                        window.lo[0] + (bx as f64 + 0.5) * window.h,
                        window.lo[1] + (by as f64 + 0.5) * window.h,
                    ];
                    set.exterior.membership(c)
                };
                if member {
                    acc += 1.0;
                }
            }
        }
        *slot = acc / 9.0;
    }
    let segs = contour::level_segments(window, &field, 0.5);
    contour::length_within_ball(&segs, r)
}

/// Lebesgue measures of the masked set and its complement inside `B_r`,
/// from cell counts.
pub fn grid_measures_in_ball(set: &GridSet, r: f64) -> (f64, f64) {
    let window = &set.window;
    let mut inside = 0usize;
    let mut total = 0usize;
    for idx in 0..window.cell_count() {
        let c = window.center_of(idx);
        if c[0] * c[0] + c[1] * c[1] < r * r {
            total += 1;
            if set.mask[idx] {
                inside += 1;
            }
        }
    }
    let hn = window.cell_measure();
    (hn * inside as f64, hn * (total - inside) as f64)
}

/// Per-s values of `(2s / omega_{n-1}) * int_{E \ B_1} |y|^(-n-2s) dy`,
/// the far-field density at the given exponents.
pub fn a_of_e(spec: &ShapeSpec, s_list: &[f64]) -> Vec<f64> {
    let omega = kernel::sphere_measure(spec.dim);
    s_list
        .iter()
        .map(|&s| 2.0 * s / omega * spec.tail_interaction([0.0, 0.0], 1.0, s))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    /// `(1 - 2s) Per_s -> omega_{n-1} Per(E, B_r)` as `s` grows to 1/2.
    ToHalf,
    /// `2s Per_s -> (1 - a) M(E cap B_r) + a M(B_r \ E)` as `s` drops to 0.
    ToZero,
}

/// Runs a scaled-limit sweep over `s_list` with `U = B_r` inside the
/// window, and tabulates scaled values against the analytic target.
pub fn scaled_limits(
    spec: &ShapeSpec,
    window: &Window,
    s_list: &[f64],
    mode: LimitMode,
    r_t: f64,
    domain_r: f64,
) -> Result<SweepReport> {
    if s_list.len() < 2 {
        return Err(FracError::Parse("sweep needs at least two s values".into()));
    }
    let increasing = s_list.windows(2).all(|w| w[0] < w[1]);
    let decreasing = s_list.windows(2).all(|w| w[0] > w[1]);
    if !increasing && !decreasing {
        return Err(FracError::Parse("s list must be monotone".into()));
    }
    let set = rasterize(spec, window);
    let omega = kernel::sphere_measure(window.dim);

    // Analytic target where the geometry is closed-form, grid fallback
    // otherwise.
    let exact = spec.exact_local_quantities(domain_r).ok();
    let (meas_in, meas_out) = match &exact {
        Some(q) => (q.measure_set, q.measure_complement),
        None => grid_measures_in_ball(&set, domain_r),
    };
    let perimeter = match &exact {
        Some(q) => q.perimeter,
        None => mask_perimeter(&set, domain_r),
    };

    let config = format!(
        "sweep shape={} window=[{},{}]x[{},{}] h={} rt={} r={} mode={mode:?} s={s_list:?}",
        spec.grammar(),
        window.lo[0],
        window.hi[0],
        window.lo[1],
        window.hi[1],
        window.h,
        r_t,
        domain_r,
    );
    let mut report = SweepReport::new(
        &["s", "per_s", "scaled", "target", "rel_err", "tail_share"],
        &config,
    );
    let density = spec.asymptotic_density();
    // Rows are independent: run the exponents in parallel and emit them
    // in list order.
    let rows: Result<Vec<Vec<f64>>> = s_list
        .par_iter()
        .map(|&s| {
            let pv = frac_perimeter_in(&set, &PerimeterParams::new(s, r_t).in_ball(domain_r))?;
            let (scaled, target) = match mode {
                LimitMode::ToHalf => ((1.0 - 2.0 * s) * pv.total, omega * perimeter),
                LimitMode::ToZero => {
                    let a = match density {
                        Density::Value(v) => v,
                        // No limit: report against the instantaneous density.
                        Density::Interval(..) => a_of_e(spec, &[s])[0],
                    };
                    (
                        2.0 * s * pv.total,
                        (1.0 - a) * omega * meas_in + a * omega * meas_out,
                    )
                }
            };
            let rel_err = if target != 0.0 {
                ((scaled - target) / target).abs()
            } else {
                f64::NAN
            };
            Ok(vec![s, pv.total, scaled, target, rel_err, pv.tail_share])
        })
        .collect();
    for row in rows? {
        report.push_row(row);
    }
    Ok(report)
}

/// Linear extrapolation of the scaled column to `s = s_limit` over the
/// last `points` sweep rows.
pub fn extrapolate_scaled(report: &SweepReport, s_limit: f64, points: usize) -> f64 {
    let s = report.column("s").expect("sweep has an s column");
    let scaled = report.column("scaled").expect("sweep has a scaled column");
    let k = s.len().saturating_sub(points);
    linear_extrapolate(&s[k..], &scaled[k..], s_limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::rasterize;
    use std::f64::consts::PI;

    fn ball_set(h: f64) -> GridSet {
        let w = Window::new(2, [-1.0, -1.0], [1.0, 1.0], h).unwrap();
        rasterize(&ShapeSpec::ball([0.0, 0.0], 0.5), &w)
    }

    #[test]
    fn region_split_partitions_the_domain() {
        let set = ball_set(0.25);
        let domain = domain_mask(&set.window, DomainSel::Ball { r: 0.75 }).unwrap();
        let split = RegionSplit::of(&set, &domain);
        let in_domain = domain.iter().filter(|&&b| b).count();
        assert_eq!(split.set_in.len() + split.comp_in.len(), in_domain);
        for &idx in &split.set_in {
            assert!(set.mask[idx] && domain[idx]);
        }
        for &idx in &split.comp_in {
            assert!(!set.mask[idx] && domain[idx]);
        }
    }

    #[test]
    fn rejects_s_outside_zero_half() {
        let set = ball_set(0.25);
        assert!(matches!(
            frac_perimeter(&set, 0.7, 4.0),
            Err(FracError::SOutOfRange(_))
        ));
        assert!(matches!(
            frac_perimeter(&set, 0.5, 4.0),
            Err(FracError::SOutOfRange(_))
        ));
    }

    #[test]
    fn components_are_nonnegative_and_sum() {
        let set = ball_set(1.0 / 16.0);
        let pv = frac_perimeter(&set, 0.25, 6.0).unwrap();
        assert!(pv.in_in >= 0.0 && pv.in_out >= 0.0 && pv.out_in >= 0.0);
        assert!((pv.total - (pv.in_in + pv.in_out + pv.out_in)).abs() <= 1e-12 * pv.total);
        // Bounded set fully inside the window: nothing of E is outside.
        assert_eq!(pv.out_in, 0.0);
    }

    #[test]
    fn bounded_set_matches_independent_double_sum() {
        // Oracle: brute-force double sum of I(E, E^c) over a disc of
        // radius R plus the exact complement tail. Near weights come from
        // the test-only Gauss subdivision oracle, far ones from the
        // midpoint rule; no engine code is reused.
        let h = 1.0 / 16.0;
        let s = 0.25;
        let set = ball_set(h);
        let window = &set.window;
        let big_r = 6.0;
        let m = (big_r / h) as i64;
        let mut near = std::collections::HashMap::new();
        for i in 0i64..4 {
            for j in 0..=i {
                if i == 0 && j == 0 {
                    continue;
                }
                near.insert((i, j), crate::testkit::oracle_pair_weight([i, j], s, 2));
            }
        }
        let scale = h.powf(2.0 - 2.0 * s);
        let alpha = 2.0 + 2.0 * s;
        let weight = |di: i64, dj: i64| -> f64 {
            let (i, j) = (di.abs().max(dj.abs()), di.abs().min(dj.abs()));
            if i >= 4 {
                let d = ((di * di + dj * dj) as f64).sqrt() * h;
                h.powi(4) * d.powf(-alpha)
            } else {
                scale * near[&(i, j)]
            }
        };
        let mut cells_e = Vec::new();
        for idx in 0..window.cell_count() {
            if set.mask[idx] {
                cells_e.push(window.center_of(idx));
            }
        }
        let mut oracle = 0.0;
        for &a in &cells_e {
            let (ax, ay) = (a[0], a[1]);
            for di in -m..=m {
                for dj in -m..=m {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    if ((di * di + dj * dj) as f64).sqrt() * h > big_r {
                        continue;
                    }
                    let bx = ax + di as f64 * h;
                    let by = ay + dj as f64 * h;
                    if bx * bx + by * by < 0.25 {
                        continue; // inside E
                    }
                    oracle += weight(di, dj);
                }
            }
            oracle += h * h * kernel::tail(big_r, s, 2);
        }
        let pv = frac_perimeter(&set, s, big_r).unwrap();
        assert!(
            (pv.total - oracle).abs() <= 0.01 * oracle,
            "engine {} vs oracle {oracle}",
            pv.total
        );
    }

    #[test]
    fn half_plane_perimeter_is_reflection_invariant() {
        // Mirror a tilted half-plane through the y axis; kernel and grid
        // share the symmetry, so the perimeters agree to roundoff.
        let w = Window::new(2, [-1.0, -1.0], [1.0, 1.0], 1.0 / 8.0).unwrap();
        let tilted = rasterize(&ShapeSpec::half_plane([0.6, 0.8], 0.0), &w);
        let mirrored = rasterize(&ShapeSpec::half_plane([-0.6, 0.8], 0.0), &w);
        let pv_a =
            frac_perimeter_in(&tilted, &PerimeterParams::new(0.25, 6.0).in_ball(0.75)).unwrap();
        let pv_b =
            frac_perimeter_in(&mirrored, &PerimeterParams::new(0.25, 6.0).in_ball(0.75)).unwrap();
        assert!(
            (pv_a.total - pv_b.total).abs() <= 1e-10 * pv_a.total,
            "{} vs {}",
            pv_a.total,
            pv_b.total
        );
    }

    #[test]
    fn complement_swaps_components_exactly() {
        let w = Window::new(2, [-1.0, -1.0], [1.0, 1.0], 1.0 / 8.0).unwrap();
        let cone = rasterize(&ShapeSpec::cone(PI / 4.0, PI / 2.0), &w);
        let comp = cone.complemented().unwrap();
        let a = frac_perimeter(&cone, 0.3, 6.0).unwrap();
        let b = frac_perimeter(&comp, 0.3, 6.0).unwrap();
        assert!((a.total - b.total).abs() <= 1e-10 * a.total);
        assert!((a.in_in - b.in_in).abs() <= 1e-10 * a.in_in.max(1e-30));
        assert!((a.in_out - b.out_in).abs() <= 1e-10 * a.in_out.max(1e-30));
        assert!((a.out_in - b.in_out).abs() <= 1e-10 * a.out_in.max(1e-30));
    }

    #[test]
    fn shrinking_domain_decreases_perimeter() {
        let w = Window::new(2, [-1.0, -1.0], [1.0, 1.0], 1.0 / 8.0).unwrap();
        let set = rasterize(&ShapeSpec::half_plane([0.0, 1.0], 0.0), &w);
        let small = frac_perimeter_in(&set, &PerimeterParams::new(0.25, 6.0).in_ball(0.4))
            .unwrap()
            .total;
        let large = frac_perimeter_in(&set, &PerimeterParams::new(0.25, 6.0).in_ball(0.75))
            .unwrap()
            .total;
        assert!(small < large);
    }

    #[test]
    fn truncation_is_monotone_without_tails_and_stable_with() {
        let set = ball_set(1.0 / 8.0);
        let mut prev = 0.0;
        for rt in [1.0, 2.0, 4.0] {
            let v = frac_perimeter_in(&set, &PerimeterParams::new(0.2, rt).without_tails())
                .unwrap()
                .total;
            assert!(v >= prev);
            prev = v;
        }
        let reference = frac_perimeter(&set, 0.2, 8.0 * set.window.diameter()).unwrap().total;
        for rt in [8.0 * set.window.diameter(), 12.0 * set.window.diameter()] {
            let v = frac_perimeter(&set, 0.2, rt).unwrap().total;
            assert!((v - reference).abs() <= 0.01 * reference);
        }
    }

    #[test]
    fn gagliardo_identity_for_bounded_indicator() {
        let h = 1.0 / 16.0;
        let set = ball_set(h);
        let pv = frac_perimeter(&set, 0.25, 6.0).unwrap();
        let chi = PhaseField::indicator_bounded(&set);
        let gag = gagliardo_seminorm_sq(&chi, 0.25, 6.0).unwrap();
        assert!(
            (pv.total - 0.5 * gag).abs() <= 0.01 * pv.total,
            "perimeter {} vs half-seminorm {}",
            pv.total,
            0.5 * gag
        );
    }

    #[test]
    fn gagliardo_of_zero_field_vanishes() {
        let w = Window::new(2, [-0.5, -0.5], [0.5, 0.5], 0.125).unwrap();
        let u = PhaseField::constant(w, 0.0, crate::allen_cahn::ExteriorData::Zero);
        assert_eq!(gagliardo_seminorm_sq(&u, 0.25, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn small_s_gagliardo_recovers_the_measure_limit() {
        // s [chi_E]^2 -> omega_1 |E| as s -> 0 for the ball of radius 1/2.
        let h = 1.0 / 32.0;
        let set = ball_set(h);
        let chi = PhaseField::indicator_bounded(&set);
        let s_list = [0.05, 0.02, 0.01];
        let vals: Vec<f64> = s_list
            .iter()
            .map(|&s| s * gagliardo_seminorm_sq(&chi, s, 12.0).unwrap())
            .collect();
        let limit = linear_extrapolate(&s_list, &vals, 0.0);
        let want = PI * PI / 2.0;
        assert!(
            (limit - want).abs() <= 0.05 * want,
            "extrapolated {limit} vs {want}"
        );
    }

    #[test]
    fn classical_perimeter_routes() {
        let set = ball_set(1.0 / 64.0);
        // Exact route.
        assert!((classical_perimeter(&set, 1.0) - PI).abs() < 1e-12);
        // Mask route at the same resolution stays within 3 percent.
        let marched = mask_perimeter(&set, 1.0);
        assert!((marched - PI).abs() <= 0.03 * PI, "marched {marched}");
        // Half-plane chord.
        let w = Window::new(2, [-1.5, -1.5], [1.5, 1.5], 1.0 / 16.0).unwrap();
        let hp = rasterize(&ShapeSpec::half_plane([0.0, 1.0], 0.0), &w);
        assert!((classical_perimeter(&hp, 1.0) - 2.0).abs() < 1e-12);
        let cc = rasterize(&ShapeSpec::cross_cone(), &w);
        assert!((classical_perimeter(&cc, 1.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn a_of_e_values() {
        // Half-plane: exactly 1/2 at every s.
        for &v in &a_of_e(&ShapeSpec::half_plane([0.3, 0.9], 0.0), &[0.3, 0.1, 0.02]) {
            assert!((v - 0.5).abs() < 1e-8);
        }
        // Cone of opening pi/3: theta / (2 pi) = 1/6, s-independent.
        for &v in &a_of_e(&ShapeSpec::cone(0.7, PI / 3.0), &[0.25, 0.05]) {
            assert!((v - 1.0 / 6.0).abs() < 1e-8);
        }
        // Ball of radius 3 at the origin: positive at finite s, -> 0.
        let vals = a_of_e(&ShapeSpec::ball([0.0, 0.0], 3.0), &[0.1, 0.02, 0.005]);
        assert!(vals[0] > 0.0);
        assert!(vals[2] < vals[1] && vals[1] < vals[0]);
        assert!(vals[2] < 0.02);
        // All densities within [0, 1].
        for shape in [
            ShapeSpec::oscillating_default(),
            ShapeSpec::cross_cone_plus_square(0.125),
        ] {
            for &v in &a_of_e(&shape, &[0.2, 0.1, 0.05]) {
                assert!((-1e-9..=1.0 + 1e-9).contains(&v), "{v}");
            }
        }
    }

    #[test]
    fn oscillating_a_tracks_the_radial_oracle() {
        // Oracle: direct radial quadrature against the piecewise-constant
        // angular profile, written without the tail machinery.
        let radii = [4.0, 64.0];
        let spec = ShapeSpec::oscillating_cone(radii.to_vec(), 0.5, 2.5);
        for &s in &[0.2, 0.05] {
            let got = a_of_e(&spec, &[s])[0];
            // piecewise: openings small on [1, 4), big on [4, 64), small after
            let piece = |lo: f64, hi: f64| lo.powf(-2.0 * s) - hi.powf(-2.0 * s);
            let oracle = (0.5 * piece(1.0, 4.0)
                + 2.5 * piece(4.0, 64.0)
                + 0.5 * 64.0f64.powf(-2.0 * s))
                / std::f64::consts::TAU;
            assert!((got - oracle).abs() < 1e-8, "s={s}: {got} vs {oracle}");
        }
    }

    #[test]
    fn sweep_report_targets_and_monotonicity_checks() {
        let w = Window::new(2, [-1.5, -1.5], [1.5, 1.5], 1.0 / 8.0).unwrap();
        let spec = ShapeSpec::half_plane([0.0, 1.0], 0.0);
        let report = scaled_limits(&spec, &w, &[0.40, 0.44, 0.47], LimitMode::ToHalf, 6.0, 1.0)
            .unwrap();
        assert_eq!(report.rows.len(), 3);
        let target = report.column("target").unwrap();
        for &t in &target {
            assert!((t - std::f64::consts::TAU * 2.0).abs() < 1e-9);
        }
        // Non-monotone s lists are rejected.
        assert!(scaled_limits(&spec, &w, &[0.1, 0.4, 0.2], LimitMode::ToHalf, 6.0, 1.0).is_err());
    }
}
