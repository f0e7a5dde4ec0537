//! Kernel extension of boundary data to the upper half-space, the
//! degenerate-weight Dirichlet energy, and the min/max energy identity
//! behind the translation-competitor estimates.

use rayon::prelude::*;

use crate::error::{FracError, Result};
use crate::geometry::{Point, Window};
use crate::kernel;
use crate::numerics::{adaptive_simpson, decaying_radial_integral, KahanSum};
use crate::allen_cahn::{EnergyContext, PhaseField};
use crate::shapes::ShapeSpec;

/// The extension kernel `P(X) = c t^{2s} / |X|^{n+2s}` with the mass-one
/// normalization.
#[derive(Debug, Clone, Copy)]
pub struct ExtensionKernel {
    pub dim: usize,
    pub s: f64,
    pub c: f64,
}

/// Unnormalized kernel mass at height `t`: radial quadrature out to `64 t`
/// plus the analytic decay tail.
fn raw_mass(dim: usize, s: f64, t: f64) -> f64 {
    let alpha = dim as f64 + 2.0 * s;
    let omega = kernel::sphere_measure(dim);
    let cut = 64.0 * t.max(1.0);
    let radial = |rho: f64| rho.powf(dim as f64 - 1.0) * (rho * rho + t * t).powf(-0.5 * alpha);
    let near = adaptive_simpson(&radial, 0.0, cut, 1e-13);
    // Beyond the cut the integrand is rho^(-1-2s) times a bounded factor.
    let g = |rho: f64| (1.0 + t * t / (rho * rho)).powf(-0.5 * alpha);
    let far = decaying_radial_integral(cut, 2.0 * s, &g, &[]);
    t.powf(2.0 * s) * omega * (near + far)
}

/// Computes the normalizing constant so that the kernel has unit mass at
/// every height.
pub fn normalize_kernel(dim: usize, s: f64) -> Result<ExtensionKernel> {
    if !(s > 0.0 && s < 1.0) {
        return Err(FracError::SOutOfUnit(s));
    }
    Ok(ExtensionKernel {
        dim,
        s,
        c: 1.0 / raw_mass(dim, s, 1.0),
    })
}

impl ExtensionKernel {
    /// `P(x, t)` for a horizontal offset `x` and height `t > 0`.
    pub fn eval(&self, x: Point, t: f64) -> f64 {
        let r2 = if self.dim == 1 {
            x[0] * x[0]
        } else {
            x[0] * x[0] + x[1] * x[1]
        };
        let alpha = self.dim as f64 + 2.0 * self.s;
        self.c * t.powf(2.0 * self.s) * (r2 + t * t).powf(-0.5 * alpha)
    }

    /// Numeric mass at height `t`; equals one for all `t` by homogeneity.
    pub fn mass_at_height(&self, t: f64) -> f64 {
        self.c * raw_mass(self.dim, self.s, t)
    }
}

/// Horizontal window times a strictly increasing stack of heights.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceGeometry {
    pub window: Window,
    pub levels: Vec<f64>,
}

impl HalfSpaceGeometry {
    /// Geometric level stack from `h/2` up to `height` with ratio 1.2,
    /// resolving the degenerate weight near the trace.
    pub fn geometric(window: Window, height: f64) -> Self {
        let mut levels = Vec::new();
        let mut t = 0.5 * window.h;
        while t <= height {
            levels.push(t);
            t *= 1.2;
        }
        assert!(levels.len() >= 2, "height must allow at least two levels");
        Self { window, levels }
    }

    #[inline]
    pub fn index(&self, level: usize, cell: usize) -> usize {
        level * self.window.cell_count() + cell
    }

    pub fn node_count(&self) -> usize {
        self.levels.len() * self.window.cell_count()
    }

    /// Vertical extents attributed to each level: slabs split midway
    /// between neighbors, the bottom one reaching the trace plane.
    pub fn slab_heights(&self) -> Vec<f64> {
        let k = self.levels.len();
        (0..k)
            .map(|i| {
                let lo = if i == 0 {
                    0.0
                } else {
                    0.5 * (self.levels[i - 1] + self.levels[i])
                };
                let hi = if i + 1 == k {
                    self.levels[k - 1] + 0.5 * (self.levels[k - 1] - self.levels[k - 2])
                } else {
                    0.5 * (self.levels[i] + self.levels[i + 1])
                };
                hi - lo
            })
            .collect()
    }
}

/// A scalar field on the half-space grid, stored level-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceField {
    pub geom: HalfSpaceGeometry,
    pub values: Vec<f64>,
}

impl HalfSpaceField {
    pub fn value(&self, level: usize, cell: usize) -> f64 {
        self.values[self.geom.index(level, cell)]
    }
}

/// Kernel extension of the sign trace of `trace`: a truncated cell sum out
/// to `r_c` around each target plus the exact angular-occupancy tail.
pub fn extend(
    trace: &ShapeSpec,
    kernel_def: &ExtensionKernel,
    geom: &HalfSpaceGeometry,
    r_c: f64,
) -> HalfSpaceField {
    let window = &geom.window;
    let h = window.h;
    let hn = window.cell_measure();
    let m = (r_c / h).floor() as i64;
    let alpha = kernel_def.dim as f64 + 2.0 * kernel_def.s;
    let two_s = 2.0 * kernel_def.s;

    let values: Vec<f64> = (0..geom.node_count())
        .into_par_iter()
        .map(|node| {
            let level = node / window.cell_count();
            let cell = node % window.cell_count();
            let t = geom.levels[level];
            let x = window.center_of(cell);
            let mut acc = KahanSum::new();
            // Near field: cells within r_c, window or not, via membership.
            let (dj_lo, dj_hi) = if window.dim == 1 { (0, 0) } else { (-m, m) };
            for dj in dj_lo..=dj_hi {
                for di in -m..=m {
                    let d2 = ((di * di + dj * dj) as f64) * h * h;
                    if d2 > r_c * r_c {
                        continue;
                    }
                    let y = [x[0] + di as f64 * h, x[1] + dj as f64 * h];
                    let sign = if trace.membership(y) { 1.0 } else { -1.0 };
                    acc.add(sign * hn * kernel_def.eval([y[0] - x[0], y[1] - x[1]], t));
                }
            }
            // Far field: radial integral of the occupancy imbalance.
            let factor = |rho: f64| (1.0 + t * t / (rho * rho)).powf(-0.5 * alpha);
            let imbalance = |rho: f64| {
                let meas = trace.angular_measure(x, rho);
                (2.0 * meas - kernel::sphere_measure(window.dim)) * factor(rho)
            };
            let far = kernel_def.c
                * t.powf(two_s)
                * decaying_radial_integral(r_c, two_s, &imbalance, &[]);
            acc.add(far);
            acc.value().clamp(-1.0, 1.0)
        })
        .collect();

    HalfSpaceField {
        geom: geom.clone(),
        values,
    }
}

/// Integration region for the weighted energy.
#[derive(Debug, Clone, Copy)]
pub enum Region {
    Full,
    /// Upper half-ball `|X| < r` centered at the origin of the trace.
    Ball { r: f64 },
    /// Axis-aligned box (half-open on each axis: an edge belongs to the
    /// region when its midpoint does, which makes partitions exact).
    Box {
        lo: Point,
        hi: Point,
        t_lo: f64,
        t_hi: f64,
    },
}

impl Region {
    fn contains(&self, x: Point, t: f64) -> bool {
        match *self {
            Region::Full => true,
            Region::Ball { r } => x[0] * x[0] + x[1] * x[1] + t * t < r * r,
            Region::Box { lo, hi, t_lo, t_hi } => {
                lo[0] <= x[0] && x[0] < hi[0] && lo[1] <= x[1] && x[1] < hi[1] && t_lo <= t
                    && t < t_hi
            }
        }
    }
}

/// The degenerate-weight Dirichlet energy `int t^{1-2s} |grad v|^2` over
/// the region, by forward differences with edge-midpoint weights.
pub fn weighted_energy(v: &HalfSpaceField, s: f64, region: Region) -> f64 {
    let geom = &v.geom;
    let window = &geom.window;
    let h = window.h;
    let hn = window.cell_measure();
    let slabs = geom.slab_heights();
    let power = 1.0 - 2.0 * s;
    let mut acc = KahanSum::new();

    for (k, &t) in geom.levels.iter().enumerate() {
        let weight = t.powf(power);
        // Horizontal edges within level k.
        for iy in 0..window.ny {
            for ix in 0..window.nx {
                let a = window.index(ix, iy);
                let ca = window.center(ix, iy);
                if ix + 1 < window.nx {
                    let b = window.index(ix + 1, iy);
                    let mid = [ca[0] + 0.5 * h, ca[1]];
                    if region.contains(mid, t) {
                        let g = (v.value(k, b) - v.value(k, a)) / h;
                        acc.add(weight * g * g * hn * slabs[k]);
                    }
                }
                if window.dim == 2 && iy + 1 < window.ny {
                    let b = window.index(ix, iy + 1);
                    let mid = [ca[0], ca[1] + 0.5 * h];
                    if region.contains(mid, t) {
                        let g = (v.value(k, b) - v.value(k, a)) / h;
                        acc.add(weight * g * g * hn * slabs[k]);
                    }
                }
            }
        }
        // Vertical edges between levels k and k+1.
        if k + 1 < geom.levels.len() {
            let t_hi = geom.levels[k + 1];
            let dt = t_hi - t;
            let mid_t = 0.5 * (t + t_hi);
            let w_mid = mid_t.powf(power);
            for cell in 0..window.cell_count() {
                let c = window.center_of(cell);
                if region.contains(c, mid_t) {
                    let g = (v.value(k + 1, cell) - v.value(k, cell)) / dt;
                    acc.add(w_mid * g * g * hn * dt);
                }
            }
        }
    }
    acc.value()
}

/// The two quadratic pair energies the min/max identity applies to.
#[derive(Debug, Clone, Copy)]
pub enum PairEnergy {
    Gagliardo { s: f64, r_t: f64 },
    Weighted { s: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct MinMaxReport {
    pub e_min_plus_max: f64,
    pub e_orig_sum: f64,
    /// `E(u) + E(v) - E(min) - E(max)`; nonnegative for quadratic edge
    /// energies, zero when the fields are ordered.
    pub slack: f64,
}

pub fn minmax_check_weighted(u: &HalfSpaceField, v: &HalfSpaceField, s: f64) -> MinMaxReport {
    assert_eq!(u.geom, v.geom);
    let min = HalfSpaceField {
        geom: u.geom.clone(),
        values: u
            .values
            .iter()
            .zip(&v.values)
            .map(|(&a, &b)| a.min(b))
            .collect(),
    };
    let max = HalfSpaceField {
        geom: u.geom.clone(),
        values: u
            .values
            .iter()
            .zip(&v.values)
            .map(|(&a, &b)| a.max(b))
            .collect(),
    };
    let e_min = weighted_energy(&min, s, Region::Full);
    let e_max = weighted_energy(&max, s, Region::Full);
    let e_u = weighted_energy(u, s, Region::Full);
    let e_v = weighted_energy(v, s, Region::Full);
    MinMaxReport {
        e_min_plus_max: e_min + e_max,
        e_orig_sum: e_u + e_v,
        slack: (e_u + e_v) - (e_min + e_max),
    }
}

pub fn minmax_check_gagliardo(
    u: &PhaseField,
    v: &PhaseField,
    s: f64,
    r_t: f64,
) -> Result<MinMaxReport> {
    assert_eq!(u.window, v.window);
    let ctx = EnergyContext::for_field(u, s, r_t)?;
    let pointwise = |f: fn(f64, f64) -> f64| -> Vec<f64> {
        u.values
            .iter()
            .zip(&v.values)
            .map(|(&a, &b)| f(a, b))
            .collect()
    };
    let e = |vals: &[f64]| 4.0 * ctx.kinetic(vals);
    let e_min = e(&pointwise(f64::min));
    let e_max = e(&pointwise(f64::max));
    let e_u = e(&u.values);
    let e_v = e(&v.values);
    Ok(MinMaxReport {
        e_min_plus_max: e_min + e_max,
        e_orig_sum: e_u + e_v,
        slack: (e_u + e_v) - (e_min + e_max),
    })
}

/// The translated-and-glued competitor: a spatially varying horizontal
/// shift `x -> x - delta phi(|X| / r)` with a piecewise-linear cutoff
/// (full translate inside `r/2`, identity outside `r`). This is the
/// domain-perturbation competitor with a Lipschitz profile; values are
/// resampled by linear interpolation along the shift axis. Only for
/// one-dimensional traces.
pub fn glued_translate(u: &HalfSpaceField, delta: f64, r: f64) -> HalfSpaceField {
    let geom = &u.geom;
    let window = &geom.window;
    assert_eq!(window.dim, 1, "the warped competitor is built over a line trace");
    let n = window.cell_count();
    let values = (0..geom.node_count())
        .map(|node| {
            let level = node / n;
            let cell = node % n;
            let t = geom.levels[level];
            let x = window.center_of(cell)[0];
            let dist = (x * x + t * t).sqrt();
            let lambda = ((r - dist) / (0.5 * r)).clamp(0.0, 1.0);
            if lambda == 0.0 {
                return u.value(level, cell);
            }
            let target = x - delta * lambda;
            // Linear interpolation between cell centers along x.
            let pos = (target - window.lo[0]) / window.h - 0.5;
            assert!(
                pos >= 0.0 && pos <= (n - 1) as f64,
                "grid too narrow for the requested warp"
            );
            let j = (pos.floor() as usize).min(n - 2);
            let frac = pos - j as f64;
            (1.0 - frac) * u.value(level, j) + frac * u.value(level, j + 1)
        })
        .collect();
    HalfSpaceField {
        geom: geom.clone(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allen_cahn::ExteriorData;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn kernel_mass_is_one_at_all_heights() {
        for (dim, s) in [(1usize, 0.5f64), (1, 0.25), (2, 0.3), (2, 0.75)] {
            let k = normalize_kernel(dim, s).unwrap();
            for t in [0.5, 1.0, 2.0] {
                let mass = k.mass_at_height(t);
                assert!(
                    (mass - 1.0).abs() <= 1e-6,
                    "dim {dim} s {s} t {t}: mass {mass}"
                );
            }
        }
    }

    #[test]
    fn critical_line_kernel_is_the_classical_one() {
        let k = normalize_kernel(1, 0.5).unwrap();
        assert!((k.c - 1.0 / PI).abs() <= 1e-4, "c = {}", k.c);
        for i in 0..10 {
            let x = -4.0 + 0.9 * i as f64;
            let classical = (1.0 / PI) / (x * x + 1.0);
            assert!(
                (k.eval([x, 0.0], 1.0) - classical).abs() <= 1e-4,
                "x = {x}"
            );
        }
    }

    #[test]
    fn kernel_homogeneity() {
        let k = normalize_kernel(2, 0.3).unwrap();
        let base = k.eval([0.4, -0.2], 0.7);
        let scaled = k.eval([0.8, -0.4], 1.4);
        assert!((scaled - base / 4.0).abs() <= 1e-14 * base);
    }

    fn line_geometry(h: f64, span: f64, height: f64) -> HalfSpaceGeometry {
        let w = Window::new_1d(-span, span, h).unwrap();
        HalfSpaceGeometry::geometric(w, height)
    }

    #[test]
    fn constant_trace_extends_to_one() {
        let geom = line_geometry(0.25, 4.0, 4.0);
        let k = normalize_kernel(1, 0.3).unwrap();
        let full = ShapeSpec::ball([0.0, 0.0], 1e50).with_dim(1);
        let u = extend(&full, &k, &geom, 16.0);
        for &v in &u.values {
            assert!((v - 1.0).abs() <= 1e-6, "{v}");
        }
    }

    #[test]
    fn sign_trace_extension_is_odd_and_monotone() {
        let geom = line_geometry(0.25, 4.0, 4.0);
        let k = normalize_kernel(1, 0.3).unwrap();
        let ray = ShapeSpec::half_line_1d(-1.0, 0.0); // {x > 0}
        let u = extend(&ray, &k, &geom, 16.0);
        let window = &geom.window;
        let n = window.cell_count();
        for (level, _) in geom.levels.iter().enumerate() {
            for cell in 0..n / 2 {
                let left = u.value(level, cell);
                let right = u.value(level, n - 1 - cell);
                assert!((left + right).abs() <= 1e-6, "antisymmetry at {cell}");
            }
            for cell in 0..n - 1 {
                assert!(u.value(level, cell + 1) + 1e-9 >= u.value(level, cell));
            }
        }
        // Maximum principle with unit traces.
        for &v in &u.values {
            assert!((-1.0 - 1e-6..=1.0 + 1e-6).contains(&v));
        }
    }

    #[test]
    fn constant_fields_have_zero_energy() {
        let geom = line_geometry(0.25, 1.0, 1.0);
        let v = HalfSpaceField {
            geom: geom.clone(),
            values: vec![0.7; geom.node_count()],
        };
        assert_eq!(weighted_energy(&v, 0.3, Region::Full), 0.0);
    }

    #[test]
    fn linear_field_energy_at_the_critical_exponent() {
        // v = m x on a 64-cell line: weight == 1 at s = 1/2, so the energy
        // is m^2 times the covered volume (one edge column short).
        let geom = line_geometry(1.0 / 64.0, 0.5, 1.0);
        let m = 3.0;
        let values: Vec<f64> = (0..geom.node_count())
            .map(|node| {
                let cell = node % geom.window.cell_count();
                m * geom.window.center_of(cell)[0]
            })
            .collect();
        let v = HalfSpaceField {
            geom: geom.clone(),
            values,
        };
        let vol: f64 = geom.slab_heights().iter().sum::<f64>() * 1.0;
        let got = weighted_energy(&v, 0.5, Region::Full);
        let want = m * m * vol;
        assert!((got - want).abs() <= 0.02 * want, "{got} vs {want}");
    }

    #[test]
    fn energy_is_additive_over_partitions() {
        let geom = line_geometry(0.125, 1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values: Vec<f64> = (0..geom.node_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = HalfSpaceField {
            geom: geom.clone(),
            values,
        };
        let full = Region::Box {
            lo: [-1.0, -1.0],
            hi: [1.0, 1.0],
            t_lo: 0.0,
            t_hi: 10.0,
        };
        let left = Region::Box {
            lo: [-1.0, -1.0],
            hi: [0.07, 1.0],
            t_lo: 0.0,
            t_hi: 10.0,
        };
        let right = Region::Box {
            lo: [0.07, -1.0],
            hi: [1.0, 1.0],
            t_lo: 0.0,
            t_hi: 10.0,
        };
        let sum = weighted_energy(&v, 0.3, left) + weighted_energy(&v, 0.3, right);
        let whole = weighted_energy(&v, 0.3, full);
        assert_eq!(sum, whole);
    }

    #[test]
    fn minmax_identity_cases() {
        let geom = line_geometry(0.25, 1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mk = |rng: &mut ChaCha8Rng| HalfSpaceField {
            geom: geom.clone(),
            values: (0..geom.node_count()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let u = mk(&mut rng);
        // Identical fields: exactly zero slack.
        let same = minmax_check_weighted(&u, &u.clone(), 0.3);
        assert_eq!(same.slack, 0.0);
        // Ordered fields: min and max are the fields themselves.
        let above = HalfSpaceField {
            geom: geom.clone(),
            values: u.values.iter().map(|&v| v + 0.5).collect(),
        };
        let ordered = minmax_check_weighted(&u, &above, 0.3);
        assert_eq!(ordered.slack, 0.0);
        // Crossing fields: nonnegative slack, sometimes strictly positive.
        let mut positive = 0;
        for _ in 0..50 {
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let rep = minmax_check_weighted(&a, &b, 0.3);
            assert!(rep.slack >= -1e-12, "slack {}", rep.slack);
            if rep.slack > 1e-12 {
                positive += 1;
            }
        }
        assert!(positive > 0);
    }

    #[test]
    fn four_point_inequality_backs_the_slack_sign() {
        // (min1 - min2)^2 + (max1 - max2)^2 <= (a - b)^2 + (c - d)^2 over
        // every ordering of four reals: the per-edge reason the discrete
        // slack cannot go negative.
        let vals = [-1.0f64, -0.3, 0.2, 0.9];
        for &a in &vals {
            for &b in &vals {
                for &c in &vals {
                    for &d in &vals {
                        let lhs = (a.min(c) - b.min(d)).powi(2) + (a.max(c) - b.max(d)).powi(2);
                        let rhs = (a - b).powi(2) + (c - d).powi(2);
                        assert!(lhs <= rhs + 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn minmax_gagliardo_route() {
        let w = Window::new(2, [-0.5, -0.5], [0.5, 0.5], 0.125).unwrap();
        let ext = ExteriorData::SignTrace(ShapeSpec::half_plane([0.0, 1.0], 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut positive = 0;
        for _ in 0..20 {
            let u = PhaseField::new(
                w.clone(),
                (0..w.cell_count()).map(|_| rng.random_range(-1.0..1.0)).collect(),
                ext.clone(),
            );
            let v = PhaseField::new(
                w.clone(),
                (0..w.cell_count()).map(|_| rng.random_range(-1.0..1.0)).collect(),
                ext.clone(),
            );
            let rep = minmax_check_gagliardo(&u, &v, 0.3, 4.0).unwrap();
            assert!(rep.slack >= -1e-12);
            if rep.slack > 1e-12 {
                positive += 1;
            }
        }
        assert!(positive > 0);
    }

    #[test]
    fn halfplane_extension_energy_is_translation_invariant_along_the_interface() {
        let w = Window::new(2, [-1.0, -1.0], [1.0, 1.0], 0.125).unwrap();
        let geom = HalfSpaceGeometry::geometric(w, 1.0);
        let k = normalize_kernel(2, 0.3).unwrap();
        let hp = ShapeSpec::half_plane([1.0, 0.0], 0.0); // {x < 0}, interface x = 0
        let u = extend(&hp, &k, &geom, 8.0);
        let mk_box = |y0: f64| Region::Box {
            lo: [-0.5, y0 - 0.25],
            hi: [0.5, y0 + 0.25],
            t_lo: 0.0,
            t_hi: 0.8,
        };
        let center = weighted_energy(&u, 0.3, mk_box(0.0));
        let moved = weighted_energy(&u, 0.3, mk_box(0.25));
        assert!(
            (center - moved).abs() <= 0.01 * center,
            "{center} vs {moved}"
        );
    }
}
