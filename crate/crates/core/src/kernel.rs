//! The singular interaction kernel `|x - y|^(-(n+2s))`: cell-pair
//! quadrature weights, analytic tail integrals, and shared constants.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{FracError, Result};
use crate::geometry::Window;
use crate::numerics::{adaptive_simpson, KahanSum};

/// Surface measure of the unit sphere `S^(n-1)`: two points for `n = 1`,
/// the full circle for `n = 2`.
pub fn sphere_measure(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => TAU,
        _ => panic!("dimension {dim} not supported"),
    }
}

/// The constant in front of the Lebesgue measure in the small-s limit of
/// the scaled nonlocal perimeter; equals the sphere measure.
pub fn small_s_constant(dim: usize) -> f64 {
    sphere_measure(dim)
}

/// Shared kernel constants for a given dimension and exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub dim: usize,
    pub s: f64,
    pub sphere_measure: f64,
    pub small_s_constant: f64,
}

impl Constants {
    pub fn new(dim: usize, s: f64) -> Self {
        Self {
            dim,
            s,
            sphere_measure: sphere_measure(dim),
            small_s_constant: small_s_constant(dim),
        }
    }
}

/// Exact integral of the kernel over the complement of the ball of radius
/// `r`: `omega_{n-1} r^(-2s) / (2s)`.
pub fn tail(r: f64, s: f64, dim: usize) -> f64 {
    assert!(r > 0.0 && s > 0.0 && s < 1.0);
    sphere_measure(dim) * r.powf(-2.0 * s) / (2.0 * s)
}

/// Interaction weight between the cell at the origin and the cell at
/// `h * offset`, both cubes of side `h`.
///
/// Far apart (`|offset|_inf >= 4`) this is the midpoint rule
/// `h^{2n} |h offset|^{-(n+2s)}` by definition. Near offsets integrate the
/// cell-pair double integral exactly (see `unit_near_weight`); for
/// `s >= 1/2`, where that integral diverges on touching cells, the weight
/// falls back to the depth-capped subdivision rule, which acts as the
/// model's regularization.
pub fn pair_weight(offset: [i64; 2], h: f64, s: f64, dim: usize) -> Result<f64> {
    if offset == [0, 0] {
        return Err(FracError::ZeroOffset);
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(FracError::SOutOfUnit(s));
    }
    assert!(h > 0.0);
    if dim == 1 && offset[1] != 0 {
        return Err(FracError::Parse("1d offsets must have zero y component".into()));
    }
    // Change of variables x -> h x gives the exact scaling h^(n - 2s).
    Ok(unit_weight(offset, s, dim) * h.powf(dim as f64 - 2.0 * s))
}

fn linf(offset: [i64; 2]) -> i64 {
    offset[0].abs().max(offset[1].abs())
}

fn unit_weight(offset: [i64; 2], s: f64, dim: usize) -> f64 {
    let alpha = dim as f64 + 2.0 * s;
    if linf(offset) >= 4 {
        let d2 = (offset[0] * offset[0] + offset[1] * offset[1]) as f64;
        return d2.sqrt().powf(-alpha);
    }
    if s < 0.5 {
        unit_near_weight(offset, s, dim)
    } else {
        subdivided_weight(offset, s, dim)
    }
}

/// `(q^beta - p^beta) / beta`, with the logarithmic limit at `beta = 0`.
fn power_segment(beta: f64, p: f64, q: f64) -> f64 {
    if beta.abs() < 1e-12 {
        (q / p).ln()
    } else if p == 0.0 {
        q.powf(beta) / beta
    } else {
        (q.powf(beta) - p.powf(beta)) / beta
    }
}

/// Exact near-field weight for `s < 1/2`.
///
/// Writing `z = x - y` collapses the double integral over the two cells to
/// `int V(z) |z|^(-alpha) dz` with the tent overlap `V(z) = prod_i max(0,
/// 1 - |z_i - d_i|)`. In polar coordinates about the singular point the
/// radial integrand is piecewise quadratic times a power, which integrates
/// in closed form; only the angular integral is numeric.
fn unit_near_weight(offset: [i64; 2], s: f64, dim: usize) -> f64 {
    // Canonicalize: the kernel is radial, cells are cubes.
    let d1 = offset[0].abs().max(if dim == 1 { 0 } else { offset[1].abs() }) as f64;
    let d2 = if dim == 1 {
        0.0
    } else {
        offset[0].abs().min(offset[1].abs()) as f64
    };
    if dim == 1 {
        return tent_line_integral(d1, 1.0 + 2.0 * s);
    }
    let alpha = 2.0 + 2.0 * s;

    // Angular integrand: closed-form radial integral along the ray theta.
    let ray = |theta: f64| -> f64 {
        let c = theta.cos();
        let sn = theta.sin();
        // Clip the ray to the box [d1-1, d1+1] x [d2-1, d2+1].
        let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
        for (dir, lo, hi) in [(c, d1 - 1.0, d1 + 1.0), (sn, d2 - 1.0, d2 + 1.0)] {
            if dir.abs() < 1e-15 {
                if lo > 0.0 || hi < 0.0 {
                    return 0.0;
                }
            } else {
                let (a, b) = (lo / dir, hi / dir);
                t0 = t0.max(a.min(b));
                t1 = t1.min(a.max(b));
            }
        }
        if t1 <= t0 {
            return 0.0;
        }
        // Kinks of the tents along the ray.
        let mut cuts = [t0, t1, f64::INFINITY, f64::INFINITY];
        let mut ncuts = 2;
        if c.abs() > 1e-15 {
            let k = d1 / c;
            if k > t0 && k < t1 {
                cuts[ncuts] = k;
                ncuts += 1;
            }
        }
        if sn.abs() > 1e-15 && d2 > 0.0 {
            let k = d2 / sn;
            if k > t0 && k < t1 {
                cuts[ncuts] = k;
                ncuts += 1;
            }
        }
        let cuts = &mut cuts[..ncuts];
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let (p, q) = (w[0], w[1]);
            if q <= p {
                continue;
            }
            let mid = 0.5 * (p + q);
            let s1 = if mid * c - d1 >= 0.0 { 1.0 } else { -1.0 };
            let s2 = if mid * sn - d2 >= 0.0 { 1.0 } else { -1.0 };
            // T1 T2 = (a1 + b1 t)(a2 + b2 t).
            let (a1, b1) = (1.0 + s1 * d1, -s1 * c);
            let (a2, b2) = (1.0 + s2 * d2, -s2 * sn);
            let e = a1 * a2;
            let b = a1 * b2 + a2 * b1;
            let a = b1 * b2;
            acc += e * power_segment(2.0 - alpha, p, q)
                + b * power_segment(3.0 - alpha, p, q)
                + a * power_segment(4.0 - alpha, p, q);
        }
        acc
    };

    // Split the angular range at the box corner directions.
    let mut marks = vec![];
    for (x, y) in [
        (d1 - 1.0, d2 - 1.0),
        (d1 - 1.0, d2 + 1.0),
        (d1 + 1.0, d2 - 1.0),
        (d1 + 1.0, d2 + 1.0),
    ] {
        marks.push(y.atan2(x));
    }
    marks.push(0.0);
    marks.push(d2.atan2(d1));
    marks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    marks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut total = 0.0;
    let mut prev = marks[0];
    for &m in marks.iter().skip(1) {
        if m > prev + 1e-14 {
            total += adaptive_simpson(&ray, prev, m, 1e-13);
            prev = m;
        }
    }
    total
}

/// 1d tent integral `int (1 - |z - d|) z^(-alpha) dz` over `[d-1, d+1]`,
/// in closed form per linear piece.
fn tent_line_integral(d: f64, alpha: f64) -> f64 {
    let mut acc = 0.0;
    for (p, q, a, b) in [
        (d - 1.0, d, 1.0 - d, 1.0),  // rising edge: 1 - (d - z)
        (d, d + 1.0, 1.0 + d, -1.0), // falling edge: 1 - (z - d)
    ] {
        let p = p.max(0.0);
        if q <= p {
            continue;
        }
        acc += a * power_segment(1.0 - alpha, p, q) + b * power_segment(2.0 - alpha, p, q);
    }
    acc
}

/// Recursive cell-pair subdivision with midpoint leaves: both cells split
/// in 2^n until subcell centers separate by four subcell widths, capped at
/// depth 8. For `s >= 1/2` the cap is what keeps touching-cell weights
/// finite, so this is the defining rule there.
fn subdivided_weight(offset: [i64; 2], s: f64, dim: usize) -> f64 {
    let alpha = dim as f64 + 2.0 * s;
    let a = [0.0, 0.0];
    let b = [offset[0] as f64, offset[1] as f64];
    subdivide_rec(a, b, 1.0, alpha, dim, 8)
}

fn subdivide_rec(a: [f64; 2], b: [f64; 2], w: f64, alpha: f64, dim: usize, depth: u32) -> f64 {
    let dx = (a[0] - b[0]).abs();
    let dy = if dim == 1 { 0.0 } else { (a[1] - b[1]).abs() };
    let sep = dx.max(dy);
    if sep >= 4.0 * w * (1.0 - 1e-12) || depth == 0 {
        let r2 = dx * dx + dy * dy;
        let vol = if dim == 1 { w * w } else { w * w * w * w };
        return vol * r2.sqrt().powf(-alpha);
    }
    let q = 0.25 * w;
    let half = 0.5 * w;
    let mut acc = 0.0;
    let shifts: &[[f64; 2]] = if dim == 1 {
        &[[-1.0, 0.0], [1.0, 0.0]]
    } else {
        &[[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]]
    };
    for sa in shifts {
        for sb in shifts {
            let an = [a[0] + q * sa[0], a[1] + q * sa[1]];
            let bn = [b[0] + q * sb[0], b[1] + q * sb[1]];
            acc += subdivide_rec(an, bn, half, alpha, dim, depth - 1);
        }
    }
    acc
}

/// Default cap on the number of tabulated offsets.
pub const DEFAULT_OFFSET_CAP: usize = 1 << 24;

/// Translation-invariant table of cell-pair weights for all offsets with
/// `|h offset| <= R_t`, stored by absolute offset components.
#[derive(Debug, Clone)]
pub struct InteractionTable {
    pub dim: usize,
    pub h: f64,
    pub s: f64,
    pub r_t: f64,
    m: i64,
    stride: usize,
    w: Vec<f64>,
    total: f64,
    /// Squared cell offsets sorted ascending, with the running weight sum
    /// over all signed offsets up to that radius.
    radial_d2: Vec<i64>,
    radial_prefix: Vec<f64>,
}

impl InteractionTable {
    /// Deterministic contents regardless of the rayon pool shape.
    pub fn build(window: &Window, s: f64, r_t: f64) -> Result<Self> {
        Self::build_with_cap(window.dim, window.h, s, r_t, DEFAULT_OFFSET_CAP)
    }

    pub fn build_with_cap(dim: usize, h: f64, s: f64, r_t: f64, cap: usize) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(FracError::SOutOfUnit(s));
        }
        if r_t < 4.0 * h {
            return Err(FracError::TruncationTooSmall { rt: r_t, min: 4.0 * h });
        }
        let m = (r_t / h * (1.0 + 1e-12)).floor() as i64;
        let stride = m as usize + 1;
        let needed = if dim == 1 { stride } else { stride * stride };
        if needed > cap {
            return Err(FracError::OutOfMemory { needed, cap });
        }
        let scale = h.powf(dim as f64 - 2.0 * s);
        let r2 = (r_t / h) * (r_t / h) * (1.0 + 1e-12);
        let rows: Vec<Vec<f64>> = (0..=m)
            .into_par_iter()
            .map(|i| {
                let jmax = if dim == 1 { 0 } else { m };
                let mut row = vec![0.0; jmax as usize + 1];
                for j in 0..=jmax {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    if (i * i + j * j) as f64 > r2 {
                        continue;
                    }
                    // Radial symmetry: only compute the sorted pair.
                    let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
                    row[j as usize] = unit_weight([hi, lo], s, dim) * scale;
                }
                row
            })
            .collect();
        let mut w = vec![0.0; needed];
        for (i, row) in rows.iter().enumerate() {
            for (j, &val) in row.iter().enumerate() {
                w[i * if dim == 1 { 1 } else { stride } + j] = val;
            }
        }
        // Radially sorted prefix over all signed offsets, for disc sums.
        let mut entries: Vec<(i64, f64)> = Vec::new();
        for i in 0..=m {
            let jmax = if dim == 1 { 0 } else { m };
            for j in 0..=jmax {
                let val = w[i as usize * if dim == 1 { 1 } else { stride } + j as usize];
                if val == 0.0 {
                    continue;
                }
                let mult = match (i, j) {
                    (0, 0) => 0.0,
                    (_, 0) if dim == 1 => 2.0,
                    (0, _) | (_, 0) => 2.0,
                    _ => 4.0,
                };
                entries.push((i * i + j * j, mult * val));
            }
        }
        entries.sort_by_key(|e| e.0);
        let mut radial_d2 = Vec::with_capacity(entries.len());
        let mut radial_prefix = Vec::with_capacity(entries.len());
        let mut total = KahanSum::new();
        for (d2, val) in entries {
            total.add(val);
            radial_d2.push(d2);
            radial_prefix.push(total.value());
        }
        Ok(Self {
            dim,
            h,
            s,
            r_t,
            m,
            stride,
            w,
            total: total.value(),
            radial_d2,
            radial_prefix,
        })
    }

    /// Weight for a signed offset; zero outside the truncation disc.
    #[inline]
    pub fn get(&self, di: i64, dj: i64) -> f64 {
        let i = di.abs();
        let j = dj.abs();
        if i > self.m || j > self.m {
            return 0.0;
        }
        if self.dim == 1 {
            debug_assert_eq!(j, 0);
            self.w[i as usize]
        } else {
            self.w[i as usize * self.stride + j as usize]
        }
    }

    /// Largest offset magnitude per axis.
    #[inline]
    pub fn max_offset(&self) -> i64 {
        self.m
    }

    /// Sum of the weights over every signed offset within the disc.
    #[inline]
    pub fn sum_all(&self) -> f64 {
        self.total
    }

    /// Sum of the weights over all signed offsets with squared cell
    /// distance at most `d2_cells`.
    pub fn disc_sum(&self, d2_cells: f64) -> f64 {
        let k = self.radial_d2.partition_point(|&d2| (d2 as f64) <= d2_cells);
        if k == 0 {
            0.0
        } else {
            self.radial_prefix[k - 1]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracle: recursive subdivision of the genuine double
    // integral with tensor Gauss-3 leaves, Aitken-extrapolated over the
    // subdivision depth. Shares no code with the production path, which
    // reduces to a polar integral of the tent overlap.
    use crate::testkit::oracle_pair_weight;

    #[test]
    fn far_field_is_the_midpoint_rule() {
        let w = pair_weight([10, 0], 1.0, 0.25, 2).unwrap();
        let want = 10f64.powf(-2.5);
        assert!((w - want).abs() <= 1e-6 * want);
        // Sep exactly 4 also takes the midpoint branch.
        let w4 = pair_weight([4, 2], 0.5, 0.3, 2).unwrap();
        let d = (20f64).sqrt() * 0.5;
        let want4 = 0.5f64.powi(4) * d.powf(-2.6);
        assert!((w4 - want4).abs() <= 1e-12 * want4);
    }

    #[test]
    fn touching_cells_match_the_gauss_oracle() {
        let s = 0.25;
        let got = pair_weight([1, 0], 1.0, s, 2).unwrap();
        let want = oracle_pair_weight([1, 0], s, 2);
        assert!(
            (got - want).abs() <= 1e-4 * want,
            "got {got}, oracle {want}, rel {}",
            ((got - want) / want).abs()
        );
    }

    #[test]
    fn near_offsets_match_the_gauss_oracle() {
        for (offset, s) in [([1i64, 1i64], 0.25), ([2, 1], 0.4), ([3, 0], 0.1)] {
            let got = pair_weight(offset, 1.0, s, 2).unwrap();
            let want = oracle_pair_weight(offset, s, 2);
            assert!(
                (got - want).abs() <= 1e-4 * want,
                "offset {offset:?} s {s}: got {got}, oracle {want}"
            );
        }
    }

    #[test]
    fn one_dimensional_weights_match_the_oracle() {
        for (offset, s) in [([1i64, 0i64], 0.3), ([2, 0], 0.45), ([3, 0], 0.05)] {
            let got = pair_weight(offset, 1.0, s, 1).unwrap();
            let want = oracle_pair_weight(offset, s, 1);
            assert!(
                (got - want).abs() <= 1e-4 * want,
                "offset {offset:?} s {s}: got {got}, oracle {want}"
            );
        }
    }

    #[test]
    fn scaling_law_in_h() {
        for dim in [1usize, 2] {
            for s in [0.2, 0.45, 0.75] {
                let offset = [1, if dim == 1 { 0 } else { 1 }];
                let w1 = pair_weight(offset, 1.0, s, dim).unwrap();
                let wh = pair_weight(offset, 0.125, s, dim).unwrap();
                let want = 0.125f64.powf(dim as f64 - 2.0 * s) * w1;
                assert!((wh - want).abs() <= 1e-12 * want.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn zero_offset_is_rejected() {
        assert!(matches!(
            pair_weight([0, 0], 1.0, 0.25, 2),
            Err(FracError::ZeroOffset)
        ));
    }

    #[test]
    fn supercritical_weights_are_finite_and_positive() {
        for s in [0.5, 0.75, 0.9] {
            let w = pair_weight([1, 0], 1.0, s, 2).unwrap();
            assert!(w.is_finite() && w > 0.0, "s = {s}");
        }
    }

    #[test]
    fn shared_constants() {
        let c = Constants::new(2, 0.25);
        assert_eq!(c.sphere_measure, TAU);
        assert_eq!(c.small_s_constant, c.sphere_measure);
        let c1 = Constants::new(1, 0.25);
        assert_eq!(c1.sphere_measure, 2.0);
    }

    #[test]
    fn tail_closed_form() {
        let t = tail(1.0, 0.25, 2);
        assert!((t - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        let t2 = tail(2.0, 0.5, 2);
        assert!((t2 - std::f64::consts::PI).abs() < 1e-12);
        // 2s * tail(1, s, n) / omega -> 1 as s -> 0.
        for s in [0.1, 0.01, 0.001] {
            let v = 2.0 * s * tail(1.0, s, 2) / sphere_measure(2);
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn table_matches_pointwise_weights_and_symmetries() {
        let w = Window::new(2, [-0.5, -0.5], [0.5, 0.5], 1.0 / 32.0).unwrap();
        let t = InteractionTable::build(&w, 0.49, 0.25).unwrap();
        for (di, dj) in [(1i64, 0i64), (2, 3), (5, 5), (7, 1)] {
            let want = pair_weight([di, dj], w.h, 0.49, 2).unwrap();
            assert_eq!(t.get(di, dj), want);
            assert_eq!(t.get(di, dj), t.get(-di, dj));
            assert_eq!(t.get(di, dj), t.get(dj, di));
        }
        assert_eq!(t.get(0, 0), 0.0);
        assert_eq!(t.get(1000, 0), 0.0);
    }

    #[test]
    fn table_weights_decrease_in_s_beyond_unit_separation() {
        let h = 1.0 / 32.0;
        let lo = InteractionTable::build_with_cap(2, h, 0.01, 2.0, DEFAULT_OFFSET_CAP).unwrap();
        let hi = InteractionTable::build_with_cap(2, h, 0.49, 2.0, DEFAULT_OFFSET_CAP).unwrap();
        let mut checked = 0;
        for di in 0..=lo.max_offset() {
            for dj in 0..=di {
                if (di * di + dj * dj) as f64 * h * h <= 1.0 {
                    continue;
                }
                if lo.get(di, dj) == 0.0 {
                    continue;
                }
                assert!(
                    hi.get(di, dj) < lo.get(di, dj),
                    "offset ({di},{dj}) did not decrease"
                );
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn table_is_deterministic_across_thread_counts() {
        let h = 1.0 / 16.0;
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| InteractionTable::build_with_cap(2, h, 0.3, 1.0, DEFAULT_OFFSET_CAP).unwrap());
        let parallel = InteractionTable::build_with_cap(2, h, 0.3, 1.0, DEFAULT_OFFSET_CAP).unwrap();
        assert_eq!(serial.w.len(), parallel.w.len());
        for (a, b) in serial.w.iter().zip(parallel.w.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(serial.sum_all().to_bits(), parallel.sum_all().to_bits());
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            InteractionTable::build_with_cap(2, 1.0 / 64.0, 0.25, 8.0, 1000),
            Err(FracError::OutOfMemory { .. })
        ));
    }

    #[test]
    fn annulus_sum_plus_tail_is_consistent() {
        // Sum of discrete weights over r < |offset h| <= R, plus the
        // analytic tail at R, approximates the analytic tail at r.
        let h = 1.0 / 16.0;
        let r = 1.0;
        let big_r = 4.0;
        let s = 0.3;
        let t = InteractionTable::build_with_cap(2, h, s, big_r, DEFAULT_OFFSET_CAP).unwrap();
        let mut sum = KahanSum::new();
        let m = t.max_offset();
        for di in -m..=m {
            for dj in -m..=m {
                let d = ((di * di + dj * dj) as f64).sqrt() * h;
                if d > r && d <= big_r {
                    sum.add(t.get(di, dj));
                }
            }
        }
        // Weights carry h^{2n} cell measures; per unit source measure
        // divide by h^n.
        let got = sum.value() / (h * h) + tail(big_r, s, 2);
        let want = tail(r, s, 2);
        assert!(
            (got - want).abs() <= 0.02 * want,
            "got {got}, want {want}"
        );
    }
}
