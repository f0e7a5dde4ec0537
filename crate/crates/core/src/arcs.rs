//! Arc subsets of the unit circle with exact boolean algebra.
//!
//! Shapes built from half-planes, sectors, and discs have circle sections
//! that are finite unions of arcs; computing them exactly gives analytic
//! angular occupancy functions for the far-field tails.

use std::f64::consts::TAU;

/// A finite union of disjoint, sorted, non-wrapping arcs within `[0, TAU]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSet {
    arcs: Vec<(f64, f64)>,
}

impl ArcSet {
    pub fn empty() -> Self {
        Self { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        Self {
            arcs: vec![(0.0, TAU)],
        }
    }

    /// Builds from a single possibly-wrapping arc `(start, start + len)`.
    pub fn arc(start: f64, len: f64) -> Self {
        if len <= 0.0 {
            return Self::empty();
        }
        if len >= TAU {
            return Self::full();
        }
        let s = start.rem_euclid(TAU);
        let e = s + len;
        let raw = if e <= TAU {
            vec![(s, e)]
        } else {
            vec![(s, TAU), (0.0, e - TAU)]
        };
        Self::normalize(raw)
    }

    fn normalize(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|&(s, e)| e > s);
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (s, e) in raw {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        Self { arcs: merged }
    }

    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(|&(s, e)| e - s).sum()
    }

    pub fn fraction(&self) -> f64 {
        self.measure() / TAU
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.arcs.len() + 1);
        let mut cursor = 0.0;
        for &(s, e) in &self.arcs {
            if s > cursor {
                out.push((cursor, s));
            }
            cursor = e;
        }
        if cursor < TAU {
            out.push((cursor, TAU));
        }
        Self { arcs: out }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut raw = self.arcs.clone();
        raw.extend_from_slice(&other.arcs);
        Self::normalize(raw)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.arcs.len() && j < other.arcs.len() {
            let (s1, e1) = self.arcs[i];
            let (s2, e2) = other.arcs[j];
            let s = s1.max(s2);
            let e = e1.min(e2);
            if e > s {
                out.push((s, e));
            }
            if e1 < e2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { arcs: out }
    }

    pub fn contains(&self, theta: f64) -> bool {
        let t = theta.rem_euclid(TAU);
        self.arcs.iter().any(|&(s, e)| s <= t && t < e)
    }
}

/// Arc of directions `theta` with `n . (a + rho u(theta)) > c`
/// (the part of the circle of radius `rho` about `a` inside an open
/// half-plane with inner normal `n` and offset `c`). `n` must be a unit
/// vector.
pub fn halfplane_gt(a: [f64; 2], rho: f64, n: [f64; 2], c: f64) -> ArcSet {
    // cos(theta - phi) > q with q = (c - n.a) / rho.
    let q = (c - (n[0] * a[0] + n[1] * a[1])) / rho;
    if q >= 1.0 {
        return ArcSet::empty();
    }
    if q <= -1.0 {
        return ArcSet::full();
    }
    let phi = n[1].atan2(n[0]);
    let alpha = q.clamp(-1.0, 1.0).acos();
    ArcSet::arc(phi - alpha, 2.0 * alpha)
}

/// Arc of directions inside the open disc `|x - center| < radius`,
/// on the circle of radius `rho` about `a`.
pub fn disc(a: [f64; 2], rho: f64, center: [f64; 2], radius: f64) -> ArcSet {
    let dx = center[0] - a[0];
    let dy = center[1] - a[1];
    let d = (dx * dx + dy * dy).sqrt();
    if d == 0.0 {
        return if rho < radius {
            ArcSet::full()
        } else {
            ArcSet::empty()
        };
    }
    // |a + rho u - center|^2 < radius^2  <=>  cos(theta - phi) > q.
    let q = (rho * rho + d * d - radius * radius) / (2.0 * rho * d);
    if q >= 1.0 {
        return ArcSet::empty();
    }
    if q <= -1.0 {
        return ArcSet::full();
    }
    let phi = dy.atan2(dx);
    let alpha = q.acos();
    ArcSet::arc(phi - alpha, 2.0 * alpha)
}

/// Arc of directions inside the open sector with apex `apex`, bisector
/// direction `bisector` (radians), and opening `opening in (0, 2 pi)`.
pub fn sector(a: [f64; 2], rho: f64, apex: [f64; 2], bisector: f64, opening: f64) -> ArcSet {
    if opening <= std::f64::consts::PI {
        // Intersection of two half-planes through the apex.
        let lo = bisector - 0.5 * opening;
        let hi = bisector + 0.5 * opening;
        let n_lo = [(lo + std::f64::consts::FRAC_PI_2).cos(), (lo + std::f64::consts::FRAC_PI_2).sin()];
        let n_hi = [(hi - std::f64::consts::FRAC_PI_2).cos(), (hi - std::f64::consts::FRAC_PI_2).sin()];
        let c_lo = n_lo[0] * apex[0] + n_lo[1] * apex[1];
        let c_hi = n_hi[0] * apex[0] + n_hi[1] * apex[1];
        halfplane_gt(a, rho, n_lo, c_lo).intersect(&halfplane_gt(a, rho, n_hi, c_hi))
    } else {
        // Complement of the opposite sector.
        sector(a, rho, apex, bisector + std::f64::consts::PI, TAU - opening).complement()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn halfplane_through_center_is_half_circle() {
        let arcs = halfplane_gt([0.0, 0.0], 2.0, [0.0, 1.0], 0.0);
        assert!((arcs.measure() - PI).abs() < 1e-12);
        assert!(arcs.contains(PI / 2.0));
        assert!(!arcs.contains(-PI / 2.0));
    }

    #[test]
    fn complement_and_union_partition_the_circle() {
        let a = halfplane_gt([0.3, -0.1], 1.5, [1.0, 0.0], 0.2);
        let c = a.complement();
        assert!((a.measure() + c.measure() - TAU).abs() < 1e-12);
        assert!((a.union(&c).measure() - TAU).abs() < 1e-12);
        assert!(a.intersect(&c).measure() < 1e-15);
    }

    #[test]
    fn quadrant_sector_from_origin() {
        let q1 = sector([0.0, 0.0], 1.0, [0.0, 0.0], PI / 4.0, PI / 2.0);
        assert!((q1.measure() - PI / 2.0).abs() < 1e-12);
        assert!(q1.contains(0.3));
        assert!(!q1.contains(2.0));
    }

    #[test]
    fn wide_sector_uses_complement_route() {
        let s = sector([0.0, 0.0], 1.0, [0.0, 0.0], 0.0, 1.5 * PI);
        assert!((s.measure() - 1.5 * PI).abs() < 1e-12);
        assert!(s.contains(0.0));
        assert!(!s.contains(PI));
    }

    #[test]
    fn disc_fraction_matches_subtended_angle() {
        // Unit disc centered at distance 2 from a, seen from radius 2:
        // half-angle alpha with cos(alpha) = (4 + 4 - 1) / 8.
        let arcs = disc([0.0, 0.0], 2.0, [2.0, 0.0], 1.0);
        let want = 2.0 * (7.0f64 / 8.0).acos();
        assert!((arcs.measure() - want).abs() < 1e-12);
    }

    #[test]
    fn wrapping_arcs_split_cleanly() {
        let a = ArcSet::arc(TAU - 0.5, 1.0);
        assert!((a.measure() - 1.0).abs() < 1e-12);
        assert!(a.contains(TAU - 0.2));
        assert!(a.contains(0.2));
        assert!(!a.contains(1.0));
    }
}
