//! Uniform grid windows in one and two dimensions.

use crate::error::{FracError, Result};

pub type Point = [f64; 2];

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// An axis-aligned box sliced into congruent square cells of side `h`.
///
/// One-dimensional windows are modeled with `ny == 1` and a degenerate
/// y-extent; all cell centers then sit on the x-axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub dim: usize,
    pub lo: Point,
    pub hi: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Window {
    pub fn new(dim: usize, lo: Point, hi: Point, h: f64) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(FracError::InvalidWindow(format!("dimension {dim} not supported")));
        }
        if h.is_nan() || h <= 0.0 || h.is_infinite() {
            return Err(FracError::InvalidWindow(format!("resolution h = {h}")));
        }
        let axes = if dim == 1 { 1 } else { 2 };
        let mut counts = [1usize; 2];
        for ax in 0..axes {
            let side = hi[ax] - lo[ax];
            if side <= 0.0 {
                return Err(FracError::InvalidWindow(format!(
                    "axis {ax} has nonpositive extent {side}"
                )));
            }
            let n = side / h;
            let rounded = n.round();
            if (n - rounded).abs() > 1e-9 * n.max(1.0) {
                return Err(FracError::InvalidWindow(format!(
                    "side {side} is not an integer multiple of h = {h}"
                )));
            }
            if rounded < 2.0 {
                return Err(FracError::InvalidWindow(format!(
                    "axis {ax} has fewer than 2 cells"
                )));
            }
            counts[ax] = rounded as usize;
        }
        let (lo, hi) = if dim == 1 {
            ([lo[0], 0.0], [hi[0], 0.0])
        } else {
            (lo, hi)
        };
        Ok(Self {
            dim,
            lo,
            hi,
            h,
            nx: counts[0],
            ny: counts[1],
        })
    }

    pub fn new_1d(lo: f64, hi: f64, h: f64) -> Result<Self> {
        Self::new(1, [lo, 0.0], [hi, 0.0], h)
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn center(&self, ix: usize, iy: usize) -> Point {
        let x = self.lo[0] + (ix as f64 + 0.5) * self.h;
        let y = if self.dim == 1 {
            0.0
        } else {
            self.lo[1] + (iy as f64 + 0.5) * self.h
        };
        [x, y]
    }

    #[inline]
    pub fn center_of(&self, idx: usize) -> Point {
        let (ix, iy) = self.coords(idx);
        self.center(ix, iy)
    }

    /// Cell containing `p`, if `p` lies inside the window.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let fx = (p[0] - self.lo[0]) / self.h;
        if fx < 0.0 || fx >= self.nx as f64 {
            return None;
        }
        let iy = if self.dim == 1 {
            0
        } else {
            let fy = (p[1] - self.lo[1]) / self.h;
            if fy < 0.0 || fy >= self.ny as f64 {
                return None;
            }
            fy as usize
        };
        Some(((fx as usize).min(self.nx - 1), iy.min(self.ny - 1)))
    }

    pub fn contains(&self, p: Point) -> bool {
        self.cell_of(p).is_some()
    }

    /// Measure of one cell, `h^dim`.
    #[inline]
    pub fn cell_measure(&self) -> f64 {
        if self.dim == 1 {
            self.h
        } else {
            self.h * self.h
        }
    }

    pub fn diameter(&self) -> f64 {
        let dx = self.hi[0] - self.lo[0];
        if self.dim == 1 {
            dx
        } else {
            let dy = self.hi[1] - self.lo[1];
            (dx * dx + dy * dy).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_windows() {
        assert!(Window::new(2, [0.0, 0.0], [1.0, 1.0], 0.3).is_err());
        assert!(Window::new(2, [0.0, 0.0], [0.5, 1.0], 0.5).is_err());
        assert!(Window::new(2, [1.0, 0.0], [0.0, 1.0], 0.25).is_err());
    }

    #[test]
    fn centers_and_indices_round_trip() {
        let w = Window::new(2, [-1.0, -1.0], [1.0, 1.0], 0.5).unwrap();
        assert_eq!(w.cell_count(), 16);
        for idx in 0..16 {
            let c = w.center_of(idx);
            let (ix, iy) = w.cell_of(c).unwrap();
            assert_eq!(w.index(ix, iy), idx);
        }
        assert_eq!(w.center(0, 0), [-0.75, -0.75]);
    }

    #[test]
    fn one_dimensional_windows_sit_on_the_axis() {
        let w = Window::new_1d(-1.0, 1.0, 0.25).unwrap();
        assert_eq!(w.cell_count(), 8);
        assert_eq!(w.center_of(0), [-0.875, 0.0]);
        assert_eq!(w.cell_measure(), 0.25);
    }
}
