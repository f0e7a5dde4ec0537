//! Marching-squares level-set extraction on cell-centered fields.

use crate::geometry::{Point, Window};

/// Line segments of the `level` iso-contour of a cell-centered field,
/// with linear interpolation along cell-center edges. Saddle squares are
/// disambiguated by the center average.
pub fn level_segments(window: &Window, values: &[f64], level: f64) -> Vec<[Point; 2]> {
    assert_eq!(values.len(), window.cell_count());
    let mut segs = Vec::new();
    if window.dim == 1 || window.ny < 2 || window.nx < 2 {
        return segs;
    }
    let at = |ix: usize, iy: usize| values[window.index(ix, iy)];
    for iy in 0..window.ny - 1 {
        for ix in 0..window.nx - 1 {
            let v = [
                at(ix, iy),         // bottom-left
                at(ix + 1, iy),     // bottom-right
                at(ix + 1, iy + 1), // top-right
                at(ix, iy + 1),     // top-left
            ];
            let p = [
                window.center(ix, iy),
                window.center(ix + 1, iy),
                window.center(ix + 1, iy + 1),
                window.center(ix, iy + 1),
            ];
            let mut code = 0usize;
            for (k, &vk) in v.iter().enumerate() {
                if vk > level {
                    code |= 1 << k;
                }
            }
            if code == 0 || code == 15 {
                continue;
            }
            // Interpolated crossing on edge (i, j).
            let cross = |i: usize, j: usize| -> Point {
                let t = (level - v[i]) / (v[j] - v[i]);
                [
                    p[i][0] + t * (p[j][0] - p[i][0]),
                    p[i][1] + t * (p[j][1] - p[i][1]),
                ]
            };
            let e0 = || cross(0, 1);
            let e1 = || cross(1, 2);
            let e2 = || cross(3, 2);
            let e3 = || cross(0, 3);
            match code {
                1 => segs.push([e3(), e0()]),
                2 => segs.push([e0(), e1()]),
                3 => segs.push([e3(), e1()]),
                4 => segs.push([e1(), e2()]),
                5 => {
                    let center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                    if center > level {
                        segs.push([e3(), e2()]);
                        segs.push([e0(), e1()]);
                    } else {
                        segs.push([e3(), e0()]);
                        segs.push([e1(), e2()]);
                    }
                }
                6 => segs.push([e0(), e2()]),
                7 => segs.push([e3(), e2()]),
                8 => segs.push([e2(), e3()]),
                9 => segs.push([e2(), e0()]),
                10 => {
                    let center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                    if center > level {
                        segs.push([e0(), e3()]);
                        segs.push([e1(), e2()]);
                    } else {
                        segs.push([e0(), e1()]);
                        segs.push([e2(), e3()]);
                    }
                }
                11 => segs.push([e1(), e2()]),
                12 => segs.push([e1(), e3()]),
                13 => segs.push([e0(), e1()]),
                14 => segs.push([e0(), e3()]),
                _ => unreachable!(),
            }
        }
    }
    segs
}

pub fn segment_length(seg: &[Point; 2]) -> f64 {
    let dx = seg[1][0] - seg[0][0];
    let dy = seg[1][1] - seg[0][1];
    (dx * dx + dy * dy).sqrt()
}

/// Total contour length restricted to segments whose midpoint lies in the
/// centered ball of radius `r`.
pub fn length_within_ball(segs: &[[Point; 2]], r: f64) -> f64 {
    segs.iter()
        .filter(|seg| {
            let mx = 0.5 * (seg[0][0] + seg[1][0]);
            let my = 0.5 * (seg[0][1] + seg[1][1]);
            mx * mx + my * my < r * r
        })
        .map(segment_length)
        .sum()
}
