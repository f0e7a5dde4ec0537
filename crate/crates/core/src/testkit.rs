//! Test-only oracles, independent of the production quadrature paths.

/// Gauss-3 nodes and weights on [-1, 1].
const NODES: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

fn leaf(a: [f64; 2], b: [f64; 2], w: f64, alpha: f64, dim: usize) -> f64 {
    let mut acc = 0.0;
    let half = 0.5 * w;
    if dim == 1 {
        for (xa, wa) in NODES {
            for (xb, wb) in NODES {
                let dx = (a[0] + half * xa) - (b[0] + half * xb);
                acc += wa * wb * dx.abs().powf(-alpha);
            }
        }
        acc * 0.25 * (w * w)
    } else {
        for (xa, wa) in NODES {
            for (ya, wya) in NODES {
                for (xb, wb) in NODES {
                    for (yb, wyb) in NODES {
                        let dx = (a[0] + half * xa) - (b[0] + half * xb);
                        let dy = (a[1] + half * ya) - (b[1] + half * yb);
                        acc += wa * wya * wb * wyb * (dx * dx + dy * dy).sqrt().powf(-alpha);
                    }
                }
            }
        }
        acc * (w * w * w * w) / 16.0
    }
}

fn rec(a: [f64; 2], b: [f64; 2], w: f64, alpha: f64, dim: usize, depth: u32) -> f64 {
    let dx = (a[0] - b[0]).abs();
    let dy = if dim == 1 { 0.0 } else { (a[1] - b[1]).abs() };
    if dx.max(dy) >= 4.0 * w || depth == 0 {
        return leaf(a, b, w, alpha, dim);
    }
    let q = 0.25 * w;
    let shifts: &[[f64; 2]] = if dim == 1 {
        &[[-1.0, 0.0], [1.0, 0.0]]
    } else {
        &[[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]]
    };
    let mut acc = 0.0;
    for sa in shifts {
        for sb in shifts {
            acc += rec(
                [a[0] + q * sa[0], a[1] + q * sa[1]],
                [b[0] + q * sb[0], b[1] + q * sb[1]],
                0.5 * w,
                alpha,
                dim,
                depth - 1,
            );
        }
    }
    acc
}

/// Unit-cell pair weight by recursive subdivision of the genuine double
/// integral with tensor Gauss-3 leaves, at a fixed depth.
pub fn oracle_pair_weight_depth(offset: [i64; 2], s: f64, dim: usize, depth: u32) -> f64 {
    let alpha = dim as f64 + 2.0 * s;
    rec(
        [0.0, 0.0],
        [offset[0] as f64, offset[1] as f64],
        1.0,
        alpha,
        dim,
        depth,
    )
}

/// Depth-extrapolated oracle. The depth cap truncates the touching-face
/// singularity with a geometrically decaying error, so Aitken's
/// delta-squared over three depths recovers the limit without assuming
/// the ratio; non-touching offsets converge outright.
pub fn oracle_pair_weight(offset: [i64; 2], s: f64, dim: usize) -> f64 {
    let touching = offset[0].abs().max(offset[1].abs()) <= 1;
    if !touching {
        return oracle_pair_weight_depth(offset, s, dim, 8);
    }
    let e0 = oracle_pair_weight_depth(offset, s, dim, 7);
    let e1 = oracle_pair_weight_depth(offset, s, dim, 8);
    let e2 = oracle_pair_weight_depth(offset, s, dim, 9);
    e2 - (e2 - e1) * (e2 - e1) / ((e2 - e1) - (e1 - e0))
}
