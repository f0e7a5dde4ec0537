//! Compensated summation and the small quadrature kit shared by the modules.

/// Kahan compensated accumulator.
///
/// Every energy reduction in the crate funnels through this type in a
/// canonical (row-major) order, so that equality-type checks hold at
/// 1e-10 relative even for sums with millions of terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }

    pub fn total<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut k = Self::new();
        for v in iter {
            k.add(v);
        }
        k.value()
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
///
/// Recursion stops when the Richardson estimate of the local error drops
/// below the local share of `tol`, or at depth 48.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integral of `g(rho) * rho^(-1-2s)` over `rho in [r, inf)`.
///
/// Substituting `v = (r/rho)^(2s)` maps the improper integral onto the unit
/// interval with uniform weight, so a bounded `g` with a limit at infinity
/// integrates to the requested tolerance. `breaks` lists radii where `g`
/// jumps (piecewise angular profiles); the integral is split there.
pub fn decaying_radial_integral<F: Fn(f64) -> f64>(
    r: f64,
    two_s: f64,
    g: &F,
    breaks: &[f64],
) -> f64 {
    debug_assert!(r > 0.0 && two_s > 0.0);
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&b| b > r).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = KahanSum::new();
    let mut lo = r;
    for cut in cuts {
        total.add(radial_segment(lo, cut, two_s, g));
        lo = cut;
    }
    // Final piece [lo, inf): map v = (lo/rho)^(2s), rho = lo * v^(-1/(2s)).
    let scale = lo.powf(-two_s) / two_s;
    let map = |v: f64| {
        if v <= 0.0 {
            1e300
        } else {
            (lo * v.powf(-1.0 / two_s)).min(1e300)
        }
    };
    let integrand = |v: f64| g(map(v));
    total.add(scale * adaptive_simpson(&integrand, 0.0, 1.0, 1e-11));
    total.value()
}

/// Integral of `g(rho) * rho^(-1-2s)` over a finite segment `[r1, r2]`,
/// via the substitution `u = rho^(-2s)`.
fn radial_segment<F: Fn(f64) -> f64>(r1: f64, r2: f64, two_s: f64, g: &F) -> f64 {
    let u1 = r1.powf(-two_s);
    let u2 = r2.powf(-two_s);
    let integrand = |u: f64| g(u.powf(-1.0 / two_s));
    adaptive_simpson(&integrand, u2, u1, 1e-11) / two_s
}

/// Least-squares line through `(xs, ys)`, evaluated at `x0`.
pub fn linear_extrapolate(xs: &[f64], ys: &[f64], x0: f64) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    my + slope * (x0 - mx)
}

/// FNV-1a hash; used to fingerprint experiment configurations in reports.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
