//! Analytic set descriptions, their exact geometric quantities, and
//! discretization onto grid windows.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::arcs::{self, ArcSet};
use crate::error::{FracError, Result};
use crate::geometry::{Point, Window};
use crate::numerics::decaying_radial_integral;

/// Default annuli for the oscillating cone. The exponents grow
/// geometrically (`R_{k+1} = R_k^4`) so that the far-field occupancy seen
/// at the sweep exponents `s = 0.2 ... 0.0125` swings between the two
/// openings instead of settling.
pub const OSC_DEFAULT_RADII: [f64; 2] = [1024.0, 68_719_476_736.0];
pub const OSC_DEFAULT_SMALL: f64 = PI / 6.0;
pub const OSC_DEFAULT_BIG: f64 = 11.0 * PI / 6.0;

/// Axis-aligned open box.
#[derive(Debug, Clone, PartialEq)]
pub struct Rect {
    pub lo: Point,
    pub hi: Point,
}

impl Rect {
    pub fn new(lo: Point, hi: Point) -> Self {
        Self { lo, hi }
    }

    #[inline]
    pub fn contains(&self, p: Point, dim: usize) -> bool {
        let in_x = self.lo[0] < p[0] && p[0] < self.hi[0];
        if dim == 1 {
            in_x
        } else {
            in_x && self.lo[1] < p[1] && p[1] < self.hi[1]
        }
    }

    pub fn corner_radius(&self) -> f64 {
        let xs = [self.lo[0].abs(), self.hi[0].abs()];
        let ys = [self.lo[1].abs(), self.hi[1].abs()];
        let x = xs[0].max(xs[1]);
        let y = ys[0].max(ys[1]);
        (x * x + y * y).sqrt()
    }
}

/// Asymptotic angular occupancy of a set at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Value(f64),
    /// Reported as `[liminf, limsup]` when the limit does not exist.
    Interval(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKind {
    /// Open half-plane `{ n . x < c }` with unit outer normal `n`.
    HalfPlane { normal: Point, offset: f64 },
    /// Open sector with apex `apex`, bisector direction `bisector`, and
    /// opening in `(0, 2 pi)`; `complement` selects the outside instead.
    Cone2D {
        apex: Point,
        bisector: f64,
        opening: f64,
        complement: bool,
    },
    /// The cross cone `{ x y > 0 }` (two opposite quadrants).
    CrossCone,
    /// The cross cone with one extra square of side `side` glued to the
    /// origin inside the upper-left quadrant: `(-side, 0) x (0, side)`.
    CrossConePlusSquare { side: f64 },
    Ball { center: Point, radius: f64 },
    RectUnion { boxes: Vec<Rect> },
    /// Cone about the positive x-axis whose opening alternates between
    /// `small` and `big` across the annuli delimited by `radii`
    /// (strictly increasing). The innermost region uses `small`, and the
    /// alternation continues past the last radius.
    OscillatingCone {
        radii: Vec<f64>,
        small: f64,
        big: f64,
    },
}

/// An analytic subset of the plane (or the line, for `dim == 1`).
/// Shapes are immutable values; operations never mutate them.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub dim: usize,
}

/// Classical local quantities of a shape inside the centered ball `B_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalQuantities {
    pub perimeter: f64,
    pub measure_set: f64,
    pub measure_complement: f64,
}

impl ShapeSpec {
    pub fn half_plane(normal: Point, offset: f64) -> Self {
        let len = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
        assert!(len > 0.0, "half-plane normal must be nonzero");
        Self {
            kind: ShapeKind::HalfPlane {
                normal: [normal[0] / len, normal[1] / len],
                offset,
            },
            dim: 2,
        }
    }

    pub fn half_line_1d(direction: f64, offset: f64) -> Self {
        let n = if direction >= 0.0 { 1.0 } else { -1.0 };
        Self {
            kind: ShapeKind::HalfPlane {
                normal: [n, 0.0],
                offset,
            },
            dim: 1,
        }
    }

    pub fn cone(bisector: f64, opening: f64) -> Self {
        Self::cone_full([0.0, 0.0], bisector, opening, false)
    }

    pub fn cone_full(apex: Point, bisector: f64, opening: f64, complement: bool) -> Self {
        assert!(opening > 0.0 && opening < TAU, "opening must lie in (0, 2pi)");
        Self {
            kind: ShapeKind::Cone2D {
                apex,
                bisector,
                opening,
                complement,
            },
            dim: 2,
        }
    }

    pub fn cross_cone() -> Self {
        Self {
            kind: ShapeKind::CrossCone,
            dim: 2,
        }
    }

    pub fn cross_cone_plus_square(side: f64) -> Self {
        assert!(side > 0.0);
        Self {
            kind: ShapeKind::CrossConePlusSquare { side },
            dim: 2,
        }
    }

    pub fn ball(center: Point, radius: f64) -> Self {
        assert!(radius > 0.0);
        Self {
            kind: ShapeKind::Ball { center, radius },
            dim: 2,
        }
    }

    pub fn rect_union(boxes: Vec<Rect>) -> Self {
        Self {
            kind: ShapeKind::RectUnion { boxes },
            dim: 2,
        }
    }

    /// Never-member shape; stands in for a vanishing exterior datum.
    pub fn empty() -> Self {
        Self::rect_union(Vec::new())
    }

    pub fn oscillating_cone(radii: Vec<f64>, small: f64, big: f64) -> Self {
        assert!(!radii.is_empty());
        assert!(radii.windows(2).all(|w| w[0] < w[1]));
        assert!(small > 0.0 && small < TAU && big > 0.0 && big < TAU);
        Self {
            kind: ShapeKind::OscillatingCone { radii, small, big },
            dim: 2,
        }
    }

    pub fn oscillating_default() -> Self {
        Self::oscillating_cone(OSC_DEFAULT_RADII.to_vec(), OSC_DEFAULT_SMALL, OSC_DEFAULT_BIG)
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    /// Deterministic, total membership test.
    pub fn membership(&self, p: Point) -> bool {
        match &self.kind {
            ShapeKind::HalfPlane { normal, offset } => {
                let v = if self.dim == 1 {
                    normal[0] * p[0]
                } else {
                    normal[0] * p[0] + normal[1] * p[1]
                };
                v < *offset
            }
            ShapeKind::Cone2D {
                apex,
                bisector,
                opening,
                complement,
            } => {
                let dx = p[0] - apex[0];
                let dy = p[1] - apex[1];
                if dx == 0.0 && dy == 0.0 {
                    return *complement;
                }
                let theta = dy.atan2(dx);
                let mut delta = (theta - bisector).rem_euclid(TAU);
                if delta > PI {
                    delta -= TAU;
                }
                (delta.abs() < 0.5 * opening) != *complement
            }
            ShapeKind::CrossCone => p[0] * p[1] > 0.0,
            ShapeKind::CrossConePlusSquare { side } => {
                p[0] * p[1] > 0.0
                    || (-side < p[0] && p[0] < 0.0 && 0.0 < p[1] && p[1] < *side)
            }
            ShapeKind::Ball { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy < radius * radius
            }
            ShapeKind::RectUnion { boxes } => boxes.iter().any(|b| b.contains(p, self.dim)),
            ShapeKind::OscillatingCone { .. } => {
                let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
                if rho == 0.0 {
                    return false;
                }
                let opening = self.oscillating_opening(rho);
                let theta = p[1].atan2(p[0]);
                theta.abs() < 0.5 * opening
            }
        }
    }

    fn oscillating_opening(&self, rho: f64) -> f64 {
        match &self.kind {
            ShapeKind::OscillatingCone { radii, small, big } => {
                let j = radii.partition_point(|&rk| rk < rho);
                if j % 2 == 0 {
                    *small
                } else {
                    *big
                }
            }
            _ => unreachable!(),
        }
    }

    pub fn asymptotic_density(&self) -> Density {
        match &self.kind {
            ShapeKind::HalfPlane { .. } => Density::Value(0.5),
            ShapeKind::Cone2D {
                opening, complement, ..
            } => {
                let d = opening / TAU;
                Density::Value(if *complement { 1.0 - d } else { d })
            }
            ShapeKind::CrossCone | ShapeKind::CrossConePlusSquare { .. } => Density::Value(0.5),
            ShapeKind::Ball { .. } | ShapeKind::RectUnion { .. } => Density::Value(0.0),
            ShapeKind::OscillatingCone { small, big, .. } => {
                let lo = small.min(*big) / TAU;
                let hi = small.max(*big) / TAU;
                Density::Interval(lo, hi)
            }
        }
    }

    /// Scalar density, or `TailUnavailable` when only an interval exists.
    pub fn density_value(&self) -> Result<f64> {
        match self.asymptotic_density() {
            Density::Value(v) => Ok(v),
            Density::Interval(..) => Err(FracError::TailUnavailable),
        }
    }

    /// Circumradius about the origin for bounded shapes.
    pub fn bounding_radius(&self) -> Option<f64> {
        match &self.kind {
            ShapeKind::Ball { center, radius } => {
                Some((center[0] * center[0] + center[1] * center[1]).sqrt() + radius)
            }
            ShapeKind::RectUnion { boxes } => Some(
                boxes
                    .iter()
                    .map(Rect::corner_radius)
                    .fold(0.0, f64::max),
            ),
            _ => None,
        }
    }

    pub fn complemented(&self) -> Option<ShapeSpec> {
        match &self.kind {
            ShapeKind::HalfPlane { normal, offset } => Some(ShapeSpec {
                kind: ShapeKind::HalfPlane {
                    normal: [-normal[0], -normal[1]],
                    offset: -offset,
                },
                dim: self.dim,
            }),
            ShapeKind::Cone2D {
                apex,
                bisector,
                opening,
                complement,
            } => Some(ShapeSpec {
                kind: ShapeKind::Cone2D {
                    apex: *apex,
                    bisector: *bisector,
                    opening: *opening,
                    complement: !complement,
                },
                dim: self.dim,
            }),
            _ => None,
        }
    }

    /// Exact classical perimeter of the set boundary inside the centered
    /// ball `B_r`, together with the Lebesgue measures of both sides.
    pub fn exact_local_quantities(&self, r: f64) -> Result<LocalQuantities> {
        assert!(r > 0.0);
        match &self.kind {
            ShapeKind::HalfPlane { normal, offset } => {
                let c = *offset;
                if self.dim == 1 {
                    let b = c / normal[0];
                    let (per, set) = if b.abs() < r {
                        let set = if normal[0] > 0.0 { b + r } else { r - b };
                        (1.0, set)
                    } else if self.membership([0.0, 0.0]) {
                        (0.0, 2.0 * r)
                    } else {
                        (0.0, 0.0)
                    };
                    return Ok(LocalQuantities {
                        perimeter: per,
                        measure_set: set,
                        measure_complement: 2.0 * r - set,
                    });
                }
                let area = PI * r * r;
                if c <= -r {
                    return Ok(LocalQuantities {
                        perimeter: 0.0,
                        measure_set: 0.0,
                        measure_complement: area,
                    });
                }
                if c >= r {
                    return Ok(LocalQuantities {
                        perimeter: 0.0,
                        measure_set: area,
                        measure_complement: 0.0,
                    });
                }
                // Complement {n.x > c} occupies the circular segment above
                // the chord at signed distance c.
                let seg = r * r * (c / r).acos() - c * (r * r - c * c).sqrt();
                Ok(LocalQuantities {
                    perimeter: 2.0 * (r * r - c * c).sqrt(),
                    measure_set: area - seg,
                    measure_complement: seg,
                })
            }
            ShapeKind::Cone2D {
                apex,
                opening,
                complement,
                ..
            } => {
                if apex != &[0.0, 0.0] {
                    return Err(FracError::UnsupportedShape);
                }
                let sector = 0.5 * opening * r * r;
                let area = PI * r * r;
                let (set, comp) = if *complement {
                    (area - sector, sector)
                } else {
                    (sector, area - sector)
                };
                Ok(LocalQuantities {
                    perimeter: 2.0 * r,
                    measure_set: set,
                    measure_complement: comp,
                })
            }
            ShapeKind::CrossCone => Ok(LocalQuantities {
                perimeter: 4.0 * r,
                measure_set: 0.5 * PI * r * r,
                measure_complement: 0.5 * PI * r * r,
            }),
            ShapeKind::Ball { center, radius } => {
                let d = (center[0] * center[0] + center[1] * center[1]).sqrt();
                let rr = *radius;
                let area = PI * r * r;
                if d + rr <= r {
                    return Ok(LocalQuantities {
                        perimeter: TAU * rr,
                        measure_set: PI * rr * rr,
                        measure_complement: area - PI * rr * rr,
                    });
                }
                if d >= r + rr {
                    return Ok(LocalQuantities {
                        perimeter: 0.0,
                        measure_set: 0.0,
                        measure_complement: area,
                    });
                }
                if rr >= d + r {
                    return Ok(LocalQuantities {
                        perimeter: 0.0,
                        measure_set: area,
                        measure_complement: 0.0,
                    });
                }
                let alpha = ((d * d + rr * rr - r * r) / (2.0 * d * rr)).clamp(-1.0, 1.0).acos();
                let beta = ((d * d + r * r - rr * rr) / (2.0 * d * r)).clamp(-1.0, 1.0).acos();
                let kernel = ((-d + r + rr) * (d + r - rr) * (d - r + rr) * (d + r + rr))
                    .max(0.0)
                    .sqrt();
                let lens = rr * rr * alpha + r * r * beta - 0.5 * kernel;
                Ok(LocalQuantities {
                    perimeter: 2.0 * rr * alpha,
                    measure_set: lens,
                    measure_complement: area - lens,
                })
            }
            _ => Err(FracError::UnsupportedShape),
        }
    }

    /// Arc of directions of the circle of radius `rho` about `a` that lie
    /// inside the set. Exact for all kinds except the oscillating cone,
    /// where the annulus is chosen by `rho` as if `a` were the origin.
    pub fn arc_set(&self, a: Point, rho: f64) -> ArcSet {
        match &self.kind {
            ShapeKind::HalfPlane { normal, offset } => {
                arcs::halfplane_gt(a, rho, *normal, *offset).complement()
            }
            ShapeKind::Cone2D {
                apex,
                bisector,
                opening,
                complement,
            } => {
                let s = arcs::sector(a, rho, *apex, *bisector, *opening);
                if *complement {
                    s.complement()
                } else {
                    s
                }
            }
            ShapeKind::CrossCone => {
                let q1 = arcs::sector(a, rho, [0.0, 0.0], PI / 4.0, FRAC_PI_2);
                let q3 = arcs::sector(a, rho, [0.0, 0.0], -3.0 * PI / 4.0, FRAC_PI_2);
                q1.union(&q3)
            }
            ShapeKind::CrossConePlusSquare { side } => {
                let cross = ShapeSpec::cross_cone().arc_set(a, rho);
                let sq = rect_arcs(a, rho, &Rect::new([-side, 0.0], [0.0, *side]));
                cross.union(&sq)
            }
            ShapeKind::Ball { center, radius } => arcs::disc(a, rho, *center, *radius),
            ShapeKind::RectUnion { boxes } => {
                let mut acc = ArcSet::empty();
                for b in boxes {
                    acc = acc.union(&rect_arcs(a, rho, b));
                }
                acc
            }
            ShapeKind::OscillatingCone { .. } => {
                let opening = self.oscillating_opening(rho);
                arcs::sector(a, rho, [0.0, 0.0], 0.0, opening)
            }
        }
    }

    /// Angular measure of the set on the sphere of radius `rho` about `a`:
    /// radians for `dim == 2`, the number of member endpoints (0, 1, or 2)
    /// for `dim == 1`.
    pub fn angular_measure(&self, a: Point, rho: f64) -> f64 {
        if self.dim == 1 {
            let mut m = 0.0;
            if self.membership([a[0] - rho, 0.0]) {
                m += 1.0;
            }
            if self.membership([a[0] + rho, 0.0]) {
                m += 1.0;
            }
            m
        } else {
            self.arc_set(a, rho).measure()
        }
    }

    /// Radii where the angular profile is non-smooth; quadratures split here.
    fn profile_breaks(&self, a: Point) -> Vec<f64> {
        match &self.kind {
            ShapeKind::OscillatingCone { radii, .. } => radii.clone(),
            ShapeKind::Ball { center, radius } => {
                let d = ((center[0] - a[0]).powi(2) + (center[1] - a[1]).powi(2)).sqrt();
                vec![(d - radius).abs(), d + radius]
            }
            ShapeKind::HalfPlane { normal, offset } => {
                let v = if self.dim == 1 {
                    normal[0] * a[0]
                } else {
                    normal[0] * a[0] + normal[1] * a[1]
                };
                vec![(offset - v).abs()]
            }
            _ => Vec::new(),
        }
    }

    /// `tail_interaction(a, r, s)` is the exact far-field interaction
    /// `int_{|y - a| > r} chi_E(y) |y - a|^(-(n+2s)) dy`.
    pub fn tail_interaction(&self, a: Point, r: f64, s: f64) -> f64 {
        if let Some(rb) = self.bounding_radius() {
            let d = (a[0] * a[0] + a[1] * a[1]).sqrt();
            if r >= d + rb {
                return 0.0;
            }
        }
        let g = |rho: f64| self.angular_measure(a, rho);
        decaying_radial_integral(r, 2.0 * s, &g, &self.profile_breaks(a))
    }

    /// Parses the CLI shape grammar, e.g. `halfplane:ny=1,c=0`,
    /// `cone:opening=1.0472`, `crosscone`, `crosscone+sq:l=0.0625`,
    /// `ball:r=0.5`, `rects:0,0,1,1;2,0,3,1`, `osccone`.
    pub fn parse(text: &str, dim: usize) -> Result<ShapeSpec> {
        let (kind, body) = match text.split_once(':') {
            Some((k, b)) => (k.trim(), b.trim()),
            None => (text.trim(), ""),
        };
        let kv = |body: &str| -> Result<Vec<(String, f64)>> {
            if body.is_empty() {
                return Ok(Vec::new());
            }
            body.split(',')
                .map(|pair| {
                    let (k, v) = pair
                        .split_once('=')
                        .ok_or_else(|| FracError::Parse(format!("expected key=value, got `{pair}`")))?;
                    let num = parse_num_list(v)?;
                    if num.len() != 1 {
                        return Err(FracError::Parse(format!("key `{k}` expects one value")));
                    }
                    Ok((k.trim().to_string(), num[0]))
                })
                .collect()
        };
        let get = |pairs: &[(String, f64)], key: &str| -> Option<f64> {
            pairs.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
        };
        let spec = match kind {
            "halfplane" => {
                let pairs = kv(body)?;
                if dim == 1 {
                    let n = get(&pairs, "nx").unwrap_or(1.0);
                    ShapeSpec::half_line_1d(n, get(&pairs, "c").unwrap_or(0.0))
                } else {
                    let nx = get(&pairs, "nx").unwrap_or(0.0);
                    let ny = get(&pairs, "ny").unwrap_or(if get(&pairs, "nx").is_none() {
                        1.0
                    } else {
                        0.0
                    });
                    if nx == 0.0 && ny == 0.0 {
                        return Err(FracError::Parse("half-plane normal is zero".into()));
                    }
                    ShapeSpec::half_plane([nx, ny], get(&pairs, "c").unwrap_or(0.0))
                }
            }
            "cone" => {
                let pairs = kv(body)?;
                let opening = get(&pairs, "opening")
                    .ok_or_else(|| FracError::Parse("cone requires opening=".into()))?;
                if !(opening > 0.0 && opening < TAU) {
                    return Err(FracError::Parse(format!(
                        "cone opening {opening} outside (0, 2pi)"
                    )));
                }
                ShapeSpec::cone_full(
                    [0.0, 0.0],
                    get(&pairs, "bisector").unwrap_or(0.0),
                    opening,
                    get(&pairs, "complement").unwrap_or(0.0) != 0.0,
                )
            }
            "crosscone" => ShapeSpec::cross_cone(),
            "crosscone+sq" => {
                let pairs = kv(body)?;
                let side = get(&pairs, "l")
                    .ok_or_else(|| FracError::Parse("crosscone+sq requires l=".into()))?;
                if side.is_nan() || side <= 0.0 {
                    return Err(FracError::Parse(format!("square side {side} must be positive")));
                }
                ShapeSpec::cross_cone_plus_square(side)
            }
            "ball" => {
                let pairs = kv(body)?;
                let r = get(&pairs, "r")
                    .ok_or_else(|| FracError::Parse("ball requires r=".into()))?;
                if r.is_nan() || r <= 0.0 {
                    return Err(FracError::Parse(format!("ball radius {r} must be positive")));
                }
                ShapeSpec::ball(
                    [get(&pairs, "cx").unwrap_or(0.0), get(&pairs, "cy").unwrap_or(0.0)],
                    r,
                )
            }
            "rects" => {
                let mut boxes = Vec::new();
                for chunk in body.split(';') {
                    let nums = parse_num_list(chunk)?;
                    if nums.len() != 4 {
                        return Err(FracError::Parse(
                            "each rect needs x0,y0,x1,y1".into(),
                        ));
                    }
                    if nums[0] >= nums[2] || nums[1] >= nums[3] {
                        return Err(FracError::Parse("rect corners must be ordered".into()));
                    }
                    boxes.push(Rect::new([nums[0], nums[1]], [nums[2], nums[3]]));
                }
                ShapeSpec::rect_union(boxes)
            }
            "osccone" => {
                let mut radii = OSC_DEFAULT_RADII.to_vec();
                let mut small = OSC_DEFAULT_SMALL;
                let mut big = OSC_DEFAULT_BIG;
                if !body.is_empty() {
                    for pair in body.split(',') {
                        let (k, v) = pair.split_once('=').ok_or_else(|| {
                            FracError::Parse(format!("expected key=value, got `{pair}`"))
                        })?;
                        match k.trim() {
                            "radii" => {
                                radii = v
                                    .split('|')
                                    .map(|t| {
                                        t.trim().parse::<f64>().map_err(|_| {
                                            FracError::Parse(format!("bad radius `{t}`"))
                                        })
                                    })
                                    .collect::<Result<Vec<_>>>()?;
                                if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
                                    return Err(FracError::Parse(
                                        "radii must be strictly increasing".into(),
                                    ));
                                }
                            }
                            "small" => small = parse_num_list(v)?[0],
                            "big" => big = parse_num_list(v)?[0],
                            other => {
                                return Err(FracError::Parse(format!("unknown key `{other}`")))
                            }
                        }
                    }
                }
                ShapeSpec::oscillating_cone(radii, small, big)
            }
            other => return Err(FracError::Parse(format!("unknown shape `{other}`"))),
        };
        Ok(spec.with_dim(dim))
    }

    /// Canonical grammar string (round-trips through `parse`).
    pub fn grammar(&self) -> String {
        match &self.kind {
            ShapeKind::HalfPlane { normal, offset } => {
                format!("halfplane:nx={},ny={},c={}", normal[0], normal[1], offset)
            }
            ShapeKind::Cone2D {
                bisector,
                opening,
                complement,
                ..
            } => format!(
                "cone:opening={opening},bisector={bisector},complement={}",
                u8::from(*complement)
            ),
            ShapeKind::CrossCone => "crosscone".to_string(),
            ShapeKind::CrossConePlusSquare { side } => format!("crosscone+sq:l={side}"),
            ShapeKind::Ball { center, radius } => {
                format!("ball:r={radius},cx={},cy={}", center[0], center[1])
            }
            ShapeKind::RectUnion { boxes } => {
                let body: Vec<String> = boxes
                    .iter()
                    .map(|b| format!("{},{},{},{}", b.lo[0], b.lo[1], b.hi[0], b.hi[1]))
                    .collect();
                format!("rects:{}", body.join(";"))
            }
            ShapeKind::OscillatingCone { radii, small, big } => {
                let rs: Vec<String> = radii.iter().map(|r| r.to_string()).collect();
                format!("osccone:radii={},small={small},big={big}", rs.join("|"))
            }
        }
    }
}

/// Membership evaluator with precomputed trigonometry; semantically
/// identical to `ShapeSpec::membership`, cheaper inside hot ring scans.
pub struct FastMembership<'a> {
    spec: &'a ShapeSpec,
    kind: FastKind,
}

enum FastKind {
    Generic,
    /// Sector as an intersection of two half-planes through the apex;
    /// `narrow` selects the direct test, otherwise the complement of the
    /// opposite sector is used.
    Sector {
        apex: Point,
        n_lo: Point,
        n_hi: Point,
        narrow: bool,
        complement: bool,
    },
    /// Oscillating cone via `x > rho cos(opening/2)`.
    Oscillating { cos_small: f64, cos_big: f64 },
}

impl<'a> FastMembership<'a> {
    pub fn new(spec: &'a ShapeSpec) -> Self {
        let kind = match &spec.kind {
            ShapeKind::Cone2D {
                apex,
                bisector,
                opening,
                complement,
            } => {
                let (bis, open, narrow, comp) = if *opening <= PI {
                    (*bisector, *opening, true, *complement)
                } else {
                    (*bisector + PI, TAU - *opening, false, *complement)
                };
                let lo = bis - 0.5 * open;
                let hi = bis + 0.5 * open;
                FastKind::Sector {
                    apex: *apex,
                    n_lo: [-(lo.sin()), lo.cos()],
                    n_hi: [hi.sin(), -(hi.cos())],
                    narrow,
                    complement: comp,
                }
            }
            ShapeKind::OscillatingCone { small, big, .. } => FastKind::Oscillating {
                cos_small: (0.5 * small).cos(),
                cos_big: (0.5 * big).cos(),
            },
            _ => FastKind::Generic,
        };
        Self { spec, kind }
    }

    #[inline]
    pub fn test(&self, p: Point) -> bool {
        match &self.kind {
            FastKind::Generic => self.spec.membership(p),
            FastKind::Sector {
                apex,
                n_lo,
                n_hi,
                narrow,
                complement,
            } => {
                let vx = p[0] - apex[0];
                let vy = p[1] - apex[1];
                let inside = vx * n_lo[0] + vy * n_lo[1] > 0.0
                    && vx * n_hi[0] + vy * n_hi[1] > 0.0;
                (inside == *narrow) != *complement
            }
            FastKind::Oscillating { cos_small, cos_big } => {
                let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
                if rho == 0.0 {
                    return false;
                }
                let cos_half = match &self.spec.kind {
                    ShapeKind::OscillatingCone { radii, .. } => {
                        if radii.partition_point(|&rk| rk < rho) % 2 == 0 {
                            *cos_small
                        } else {
                            *cos_big
                        }
                    }
                    _ => unreachable!(),
                };
                p[0] > rho * cos_half
            }
        }
    }
}

/// True when `spec` is bounded and entirely inside `window`.
pub fn shape_empty_beyond_window(spec: &ShapeSpec, window: &Window) -> bool {
    match spec.bounding_radius() {
        Some(rb) => {
            let fits_x = window.lo[0] <= -rb && window.hi[0] >= rb;
            if window.dim == 1 {
                fits_x
            } else {
                fits_x && window.lo[1] <= -rb && window.hi[1] >= rb
            }
        }
        None => false,
    }
}

fn rect_arcs(a: Point, rho: f64, rect: &Rect) -> ArcSet {
    arcs::halfplane_gt(a, rho, [1.0, 0.0], rect.lo[0])
        .intersect(&arcs::halfplane_gt(a, rho, [-1.0, 0.0], -rect.hi[0]))
        .intersect(&arcs::halfplane_gt(a, rho, [0.0, 1.0], rect.lo[1]))
        .intersect(&arcs::halfplane_gt(a, rho, [0.0, -1.0], -rect.hi[1]))
}

fn parse_num_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| FracError::Parse(format!("bad number `{t}`")))
        })
        .collect()
}

/// A binary occupancy mask over a window, agreeing with an analytic
/// exterior outside of it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSet {
    pub window: Window,
    pub mask: Vec<bool>,
    pub exterior: ShapeSpec,
}

/// Samples `spec` at every cell center of `window`.
pub fn rasterize(spec: &ShapeSpec, window: &Window) -> GridSet {
    let mut mask = vec![false; window.cell_count()];
    for iy in 0..window.ny {
        for ix in 0..window.nx {
            mask[window.index(ix, iy)] = spec.membership(window.center(ix, iy));
        }
    }
    GridSet {
        window: window.clone(),
        mask,
        exterior: spec.clone(),
    }
}

impl GridSet {
    pub fn from_mask(window: Window, mask: Vec<bool>, exterior: ShapeSpec) -> Self {
        assert_eq!(mask.len(), window.cell_count());
        Self {
            window,
            mask,
            exterior,
        }
    }

    /// Membership anywhere: the mask inside the window, the analytic
    /// exterior everywhere else.
    pub fn member_global(&self, p: Point) -> bool {
        match self.window.cell_of(p) {
            Some((ix, iy)) => self.mask[self.window.index(ix, iy)],
            None => self.exterior.membership(p),
        }
    }

    /// Grid measure of the masked cells, `h^n * popcount`.
    pub fn measure(&self) -> f64 {
        self.window.cell_measure() * self.mask.iter().filter(|&&b| b).count() as f64
    }

    /// True when the exterior shape vanishes outside the window, so all
    /// far-field occupancy is zero.
    pub fn exterior_empty_beyond_window(&self) -> bool {
        shape_empty_beyond_window(&self.exterior, &self.window)
    }

    pub fn complemented(&self) -> Option<GridSet> {
        let exterior = self.exterior.complemented()?;
        Some(GridSet {
            window: self.window.clone(),
            mask: self.mask.iter().map(|b| !b).collect(),
            exterior,
        })
    }

    /// Plain-text PGM (P2, maxval 1), rows from the top of the window.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n1\n", self.window.nx, self.window.ny);
        for iy in (0..self.window.ny).rev() {
            let row: Vec<&str> = (0..self.window.nx)
                .map(|ix| {
                    if self.mask[self.window.index(ix, iy)] {
                        "1"
                    } else {
                        "0"
                    }
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}
