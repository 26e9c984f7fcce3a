//! Convex shapes and first-contact computations.
//!
//! Shapes are star-shaped descriptions around the origin: a ball of given
//! radius, or a strictly convex counterclockwise polygon (planar only). A
//! grain's body at growth `r` is `center + scale * shape` with `scale = r`,
//! so every pairwise question (separation, contact radius) reduces to a
//! question about the origin and a Minkowski difference of two convex sets.
//! In the plane that difference is built exactly by the sorted-edge merge,
//! with an optional rim radius for ball contributions; in dimension 3 only
//! balls are supported and everything is closed-form.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::float::sqrt;

/// Absolute tolerance on the growth parameter in the contact-radius bisection.
pub const CONTACT_RADIUS_TOL: f64 = 1e-10;
/// Iteration cap for the contact-radius bisection.
pub const CONTACT_RADIUS_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeometryError {
    ZeroDirection,
    DimensionMismatch { expected: usize, got: usize },
    InvalidShape(&'static str),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::ZeroDirection => write!(f, "direction must be nonzero"),
            GeometryError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            GeometryError::InvalidShape(msg) => write!(f, "invalid shape: {msg}"),
        }
    }
}

impl core::error::Error for GeometryError {}

/// A convex body containing the origin in its interior.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "lowercase"))]
pub enum Shape {
    Ball { radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Shape {
    pub fn ball(radius: f64) -> Result<Self, GeometryError> {
        let s = Shape::Ball { radius };
        s.validate()?;
        Ok(s)
    }

    /// Builds a polygon from counterclockwise vertices. The origin must lie
    /// strictly inside and consecutive edge turns must be strictly convex.
    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        let s = Shape::Polygon { vertices };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            Shape::Ball { radius } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(GeometryError::InvalidShape("ball radius must be positive"));
                }
            }
            Shape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(GeometryError::InvalidShape("polygon needs at least 3 vertices"));
                }
                if vertices.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(GeometryError::InvalidShape("polygon vertex is not finite"));
                }
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    if cross2(sub2(b, a), sub2(c, b)) <= 0.0 {
                        return Err(GeometryError::InvalidShape(
                            "polygon must be strictly convex and counterclockwise",
                        ));
                    }
                    // Origin strictly inside: strictly left of every edge.
                    if cross2(sub2(b, a), neg2(a)) <= 0.0 {
                        return Err(GeometryError::InvalidShape(
                            "polygon must contain the origin in its interior",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, Shape::Ball { .. })
    }

    /// Balls are strictly convex bodies; polygons have flat edges, so the
    /// uniqueness statements tied to strict convexity are not guaranteed.
    pub fn is_strictly_convex(&self) -> bool {
        self.is_ball()
    }

    /// Whether the shape can live in ambient dimension `dim`.
    pub fn dimension_ok(&self, dim: usize) -> bool {
        match self {
            Shape::Ball { .. } => dim == 2 || dim == 3,
            Shape::Polygon { .. } => dim == 2,
        }
    }

    /// Radius of the smallest origin-centered ball containing the shape.
    pub fn circumradius(&self) -> f64 {
        match self {
            Shape::Ball { radius } => *radius,
            Shape::Polygon { vertices } => {
                let mut best = 0.0_f64;
                for v in vertices {
                    best = best.max(norm2(*v));
                }
                best
            }
        }
    }

    /// Radius of the largest origin-centered ball contained in the shape.
    pub fn inradius(&self) -> f64 {
        match self {
            Shape::Ball { radius } => *radius,
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    // Distance from the origin to the supporting line of (a, b).
                    let d = cross2(sub2(b, a), neg2(a)) / norm2(sub2(b, a));
                    best = best.min(d);
                }
                best
            }
        }
    }

    /// Support value `max{<p, u> : p in shape}` for a nonzero direction `u`
    /// (not necessarily unit length).
    pub fn support(&self, direction: &[f64]) -> Result<f64, GeometryError> {
        let n = norm(direction);
        if n == 0.0 {
            return Err(GeometryError::ZeroDirection);
        }
        if !self.dimension_ok(direction.len()) {
            return Err(GeometryError::DimensionMismatch { expected: 2, got: direction.len() });
        }
        match self {
            Shape::Ball { radius } => Ok(radius * n),
            Shape::Polygon { vertices } => {
                let u = [direction[0], direction[1]];
                let mut best = f64::NEG_INFINITY;
                for v in vertices {
                    best = best.max(dot2(*v, u));
                }
                Ok(best)
            }
        }
    }

    /// Volume of the shape scaled by `scale` in ambient dimension `dim`.
    pub fn volume(&self, dim: usize, scale: f64) -> f64 {
        assert!(self.dimension_ok(dim), "shape not valid in dimension {dim}");
        assert!(scale >= 0.0);
        match self {
            Shape::Ball { radius } => {
                let r = radius * scale;
                match dim {
                    2 => core::f64::consts::PI * r * r,
                    _ => 4.0 / 3.0 * core::f64::consts::PI * r * r * r,
                }
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut twice = 0.0;
                for i in 0..n {
                    twice += cross2(vertices[i], vertices[(i + 1) % n]);
                }
                0.5 * twice * scale * scale
            }
        }
    }

    /// Minkowski functional: the smallest `t >= 0` with `point` in `t * shape`.
    pub fn gauge(&self, point: &[f64]) -> f64 {
        assert!(self.dimension_ok(point.len()), "shape not valid in dimension {}", point.len());
        match self {
            Shape::Ball { radius } => norm(point) / radius,
            Shape::Polygon { vertices } => {
                let p = [point[0], point[1]];
                let n = vertices.len();
                let mut best = 0.0_f64;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let normal = rot_cw(sub2(b, a));
                    // <a, normal> > 0 because the origin is interior.
                    best = best.max(dot2(p, normal) / dot2(a, normal));
                }
                best
            }
        }
    }
}

/// A shape placed at a center and scaled: `center + scale * shape`.
/// `scale == 0` degenerates to the single point `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedBody {
    pub center: Vec<f64>,
    pub scale: f64,
    pub shape: Shape,
}

impl PlacedBody {
    pub fn new(center: Vec<f64>, scale: f64, shape: Shape) -> Result<Self, GeometryError> {
        if center.iter().any(|c| !c.is_finite()) || !(scale >= 0.0) || !scale.is_finite() {
            return Err(GeometryError::InvalidShape("placed body needs finite center and scale >= 0"));
        }
        if !shape.dimension_ok(center.len()) {
            return Err(GeometryError::DimensionMismatch { expected: 2, got: center.len() });
        }
        shape.validate()?;
        Ok(PlacedBody { center, scale, shape })
    }

    /// The degenerate single-point body.
    pub fn point(center: Vec<f64>) -> Self {
        PlacedBody { center, scale: 0.0, shape: Shape::Ball { radius: 1.0 } }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn circumradius(&self) -> f64 {
        self.scale * self.shape.circumradius()
    }

    pub fn support(&self, direction: &[f64]) -> Result<f64, GeometryError> {
        Ok(dot(&self.center, direction) + self.scale * self.shape.support(direction)?)
    }

    /// Smallest and largest coordinate of the body along `axis`.
    pub fn extent(&self, axis: usize) -> (f64, f64) {
        let mut dir = vec![0.0; self.dim()];
        dir[axis] = 1.0;
        let hi = self.support(&dir).expect("axis direction is valid");
        dir[axis] = -1.0;
        let lo = -self.support(&dir).expect("axis direction is valid");
        (lo, hi)
    }

    /// Whether `p` lies within distance `tol` of the body.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        let probe = PlacedBody::point(p.to_vec());
        match signed_margin(self, &probe) {
            Ok(m) => m <= tol,
            Err(_) => false,
        }
    }
}

/// Result of a separation query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation {
    /// Euclidean distance between the bodies, zero iff they intersect.
    pub distance: f64,
    /// Whether the interiors overlap (touching boundaries do not count).
    pub interiors_overlap: bool,
}

/// Euclidean distance between two bodies plus an interior-overlap flag.
pub fn separation(a: &PlacedBody, b: &PlacedBody) -> Result<Separation, GeometryError> {
    let m = signed_margin(a, b)?;
    Ok(Separation { distance: m.max(0.0), interiors_overlap: m < 0.0 })
}

/// Signed margin between two bodies: their distance when positive, minus the
/// penetration depth when negative, zero when boundaries touch exactly.
pub fn signed_margin(a: &PlacedBody, b: &PlacedBody) -> Result<f64, GeometryError> {
    check_dims(a, b)?;
    if let (Some((ca, ra)), Some((cb, rb))) = (as_ball(a), as_ball(b)) {
        return Ok(dist(ca, cb) - ra - rb);
    }
    let cso = cso_difference(&resolve2(a)?, &resolve2(b)?, 1.0);
    Ok(cso_signed_distance(&cso))
}

/// Smallest growth `r >= 0` at which `a + r*grow_a` meets `b + r*grow_b`.
///
/// A `None` growth shape means the body does not grow. Returns
/// `f64::INFINITY` when neither side grows and the bodies are disjoint.
pub fn contact_radius(
    a: &PlacedBody,
    grow_a: Option<&Shape>,
    b: &PlacedBody,
    grow_b: Option<&Shape>,
) -> Result<f64, GeometryError> {
    check_dims(a, b)?;
    for g in [grow_a, grow_b].into_iter().flatten() {
        if !g.dimension_ok(a.dim()) {
            return Err(GeometryError::DimensionMismatch { expected: a.dim(), got: 2 });
        }
    }
    let ball_growth = |g: Option<&Shape>| -> Option<f64> {
        match g {
            None => Some(0.0),
            Some(Shape::Ball { radius }) => Some(*radius),
            Some(Shape::Polygon { .. }) => None,
        }
    };
    if let (Some((ca, ra)), Some((cb, rb)), Some(ga), Some(gb)) =
        (as_ball(a), as_ball(b), ball_growth(grow_a), ball_growth(grow_b))
    {
        // Fully rotation-symmetric: the gap closes linearly.
        let gap = dist(ca, cb) - ra - rb;
        if gap <= 0.0 {
            return Ok(0.0);
        }
        if ga + gb == 0.0 {
            return Ok(f64::INFINITY);
        }
        return Ok(gap / (ga + gb));
    }
    contact_radius_bisect(a, grow_a, b, grow_b)
}

/// Generic contact radius via bisection on the signed margin of the
/// Minkowski difference. Also exercised on balls by tests to pin the closed
/// forms and the iterative path together.
fn contact_radius_bisect(
    a: &PlacedBody,
    grow_a: Option<&Shape>,
    b: &PlacedBody,
    grow_b: Option<&Shape>,
) -> Result<f64, GeometryError> {
    let base = cso_difference(&resolve2(a)?, &resolve2(b)?, 1.0);
    let sd0 = cso_signed_distance(&base);
    if sd0 <= 0.0 {
        return Ok(0.0);
    }
    let rate = grow_a.map_or(0.0, Shape::inradius) + grow_b.map_or(0.0, Shape::inradius);
    if rate == 0.0 {
        return Ok(f64::INFINITY);
    }
    let origin = PlacedBody::point(vec![0.0; a.dim()]);
    let resolve_growth = |g: Option<&Shape>| -> Result<Cso, GeometryError> {
        match g {
            None => resolve2(&origin),
            Some(s) => resolve2(&PlacedBody { center: vec![0.0; 2], scale: 1.0, shape: s.clone() }),
        }
    };
    let grow = cso_difference(&resolve_growth(grow_a)?, &resolve_growth(grow_b)?, 1.0);
    let margin = |r: f64| -> f64 {
        let scaled = Cso { pts: scale_pts(&grow.pts, r), rim: grow.rim * r };
        let combined = Cso {
            pts: minkowski_sum(&base.pts, &scaled.pts),
            rim: base.rim + scaled.rim,
        };
        cso_signed_distance(&combined)
    };
    // The growth set contains a ball of radius `rate`, so the margin shrinks
    // at least linearly and sd0 / rate brackets the root.
    let mut hi = sd0 / rate * 1.000_001 + 1e-12;
    let mut guard = 0;
    while margin(hi) > 0.0 {
        hi *= 2.0;
        guard += 1;
        assert!(guard < 64, "contact radius bracket failed to close");
    }
    let mut lo = 0.0;
    for _ in 0..CONTACT_RADIUS_MAX_ITER {
        if hi - lo <= CONTACT_RADIUS_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if margin(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minkowski sum of two convex counterclockwise polygons by the sorted edge
/// merge. Single-point inputs act as translations. The output starts at the
/// combined lowest vertex and may contain collinear runs.
pub fn minkowski_sum(p: &[[f64; 2]], q: &[[f64; 2]]) -> Vec<[f64; 2]> {
    if p.len() == 1 {
        return q.iter().map(|v| add2(*v, p[0])).collect();
    }
    if q.len() == 1 {
        return p.iter().map(|v| add2(*v, q[0])).collect();
    }
    let mut p = reorder_lowest_first(p);
    let mut q = reorder_lowest_first(q);
    let np = p.len();
    let nq = q.len();
    p.push(p[0]);
    p.push(p[1]);
    q.push(q[0]);
    q.push(q[1]);
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(np + nq);
    let (mut i, mut j) = (0usize, 0usize);
    while i < np || j < nq {
        let v = add2(p[i], q[j]);
        if out.last() != Some(&v) {
            out.push(v);
        }
        let turn = cross2(sub2(p[i + 1], p[i]), sub2(q[j + 1], q[j]));
        if turn >= 0.0 && i < np {
            i += 1;
        }
        if turn <= 0.0 && j < nq {
            j += 1;
        }
    }
    out
}

// A convex set in the plane: polygon vertices thickened by a rim radius.
// A single vertex with a rim is a disc; rim zero is a bare polygon.
struct Cso {
    pts: Vec<[f64; 2]>,
    rim: f64,
}

fn resolve2(body: &PlacedBody) -> Result<Cso, GeometryError> {
    if body.dim() != 2 {
        return Err(GeometryError::InvalidShape("polygons and mixed pairs are planar"));
    }
    let c = [body.center[0], body.center[1]];
    Ok(match &body.shape {
        Shape::Ball { radius } => Cso { pts: vec![c], rim: body.scale * radius },
        Shape::Polygon { vertices } => {
            if body.scale == 0.0 {
                Cso { pts: vec![c], rim: 0.0 }
            } else {
                Cso {
                    pts: vertices.iter().map(|v| add2(c, scale2(*v, body.scale))).collect(),
                    rim: 0.0,
                }
            }
        }
    })
}

// a - scale * b as a Minkowski difference (b is reflected through the origin).
fn cso_difference(a: &Cso, b: &Cso, scale: f64) -> Cso {
    let reflected: Vec<[f64; 2]> = b.pts.iter().map(|v| scale2(neg2(*v), scale)).collect();
    Cso { pts: minkowski_sum(&a.pts, &reflected), rim: a.rim + b.rim * scale }
}

fn cso_signed_distance(c: &Cso) -> f64 {
    origin_signed_distance(&c.pts) - c.rim
}

// Signed Euclidean distance from the origin to a convex CCW polygon:
// positive outside, negative inside, zero on the boundary.
fn origin_signed_distance(pts: &[[f64; 2]]) -> f64 {
    match pts.len() {
        0 => unreachable!("empty polygon"),
        1 => norm2(pts[0]),
        2 => segment_distance(pts[0], pts[1]),
        n => {
            let mut min_seg = f64::INFINITY;
            let mut inside = true;
            for i in 0..n {
                let a = pts[i];
                let b = pts[(i + 1) % n];
                min_seg = min_seg.min(segment_distance(a, b));
                if cross2(sub2(b, a), neg2(a)) <= 0.0 {
                    inside = false;
                }
            }
            if inside {
                -min_seg
            } else {
                min_seg
            }
        }
    }
}

// Distance from the origin to the segment (a, b).
fn segment_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = sub2(b, a);
    let len2 = dot2(ab, ab);
    if len2 == 0.0 {
        return norm2(a);
    }
    let t = (-dot2(a, ab) / len2).clamp(0.0, 1.0);
    norm2(add2(a, scale2(ab, t)))
}

fn reorder_lowest_first(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = pts.to_vec();
    let mut pos = 0;
    for (i, v) in out.iter().enumerate() {
        if (v[1], v[0]) < (out[pos][1], out[pos][0]) {
            pos = i;
        }
    }
    out.rotate_left(pos);
    out
}

fn scale_pts(pts: &[[f64; 2]], s: f64) -> Vec<[f64; 2]> {
    if s == 0.0 {
        return vec![[0.0, 0.0]];
    }
    pts.iter().map(|v| scale2(*v, s)).collect()
}

fn as_ball(body: &PlacedBody) -> Option<(&[f64], f64)> {
    if body.scale == 0.0 {
        return Some((&body.center, 0.0));
    }
    match &body.shape {
        Shape::Ball { radius } => Some((&body.center, body.scale * radius)),
        Shape::Polygon { .. } => None,
    }
}

fn check_dims(a: &PlacedBody, b: &PlacedBody) -> Result<(), GeometryError> {
    if a.dim() != b.dim() {
        return Err(GeometryError::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(())
}

// Small fixed-size vector helpers.

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    s
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    sqrt(dist2(a, b))
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

#[inline]
fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn add2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
fn neg2(a: [f64; 2]) -> [f64; 2] {
    [-a[0], -a[1]]
}

#[inline]
fn scale2(a: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] * s, a[1] * s]
}

// Outward normal of a CCW edge direction.
#[inline]
fn rot_cw(a: [f64; 2]) -> [f64; 2] {
    [a[1], -a[0]]
}

#[inline]
fn norm2(a: [f64; 2]) -> f64 {
    sqrt(dot2(a, a))
}
