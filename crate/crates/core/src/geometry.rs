//! Planar geometry primitives shared by the map, trajectory and validation code.
//!
//! All coordinates are meters in the world frame (X forward, Y left).

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Tolerance used for on-segment and touching tests.
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Z component of the 3D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Unit vector pointing along `heading`.
    pub fn from_heading(heading: f64) -> Self {
        Self::new(heading.cos(), heading.sin())
    }

    /// Rotates counter-clockwise by `angle` radians.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Wraps an angle to (−π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Wraps an angle to [−π, π), the storage convention for headings.
pub fn normalize_heading(angle: f64) -> f64 {
    let a = (angle + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if a >= PI {
        a - 2.0 * PI
    } else {
        a
    }
}

/// Signed heading difference `a − b` wrapped to (−π, π].
pub fn heading_difference(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// Distance from `p` to the segment `a`–`b` together with the projection parameter in [0, 1].
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= 0.0 {
        return (p.distance(a), 0.0);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (p.distance(a + ab * t), t)
}

/// Result of intersecting two closed segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentIntersection {
    None,
    Point(Point),
    /// Collinear overlap, reported by its endpoints.
    Overlap(Point, Point),
}

/// Intersects the closed segments `p1`–`p2` and `q1`–`q2`.
pub fn segment_intersection(p1: Point, p2: Point, q1: Point, q2: Point) -> SegmentIntersection {
    let r = p2 - p1;
    let s = q2 - q1;
    let denom = r.cross(s);
    let qp = q1 - p1;
    let scale = r.norm().max(s.norm()).max(1.0);
    if denom.abs() <= GEOM_EPS * scale * scale {
        // Parallel. Only collinear segments can still meet.
        if qp.cross(r).abs() > GEOM_EPS * scale * scale {
            return SegmentIntersection::None;
        }
        let rr = r.dot(r);
        if rr <= 0.0 {
            return if point_segment_distance(p1, q1, q2).0 <= GEOM_EPS * scale {
                SegmentIntersection::Point(p1)
            } else {
                SegmentIntersection::None
            };
        }
        let t0 = qp.dot(r) / rr;
        let t1 = t0 + s.dot(r) / rr;
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let lo = lo.max(0.0);
        let hi = hi.min(1.0);
        if lo > hi + GEOM_EPS {
            return SegmentIntersection::None;
        }
        let a = p1 + r * lo;
        let b = p1 + r * hi;
        if a.distance(b) <= GEOM_EPS * scale {
            return SegmentIntersection::Point(a);
        }
        return SegmentIntersection::Overlap(a, b);
    }
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    let tol = GEOM_EPS;
    if (-tol..=1.0 + tol).contains(&t) && (-tol..=1.0 + tol).contains(&u) {
        SegmentIntersection::Point(p1 + r * t.clamp(0.0, 1.0))
    } else {
        SegmentIntersection::None
    }
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    let scale = (b - a).norm().max(1.0);
    point_segment_distance(p, a, b).0 <= GEOM_EPS * scale
}

/// Even-odd point-in-polygon, boundary inclusive. The ring is implicitly closed.
pub fn point_in_polygon(p: Point, ring: &[Point]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if on_segment(p, a, b) {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Distance from `p` to the polygon boundary, zero when inside.
pub fn distance_to_polygon(p: Point, ring: &[Point]) -> f64 {
    if point_in_polygon(p, ring) {
        return 0.0;
    }
    let n = ring.len();
    (0..n)
        .map(|i| point_segment_distance(p, ring[i], ring[(i + 1) % n]).0)
        .fold(f64::INFINITY, f64::min)
}

/// True when two non-adjacent edges of the ring intersect.
pub fn is_self_intersecting(ring: &[Point]) -> bool {
    let n = ring.len();
    if n < 4 {
        return false;
    }
    for i in 0..n {
        let (a1, a2) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (b1, b2) = (ring[j], ring[(j + 1) % n]);
            if segment_intersection(a1, a2, b1, b2) != SegmentIntersection::None {
                return true;
            }
        }
    }
    false
}

/// Convex hull by monotone chain, counter-clockwise, without collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.distance(*b) <= GEOM_EPS);
    if pts.len() <= 2 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Vertices used to approximate a disc when dilating polygons.
const DILATION_SEGMENTS: usize = 32;

/// Convex hull of `points` grown outward by `radius` (Minkowski sum with a
/// circumscribed regular polygon, so the true dilation is always contained).
pub fn dilated_hull(points: &[Point], radius: f64) -> Vec<Point> {
    let r = radius / (PI / DILATION_SEGMENTS as f64).cos();
    let mut cloud = Vec::with_capacity(points.len() * DILATION_SEGMENTS);
    for &p in points {
        for k in 0..DILATION_SEGMENTS {
            let a = 2.0 * PI * k as f64 / DILATION_SEGMENTS as f64;
            cloud.push(p + Point::from_heading(a) * r);
        }
    }
    convex_hull(&cloud)
}

/// Arithmetic mean of a non-empty point set.
pub fn mean_point(points: &[Point]) -> Point {
    let n = points.len().max(1) as f64;
    let sum = points.iter().fold(Point::default(), |acc, &p| acc + p);
    sum * (1.0 / n)
}
