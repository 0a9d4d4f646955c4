//! Planar primitives shared by the engines.

mod grid;
mod hex;
mod hit;

pub use grid::GridIndex;
pub use hex::{hex_cell_of, hexagon_contains, HexLattice};
pub use hit::{hit_time, solve_hit, GrowingBranch, HitCandidate, HitOutcome};

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Numeric policy for every geometric decision in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Below this `|sin|` between two directions the 2x2 hit system is singular.
    pub determinant: f64,
    /// Two points closer than this are considered coincident.
    pub coincidence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            determinant: 1e-12,
            coincidence: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Point { x: c, y: s }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Counter-clockwise rotation by `phi`.
    pub fn rotate(self, phi: f64) -> Point {
        let (s, c) = phi.sin_cos();
        Point {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    pub fn lerp(self, o: Point, u: f64) -> Point {
        self + (o - self) * u
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, o: Point) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Axis-aligned box, closed on all sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn new(min: Point, max: Point) -> Self {
        Aabb { min, max }
    }

    pub fn empty() -> Self {
        Aabb {
            min: Point::new(f64::INFINITY, f64::INFINITY),
            max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn of_point(p: Point) -> Self {
        Aabb { min: p, max: p }
    }

    pub fn of_segment(a: Point, b: Point) -> Self {
        Aabb {
            min: Point::new(a.x.min(b.x), a.y.min(b.y)),
            max: Point::new(a.x.max(b.x), a.y.max(b.y)),
        }
    }

    pub fn of_points<I: IntoIterator<Item = Point>>(pts: I) -> Self {
        let mut b = Aabb::empty();
        for p in pts {
            b.include(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y
    }

    pub fn include(&mut self, p: Point) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: Point::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Point::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }

    pub fn dilate(&self, r: f64) -> Aabb {
        Aabb {
            min: Point::new(self.min.x - r, self.min.y - r),
            max: Point::new(self.max.x + r, self.max.y + r),
        }
    }

    pub fn overlaps(&self, o: &Aabb) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }
}

/// Twice the signed area of triangle `abc`; positive when counter-clockwise.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 == 0.0 {
        return p.dist(a);
    }
    let u = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * u)
}

/// Proper or touching intersection of closed segments `[p0,p1]` and `[q0,q1]`,
/// computed from orientation signs. Collinear overlaps return `None`.
pub fn segment_intersection(p0: Point, p1: Point, q0: Point, q1: Point) -> Option<Point> {
    let d1 = orient(q0, q1, p0);
    let d2 = orient(q0, q1, p1);
    let d3 = orient(p0, p1, q0);
    let d4 = orient(p0, p1, q1);
    if (d1 > 0.0 && d2 > 0.0) || (d1 < 0.0 && d2 < 0.0) {
        return None;
    }
    if (d3 > 0.0 && d4 > 0.0) || (d3 < 0.0 && d4 < 0.0) {
        return None;
    }
    let denom = d1 - d2;
    if denom == 0.0 {
        return None;
    }
    Some(p0.lerp(p1, d1 / denom))
}

/// Euclidean distance between two closed segments.
pub fn segment_distance(p0: Point, p1: Point, q0: Point, q1: Point) -> f64 {
    if segment_intersection(p0, p1, q0, q1).is_some() {
        return 0.0;
    }
    point_segment_distance(p0, q0, q1)
        .min(point_segment_distance(p1, q0, q1))
        .min(point_segment_distance(q0, p0, p1))
        .min(point_segment_distance(q1, p0, p1))
}

/// First parameter `u ∈ [0,1]` at which the moving point `a + u·d` comes within
/// `eps` of the closed segment `[q0,q1]` (i.e. enters its capsule).
pub fn capsule_first_contact(a: Point, d: Point, q0: Point, q1: Point, eps: f64) -> Option<f64> {
    if point_segment_distance(a, q0, q1) <= eps {
        return Some(0.0);
    }
    let mut best = f64::INFINITY;
    let axis = q1 - q0;
    let len = axis.norm();
    if len > 0.0 {
        let e = axis * (1.0 / len);
        let n = Point::new(-e.y, e.x);
        let (sa, ha) = ((a - q0).dot(e), (a - q0).dot(n));
        let (sd, hd) = (d.dot(e), d.dot(n));
        // entry through the near long side of the capsule rectangle
        if hd != 0.0 {
            let target = if ha > 0.0 { eps } else { -eps };
            let u = (target - ha) / hd;
            if (0.0..=1.0).contains(&u) {
                let s = sa + u * sd;
                if (0.0..=len).contains(&s) {
                    best = best.min(u);
                }
            }
        }
    }
    for c in [q0, q1] {
        if let Some(u) = circle_entry(a, d, c, eps) {
            best = best.min(u);
        }
    }
    (best <= 1.0).then_some(best)
}

fn circle_entry(a: Point, d: Point, c: Point, r: f64) -> Option<f64> {
    let f = a - c;
    let qa = d.norm2();
    if qa == 0.0 {
        return None;
    }
    let qb = 2.0 * f.dot(d);
    let qc = f.norm2() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let u = (-qb - disc.sqrt()) / (2.0 * qa);
    (0.0..=1.0).contains(&u).then_some(u)
}
