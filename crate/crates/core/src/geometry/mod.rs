//! Planar primitives shared by the road model, the generators and the simulator.
//!
//! All coordinates are local Cartesian meters (x east, y north), headings are
//! radians measured counter-clockwise from the +x axis.

mod polygon;
mod polyline;
mod rect;

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use polygon::{buffer_centerline, polygon_intersection, total_area, Polygon};
pub use polyline::{polyline_intersections, CurveHit, Polyline, Projection};
pub use rect::{rect_gap, rect_overlap, OrientedRect};

/// Distance below which two points are considered coincident.
pub const POINT_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("arc-length {s} outside [0, {length}]")]
    OutOfRange { s: f64, length: f64 },
    #[error("degenerate polyline: {0}")]
    DegeneratePolyline(String),
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_heading(heading: f64) -> Self {
        Vec2::new(heading.cos(), heading.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn heading(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Left-hand normal (rotated +90°).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = (a + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if r >= std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

/// Closest distance from `p` to segment `a`-`b`, and the segment parameter in `[0, 1]`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= 0.0 {
        return (p.distance(a), 0.0);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (p.distance(a + ab * t), t)
}

pub fn segment_segment_distance(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> f64 {
    if segment_intersection(a0, a1, b0, b1).is_some() {
        return 0.0;
    }
    point_segment_distance(a0, b0, b1)
        .0
        .min(point_segment_distance(a1, b0, b1).0)
        .min(point_segment_distance(b0, a0, a1).0)
        .min(point_segment_distance(b1, a0, a1).0)
}

/// Intersection of two closed segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentHit {
    /// Single point, with the parameters along each segment.
    Point { t: f64, u: f64 },
    /// Collinear overlap; parameters (along the first segment) of both ends.
    Overlap { t0: f64, t1: f64 },
}

pub fn segment_intersection(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> Option<SegmentHit> {
    let r = a1 - a0;
    let s = b1 - b0;
    let denom = r.cross(s);
    let qp = b0 - a0;
    let scale = r.norm() * s.norm();
    if scale == 0.0 {
        return None;
    }
    if denom.abs() <= 1e-12 * scale {
        // Parallel: overlap only when collinear.
        if qp.cross(r).abs() > 1e-9 * r.norm() {
            return None;
        }
        let rr = r.dot(r);
        let mut t0 = qp.dot(r) / rr;
        let mut t1 = (b1 - a0).dot(r) / rr;
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        let lo = t0.max(0.0);
        let hi = t1.min(1.0);
        let tol = POINT_EPS / r.norm();
        if lo > hi + tol {
            return None;
        }
        return Some(SegmentHit::Overlap { t0: lo.min(hi), t1: hi.max(lo) });
    }
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    let ta = POINT_EPS / r.norm();
    let tb = POINT_EPS / s.norm();
    if t < -ta || t > 1.0 + ta || u < -tb || u > 1.0 + tb {
        return None;
    }
    Some(SegmentHit::Point { t: t.clamp(0.0, 1.0), u: u.clamp(0.0, 1.0) })
}
