use serde::{Deserialize, Serialize};

use super::{segment_segment_distance, wrap_angle, GeometryError, Vec2};

/// Vehicle footprint: a rectangle centered on `center`, long axis along `heading`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedRect {
    pub center: Vec2,
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

impl OrientedRect {
    pub fn new(center: Vec2, heading: f64, length: f64, width: f64) -> Result<Self, GeometryError> {
        if !(length > 0.0 && width > 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "rectangle dimensions must be positive ({length} x {width})"
            )));
        }
        Ok(OrientedRect { center, heading: wrap_angle(heading), length, width })
    }

    /// Same footprint, moved.
    pub fn placed(&self, center: Vec2, heading: f64) -> OrientedRect {
        OrientedRect { center, heading: wrap_angle(heading), ..*self }
    }

    pub fn axes(&self) -> (Vec2, Vec2) {
        let fwd = Vec2::from_heading(self.heading);
        (fwd, fwd.perp())
    }

    /// Corners in counter-clockwise order starting at rear-right.
    pub fn corners(&self) -> [Vec2; 4] {
        let (f, l) = self.axes();
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        let c = self.center;
        [c - f * hl - l * hw, c + f * hl - l * hw, c + f * hl + l * hw, c - f * hl + l * hw]
    }

    pub fn front_center(&self) -> Vec2 {
        self.center + Vec2::from_heading(self.heading) * (self.length / 2.0)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let (f, l) = self.axes();
        let d = p - self.center;
        d.dot(f).abs() <= self.length / 2.0 + 1e-12 && d.dot(l).abs() <= self.width / 2.0 + 1e-12
    }

    /// Points along the perimeter with spacing at most `step`, corners included.
    pub fn perimeter_samples(&self, step: f64) -> Vec<Vec2> {
        let cs = self.corners();
        let mut out = Vec::new();
        for i in 0..4 {
            let (a, b) = (cs[i], cs[(i + 1) % 4]);
            let n = (a.distance(b) / step).ceil().max(1.0) as usize;
            out.extend((0..n).map(|k| a.lerp(b, k as f64 / n as f64)));
        }
        out
    }

    fn project(&self, axis: Vec2) -> (f64, f64) {
        let cs = self.corners();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in cs {
            let v = c.dot(axis);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Separating-axis overlap test; touching boundaries count as overlap.
pub fn rect_overlap(a: &OrientedRect, b: &OrientedRect) -> bool {
    let (af, al) = a.axes();
    let (bf, bl) = b.axes();
    for axis in [af, al, bf, bl] {
        let (a0, a1) = a.project(axis);
        let (b0, b1) = b.project(axis);
        if a1 < b0 - 1e-12 || b1 < a0 - 1e-12 {
            return false;
        }
    }
    true
}

/// Minimum distance between the two footprints (0 when they overlap).
pub fn rect_gap(a: &OrientedRect, b: &OrientedRect) -> f64 {
    if rect_overlap(a, b) {
        return 0.0;
    }
    let (ca, cb) = (a.corners(), b.corners());
    let mut best = f64::INFINITY;
    for i in 0..4 {
        for j in 0..4 {
            best = best.min(segment_segment_distance(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4]));
        }
    }
    best
}
