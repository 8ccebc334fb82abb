use serde::{Deserialize, Serialize};

use super::{point_segment_distance, segment_intersection, GeometryError, SegmentHit, Vec2, POINT_EPS};

/// Open polyline with cached cumulative arc-length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct Polyline {
    points: Vec<Vec2>,
    cumulative: Vec<f64>,
}

/// Result of projecting a point onto a polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub s: f64,
    pub point: Vec2,
    pub distance: f64,
}

/// A point shared by two curves, located by arc-length on each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveHit {
    pub s_a: f64,
    pub s_b: f64,
    pub point: Vec2,
}

impl TryFrom<Vec<Vec2>> for Polyline {
    type Error = GeometryError;
    fn try_from(points: Vec<Vec2>) -> Result<Self, Self::Error> {
        Polyline::new(points)
    }
}

impl From<Polyline> for Vec<Vec2> {
    fn from(p: Polyline) -> Self {
        p.points
    }
}

impl Polyline {
    pub fn new(points: Vec<Vec2>) -> Result<Self, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::DegeneratePolyline(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(0.0);
        for (i, w) in points.windows(2).enumerate() {
            if !(w[0].x.is_finite() && w[0].y.is_finite() && w[1].x.is_finite() && w[1].y.is_finite()) {
                return Err(GeometryError::DegeneratePolyline("non-finite coordinate".into()));
            }
            let d = w[0].distance(w[1]);
            if d <= POINT_EPS {
                return Err(GeometryError::DegeneratePolyline(format!(
                    "points {i} and {} coincide",
                    i + 1
                )));
            }
            cumulative.push(cumulative[i] + d);
        }
        Ok(Polyline { points, cumulative })
    }

    /// Builds a polyline after dropping consecutive duplicate points.
    pub fn from_points_dedup(points: impl IntoIterator<Item = Vec2>) -> Result<Self, GeometryError> {
        let mut out: Vec<Vec2> = Vec::new();
        for p in points {
            if out.last().is_none_or(|q| q.distance(p) > POINT_EPS) {
                out.push(p);
            }
        }
        Polyline::new(out)
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    pub fn start(&self) -> Vec2 {
        self.points[0]
    }

    pub fn end(&self) -> Vec2 {
        *self.points.last().expect("non-empty")
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    /// Index of the segment containing arc-length `s`; vertices belong to the following segment.
    pub fn segment_index(&self, s: f64) -> usize {
        let last = self.segment_count() - 1;
        match self.cumulative.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    pub fn segment_heading(&self, i: usize) -> f64 {
        (self.points[i + 1] - self.points[i]).heading()
    }

    pub fn start_heading(&self) -> f64 {
        self.segment_heading(0)
    }

    pub fn end_heading(&self) -> f64 {
        self.segment_heading(self.segment_count() - 1)
    }

    /// Point and tangent heading at arc-length `s`.
    pub fn point_at(&self, s: f64) -> Result<(Vec2, f64), GeometryError> {
        let len = self.length();
        if !(s >= -POINT_EPS && s <= len + POINT_EPS) {
            return Err(GeometryError::OutOfRange { s, length: len });
        }
        Ok(self.point_at_clamped(s))
    }

    pub fn point_at_clamped(&self, s: f64) -> (Vec2, f64) {
        let s = s.clamp(0.0, self.length());
        let i = self.segment_index(s);
        let seg = self.cumulative[i + 1] - self.cumulative[i];
        let t = ((s - self.cumulative[i]) / seg).clamp(0.0, 1.0);
        (self.points[i].lerp(self.points[i + 1], t), self.segment_heading(i))
    }

    /// Nearest point on the polyline; ties resolve to the lowest arc-length.
    pub fn project(&self, p: Vec2) -> Projection {
        let mut best = Projection { s: 0.0, point: self.points[0], distance: f64::INFINITY };
        for i in 0..self.segment_count() {
            let (a, b) = (self.points[i], self.points[i + 1]);
            let (d, t) = point_segment_distance(p, a, b);
            if d < best.distance - 1e-12 {
                best = Projection {
                    s: self.cumulative[i] + t * (self.cumulative[i + 1] - self.cumulative[i]),
                    point: a.lerp(b, t),
                    distance: d,
                };
            }
        }
        best
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.project(p).distance
    }

    /// Sub-polyline between two arc-lengths (clamped to the curve).
    pub fn slice(&self, s0: f64, s1: f64) -> Result<Polyline, GeometryError> {
        let len = self.length();
        let (s0, s1) = (s0.clamp(0.0, len), s1.clamp(0.0, len));
        if s1 - s0 <= POINT_EPS {
            return Err(GeometryError::DegeneratePolyline(format!("empty slice [{s0}, {s1}]")));
        }
        let mut pts = vec![self.point_at_clamped(s0).0];
        for (i, &c) in self.cumulative.iter().enumerate() {
            if c > s0 && c < s1 {
                pts.push(self.points[i]);
            }
        }
        pts.push(self.point_at_clamped(s1).0);
        Polyline::from_points_dedup(pts)
    }

    /// Points at arc-lengths `s0, s0 + step, …` up to `s1`; the last step may be shorter.
    pub fn sample_arclengths(s0: f64, s1: f64, step: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let s = s0 + k as f64 * step;
            if s >= s1 - POINT_EPS {
                break;
            }
            out.push(s);
            k += 1;
        }
        out.push(s1);
        out
    }

    pub fn reversed(&self) -> Polyline {
        let mut pts = self.points.clone();
        pts.reverse();
        Polyline::new(pts).expect("reversing a valid polyline")
    }

    /// Arc-lengths of curve points starting at `s0` and moving toward `s_limit`, each
    /// exactly `step` (straight-line) from the previous one; the walk ends with
    /// `s_limit` itself once it is closer than `step`.
    pub fn chord_walk(&self, s0: f64, s_limit: f64, step: f64) -> Vec<f64> {
        let len = self.length();
        let (s0, s_limit) = (s0.clamp(0.0, len), s_limit.clamp(0.0, len));
        if s_limit < s0 {
            let rev = self.reversed();
            return rev.chord_walk(len - s0, len - s_limit, step).into_iter().map(|s| len - s).collect();
        }
        let mut out = vec![s0];
        let mut cur = s0;
        'outer: loop {
            let p = self.point_at_clamped(cur).0;
            let first = self.segment_index(cur);
            for i in first..self.segment_count() {
                let lo = self.cumulative[i].max(cur);
                let hi = self.cumulative[i + 1].min(s_limit);
                if hi <= lo {
                    if self.cumulative[i] >= s_limit {
                        break;
                    }
                    continue;
                }
                let q1 = self.point_at_clamped(hi).0;
                if q1.distance(p) < step {
                    continue;
                }
                let q0 = self.point_at_clamped(lo).0;
                // |q0 + t d - p| = step, larger root
                let d = q1 - q0;
                let w = q0 - p;
                let (a, b, c) = (d.dot(d), 2.0 * w.dot(d), w.dot(w) - step * step);
                let disc = (b * b - 4.0 * a * c).max(0.0);
                let t = ((-b + disc.sqrt()) / (2.0 * a)).clamp(0.0, 1.0);
                cur = lo + t * (hi - lo);
                out.push(cur);
                continue 'outer;
            }
            if s_limit - cur > POINT_EPS {
                out.push(s_limit);
            }
            return out;
        }
    }

    /// Resampled copy at fixed spacing along the curve.
    pub fn resample(&self, step: f64) -> Polyline {
        let pts = Self::sample_arclengths(0.0, self.length(), step)
            .into_iter()
            .map(|s| self.point_at_clamped(s).0);
        Polyline::from_points_dedup(pts).expect("resampling a valid polyline")
    }

    /// Joins polylines end to start, merging coincident junction points.
    pub fn concat(parts: &[Polyline]) -> Result<Polyline, GeometryError> {
        Polyline::from_points_dedup(parts.iter().flat_map(|p| p.points.iter().copied()))
    }

    pub fn map_points(&self, f: impl Fn(Vec2) -> Vec2) -> Result<Polyline, GeometryError> {
        Polyline::new(self.points.iter().map(|&p| f(p)).collect())
    }
}

/// All shared points of two polylines, sorted by arc-length along `a`.
///
/// Collinear overlaps contribute both overlap ends.
pub fn polyline_intersections(a: &Polyline, b: &Polyline) -> Vec<CurveHit> {
    let mut hits = Vec::new();
    let bboxes: Vec<(Vec2, Vec2)> = (0..b.segment_count())
        .map(|j| {
            let (p, q) = (b.points[j], b.points[j + 1]);
            (Vec2::new(p.x.min(q.x), p.y.min(q.y)), Vec2::new(p.x.max(q.x), p.y.max(q.y)))
        })
        .collect();
    for i in 0..a.segment_count() {
        let (a0, a1) = (a.points[i], a.points[i + 1]);
        let lo = Vec2::new(a0.x.min(a1.x) - 1e-6, a0.y.min(a1.y) - 1e-6);
        let hi = Vec2::new(a0.x.max(a1.x) + 1e-6, a0.y.max(a1.y) + 1e-6);
        let la = a.cumulative[i + 1] - a.cumulative[i];
        for (j, (blo, bhi)) in bboxes.iter().enumerate() {
            if blo.x > hi.x || bhi.x < lo.x || blo.y > hi.y || bhi.y < lo.y {
                continue;
            }
            let (b0, b1) = (b.points[j], b.points[j + 1]);
            let lb = b.cumulative[j + 1] - b.cumulative[j];
            match segment_intersection(a0, a1, b0, b1) {
                Some(SegmentHit::Point { t, u }) => hits.push(CurveHit {
                    s_a: a.cumulative[i] + t * la,
                    s_b: b.cumulative[j] + u * lb,
                    point: a0.lerp(a1, t),
                }),
                Some(SegmentHit::Overlap { t0, t1 }) => {
                    for t in [t0, t1] {
                        let p = a0.lerp(a1, t);
                        let u = ((p - b0).dot(b1 - b0) / (lb * lb)).clamp(0.0, 1.0);
                        hits.push(CurveHit {
                            s_a: a.cumulative[i] + t * la,
                            s_b: b.cumulative[j] + u * lb,
                            point: p,
                        });
                    }
                }
                None => {}
            }
        }
    }
    hits.sort_by(|x, y| x.s_a.total_cmp(&y.s_a).then(x.s_b.total_cmp(&y.s_b)));
    hits.dedup_by(|x, y| (x.s_a - y.s_a).abs() <= POINT_EPS && (x.s_b - y.s_b).abs() <= POINT_EPS);
    hits
}
