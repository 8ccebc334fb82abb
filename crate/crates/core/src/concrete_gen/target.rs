use super::ConcreteError;
use crate::geometry::{polyline_intersections, wrap_angle, Polygon, Polyline, Vec2};

const INSIDE_TOL: f64 = 1e-6;
/// Centerlines meeting at a shallower angle than this are treated as merging, not crossing.
pub const MIN_CROSSING_ANGLE: f64 = 10.0 * std::f64::consts::PI / 180.0;

/// Conflict point of an ego/external pair, located on both centerlines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetPoint {
    pub point: Vec2,
    pub s_ego: f64,
    pub s_ext: f64,
    /// Whether the centerlines actually cross at `point`.
    pub crossing: bool,
}

fn inside_any(pieces: &[Polygon], p: Vec2) -> bool {
    pieces.iter().any(|poly| poly.contains_with_tolerance(p, INSIDE_TOL))
}

fn crossing_angle(a: &Polyline, sa: f64, b: &Polyline, sb: f64) -> f64 {
    let d = wrap_angle(a.point_at_clamped(sa).1 - b.point_at_clamped(sb).1).abs();
    d.min(std::f64::consts::PI - d)
}

/// First transversal centerline crossing (along the ego) inside the overlap; otherwise
/// (merging or diverging centerlines) the midpoint of the external centerline's chord
/// through the overlap.
pub fn choose_target_point(ego_line: &Polyline, ext_line: &Polyline, overlap: &[Polygon]) -> Result<TargetPoint, ConcreteError> {
    if overlap.is_empty() {
        return Err(ConcreteError::Inconsistent("empty overlap region".into()));
    }
    let crossing = polyline_intersections(ego_line, ext_line)
        .into_iter()
        .find(|h| inside_any(overlap, h.point) && crossing_angle(ego_line, h.s_a, ext_line, h.s_b) >= MIN_CROSSING_ANGLE);
    if let Some(hit) = crossing {
        return Ok(TargetPoint { point: hit.point, s_ego: hit.s_a, s_ext: hit.s_b, crossing: true });
    }
    let mut best: Option<TargetPoint> = None;
    for poly in overlap {
        for (s0, s1) in poly.clip_polyline(ext_line) {
            let s_ext = 0.5 * (s0 + s1);
            let point = ext_line.point_at_clamped(s_ext).0;
            let s_ego = ego_line.project(point).s;
            if best.is_none_or(|b| s_ego < b.s_ego) {
                best = Some(TargetPoint { point, s_ego, s_ext, crossing: false });
            }
        }
    }
    best.ok_or_else(|| ConcreteError::Inconsistent("external centerline does not enter the overlap region".into()))
}

/// The arc-length interval of `line` inside the overlap that contains (or is nearest to) `s`.
pub fn chord_through(line: &Polyline, overlap: &[Polygon], s: f64) -> Option<(f64, f64)> {
    let mut chords: Vec<(f64, f64)> = overlap.iter().flat_map(|p| p.clip_polyline(line)).collect();
    chords.sort_by(|a, b| a.0.total_cmp(&b.0));
    let dist = |c: &(f64, f64)| if s < c.0 { c.0 - s } else if s > c.1 { s - c.1 } else { 0.0 };
    chords.into_iter().min_by(|a, b| dist(a).total_cmp(&dist(b)))
}
