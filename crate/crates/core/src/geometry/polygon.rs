use geo::{BooleanOps, Coord, LineString, MultiPolygon};

use super::{
    point_segment_distance, segment_intersection, GeometryError, Polyline, SegmentHit, Vec2, POINT_EPS,
};

/// Simple polygon with optional holes. The outer ring is stored counter-clockwise,
/// holes clockwise; rings are implicitly closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Vec<Vec2>,
    holes: Vec<Vec<Vec2>>,
}

fn signed_area(ring: &[Vec2]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| ring[i].cross(ring[(i + 1) % n])).sum::<f64>() / 2.0
}

fn clean_ring(ring: &[Vec2]) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = Vec::with_capacity(ring.len());
    for &p in ring {
        if out.last().is_none_or(|q| q.distance(p) > POINT_EPS) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].distance(*out.last().unwrap()) <= POINT_EPS {
        out.pop();
    }
    out
}

fn ring_is_simple(ring: &[Vec2]) -> bool {
    let n = ring.len();
    for i in 0..n {
        let (a0, a1) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (b0, b1) = (ring[j], ring[(j + 1) % n]);
            match segment_intersection(a0, a1, b0, b1) {
                None => {}
                Some(SegmentHit::Point { t, u }) if adjacent => {
                    // adjacent edges may only share their common vertex
                    let shared = if j == i + 1 { t > 1.0 - 1e-9 && u < 1e-9 } else { t < 1e-9 && u > 1.0 - 1e-9 };
                    if !shared {
                        return false;
                    }
                }
                Some(_) => return false,
            }
        }
    }
    true
}

fn point_in_ring(p: Vec2, ring: &[Vec2]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn ring_edges(ring: &[Vec2]) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
    (0..ring.len()).map(move |i| (ring[i], ring[(i + 1) % ring.len()]))
}

impl Polygon {
    /// Validated constructor: rings are re-oriented, duplicate vertices dropped, and
    /// self-intersection rejected.
    pub fn new(exterior: Vec<Vec2>, holes: Vec<Vec<Vec2>>) -> Result<Self, GeometryError> {
        let mut ext = clean_ring(&exterior);
        if ext.len() < 3 {
            return Err(GeometryError::InvalidPolygon("outer ring needs 3 distinct points".into()));
        }
        if signed_area(&ext) < 0.0 {
            ext.reverse();
        }
        if signed_area(&ext) <= 0.0 {
            return Err(GeometryError::InvalidPolygon("outer ring has zero area".into()));
        }
        if !ring_is_simple(&ext) {
            return Err(GeometryError::InvalidPolygon("outer ring self-intersects".into()));
        }
        let mut hs = Vec::with_capacity(holes.len());
        for h in holes {
            let mut h = clean_ring(&h);
            if h.len() < 3 {
                return Err(GeometryError::InvalidPolygon("hole needs 3 distinct points".into()));
            }
            if signed_area(&h) > 0.0 {
                h.reverse();
            }
            if !ring_is_simple(&h) {
                return Err(GeometryError::InvalidPolygon("hole self-intersects".into()));
            }
            hs.push(h);
        }
        Ok(Polygon { exterior: ext, holes: hs })
    }

    pub fn rectangle(min: Vec2, max: Vec2) -> Result<Self, GeometryError> {
        Polygon::new(
            vec![min, Vec2::new(max.x, min.y), max, Vec2::new(min.x, max.y)],
            vec![],
        )
    }

    pub fn exterior(&self) -> &[Vec2] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<Vec2>] {
        &self.holes
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.exterior) - self.holes.iter().map(|h| -signed_area(h)).sum::<f64>()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        ring_edges(&self.exterior).chain(self.holes.iter().flat_map(|h| ring_edges(h)))
    }

    pub fn distance_to_boundary(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b).0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Point membership; points on the boundary (within 1e-9 m) count as inside.
    pub fn contains(&self, p: Vec2) -> bool {
        self.contains_with_tolerance(p, POINT_EPS)
    }

    pub fn contains_with_tolerance(&self, p: Vec2, tol: f64) -> bool {
        if self.distance_to_boundary(p) <= tol {
            return true;
        }
        point_in_ring(p, &self.exterior) && !self.holes.iter().any(|h| point_in_ring(p, h))
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.exterior {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    pub fn centroid(&self) -> Vec2 {
        let ring = &self.exterior;
        let n = ring.len();
        let a = signed_area(ring);
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let (p, q) = (ring[i], ring[(i + 1) % n]);
            let c = p.cross(q);
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
        }
        Vec2::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    /// Arc-length intervals of `line` lying inside the polygon (boundary inclusive).
    pub fn clip_polyline(&self, line: &Polyline) -> Vec<(f64, f64)> {
        let pts = line.points();
        let cum = line.cumulative();
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        for i in 0..line.segment_count() {
            let (a, b) = (pts[i], pts[i + 1]);
            let len = cum[i + 1] - cum[i];
            let mut ts = vec![0.0, 1.0];
            for (e0, e1) in self.edges() {
                match segment_intersection(a, b, e0, e1) {
                    Some(SegmentHit::Point { t, .. }) => ts.push(t),
                    Some(SegmentHit::Overlap { t0, t1 }) => {
                        ts.push(t0);
                        ts.push(t1);
                    }
                    None => {}
                }
            }
            ts.sort_by(f64::total_cmp);
            ts.dedup_by(|x, y| (*x - *y).abs() * len <= 1e-12);
            for w in ts.windows(2) {
                let mid = a.lerp(b, 0.5 * (w[0] + w[1]));
                if !self.contains(mid) {
                    continue;
                }
                let (s0, s1) = (cum[i] + w[0] * len, cum[i] + w[1] * len);
                match intervals.last_mut() {
                    Some(last) if (s0 - last.1).abs() <= 1e-9 => last.1 = s1,
                    _ => intervals.push((s0, s1)),
                }
            }
        }
        intervals
    }

    pub fn map_points(&self, f: impl Fn(Vec2) -> Vec2) -> Result<Polygon, GeometryError> {
        Polygon::new(
            self.exterior.iter().map(|&p| f(p)).collect(),
            self.holes.iter().map(|h| h.iter().map(|&p| f(p)).collect()).collect(),
        )
    }

    fn ring_to_geo(ring: &[Vec2]) -> LineString<f64> {
        let mut cs: Vec<Coord<f64>> = ring.iter().map(|p| Coord { x: p.x, y: p.y }).collect();
        cs.push(cs[0]);
        LineString::new(cs)
    }

    pub(crate) fn to_geo(&self) -> geo::Polygon<f64> {
        geo::Polygon::new(
            Self::ring_to_geo(&self.exterior),
            self.holes.iter().map(|h| Self::ring_to_geo(h)).collect(),
        )
    }

    /// Converts boolean-op output; components with negligible area are dropped.
    pub(crate) fn from_geo_multi(mp: &MultiPolygon<f64>) -> Vec<Polygon> {
        let ring = |ls: &LineString<f64>| clean_ring(&ls.0.iter().map(|c| Vec2::new(c.x, c.y)).collect::<Vec<_>>());
        let mut out = Vec::new();
        for p in &mp.0 {
            let mut ext = ring(p.exterior());
            if ext.len() < 3 {
                continue;
            }
            if signed_area(&ext) < 0.0 {
                ext.reverse();
            }
            let holes: Vec<Vec<Vec2>> = p
                .interiors()
                .iter()
                .map(ring)
                .filter(|h| h.len() >= 3)
                .map(|mut h| {
                    if signed_area(&h) > 0.0 {
                        h.reverse();
                    }
                    h
                })
                .collect();
            let poly = Polygon { exterior: ext, holes };
            if poly.area() > 1e-12 {
                out.push(poly);
            }
        }
        out
    }
}

pub fn total_area(polys: &[Polygon]) -> f64 {
    polys.iter().map(Polygon::area).sum()
}

/// All connected components of `a ∩ b`; empty iff the interiors are disjoint.
pub fn polygon_intersection(a: &Polygon, b: &Polygon) -> Result<Vec<Polygon>, GeometryError> {
    for p in [a, b] {
        if p.exterior.len() < 3 || p.area() <= 0.0 {
            return Err(GeometryError::InvalidPolygon("degenerate input ring".into()));
        }
    }
    let (alo, ahi) = a.bounding_box();
    let (blo, bhi) = b.bounding_box();
    if alo.x > bhi.x || blo.x > ahi.x || alo.y > bhi.y || blo.y > ahi.y {
        return Ok(Vec::new());
    }
    let mp = a.to_geo().intersection(&b.to_geo());
    let mut parts = Polygon::from_geo_multi(&mp);
    // canonical order for reproducible output
    parts.sort_by(|p, q| {
        let (pc, qc) = (p.bounding_box().0, q.bounding_box().0);
        pc.x.total_cmp(&qc.x).then(pc.y.total_cmp(&qc.y))
    });
    Ok(parts)
}

/// Corridor of the given half-width around a centerline: flat end caps, mitered joins
/// with the miter clipped at `2 × half_width` from the vertex.
pub fn buffer_centerline(line: &Polyline, half_width: f64) -> Result<Polygon, GeometryError> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!("half_width must be > 0, got {half_width}")));
    }
    let pts = line.points();
    let mut pieces: Vec<geo::Polygon<f64>> = Vec::new();
    let to_geo = |ring: &[Vec2]| {
        let mut r = ring.to_vec();
        if signed_area(&r) < 0.0 {
            r.reverse();
        }
        geo::Polygon::new(Polygon::ring_to_geo(&r), vec![])
    };
    for w in pts.windows(2) {
        let n = (w[1] - w[0]).normalized().perp() * half_width;
        pieces.push(to_geo(&[w[0] - n, w[1] - n, w[1] + n, w[0] + n]));
    }
    for i in 1..pts.len() - 1 {
        let d0 = (pts[i] - pts[i - 1]).normalized();
        let d1 = (pts[i + 1] - pts[i]).normalized();
        let turn = d0.cross(d1);
        if turn.abs() < 1e-12 && d0.dot(d1) > 0.0 {
            continue;
        }
        // outer side is opposite to the turn direction
        let side = if turn > 0.0 { -1.0 } else { 1.0 };
        let n0 = d0.perp() * (side * half_width);
        let n1 = d1.perp() * (side * half_width);
        let v = pts[i];
        let bis = (n0 + n1).normalized();
        let cos_half = bis.dot(n0.normalized()).max(1e-9);
        let miter = v + bis * (half_width / cos_half);
        // pull the inner vertex into the rectangles so the union never relies on shared edges alone
        let wedge = vec![v - bis * (0.5 * half_width), v + n0, miter, v + n1];
        let wedge = clip_halfplane(&wedge, v, bis, 2.0 * half_width);
        if wedge.len() >= 3 && signed_area(&wedge).abs() > 1e-12 {
            pieces.push(to_geo(&wedge));
        }
    }
    let merged = geo::unary_union(pieces.iter());
    let mut parts = Polygon::from_geo_multi(&merged);
    match parts.len() {
        1 => Ok(parts.pop().unwrap()),
        0 => Err(GeometryError::DegeneratePolyline("buffer produced no area".into())),
        n => Err(GeometryError::InvalidPolygon(format!("buffer produced {n} components"))),
    }
}

/// Keeps the part of a convex polygon with `(p - origin)·dir ≤ limit`.
fn clip_halfplane(poly: &[Vec2], origin: Vec2, dir: Vec2, limit: f64) -> Vec<Vec2> {
    let f = |p: Vec2| (p - origin).dot(dir) - limit;
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fp, fq) = (f(p), f(q));
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            out.push(p.lerp(q, fp / (fp - fq)));
        }
    }
    out
}
