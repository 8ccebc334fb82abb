//! Independent reference implementations the library is checked against.

use std::collections::BTreeSet;

use junctest::geometry::{OrientedRect, Polygon, Vec2};
use junctest::logical_gen::danger_predicate;
use junctest::road_model::ManeuverCatalog;

/// Area of `a ∩ b` from a raster of `cell`-sized squares: a cell counts when its center
/// lies inside both polygons (even-odd rule over all rings, holes included).
pub fn raster_intersection_area(a: &Polygon, b: &Polygon, cell: f64) -> f64 {
    let (alo, ahi) = bbox(a);
    let (blo, bhi) = bbox(b);
    let (x0, x1) = (alo.x.max(blo.x), ahi.x.min(bhi.x));
    let (y0, y1) = (alo.y.max(blo.y), ahi.y.min(bhi.y));
    if x0 >= x1 || y0 >= y1 {
        return 0.0;
    }
    let mut cells = 0u64;
    let mut row = (y0 / cell).floor() as i64;
    while (row as f64) * cell < y1 {
        let y = (row as f64 + 0.5) * cell;
        let ia = row_intervals(a, y);
        let ib = row_intervals(b, y);
        for (p0, p1) in &ia {
            for (q0, q1) in &ib {
                let (l, r) = (p0.max(*q0), p1.min(*q1));
                if l < r {
                    // cell centers (k + 0.5) * cell inside [l, r)
                    let k0 = ((l / cell) - 0.5).ceil() as i64;
                    let k1 = ((r / cell) - 0.5).ceil() as i64;
                    cells += (k1 - k0).max(0) as u64;
                }
            }
        }
        row += 1;
    }
    cells as f64 * cell * cell
}

fn bbox(p: &Polygon) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in p.exterior() {
        lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
        hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
    }
    (lo, hi)
}

/// Inside intervals of the horizontal line at `y` (even-odd crossing rule).
fn row_intervals(p: &Polygon, y: f64) -> Vec<(f64, f64)> {
    let mut xs = Vec::new();
    let rings = std::iter::once(p.exterior()).chain(p.holes().iter().map(|h| h.as_slice()));
    for ring in rings {
        for i in 0..ring.len() {
            let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
            if (a.y > y) != (b.y > y) {
                xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

fn point_segment(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0) };
    let (cx, cy) = (a.x + t * dx, a.y + t * dy);
    ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt()
}

fn inside_convex(p: Vec2, ring: &[Vec2; 4]) -> bool {
    (0..4).all(|i| {
        let (a, b) = (ring[i], ring[(i + 1) % 4]);
        (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= -1e-12
    })
}

fn segments_cross(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> bool {
    let orient = |p: Vec2, q: Vec2, r: Vec2| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let (d1, d2) = (orient(b0, b1, a0), orient(b0, b1, a1));
    let (d3, d4) = (orient(a0, a1, b0), orient(a0, a1, b1));
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

/// Gap between two rectangles from boundary points spaced `step` apart on each
/// rectangle, measured to the other's edges. Zero when they overlap.
pub fn sampled_rect_gap(a: &OrientedRect, b: &OrientedRect, step: f64) -> f64 {
    let (ca, cb) = (a.corners(), b.corners());
    let overlap = ca.iter().any(|p| inside_convex(*p, &cb))
        || cb.iter().any(|p| inside_convex(*p, &ca))
        || (0..4).any(|i| (0..4).any(|j| segments_cross(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4])));
    if overlap {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (from, to) in [(&ca, &cb), (&cb, &ca)] {
        for i in 0..4 {
            let (p, q) = (from[i], from[(i + 1) % 4]);
            let n = ((p.distance(q) / step).ceil() as usize).max(1);
            for k in 0..=n {
                let s = p.lerp(q, k as f64 / n as f64);
                for j in 0..4 {
                    best = best.min(point_segment(s, to[j], to[(j + 1) % 4]));
                }
            }
        }
    }
    best
}

/// Every n-tuple of maneuver ids whose externals each pass the pairwise danger test
/// against the ego (tuples of the catalog's id list, ego first).
pub fn brute_force_logical(catalog: &ManeuverCatalog, n: usize) -> BTreeSet<Vec<String>> {
    let m = catalog.len();
    let danger: Vec<Vec<bool>> = (0..m)
        .map(|i| (0..m).map(|j| danger_predicate(&catalog.instances[i], &catalog.instances[j]).unwrap()).collect())
        .collect();
    let mut out = BTreeSet::new();
    let total = m.pow(n as u32);
    for code in 0..total {
        let mut idx = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            idx.push(c % m);
            c /= m;
        }
        if idx[1..].iter().all(|&j| danger[idx[0]][j]) {
            out.insert(idx.iter().map(|&i| catalog.instances[i].id.clone()).collect());
        }
    }
    out
}

fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Two-sided Fisher p-value by exact integer enumeration of the hypergeometric
/// distribution (tables no more probable than the observed one).
pub fn brute_force_fisher(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let (r1, r2, c1) = (a + b, c + d, a + c);
    let n = r1 + r2;
    let weight = |x: u64| binom(r1, x) * binom(r2, c1 - x);
    let observed = weight(a);
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let num: u128 = (lo..=hi).map(weight).filter(|&w| w <= observed).sum();
    num as f64 / binom(n, c1) as f64
}

/// Seeded pairs of lane corridors (1.5–2 m half-width) whose centerlines bend at a
/// point within 1 m of the origin, so every pair crosses there.
pub fn corridor_pairs(seed: u64, count: usize) -> Vec<(Polygon, Polygon)> {
    use junctest::geometry::{buffer_centerline, Polyline};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let corridor = |rng: &mut rand_chacha::ChaCha8Rng| {
        let mid = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let h_in: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let h_out = h_in + rng.random_range(-0.8..0.8);
        let mut pts = vec![mid - Vec2::from_heading(h_in) * rng.random_range(6.0..14.0), mid];
        let after = mid + Vec2::from_heading(h_out) * rng.random_range(6.0..14.0);
        pts.push(after);
        if rng.random_bool(0.5) {
            pts.push(after + Vec2::from_heading(h_out + rng.random_range(-0.8..0.8)) * rng.random_range(6.0..14.0));
        }
        let line = Polyline::new(pts).unwrap();
        buffer_centerline(&line, rng.random_range(1.5..2.0)).unwrap()
    };
    (0..count).map(|_| (corridor(&mut rng), corridor(&mut rng))).collect()
}

/// Seeded car-sized rectangle pairs with centers up to 8 m apart, any headings.
pub fn rect_pairs(seed: u64, count: usize) -> Vec<(OrientedRect, OrientedRect)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let rect = |rng: &mut rand_chacha::ChaCha8Rng| {
        OrientedRect::new(
            Vec2::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)),
            rng.random_range(-3.2..3.2),
            rng.random_range(3.0..5.5),
            rng.random_range(1.5..2.2),
        )
        .unwrap()
    };
    (0..count).map(|_| (rect(&mut rng), rect(&mut rng))).collect()
}
