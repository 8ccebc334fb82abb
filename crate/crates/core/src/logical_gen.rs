//! Enumeration of dangerous logical scenarios: every assignment of maneuver
//! instances to actors in which each external's in-junction region overlaps the ego's.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{polygon_intersection, total_area, GeometryError, Polygon};
use crate::road_model::{ManeuverCatalog, ManeuverInstance};

/// Minimum overlap area (m²) for two maneuvers to count as conflicting.
pub const OVERLAP_THRESHOLD: f64 = 0.1;

#[derive(Debug, Error)]
pub enum LogicalGenError {
    #[error("n_actors must be at least 2, got {0}")]
    TooFewActors(usize),
    #[error("maneuver catalog is empty")]
    EmptyCatalog,
    #[error("maneuvers {0} and {1} belong to different junctions")]
    CrossJunction(String, String),
    #[error("unknown maneuver instance {0}")]
    UnknownManeuver(String),
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapSummary {
    pub ext_index: usize,
    pub area_m2: f64,
    /// Arc-length along the ego's in-junction centerline where it first enters the overlap.
    pub ego_entry_arclength_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalScenario {
    /// Maneuver instance per actor; index 0 is the ego.
    pub assignment: Vec<String>,
    pub overlaps: Vec<OverlapSummary>,
}

impl LogicalScenario {
    pub fn ego(&self) -> &str {
        &self.assignment[0]
    }

    pub fn externals(&self) -> &[String] {
        &self.assignment[1..]
    }

    pub fn n_actors(&self) -> usize {
        self.assignment.len()
    }

    /// Stable identifier, e.g. `SL__WS__EL`.
    pub fn id(&self) -> String {
        self.assignment.join("__")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalScenarioSet {
    pub junction: String,
    pub n_actors: usize,
    pub catalog_hash: String,
    pub symmetry_reduced: bool,
    pub scenarios: Vec<LogicalScenario>,
}

/// Pairwise in-junction overlaps of a catalog, indexed like `catalog.instances`.
#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    n: usize,
    pieces: Vec<Vec<Polygon>>,
    areas: Vec<f64>,
    threshold: f64,
}

impl OverlapMatrix {
    pub fn new(catalog: &ManeuverCatalog, threshold: f64) -> Result<Self, GeometryError> {
        let n = catalog.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let computed: Vec<Vec<Polygon>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                polygon_intersection(&catalog.instances[i].in_junction_region, &catalog.instances[j].in_junction_region)
            })
            .collect::<Result<_, _>>()?;
        let mut pieces = vec![Vec::new(); n * n];
        let mut areas = vec![0.0; n * n];
        for (&(i, j), p) in pairs.iter().zip(computed) {
            let a = total_area(&p);
            areas[i * n + j] = a;
            areas[j * n + i] = a;
            pieces[j * n + i] = p.clone();
            pieces[i * n + j] = p;
        }
        Ok(OverlapMatrix { n, pieces, areas, threshold })
    }

    pub fn area(&self, i: usize, j: usize) -> f64 {
        self.areas[i * self.n + j]
    }

    pub fn pieces(&self, i: usize, j: usize) -> &[Polygon] {
        &self.pieces[i * self.n + j]
    }

    pub fn overlapping(&self, i: usize, j: usize) -> bool {
        self.area(i, j) > self.threshold
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn size(&self) -> usize {
        self.n
    }
}

/// True iff the in-junction regions of the two maneuvers overlap by more than the threshold.
pub fn danger_predicate(ego: &ManeuverInstance, ext: &ManeuverInstance) -> Result<bool, LogicalGenError> {
    danger_predicate_with(ego, ext, OVERLAP_THRESHOLD)
}

pub fn danger_predicate_with(ego: &ManeuverInstance, ext: &ManeuverInstance, threshold: f64) -> Result<bool, LogicalGenError> {
    if ego.junction_id != ext.junction_id {
        return Err(LogicalGenError::CrossJunction(ego.id.clone(), ext.id.clone()));
    }
    Ok(total_area(&polygon_intersection(&ego.in_junction_region, &ext.in_junction_region)?) > threshold)
}

/// Where the ego's in-junction centerline first enters any of the overlap pieces.
pub fn ego_entry_arclength(ego: &ManeuverInstance, pieces: &[Polygon]) -> f64 {
    let line = &ego.in_junction_centerline;
    pieces
        .iter()
        .map(|p| match p.clip_polyline(line).first() {
            Some(&(s0, _)) => s0,
            // centerline misses the piece: fall back to the closest vertex
            None => p.exterior().iter().map(|&v| line.project(v).s).fold(f64::INFINITY, f64::min),
        })
        .fold(f64::INFINITY, f64::min)
}

/// Content hash of the catalog (ids, lanes and region geometry).
pub fn catalog_hash(catalog: &ManeuverCatalog) -> String {
    let mut h = Sha256::new();
    h.update(catalog.junction_id.as_bytes());
    for mi in &catalog.instances {
        h.update(format!("|{}:{}>{}:{}", mi.id, mi.start_lane_id, mi.end_lane_id, mi.maneuver_type.as_str()).as_bytes());
        for p in mi.in_junction_region.exterior() {
            h.update(format!(";{:.6},{:.6}", p.x, p.y).as_bytes());
        }
    }
    hex::encode(h.finalize())
}

pub fn permutation_count(catalog: &ManeuverCatalog, n_actors: usize) -> u128 {
    (catalog.len() as u128).pow(n_actors as u32)
}

pub fn find_logical_scenarios(catalog: &ManeuverCatalog, n_actors: usize) -> Result<LogicalScenarioSet, LogicalGenError> {
    let matrix = OverlapMatrix::new(catalog, OVERLAP_THRESHOLD)?;
    find_logical_scenarios_with(catalog, &matrix, n_actors)
}

/// Assignments in lexicographic order of maneuver ids (ego first).
pub fn find_logical_scenarios_with(
    catalog: &ManeuverCatalog,
    matrix: &OverlapMatrix,
    n_actors: usize,
) -> Result<LogicalScenarioSet, LogicalGenError> {
    if n_actors < 2 {
        return Err(LogicalGenError::TooFewActors(n_actors));
    }
    if catalog.is_empty() {
        return Err(LogicalGenError::EmptyCatalog);
    }
    let n = catalog.len();
    let per_ego: Vec<Vec<LogicalScenario>> = (0..n)
        .into_par_iter()
        .map(|ego| {
            let candidates: Vec<usize> = (0..n).filter(|&j| matrix.overlapping(ego, j)).collect();
            let summaries: BTreeMap<usize, (f64, f64)> = candidates
                .iter()
                .map(|&j| {
                    let s = ego_entry_arclength(&catalog.instances[ego], matrix.pieces(ego, j));
                    (j, (matrix.area(ego, j), s))
                })
                .collect();
            let mut out = Vec::new();
            if candidates.is_empty() {
                return out;
            }
            let k = n_actors - 1;
            let mut digits = vec![0usize; k];
            loop {
                let mut assignment = Vec::with_capacity(n_actors);
                assignment.push(catalog.instances[ego].id.clone());
                let mut overlaps = Vec::with_capacity(k);
                for (i, &d) in digits.iter().enumerate() {
                    let j = candidates[d];
                    assignment.push(catalog.instances[j].id.clone());
                    let (area, s) = summaries[&j];
                    overlaps.push(OverlapSummary { ext_index: i + 1, area_m2: area, ego_entry_arclength_m: s });
                }
                out.push(LogicalScenario { assignment, overlaps });
                // increment, least significant digit last
                let mut pos = k;
                loop {
                    if pos == 0 {
                        return out;
                    }
                    pos -= 1;
                    digits[pos] += 1;
                    if digits[pos] < candidates.len() {
                        break;
                    }
                    digits[pos] = 0;
                }
            }
        })
        .collect();
    Ok(LogicalScenarioSet {
        junction: catalog.junction_id.clone(),
        n_actors,
        catalog_hash: catalog_hash(catalog),
        symmetry_reduced: false,
        scenarios: per_ego.into_iter().flatten().collect(),
    })
}

/// Keeps one scenario per (ego, multiset of externals): the one whose external
/// ordering is lexicographically smallest.
pub fn reduce_symmetries(set: &LogicalScenarioSet) -> LogicalScenarioSet {
    let mut best: BTreeMap<(String, Vec<String>), &LogicalScenario> = BTreeMap::new();
    for sc in &set.scenarios {
        let mut key_ext = sc.externals().to_vec();
        key_ext.sort();
        let key = (sc.ego().to_string(), key_ext);
        match best.get(&key) {
            Some(cur) if cur.externals() <= sc.externals() => {}
            _ => {
                best.insert(key, sc);
            }
        }
    }
    let mut scenarios: Vec<LogicalScenario> = best.into_values().cloned().collect();
    scenarios.sort_by(|a, b| a.assignment.cmp(&b.assignment));
    LogicalScenarioSet { scenarios, symmetry_reduced: true, ..set.clone_empty() }
}

impl LogicalScenarioSet {
    fn clone_empty(&self) -> LogicalScenarioSet {
        LogicalScenarioSet {
            junction: self.junction.clone(),
            n_actors: self.n_actors,
            catalog_hash: self.catalog_hash.clone(),
            symmetry_reduced: self.symmetry_reduced,
            scenarios: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture, JUNCTION_ID};
    use crate::road_model::enumerate_maneuver_instances;

    fn catalog(name: &str) -> ManeuverCatalog {
        enumerate_maneuver_instances(&fixture(name).unwrap(), JUNCTION_ID).unwrap()
    }

    #[test]
    fn t1_two_actors() {
        let cat = catalog("T1");
        let set = find_logical_scenarios(&cat, 2).unwrap();
        assert_eq!(permutation_count(&cat, 2), 36);
        assert_eq!(set.len(), 24);
    }

    #[test]
    fn rejects_single_actor() {
        assert!(matches!(find_logical_scenarios(&catalog("T1"), 1), Err(LogicalGenError::TooFewActors(1))));
    }

    #[test]
    fn self_overlap_is_dangerous() {
        let cat = catalog("X1");
        for mi in &cat.instances {
            assert!(danger_predicate(mi, mi).unwrap());
        }
    }

    #[test]
    fn opposite_right_turns_are_safe() {
        let cat = catalog("X1");
        assert!(!danger_predicate(cat.get("SR").unwrap(), cat.get("NR").unwrap()).unwrap());
    }

    #[test]
    fn output_is_sorted_and_unique() {
        let set = find_logical_scenarios(&catalog("Y1"), 3).unwrap();
        assert!(set.scenarios.windows(2).all(|w| w[0].assignment < w[1].assignment));
    }

    #[test]
    fn reduction_counts_x1() {
        let cat = catalog("X1");
        let m = OverlapMatrix::new(&cat, OVERLAP_THRESHOLD).unwrap();
        let a: Vec<usize> = (2..=4).map(|n| find_logical_scenarios_with(&cat, &m, n).unwrap().len()).collect();
        let b: Vec<usize> = (2..=4)
            .map(|n| reduce_symmetries(&find_logical_scenarios_with(&cat, &m, n).unwrap()).len())
            .collect();
        assert_eq!(a, vec![92, 748, 6332]);
        assert_eq!(b, vec![92, 420, 1460]);
    }

    #[test]
    fn reduction_keeps_smallest_ordering() {
        let sc = |a: &[&str]| LogicalScenario { assignment: a.iter().map(|s| s.to_string()).collect(), overlaps: vec![] };
        let set = LogicalScenarioSet {
            junction: "J".into(),
            n_actors: 3,
            catalog_hash: String::new(),
            symmetry_reduced: false,
            scenarios: vec![sc(&["m1", "m3", "m2"]), sc(&["m1", "m2", "m3"])],
        };
        let r = reduce_symmetries(&set);
        assert_eq!(r.scenarios.len(), 1);
        assert_eq!(r.scenarios[0].assignment, vec!["m1", "m2", "m3"]);
    }
}
