//! JSON road-map documents.
//!
//! ```json
//! { "meta": {"name": "T1", "version": "1"},
//!   "lanes": [{"id": "W_in", "kind": "incoming", "width": 3.5,
//!              "centerline": [[-52.0, -1.75], [-12.0, -1.75]],
//!              "predecessors": ["W_in_up"], "successors": ["c_W_E"]}],
//!   "junctions": [{"id": "J", "connectors": ["c_W_E"], "bounds": [[-12, -12], [12, -12], [12, 3.5], [-12, 3.5]]}] }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Junction, Lane, LaneKind, RoadMap, RoadMapError, CONNECTIVITY_TOLERANCE};
use crate::geometry::{Polygon, Polyline, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadMapDoc {
    pub meta: MetaDoc,
    pub lanes: Vec<LaneDoc>,
    pub junctions: Vec<JunctionDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaDoc {
    pub name: String,
    #[serde(default)]
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneDoc {
    pub id: String,
    pub kind: LaneKind,
    pub width: f64,
    pub centerline: Vec<[f64; 2]>,
    #[serde(default)]
    pub predecessors: Vec<String>,
    #[serde(default)]
    pub successors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionDoc {
    pub id: String,
    pub connectors: Vec<String>,
    pub bounds: Vec<[f64; 2]>,
}

impl RoadMapDoc {
    /// Applies a rigid transform to every coordinate.
    pub fn transformed(&self, f: impl Fn(Vec2) -> Vec2) -> RoadMapDoc {
        let map = |pts: &[[f64; 2]]| pts.iter().map(|&p| f(Vec2::from(p)).into()).collect::<Vec<[f64; 2]>>();
        RoadMapDoc {
            meta: self.meta.clone(),
            lanes: self
                .lanes
                .iter()
                .map(|l| LaneDoc { centerline: map(&l.centerline), ..l.clone() })
                .collect(),
            junctions: self
                .junctions
                .iter()
                .map(|j| JunctionDoc { bounds: map(&j.bounds), ..j.clone() })
                .collect(),
        }
    }
}

pub fn parse_road_map(json: &str) -> Result<RoadMap, RoadMapError> {
    let doc: RoadMapDoc = serde_json::from_str(json).map_err(|e| RoadMapError::Schema(e.to_string()))?;
    load_road_map(&doc)
}

pub fn load_road_map_file(path: impl AsRef<Path>) -> Result<RoadMap, RoadMapError> {
    let text = std::fs::read_to_string(path)?;
    parse_road_map(&text)
}

/// Validates a document into a [`RoadMap`].
pub fn load_road_map(doc: &RoadMapDoc) -> Result<RoadMap, RoadMapError> {
    if doc.lanes.is_empty() {
        return Err(RoadMapError::Schema("lane list is empty".into()));
    }
    let mut lanes = BTreeMap::new();
    for l in &doc.lanes {
        let lane_err = |reason: String| RoadMapError::Lane { lane: l.id.clone(), reason };
        if !(l.width > 0.0 && l.width.is_finite()) {
            return Err(lane_err(format!("width must be positive, got {}", l.width)));
        }
        let centerline = Polyline::new(l.centerline.iter().map(|&p| Vec2::from(p)).collect())
            .map_err(|e| lane_err(format!("centerline: {e}")))?;
        let lane = Lane {
            id: l.id.clone(),
            centerline,
            width: l.width,
            kind: l.kind,
            predecessor_ids: l.predecessors.clone(),
            successor_ids: l.successors.clone(),
        };
        if lanes.insert(l.id.clone(), lane).is_some() {
            return Err(lane_err("duplicate lane id".into()));
        }
    }

    for lane in lanes.values() {
        for target in lane.predecessor_ids.iter().chain(&lane.successor_ids) {
            if !lanes.contains_key(target) {
                return Err(RoadMapError::UnresolvedLane { lane: lane.id.clone(), target: target.clone() });
            }
        }
        for s in &lane.successor_ids {
            let succ = &lanes[s];
            let gap = lane.centerline.end().distance(succ.centerline.start());
            if gap > CONNECTIVITY_TOLERANCE {
                return Err(RoadMapError::Lane {
                    lane: lane.id.clone(),
                    reason: format!("successor {s} starts {gap:.3} m from this lane's end"),
                });
            }
            if !succ.predecessor_ids.contains(&lane.id) {
                return Err(RoadMapError::Lane {
                    lane: lane.id.clone(),
                    reason: format!("successor {s} does not list this lane as predecessor"),
                });
            }
        }
        for p in &lane.predecessor_ids {
            if !lanes[p].successor_ids.contains(&lane.id) {
                return Err(RoadMapError::Lane {
                    lane: lane.id.clone(),
                    reason: format!("predecessor {p} does not list this lane as successor"),
                });
            }
        }
    }

    let mut junctions = BTreeMap::new();
    let mut owned_connectors = BTreeSet::new();
    for j in &doc.junctions {
        let jerr = |reason: String| RoadMapError::Junction { junction: j.id.clone(), reason };
        let bounds = Polygon::new(j.bounds.iter().map(|&p| Vec2::from(p)).collect(), vec![])
            .map_err(|e| jerr(format!("bounds: {e}")))?;
        if j.connectors.is_empty() {
            return Err(jerr("no connectors".into()));
        }
        let mut incoming = BTreeSet::new();
        let mut outgoing = BTreeSet::new();
        for c in &j.connectors {
            let lane = lanes
                .get(c)
                .ok_or_else(|| RoadMapError::UnresolvedLane { lane: j.id.clone(), target: c.clone() })?;
            if lane.kind != LaneKind::InJunctionConnector {
                return Err(jerr(format!("lane {c} is not a connector")));
            }
            if !owned_connectors.insert(c.clone()) {
                return Err(jerr(format!("connector {c} belongs to more than one junction")));
            }
            if lane.predecessor_ids.len() != 1 || lane.successor_ids.len() != 1 {
                return Err(RoadMapError::Lane {
                    lane: c.clone(),
                    reason: "connector needs exactly one predecessor and one successor".into(),
                });
            }
            let pred = &lanes[&lane.predecessor_ids[0]];
            let succ = &lanes[&lane.successor_ids[0]];
            if pred.kind != LaneKind::Incoming {
                return Err(RoadMapError::Lane { lane: c.clone(), reason: "connector predecessor must be incoming".into() });
            }
            if succ.kind != LaneKind::Outgoing {
                return Err(RoadMapError::Lane { lane: c.clone(), reason: "connector successor must be outgoing".into() });
            }
            incoming.insert(pred.id.clone());
            outgoing.insert(succ.id.clone());
            if let Some(p) = lane.centerline.points().iter().find(|&&p| !bounds.contains_with_tolerance(p, 1e-6)) {
                return Err(jerr(format!("connector {c} leaves the junction bounds at ({:.3}, {:.3})", p.x, p.y)));
            }
        }
        let junction = Junction {
            id: j.id.clone(),
            connector_lane_ids: j.connectors.clone(),
            incoming_lane_ids: incoming.into_iter().collect(),
            outgoing_lane_ids: outgoing.into_iter().collect(),
            bounds,
        };
        if junctions.insert(j.id.clone(), junction).is_some() {
            return Err(jerr("duplicate junction id".into()));
        }
    }
    if let Some(dangling) = lanes
        .values()
        .find(|l| l.kind == LaneKind::InJunctionConnector && !owned_connectors.contains(&l.id))
    {
        return Err(RoadMapError::Lane { lane: dangling.id.clone(), reason: "connector not assigned to any junction".into() });
    }

    Ok(RoadMap { name: doc.meta.name.clone(), version: doc.meta.version.clone(), lanes, junctions })
}
