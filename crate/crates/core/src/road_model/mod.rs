//! Lane-level road network, junction maneuver catalogs and extended path regions.

mod catalog;
mod region;
mod schema;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Polygon, Polyline};

pub use catalog::{classify_heading_change, classify_maneuver, enumerate_maneuver_instances, STRAIGHT_THRESHOLD};
pub use region::{extend_path_region, DEFAULT_MAX_EXTENSION};
pub use schema::{load_road_map, load_road_map_file, parse_road_map, JunctionDoc, LaneDoc, MetaDoc, RoadMapDoc};

/// Maximum gap between a lane end and its successor's start.
pub const CONNECTIVITY_TOLERANCE: f64 = 0.5;

#[derive(Debug, Error)]
pub enum RoadMapError {
    #[error("road map schema: {0}")]
    Schema(String),
    #[error("lane {lane}: {reason}")]
    Lane { lane: String, reason: String },
    #[error("junction {junction}: {reason}")]
    Junction { junction: String, reason: String },
    #[error("lane {lane} references unknown lane {target}")]
    UnresolvedLane { lane: String, target: String },
    #[error("unknown junction {0}")]
    UnknownJunction(String),
    #[error("unknown lane {0}")]
    UnknownLane(String),
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneKind {
    Incoming,
    Outgoing,
    #[serde(rename = "connector")]
    InJunctionConnector,
    Plain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lane {
    pub id: String,
    pub centerline: Polyline,
    pub width: f64,
    pub kind: LaneKind,
    pub predecessor_ids: Vec<String>,
    pub successor_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub id: String,
    pub connector_lane_ids: Vec<String>,
    pub incoming_lane_ids: Vec<String>,
    pub outgoing_lane_ids: Vec<String>,
    pub bounds: Polygon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadMap {
    pub name: String,
    pub version: String,
    pub lanes: BTreeMap<String, Lane>,
    pub junctions: BTreeMap<String, Junction>,
}

impl RoadMap {
    pub fn lane(&self, id: &str) -> Result<&Lane, RoadMapError> {
        self.lanes.get(id).ok_or_else(|| RoadMapError::UnknownLane(id.to_string()))
    }

    pub fn junction(&self, id: &str) -> Result<&Junction, RoadMapError> {
        self.junctions.get(id).ok_or_else(|| RoadMapError::UnknownJunction(id.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManeuverType {
    TurnLeft,
    TurnRight,
    GoStraight,
}

impl ManeuverType {
    pub fn as_str(self) -> &'static str {
        match self {
            ManeuverType::TurnLeft => "turn_left",
            ManeuverType::TurnRight => "turn_right",
            ManeuverType::GoStraight => "go_straight",
        }
    }
}

/// One way of driving through a junction: start lane, connector, end lane.
#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverInstance {
    /// Equal to the connector lane id.
    pub id: String,
    pub junction_id: String,
    pub start_lane_id: String,
    pub connector_lane_id: String,
    pub end_lane_id: String,
    pub maneuver_type: ManeuverType,
    pub width: f64,
    pub in_junction_region: Polygon,
    pub in_junction_centerline: Polyline,
}

/// All maneuver instances of one junction, sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverCatalog {
    pub junction_id: String,
    pub instances: Vec<ManeuverInstance>,
}

impl ManeuverCatalog {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ManeuverInstance> {
        self.index_of(id).map(|i| &self.instances[i])
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.instances.binary_search_by(|m| m.id.as_str().cmp(id)).ok()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.instances.iter().map(|m| m.id.as_str())
    }
}

/// Maneuver corridor extended along its approach and exit lanes.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRegion {
    pub maneuver_instance_id: String,
    pub full_centerline: Polyline,
    pub full_region: Polygon,
    /// Arc-lengths of junction entry and exit along `full_centerline`.
    pub segment_boundaries: [f64; 2],
}

impl PathRegion {
    pub fn entry_arclength(&self) -> f64 {
        self.segment_boundaries[0]
    }

    pub fn exit_arclength(&self) -> f64 {
        self.segment_boundaries[1]
    }

    pub fn approach_length(&self) -> f64 {
        self.segment_boundaries[0]
    }

    pub fn exit_length(&self) -> f64 {
        self.full_centerline.length() - self.segment_boundaries[1]
    }
}
