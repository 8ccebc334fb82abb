use std::f64::consts::FRAC_PI_6;

use super::{ManeuverCatalog, ManeuverInstance, ManeuverType, RoadMap, RoadMapError};
use crate::geometry::{buffer_centerline, wrap_angle, Polyline};

/// Heading change (rad) below which a maneuver counts as straight.
pub const STRAIGHT_THRESHOLD: f64 = FRAC_PI_6;

pub fn classify_heading_change(delta: f64) -> ManeuverType {
    if delta.abs() <= STRAIGHT_THRESHOLD {
        ManeuverType::GoStraight
    } else if delta > 0.0 {
        ManeuverType::TurnLeft
    } else {
        ManeuverType::TurnRight
    }
}

fn heading_change(centerline: &Polyline) -> f64 {
    let d = wrap_angle(centerline.end_heading() - centerline.start_heading());
    // normalize to (-π, π]
    if d <= -std::f64::consts::PI { d + std::f64::consts::TAU } else { d }
}

pub fn classify_maneuver(mi: &ManeuverInstance) -> ManeuverType {
    classify_heading_change(heading_change(&mi.in_junction_centerline))
}

/// One maneuver instance per connector lane of the junction.
pub fn enumerate_maneuver_instances(map: &RoadMap, junction_id: &str) -> Result<ManeuverCatalog, RoadMapError> {
    let junction = map.junction(junction_id)?;
    let mut instances = Vec::with_capacity(junction.connector_lane_ids.len());
    for cid in &junction.connector_lane_ids {
        let conn = map.lane(cid)?;
        let region = buffer_centerline(&conn.centerline, conn.width / 2.0)?;
        instances.push(ManeuverInstance {
            id: cid.clone(),
            junction_id: junction_id.to_string(),
            start_lane_id: conn.predecessor_ids[0].clone(),
            connector_lane_id: cid.clone(),
            end_lane_id: conn.successor_ids[0].clone(),
            maneuver_type: classify_heading_change(heading_change(&conn.centerline)),
            width: conn.width,
            in_junction_region: region,
            in_junction_centerline: conn.centerline.clone(),
        });
    }
    instances.sort_by(|a, b| a.id.cmp(&b.id));
    let mut pairs = std::collections::BTreeSet::new();
    for mi in &instances {
        if !pairs.insert((mi.start_lane_id.clone(), mi.end_lane_id.clone())) {
            return Err(RoadMapError::Junction {
                junction: junction_id.to_string(),
                reason: format!("lanes {} -> {} connected more than once", mi.start_lane_id, mi.end_lane_id),
            });
        }
    }
    Ok(ManeuverCatalog { junction_id: junction_id.to_string(), instances })
}
