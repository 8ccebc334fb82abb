use super::{ManeuverInstance, PathRegion, RoadMap, RoadMapError};
use crate::geometry::{buffer_centerline, Polyline};

pub const DEFAULT_MAX_EXTENSION: f64 = 60.0;

/// Lanes reached by following unique links from `start` until `budget` meters
/// are covered or the chain branches / ends.
fn chain<'a>(map: &'a RoadMap, first: &'a str, budget: f64, forward: bool) -> Result<Vec<&'a Polyline>, RoadMapError> {
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut covered = 0.0;
    let mut current = Some(first);
    while let Some(id) = current {
        if covered >= budget || !seen.insert(id) {
            break;
        }
        let lane = map.lane(id)?;
        out.push(&lane.centerline);
        covered += lane.centerline.length();
        let next = if forward { &lane.successor_ids } else { &lane.predecessor_ids };
        current = match next.as_slice() {
            [only] => Some(only.as_str()),
            _ => None,
        };
    }
    Ok(out)
}

/// Connector centerline with up to `max_extension` meters of approach and exit lanes.
pub fn extend_path_region(map: &RoadMap, mi: &ManeuverInstance, max_extension: f64) -> Result<PathRegion, RoadMapError> {
    let max_extension = max_extension.max(0.0);
    let connector = &mi.in_junction_centerline;

    let mut before = chain(map, &mi.start_lane_id, max_extension, false)?;
    before.reverse();
    let after = chain(map, &mi.end_lane_id, max_extension, true)?;

    let mut parts: Vec<Polyline> = Vec::new();
    let mut entry = 0.0;
    if !before.is_empty() && max_extension > 0.0 {
        let joined = Polyline::concat(&before.iter().map(|p| (*p).clone()).collect::<Vec<_>>())?;
        let len = joined.length();
        let approach = joined.slice(len - len.min(max_extension), len)?;
        // lanes may meet with a small gap, bridged by a straight join
        entry = approach.length() + approach.end().distance(connector.start());
        parts.push(approach);
    }
    parts.push(connector.clone());
    let mut exit = 0.0;
    if !after.is_empty() && max_extension > 0.0 {
        let joined = Polyline::concat(&after.iter().map(|p| (*p).clone()).collect::<Vec<_>>())?;
        exit = joined.length().min(max_extension);
        parts.push(joined.slice(0.0, exit)?);
    }
    let full = Polyline::concat(&parts)?;
    let exit_s = full.length() - exit;
    let full_region = buffer_centerline(&full, mi.width / 2.0)?;
    Ok(PathRegion {
        maneuver_instance_id: mi.id.clone(),
        full_centerline: full,
        full_region,
        segment_boundaries: [entry, exit_s],
    })
}
