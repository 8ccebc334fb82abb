//! Built-in junction maps: `T1` (three-way, one lane per direction), `X1`
//! (four-way, one lane per direction) and `Y1` (three-way, two lanes per direction).
//!
//! All maps use right-hand traffic, 3.5 m lanes, a square junction box centered on
//! the origin, 40 m incoming/outgoing lanes and 50 m plain lanes beyond those.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::Vec2;
use crate::road_model::{load_road_map, JunctionDoc, LaneDoc, LaneKind, MetaDoc, RoadMap, RoadMapDoc, RoadMapError};

pub const FIXTURE_NAMES: [&str; 3] = ["T1", "X1", "Y1"];
pub const JUNCTION_ID: &str = "J";

const LANE_WIDTH: f64 = 3.5;
const ARM_LANE: f64 = 40.0;
const PLAIN_LANE: f64 = 50.0;
/// Straight lead-in/out of left-turn connectors.
const LEFT_LEAD: f64 = 2.0;
const ARMS: [&str; 4] = ["S", "E", "N", "W"];

#[derive(Clone, Copy)]
enum Turn {
    Right,
    Straight,
    Left,
}

struct Connector {
    id: &'static str,
    arm: usize,
    turn: Turn,
    /// Lane index (1 = inner) on the approach and exit arms.
    lane_in: usize,
    lane_out: usize,
}

fn offset(lane: usize) -> f64 {
    LANE_WIDTH * (lane as f64 - 0.5)
}

/// Quarter turns counter-clockwise; exact for axis-aligned data.
fn rot(p: Vec2, k: usize) -> Vec2 {
    (0..k % 4).fold(p, |q, _| Vec2::new(-q.y, q.x))
}

fn arc(c: Vec2, r: f64, a0: f64, a1: f64) -> Vec<Vec2> {
    let n = ((a1 - a0).abs() / 3f64.to_radians()) as usize;
    let n = n.max(8);
    (0..=n)
        .map(|i| {
            let a = a0 + (a1 - a0) * i as f64 / n as f64;
            c + Vec2::new(r * a.cos(), r * a.sin())
        })
        .collect()
}

/// Connector centerline in the frame of an approach from the south.
fn canonical_connector(h: f64, turn: Turn, o_in: f64, o_out: f64) -> Vec<Vec2> {
    match turn {
        Turn::Right => {
            let r = h - o_in;
            debug_assert!((h - o_out - r).abs() < 1e-9);
            arc(Vec2::new(h, -h), r, PI, FRAC_PI_2)
        }
        Turn::Straight => vec![Vec2::new(o_in, -h), Vec2::new(o_out, h)],
        Turn::Left => {
            let r = h + o_in - LEFT_LEAD;
            let c = Vec2::new(o_in - r, o_out - r);
            let mut pts = vec![Vec2::new(o_in, -h)];
            pts.extend(arc(c, r, 0.0, FRAC_PI_2));
            pts.push(Vec2::new(-h, o_out));
            pts.dedup_by(|a, b| a.distance(*b) < 1e-9);
            pts
        }
    }
}

fn exit_arm(arm: usize, turn: Turn) -> usize {
    (arm
        + match turn {
            Turn::Right => 1,
            Turn::Straight => 2,
            Turn::Left => 3,
        })
        % 4
}

fn build(name: &str, h: f64, connectors: &[Connector]) -> RoadMapDoc {
    use std::collections::BTreeMap;

    let pts = |v: Vec<Vec2>| v.into_iter().map(<[f64; 2]>::from).collect::<Vec<_>>();
    let in_id = |arm: usize, lane: usize| format!("{}_in{lane}", ARMS[arm]);
    let out_id = |arm: usize, lane: usize| format!("{}_out{lane}", ARMS[arm]);

    // (arm, lane) -> connector ids
    let mut starts: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
    let mut ends: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
    let mut lanes = Vec::new();
    for c in connectors {
        let out_arm = exit_arm(c.arm, c.turn);
        starts.entry((c.arm, c.lane_in)).or_default().push(c.id.to_string());
        ends.entry((out_arm, c.lane_out)).or_default().push(c.id.to_string());
        let line = canonical_connector(h, c.turn, offset(c.lane_in), offset(c.lane_out));
        lanes.push(LaneDoc {
            id: c.id.to_string(),
            kind: LaneKind::InJunctionConnector,
            width: LANE_WIDTH,
            centerline: pts(line.into_iter().map(|p| rot(p, c.arm)).collect()),
            predecessors: vec![in_id(c.arm, c.lane_in)],
            successors: vec![out_id(out_arm, c.lane_out)],
        });
    }
    for (&(arm, lane), succ) in &starts {
        let o = offset(lane);
        let up = format!("{}_up{lane}", ARMS[arm]);
        let seg = |y0: f64, y1: f64| pts(vec![rot(Vec2::new(o, y0), arm), rot(Vec2::new(o, y1), arm)]);
        lanes.push(LaneDoc {
            id: up.clone(),
            kind: LaneKind::Plain,
            width: LANE_WIDTH,
            centerline: seg(-h - ARM_LANE - PLAIN_LANE, -h - ARM_LANE),
            predecessors: vec![],
            successors: vec![in_id(arm, lane)],
        });
        lanes.push(LaneDoc {
            id: in_id(arm, lane),
            kind: LaneKind::Incoming,
            width: LANE_WIDTH,
            centerline: seg(-h - ARM_LANE, -h),
            predecessors: vec![up],
            successors: succ.clone(),
        });
    }
    for (&(arm, lane), pred) in &ends {
        let o = -offset(lane);
        let dn = format!("{}_dn{lane}", ARMS[arm]);
        let seg = |y0: f64, y1: f64| pts(vec![rot(Vec2::new(o, y0), arm), rot(Vec2::new(o, y1), arm)]);
        lanes.push(LaneDoc {
            id: out_id(arm, lane),
            kind: LaneKind::Outgoing,
            width: LANE_WIDTH,
            centerline: seg(-h, -h - ARM_LANE),
            predecessors: pred.clone(),
            successors: vec![dn.clone()],
        });
        lanes.push(LaneDoc {
            id: dn,
            kind: LaneKind::Plain,
            width: LANE_WIDTH,
            centerline: seg(-h - ARM_LANE, -h - ARM_LANE - PLAIN_LANE),
            predecessors: vec![out_id(arm, lane)],
            successors: vec![],
        });
    }
    lanes.sort_by(|a, b| a.id.cmp(&b.id));
    RoadMapDoc {
        meta: MetaDoc { name: name.to_string(), version: "1".to_string() },
        lanes,
        junctions: vec![JunctionDoc {
            id: JUNCTION_ID.to_string(),
            connectors: connectors.iter().map(|c| c.id.to_string()).collect(),
            bounds: vec![[-h, -h], [h, -h], [h, h], [-h, h]],
        }],
    }
}

fn conn(id: &'static str, arm: usize, turn: Turn, lane: usize) -> Connector {
    Connector { id, arm, turn, lane_in: lane, lane_out: lane }
}

pub fn t1_doc() -> RoadMapDoc {
    use Turn::*;
    build(
        "T1",
        12.0,
        &[
            conn("EL", 1, Left, 1),
            conn("ES", 1, Straight, 1),
            conn("SL", 0, Left, 1),
            conn("SR", 0, Right, 1),
            conn("WR", 3, Right, 1),
            conn("WS", 3, Straight, 1),
        ],
    )
}

pub fn x1_doc() -> RoadMapDoc {
    use Turn::*;
    let ids = [
        ["SR", "SS", "SL"],
        ["ER", "ES", "EL"],
        ["NR", "NS", "NL"],
        ["WR", "WS", "WL"],
    ];
    let conns: Vec<Connector> = (0..4)
        .flat_map(|arm| [Right, Straight, Left].into_iter().enumerate().map(move |(i, t)| conn(ids[arm][i], arm, t, 1)))
        .collect();
    build("X1", 12.0, &conns)
}

pub fn y1_doc() -> RoadMapDoc {
    use Turn::*;
    build(
        "Y1",
        15.5,
        &[
            conn("EL", 1, Left, 1),
            conn("ES1", 1, Straight, 1),
            conn("ES2", 1, Straight, 2),
            conn("SL", 0, Left, 1),
            conn("SR", 0, Right, 2),
            conn("WR", 3, Right, 2),
            conn("WS1", 3, Straight, 1),
            conn("WS2", 3, Straight, 2),
        ],
    )
}

pub fn fixture_doc(name: &str) -> Option<RoadMapDoc> {
    match name {
        "T1" => Some(t1_doc()),
        "X1" => Some(x1_doc()),
        "Y1" => Some(y1_doc()),
        _ => None,
    }
}

pub fn fixture(name: &str) -> Result<RoadMap, RoadMapError> {
    let doc = fixture_doc(name).ok_or_else(|| RoadMapError::Schema(format!("no built-in map named {name}")))?;
    load_road_map(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::road_model::{enumerate_maneuver_instances, ManeuverType};

    #[test]
    fn all_fixtures_load() {
        for name in FIXTURE_NAMES {
            fixture(name).unwrap();
        }
    }

    #[test]
    fn maneuver_types_match_names() {
        for name in FIXTURE_NAMES {
            let map = fixture(name).unwrap();
            let cat = enumerate_maneuver_instances(&map, JUNCTION_ID).unwrap();
            for mi in &cat.instances {
                let expect = match mi.id.as_bytes()[1] {
                    b'L' => ManeuverType::TurnLeft,
                    b'R' => ManeuverType::TurnRight,
                    _ => ManeuverType::GoStraight,
                };
                assert_eq!(mi.maneuver_type, expect, "{name}/{}", mi.id);
            }
        }
    }

    #[test]
    fn catalog_sizes() {
        let sizes: Vec<usize> = FIXTURE_NAMES
            .iter()
            .map(|n| enumerate_maneuver_instances(&fixture(n).unwrap(), JUNCTION_ID).unwrap().len())
            .collect();
        assert_eq!(sizes, vec![6, 12, 8]);
    }
}
