mod common;

use std::collections::HashSet;

use junctest::sim::{
    read_trace_jsonl, simulate, trace_to_csv, trace_to_jsonl, without_externals, EgoPolicy, EndReason, EventKind,
    ReactiveParams, SimConfig,
};

#[test]
fn oblivious_collides_on_plan() {
    let cfg = SimConfig::default();
    for sc in common::eligible_suite("T1", 2) {
        let tr = simulate(&sc, &EgoPolicy::Oblivious, &cfg).unwrap();
        let plan = sc.first_conflict().unwrap();
        let hit = tr.ego_collision().unwrap_or_else(|| panic!("{}: no collision", sc.id));
        assert_eq!(hit.actor, plan.ext_index);
        assert!((hit.t - plan.planned_collision_time()).abs() <= 0.3, "{}: {} vs {}", sc.id, hit.t, plan.planned_collision_time());
        assert_eq!(tr.end_reason, EndReason::EgoCollision);
    }
}

#[test]
fn reactive_never_collides_earlier() {
    let cfg = SimConfig::default();
    let (mut obl, mut rea) = (0, 0);
    for sc in common::eligible_suite("T1", 2) {
        let a = simulate(&sc, &EgoPolicy::Oblivious, &cfg).unwrap();
        let b = simulate(&sc, &EgoPolicy::reactive(), &cfg).unwrap();
        obl += usize::from(a.ego_collision().is_some());
        rea += usize::from(b.ego_collision().is_some());
        if let (Some(ca), Some(cb)) = (a.ego_collision(), b.ego_collision()) {
            assert!(cb.t > ca.t, "{}", sc.id);
        }
    }
    assert!(rea <= obl);
}

#[test]
fn ego_alone_has_no_events_and_stays_on_path() {
    let cfg = SimConfig::default();
    for sc in common::eligible_suite("T1", 2).iter().take(4) {
        let solo = without_externals(sc);
        let tr = simulate(&solo, &EgoPolicy::reactive(), &cfg).unwrap();
        assert!(tr.events.is_empty());
        assert_eq!(tr.end_reason, EndReason::EgoPathEnd);
        let path = &solo.actors[0].path.points;
        for f in &tr.frames {
            assert!(path.distance_to(f.actors[0].position) < 1e-6);
        }
    }
}

#[test]
fn externals_follow_their_paths() {
    let cfg = SimConfig::default();
    for sc in common::eligible_suite("X1", 2).iter().step_by(7) {
        let tr = simulate(sc, &EgoPolicy::reactive(), &cfg).unwrap();
        let scheds = sc.schedules().unwrap();
        for f in &tr.frames {
            for (i, a) in f.actors.iter().enumerate().skip(1) {
                assert!(sc.actors[i].path.points.distance_to(a.position) < 1e-6);
                if a.active {
                    assert!((a.path_progress - scheds[i].s_at(f.t)).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn frames_are_uniform() {
    let sc = &common::eligible_suite("T1", 2)[0];
    let tr = simulate(sc, &EgoPolicy::reactive(), &SimConfig::default()).unwrap();
    assert!(tr.frames.len() > 61);
    for (k, f) in tr.frames.iter().enumerate() {
        assert!((f.t - k as f64 * 0.05).abs() < 1e-12);
    }
    assert!((tr.frames[60].t - tr.frames[0].t - 3.0).abs() < 1e-12);
    for w in tr.frames.windows(2) {
        assert!(w[1].actors[0].path_progress >= w[0].actors[0].path_progress);
    }
}

#[test]
fn max_duration_ends_run() {
    let sc = &common::eligible_suite("T1", 2)[0];
    let cfg = SimConfig { max_duration: 2.0, ..SimConfig::default() };
    let tr = simulate(sc, &EgoPolicy::Oblivious, &cfg).unwrap();
    assert_eq!(tr.end_reason, EndReason::MaxDuration);
    assert_eq!(tr.frames.len(), 41);
}

#[test]
fn deterministic_bytes_with_jitter() {
    let sc = &common::eligible_suite("T1", 2)[1];
    let pol = EgoPolicy::ReactiveBrake(ReactiveParams { jitter_std: 0.3, ..ReactiveParams::default() });
    let cfg = SimConfig { rng_seed: 7, ..SimConfig::default() };
    let a = trace_to_jsonl(&simulate(sc, &pol, &cfg).unwrap()).unwrap();
    let b = trace_to_jsonl(&simulate(sc, &pol, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = SimConfig { rng_seed: 8, ..cfg };
    let c = trace_to_jsonl(&simulate(sc, &pol, &other).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn collision_and_near_miss_are_exclusive() {
    let cfg = SimConfig::default();
    for sc in common::eligible_suite("T1", 3) {
        for pol in [EgoPolicy::Oblivious, EgoPolicy::reactive()] {
            let tr = simulate(&sc, &pol, &cfg).unwrap();
            let mut seen = HashSet::new();
            for e in &tr.events {
                assert!(seen.insert(e.actor), "{}: two events for actor {}", sc.id, e.actor);
                if let EventKind::NearMiss { gap } = e.kind {
                    assert!(gap > 0.0 && gap <= cfg.near_miss_threshold);
                }
            }
        }
    }
}

#[test]
fn jsonl_roundtrip() {
    let sc = &common::eligible_suite("T1", 2)[0];
    let tr = simulate(sc, &EgoPolicy::reactive(), &SimConfig::default()).unwrap();
    let text = trace_to_jsonl(&tr).unwrap();
    assert_eq!(text.lines().count(), tr.frames.len() + 2);
    let back = read_trace_jsonl(&text).unwrap();
    assert_eq!(back, tr);
    assert!(read_trace_jsonl(text.lines().skip(1).collect::<Vec<_>>().join("\n").as_str()).is_err());
}

#[test]
fn csv_export_shape() {
    let sc = &common::eligible_suite("T1", 2)[0];
    let tr = simulate(sc, &EgoPolicy::Oblivious, &SimConfig::default()).unwrap();
    let csv = trace_to_csv(&tr);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,actor,x,y,heading,speed,cam,lidar"));
    let first: Vec<_> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 8);
    assert_eq!(first[1], "0");
    assert_eq!(first[6], "");
}

#[test]
fn malformed_scenario_rejected() {
    let mut sc = common::eligible_suite("T1", 2)[0].clone();
    sc.actors.swap(0, 1);
    assert!(simulate(&sc, &EgoPolicy::Oblivious, &SimConfig::default()).is_err());
    let mut sc = common::eligible_suite("T1", 2)[0].clone();
    sc.actors[1].path.region_class.pop();
    assert!(simulate(&sc, &EgoPolicy::Oblivious, &SimConfig::default()).is_err());
    let bad = SimConfig { timestep: 0.0, ..SimConfig::default() };
    assert!(simulate(&common::eligible_suite("T1", 2)[0], &EgoPolicy::Oblivious, &bad).is_err());
}

