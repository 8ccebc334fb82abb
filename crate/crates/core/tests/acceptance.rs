//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use common::oracles::{brute_force_fisher, brute_force_logical, corridor_pairs, raster_intersection_area, rect_pairs, sampled_rect_gap};
use junctest::analysis::{
    classify_avoidability, detect_preventive_maneuver, fisher_exact_p, odds_ratio, Avoidability, ContingencyTable2x2, MIN_EXTRA_FRAMES,
};
use junctest::concrete_gen::{static_check, ConcreteScenario, Concretizer, SpeedProfile};
use junctest::fixtures::{fixture, JUNCTION_ID};
use junctest::geometry::{polygon_intersection, polyline_intersections, rect_gap, total_area, Vec2};
use junctest::logical_gen::{find_logical_scenarios, permutation_count, reduce_symmetries, LogicalScenarioSet};
use junctest::pipeline::{reference_path, run_pipeline, PipelineConfig};
use junctest::road_model::enumerate_maneuver_instances;
use junctest::sim::{simulate, ActorState, Detection, EgoPolicy, EndReason, Event, EventKind, Frame, SimConfig, SimulationTrace, TraceHeader};
use rand::{Rng, SeedableRng};

const FIXTURES: [&str; 3] = ["T1", "X1", "Y1"];
const SIZES: [usize; 3] = [2, 3, 4];

struct Verdict {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Verdict { pass, summary: summary.into(), details: Vec::new() }
    }

    fn with(mut self, details: Vec<String>) -> Self {
        self.details = details;
        self
    }
}

/// Logical sets (full and reduced) and concretized scenarios for every fixture and size.
struct Suites {
    logical: BTreeMap<(&'static str, usize), (LogicalScenarioSet, LogicalScenarioSet)>,
    concrete: BTreeMap<(&'static str, usize), Vec<ConcreteScenario>>,
    concretizers: BTreeMap<&'static str, Concretizer>,
}

fn build_suites() -> Suites {
    let mut logical = BTreeMap::new();
    let mut concrete = BTreeMap::new();
    let mut concretizers = BTreeMap::new();
    for name in FIXTURES {
        let cz = common::concretizer(name);
        for n in SIZES {
            let full = find_logical_scenarios(cz.catalog(), n).unwrap();
            let reduced = reduce_symmetries(&full);
            let profiles = vec![SpeedProfile::default(); n];
            let scs = reduced.scenarios.iter().map(|l| cz.concretize(l, &profiles).unwrap()).collect();
            logical.insert((name, n), (full, reduced));
            concrete.insert((name, n), scs);
        }
        concretizers.insert(name, cz);
    }
    Suites { logical, concrete, concretizers }
}

fn ac1() -> Verdict {
    let start = Instant::now();
    let map = fixture("T1").unwrap();
    let cat = enumerate_maneuver_instances(&map, JUNCTION_ID).unwrap();
    let perms = permutation_count(&cat, 2);
    let dangerous = find_logical_scenarios(&cat, 2).unwrap().len();
    let secs = start.elapsed().as_secs_f64();
    Verdict::new(
        perms == 36 && dangerous == 24 && secs < 1.0,
        format!("T1 n=2: {perms} permutations, {dangerous} dangerous (want 36 / 24) in {secs:.3} s"),
    )
}

fn ac2() -> Verdict {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut checked = 0;
    for name in FIXTURES {
        let cat = enumerate_maneuver_instances(&fixture(name).unwrap(), JUNCTION_ID).unwrap();
        for n in SIZES {
            let got: BTreeSet<Vec<String>> = find_logical_scenarios(&cat, n).unwrap().scenarios.into_iter().map(|s| s.assignment).collect();
            let want = brute_force_logical(&cat, n);
            checked += want.len();
            if got != want {
                bad.push(format!("{name} n={n}: {} generated vs {} by brute force", got.len(), want.len()));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict::new(bad.is_empty() && secs < 30.0, format!("9 suites equal brute-force enumeration ({checked} scenarios) in {secs:.1} s")).with(bad)
}

fn ac3(s: &Suites) -> Verdict {
    let reference: BTreeMap<(&str, usize), (usize, usize, usize)> = [
        (("X1", 2), (92, 92, 56)),
        (("X1", 3), (748, 420, 124)),
        (("X1", 4), (6332, 1460, 160)),
        (("Y1", 2), (26, 26, 14)),
        (("Y1", 3), (102, 64, 13)),
        (("Y1", 4), (134, 32, 6)),
    ]
    .into_iter()
    .collect();
    let mut gate = true;
    let mut lines = Vec::new();
    let mut exact = 0;
    for (&(name, n), &(pa, pb, pc)) in &reference {
        let (full, reduced) = &s.logical[&(name, n)];
        let scs = &s.concrete[&(name, n)];
        // (a) B is one representative per (ego, external multiset)
        let classes: BTreeSet<(String, Vec<String>)> = full
            .scenarios
            .iter()
            .map(|sc| {
                let mut e = sc.externals().to_vec();
                e.sort();
                (sc.ego().to_string(), e)
            })
            .collect();
        let rep_ok = classes.len() == reduced.len() && reduced.scenarios.iter().all(|r| full.scenarios.contains(r));
        // (b) C is B filtered by the static check and nothing else
        let cz = &s.concretizers[name];
        let mut filter_ok = scs.len() == reduced.len();
        for sc in scs {
            let again = static_check(sc, &cz.config().footprint, cz.config().replay_dt).unwrap();
            filter_ok &= again == sc.static_report && sc.eligible() == again.violations.is_empty();
        }
        gate &= rep_ok && filter_ok;
        let (a, b, c) = (full.len(), reduced.len(), scs.iter().filter(|x| x.eligible()).count());
        if (a, b, c) == (pa, pb, pc) {
            exact += 1;
        }
        lines.push(format!("{name} n={n}: {a}→{b}→{c} (reference {pa}→{pb}→{pc}){}", if rep_ok && filter_ok { "" } else { "  GATE FAILED" }));
    }
    Verdict::new(gate, format!("B by multiset representative, C by static check; {exact}/6 triples match the reference counts exactly")).with(lines)
}

fn ac4(s: &Suites) -> Verdict {
    let mut bad = Vec::new();
    let mut total = 0;
    for (&(name, _), scs) in &s.concrete {
        let cz = &s.concretizers[name];
        for sc in scs {
            total += 1;
            let ego = &sc.actors[0];
            let ego_region = &cz.region(&ego.mi).unwrap().full_region;
            for ext in &sc.actors[1..] {
                let crosses = !polyline_intersections(&ego.path.points, &ext.path.points).is_empty();
                let overlap = total_area(&polygon_intersection(ego_region, &cz.region(&ext.mi).unwrap().full_region).unwrap()) > 0.0;
                if !(crosses && overlap) {
                    bad.push(format!("{}: {} (paths cross {crosses}, regions overlap {overlap})", sc.id, ext.mi));
                }
            }
        }
    }
    Verdict::new(bad.is_empty(), format!("{} of {total} concrete scenarios have every external crossing the ego", total - bad.len())).with(bad)
}

fn ac5(s: &Suites) -> Verdict {
    let cfg = SimConfig::default();
    let mut eligible = 0;
    let mut bad = Vec::new();
    for ((name, n), scs) in &s.concrete {
        for sc in scs.iter().filter(|x| x.eligible()) {
            eligible += 1;
            let plan = sc.first_conflict().unwrap();
            let tr = simulate(sc, &EgoPolicy::Oblivious, &cfg).unwrap();
            let hit = tr.events.iter().find(|e| e.is_collision() && e.actor == plan.ext_index);
            match hit {
                Some(e) if (e.t - plan.planned_collision_time()).abs() <= 0.3 => {}
                Some(e) => bad.push(format!("{name} n={n} {}: collision at {:.2} s, planned {:.2} s", sc.id, e.t, plan.planned_collision_time())),
                None => bad.push(format!("{name} n={n} {}: no collision with external {}", sc.id, plan.ext_index)),
            }
        }
    }
    let ok = eligible - bad.len();
    let rate = ok as f64 / eligible as f64;
    Verdict::new(rate >= 0.95, format!("{ok}/{eligible} eligible scenarios collide within 0.3 s of plan ({:.1}%, need 95%)", 100.0 * rate)).with(bad)
}

fn ac6(s: &Suites) -> Verdict {
    let cfg = SimConfig::default();
    let reactive = EgoPolicy::reactive();
    let (mut obl, mut rea, mut slowed, mut pm) = (0, 0, 0, 0);
    let mut misses = Vec::new();
    for sc in s.concrete[&("T1", 2)].iter().filter(|x| x.eligible()) {
        obl += usize::from(simulate(sc, &EgoPolicy::Oblivious, &cfg).unwrap().ego_collision().is_some());
        let tr = simulate(sc, &reactive, &cfg).unwrap();
        rea += usize::from(tr.ego_collision().is_some());
        if tr.ego_slowed_below(0.5) {
            slowed += 1;
            let reference = reference_path(sc, &reactive, &cfg, 0, 10).unwrap();
            if detect_preventive_maneuver(&tr.ego_positions(), &reference, MIN_EXTRA_FRAMES).0 {
                pm += 1;
            } else {
                misses.push(format!("{}: slowed, no slow-down location found", sc.id));
            }
        }
    }
    let rate = if slowed == 0 { 0.0 } else { pm as f64 / slowed as f64 };
    Verdict::new(
        rea < obl && slowed > 0 && rate >= 0.8,
        format!("T1 n=2 collisions: reactive {rea} < oblivious {obl}; slow-down detected in {pm}/{slowed} braking runs ({:.0}%, need 80%)", 100.0 * rate),
    )
    .with(misses)
}

fn ac7() -> Verdict {
    let mut worst = 0.0f64;
    let mut tables = 0;
    for n in 1..=40u64 {
        for a in 0..=n {
            for b in 0..=n - a {
                for c in 0..=n - a - b {
                    let d = n - a - b - c;
                    let p = fisher_exact_p(&ContingencyTable2x2::new(a, b, c, d)).unwrap();
                    worst = worst.max((p - brute_force_fisher(a, b, c, d)).abs());
                    tables += 1;
                }
            }
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..2000 {
        let n = rng.random_range(1..=40u64);
        let mut cuts = [rng.random_range(0..=n), rng.random_range(0..=n), rng.random_range(0..=n)];
        cuts.sort_unstable();
        let (a, b, c, d) = (cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], n - cuts[2]);
        let p = fisher_exact_p(&ContingencyTable2x2::new(a, b, c, d)).unwrap();
        worst = worst.max((p - brute_force_fisher(a, b, c, d)).abs());
        tables += 1;
    }
    let ors: [((u64, u64, u64, u64), f64); 10] = [
        ((1, 1, 1, 1), 1.0),
        ((10, 0, 0, 10), 441.0),
        ((2, 3, 4, 5), 10.0 / 12.0),
        ((5, 2, 1, 8), 20.0),
        ((0, 5, 5, 5), 0.5 / 5.5),
        ((3, 0, 2, 4), 12.6),
        ((7, 3, 3, 7), 49.0 / 9.0),
        ((1, 9, 9, 1), 1.0 / 81.0),
        ((12, 4, 6, 6), 3.0),
        ((0, 0, 3, 4), 4.5 / 3.5),
    ];
    let or_bad: Vec<String> = ors
        .iter()
        .filter_map(|&((a, b, c, d), want)| {
            let got = odds_ratio(&ContingencyTable2x2::new(a, b, c, d)).unwrap();
            ((got - want).abs() > 1e-12 * want.max(1.0)).then(|| format!("OR [[{a},{b}],[{c},{d}]] = {got}, want {want}"))
        })
        .collect();
    Verdict::new(
        worst <= 1e-9 && or_bad.is_empty(),
        format!("Fisher within {worst:.1e} of exact enumeration on {tables} tables (N ≤ 40); {}/10 odds ratios match", 10 - or_bad.len()),
    )
    .with(or_bad)
}

fn boundary_trace(seen: usize) -> SimulationTrace {
    let state = |x: f64| ActorState { position: Vec2::new(x, 0.0), heading: 0.0, speed: 4.0, path_progress: x, active: true };
    SimulationTrace {
        header: TraceHeader {
            run_id: "boundary".into(),
            scenario_id: "boundary".into(),
            junction: "J".into(),
            actors: vec!["SL".into(), "ES".into()],
            policy: EgoPolicy::Oblivious,
            seed: 0,
            timestep: 0.05,
            planned_collision_time: None,
            provenance: None,
        },
        frames: (0..=80)
            .map(|k| Frame {
                t: k as f64 * 0.05,
                ego_nominal_speed: 4.0,
                actors: vec![state(k as f64 * 0.2), state(30.0)],
                detections: vec![Detection { camera: true, lidar: (20..80).contains(&k) && k - 20 < seen }],
            })
            .collect(),
        events: vec![Event { t: 4.0, frame: 80, actor: 1, kind: EventKind::Collision }],
        end_reason: EndReason::EgoCollision,
    }
}

fn ac8() -> Verdict {
    let a = classify_avoidability(&boundary_trace(54), 1).unwrap();
    let b = classify_avoidability(&boundary_trace(53), 1).unwrap();
    Verdict::new(a == Avoidability::Avoidable && b == Avoidability::Unavoidable, format!("54/60 → {a:?}, 53/60 → {b:?}"))
}

fn ac9() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let snap = |out: &str| {
        let cfg = PipelineConfig { out: dir.path().join(out), ..Default::default() };
        run_pipeline(&cfg).unwrap();
        let mut files = BTreeMap::new();
        let mut stack = vec![cfg.out.clone()];
        while let Some(d) = stack.pop() {
            for e in std::fs::read_dir(&d).unwrap() {
                let p = e.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    files.insert(p.strip_prefix(&cfg.out).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
                }
            }
        }
        files
    };
    let (a, b) = (snap("a"), snap("b"));
    let differing: Vec<String> =
        a.iter().filter(|(k, v)| b.get(*k) != Some(*v)).map(|(k, _)| format!("{} differs", k.display())).collect();
    let same_set = a.len() == b.len();
    Verdict::new(same_set && differing.is_empty(), format!("two T1 pipeline runs: {} files, {} differ", a.len(), differing.len())).with(differing)
}

fn ac10() -> Verdict {
    let mut worst_area = 0.0f64;
    for (a, b) in corridor_pairs(7, 50) {
        let exact = total_area(&polygon_intersection(&a, &b).unwrap());
        let raster = raster_intersection_area(&a, &b, 0.01);
        worst_area = worst_area.max((exact - raster).abs() / exact.max(raster).max(1e-12));
    }
    let mut worst_gap = 0.0f64;
    for (a, b) in rect_pairs(11, 100) {
        worst_gap = worst_gap.max((rect_gap(&a, &b) - sampled_rect_gap(&a, &b, 1e-4)).abs());
    }
    Verdict::new(
        worst_area <= 0.01 && worst_gap <= 1e-4,
        format!("intersection area within {:.3}% of 1 cm raster (50 pairs); rect gap within {worst_gap:.1e} m of sampling (100 pairs)", 100.0 * worst_area),
    )
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(&str, Verdict)> = vec![("AC1", ac1()), ("AC2", ac2())];
    let suites = build_suites();
    results.push(("AC3", ac3(&suites)));
    results.push(("AC4", ac4(&suites)));
    results.push(("AC5", ac5(&suites)));
    results.push(("AC6", ac6(&suites)));
    results.push(("AC7", ac7()));
    results.push(("AC8", ac8()));
    results.push(("AC9", ac9()));
    results.push(("AC10", ac10()));
    let mut failed = 0;
    for (id, v) in &results {
        println!("{id:<4} {} {}", if v.pass { "PASS" } else { "FAIL" }, v.summary);
        for d in &v.details {
            println!("       {d}");
        }
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {}/{} passed in {:.1} s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
