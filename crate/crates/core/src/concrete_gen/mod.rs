//! Concrete paths and timing for logical scenarios, plus static simulability checks.

mod static_check;
mod target;
mod timing;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{rect_overlap, GeometryError, OrientedRect, Polygon, Polyline, Vec2};
use crate::logical_gen::{ego_entry_arclength, LogicalGenError, LogicalScenario, OverlapMatrix};
use crate::road_model::{extend_path_region, ManeuverCatalog, PathRegion, RoadMap, RoadMapError};

pub use static_check::{static_check, StaticCheckReport, Violation, ViolationKind};
pub use target::{choose_target_point, chord_through, TargetPoint, MIN_CROSSING_ANGLE};
pub use timing::{classify_points, path_time, Acceleration, RegionClass, SpeedProfile, SpeedSchedule};

/// Extra time granted per prior conflict on top of its traversal time.
pub const PENALTY_MARGIN: f64 = 1.0;
/// Allowed mismatch between planned and emitted external arrival times.
pub const TIMING_TOLERANCE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum ConcreteError {
    #[error("invalid speed profile: {0}")]
    InvalidProfile(String),
    #[error("inconsistent scenario: {0}")]
    Inconsistent(String),
    #[error("unknown maneuver instance {0}")]
    UnknownManeuver(String),
    #[error("expected {expected} speed profiles, got {got}")]
    ProfileCount { expected: usize, got: usize },
    #[error(transparent)]
    Road(#[from] RoadMapError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Logical(#[from] LogicalGenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Ego,
    External,
}

/// Qualitative start-distance labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceLabel {
    Close,
    Medium,
}

impl DistanceLabel {
    pub fn meters(self) -> f64 {
        match self {
            DistanceLabel::Close => 15.0,
            DistanceLabel::Medium => 35.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub length: f64,
    pub width: f64,
}

impl Default for Footprint {
    fn default() -> Self {
        Footprint { length: 4.7, width: 2.0 }
    }
}

impl Footprint {
    pub fn at(&self, center: Vec2, heading: f64) -> OrientedRect {
        OrientedRect { center, heading, length: self.length, width: self.width }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcreteConfig {
    /// Spacing of path points (m).
    pub step: f64,
    /// Ego start distance before junction entry (m); overridden by `start_label`.
    pub start_distance: f64,
    pub start_label: Option<DistanceLabel>,
    pub max_extension: f64,
    /// Distance externals keep driving past their overlap chord.
    pub forward_extension: f64,
    /// Distance the ego keeps driving past the junction exit.
    pub ego_exit_extension: f64,
    pub footprint: Footprint,
    /// Time the planned ego arrival so footprints first touch when the external reaches the target.
    pub contact_alignment: bool,
    pub replay_dt: f64,
}

impl Default for ConcreteConfig {
    fn default() -> Self {
        ConcreteConfig {
            step: 0.5,
            start_distance: 30.0,
            start_label: None,
            max_extension: crate::road_model::DEFAULT_MAX_EXTENSION,
            forward_extension: 20.0,
            ego_exit_extension: 20.0,
            footprint: Footprint::default(),
            contact_alignment: true,
            replay_dt: 0.05,
        }
    }
}

impl ConcreteConfig {
    pub fn ego_start_distance(&self) -> f64 {
        self.start_label.map_or(self.start_distance, DistanceLabel::meters)
    }

    pub fn validate(&self) -> Result<(), ConcreteError> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(pos(self.step) && pos(self.replay_dt) && pos(self.footprint.length) && pos(self.footprint.width)) {
            return Err(ConcreteError::Inconsistent("step, replay_dt and footprint must be positive".into()));
        }
        if self.start_distance < 0.0 || self.max_extension < 0.0 || self.forward_extension < 0.0 || self.ego_exit_extension < 0.0 {
            return Err(ConcreteError::Inconsistent("distances must be non-negative".into()));
        }
        Ok(())
    }
}

/// Sampled path with per-point region class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcretePath {
    #[serde(rename = "path")]
    pub points: Polyline,
    pub region_class: Vec<RegionClass>,
    pub start_heading: f64,
}

impl ConcretePath {
    pub fn new(points: Polyline, bounds: &Polygon) -> ConcretePath {
        let region_class = classify_points(&points, bounds);
        let start_heading = points.start_heading();
        ConcretePath { points, region_class, start_heading }
    }

    pub fn schedule(&self, profile: &SpeedProfile) -> Result<SpeedSchedule, ConcreteError> {
        SpeedSchedule::new(&self.points, &self.region_class, profile)
    }

    pub fn pose_at(&self, s: f64) -> (Vec2, f64) {
        self.points.point_at_clamped(s)
    }

    pub fn length(&self) -> f64 {
        self.points.length()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcreteActor {
    pub role: Role,
    pub mi: String,
    #[serde(flatten)]
    pub path: ConcretePath,
    pub profile: SpeedProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictPlan {
    pub ext_index: usize,
    /// Position of this conflict along the ego path (0 = first).
    pub order: usize,
    pub target_point: Vec2,
    pub ego_eta: f64,
    pub ext_eta: f64,
    pub penalty: f64,
    /// Geometric conflict point on both centerlines; `target_point` is where the
    /// external is at the planned first contact.
    pub conflict_point: Vec2,
    /// Ego arrival time at `conflict_point`.
    pub conflict_eta: f64,
    /// Time the external needs to cross its overlap chord.
    pub traversal_time: f64,
    pub ego_conflict_arclength: f64,
    pub ext_target_arclength: f64,
    pub crossing: bool,
}

impl ConflictPlan {
    pub fn planned_collision_time(&self) -> f64 {
        self.ego_eta + self.penalty
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcreteScenario {
    pub id: String,
    pub junction: String,
    pub logical: LogicalScenario,
    pub actors: Vec<ConcreteActor>,
    /// Indexed in external order (`conflict_plan[i].ext_index == i + 1`).
    pub conflict_plan: Vec<ConflictPlan>,
    /// Problems found while deriving paths (only `PathTooShort`).
    pub derivation_flags: Vec<Violation>,
    pub static_report: StaticCheckReport,
}

impl ConcreteScenario {
    pub fn n_actors(&self) -> usize {
        self.actors.len()
    }

    pub fn eligible(&self) -> bool {
        self.static_report.violations.is_empty()
    }

    /// Plan of the conflict that comes first along the ego path.
    pub fn first_conflict(&self) -> Option<&ConflictPlan> {
        self.conflict_plan.iter().min_by_key(|p| p.order)
    }

    pub fn schedules(&self) -> Result<Vec<SpeedSchedule>, ConcreteError> {
        self.actors.iter().map(|a| a.path.schedule(&a.profile)).collect()
    }
}

/// Sum over prior conflicts of their traversal time plus the fixed margin.
pub fn get_time_penalty(prior_traversal_times: &[f64]) -> f64 {
    prior_traversal_times.iter().map(|t| t + PENALTY_MARGIN).sum()
}

#[derive(Debug, Clone)]
struct PairGeometry {
    target: TargetPoint,
    /// Ext centerline interval inside the overlap containing the target.
    chord: (f64, f64),
    ego_entry: f64,
}

/// External path candidate: grid anchored at the target, covering the whole
/// available approach.
#[derive(Debug)]
struct ExtCandidate {
    path: ConcretePath,
    schedule: SpeedSchedule,
    /// Index of the target point in `path`.
    target_index: usize,
    /// Arc-length of the target along the candidate path.
    target_s: f64,
}

type ProfileKey = [u64; 3];

fn profile_key(p: &SpeedProfile) -> ProfileKey {
    let a = match p.acceleration {
        Acceleration::Instantaneous => 0,
        Acceleration::Finite(a) => a.to_bits(),
    };
    [p.in_junction_speed.to_bits(), p.outside_speed.to_bits(), a]
}

/// Derives concrete scenarios for one junction; caches per-maneuver-pair work.
pub struct Concretizer {
    catalog: ManeuverCatalog,
    matrix: OverlapMatrix,
    regions: Vec<PathRegion>,
    bounds: Polygon,
    cfg: ConcreteConfig,
    pairs: HashMap<(usize, usize), PairGeometry>,
    candidates: Mutex<HashMap<(usize, usize, ProfileKey), Arc<ExtCandidate>>>,
}

impl Concretizer {
    pub fn new(map: &RoadMap, catalog: ManeuverCatalog, overlap_threshold: f64, cfg: ConcreteConfig) -> Result<Self, ConcreteError> {
        cfg.validate()?;
        let bounds = map.junction(&catalog.junction_id)?.bounds.clone();
        let matrix = OverlapMatrix::new(&catalog, overlap_threshold)?;
        let regions = catalog
            .instances
            .par_iter()
            .map(|mi| extend_path_region(map, mi, cfg.max_extension))
            .collect::<Result<Vec<_>, _>>()?;
        let n = catalog.len();
        let pair_list: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| matrix.overlapping(i, j)).collect();
        let computed = pair_list
            .par_iter()
            .map(|&(i, j)| {
                let pieces = matrix.pieces(i, j);
                let (ego_line, ext_line) = (&regions[i].full_centerline, &regions[j].full_centerline);
                let target = choose_target_point(ego_line, ext_line, pieces)?;
                let chord = chord_through(ext_line, pieces, target.s_ext)
                    .ok_or_else(|| ConcreteError::Inconsistent(format!("{} has no chord through its overlap", catalog.instances[j].id)))?;
                let ego_entry = ego_entry_arclength(&catalog.instances[i], pieces);
                Ok(((i, j), PairGeometry { target, chord, ego_entry }))
            })
            .collect::<Result<Vec<_>, ConcreteError>>()?;
        Ok(Concretizer {
            catalog,
            matrix,
            regions,
            bounds,
            cfg,
            pairs: computed.into_iter().collect(),
            candidates: Mutex::new(HashMap::new()),
        })
    }

    pub fn catalog(&self) -> &ManeuverCatalog {
        &self.catalog
    }

    pub fn config(&self) -> &ConcreteConfig {
        &self.cfg
    }

    pub fn bounds(&self) -> &Polygon {
        &self.bounds
    }

    pub fn region(&self, mi: &str) -> Option<&PathRegion> {
        self.catalog.index_of(mi).map(|i| &self.regions[i])
    }

    pub fn overlap_matrix(&self) -> &OverlapMatrix {
        &self.matrix
    }

    fn index(&self, mi: &str) -> Result<usize, ConcreteError> {
        self.catalog.index_of(mi).ok_or_else(|| ConcreteError::UnknownManeuver(mi.to_string()))
    }

    fn sample(&self, line: &Polyline, arclengths: &[f64]) -> Result<Polyline, ConcreteError> {
        Ok(Polyline::new(arclengths.iter().map(|&s| line.point_at_clamped(s).0).collect())?)
    }

    /// Point on the ego centerline where the ego starts; `true` if the approach was too short.
    pub fn choose_ego_start(&self, region: &PathRegion) -> (f64, Vec2, bool) {
        let want = region.entry_arclength() - self.cfg.ego_start_distance();
        let s = want.max(0.0);
        (s, region.full_centerline.point_at_clamped(s).0, want < -1e-9)
    }

    /// Ego path from its start point to the exit extension; returns the start arc-length
    /// on the region centerline and whether the approach was clipped.
    pub fn ego_path(&self, mi: &str) -> Result<(ConcretePath, f64, bool), ConcreteError> {
        let region = &self.regions[self.index(mi)?];
        let (s0, _, clipped) = self.choose_ego_start(region);
        let line = &region.full_centerline;
        let s1 = (region.exit_arclength() + self.cfg.ego_exit_extension).min(line.length());
        let ss = line.chord_walk(s0, s1, self.cfg.step);
        Ok((ConcretePath::new(self.sample(line, &ss)?, &self.bounds), s0, clipped))
    }

    fn ext_candidate(&self, j: usize, target_s: f64, chord_end: f64, profile: &SpeedProfile) -> Result<Arc<ExtCandidate>, ConcreteError> {
        let key = (j, (target_s * 1e6).round() as usize, profile_key(profile));
        if let Some(c) = self.candidates.lock().expect("cache lock").get(&key) {
            return Ok(c.clone());
        }
        let line = &self.regions[j].full_centerline;
        let mut back = line.chord_walk(target_s, 0.0, self.cfg.step);
        // drop a trailing partial step so spacing stays uniform up to the target
        if back.len() > 1 {
            let (a, b) = (line.point_at_clamped(back[back.len() - 2]).0, line.point_at_clamped(back[back.len() - 1]).0);
            if (a.distance(b) - self.cfg.step).abs() > 1e-9 {
                back.pop();
            }
        }
        back.reverse();
        let target_index = back.len() - 1;
        let end = (chord_end + self.cfg.forward_extension).min(line.length());
        let mut ss = back;
        if end > target_s + 1e-9 {
            ss.extend(line.chord_walk(target_s, end, self.cfg.step).into_iter().skip(1));
        }
        let path = ConcretePath::new(self.sample(line, &ss)?, &self.bounds);
        let schedule = path.schedule(profile)?;
        let target_s_path = path.points.cumulative()[target_index];
        let cand = Arc::new(ExtCandidate { path, schedule, target_index, target_s: target_s_path });
        self.candidates.lock().expect("cache lock").insert(key, cand.clone());
        Ok(cand)
    }

    /// First footprint contact (ego clock) when the external runs `lead` seconds ahead of
    /// its own schedule. `None` if the footprints never touch or already touch at t = 0.
    fn first_contact(&self, ego: &ConcretePath, ego_sched: &SpeedSchedule, ext: &ConcretePath, ext_sched: &SpeedSchedule, lead: f64) -> Option<f64> {
        let fp = self.cfg.footprint;
        let dt = 0.01;
        let end = ego_sched.total_time().min(ext_sched.total_time() - lead);
        let steps = (end / dt).floor().max(0.0) as usize;
        for k in 0..=steps {
            let t = k as f64 * dt;
            let (pe, he) = ego.pose_at(ego_sched.s_at(t));
            let (px, hx) = ext.pose_at(ext_sched.s_at(t + lead));
            if rect_overlap(&fp.at(pe, he), &fp.at(px, hx)) {
                return (k > 0).then_some(t);
            }
        }
        None
    }

    /// Concretizes one logical scenario and runs the static checks.
    pub fn concretize(&self, logical: &LogicalScenario, profiles: &[SpeedProfile]) -> Result<ConcreteScenario, ConcreteError> {
        let mut sc = self.derive_concrete_paths(logical, profiles)?;
        sc.static_report = static_check(&sc, &self.cfg.footprint, self.cfg.replay_dt)?;
        Ok(sc)
    }

    pub fn derive_concrete_paths(&self, logical: &LogicalScenario, profiles: &[SpeedProfile]) -> Result<ConcreteScenario, ConcreteError> {
        let n = logical.n_actors();
        if n < 2 {
            return Err(LogicalGenError::TooFewActors(n).into());
        }
        if profiles.len() != n {
            return Err(ConcreteError::ProfileCount { expected: n, got: profiles.len() });
        }
        for p in profiles {
            p.validate()?;
        }
        let idx: Vec<usize> = logical.assignment.iter().map(|m| self.index(m)).collect::<Result<_, _>>()?;
        let ego = idx[0];
        let mut flags = Vec::new();

        let (ego_path, _, clipped) = self.ego_path(&logical.assignment[0])?;
        if clipped {
            flags.push(Violation {
                kind: ViolationKind::PathTooShort,
                actors: vec![0],
                detail: format!("ego approach shorter than {} m", self.cfg.ego_start_distance()),
            });
        }
        let ego_sched = ego_path.schedule(&profiles[0])?;

        let mut order: Vec<usize> = (1..n).collect();
        let pair = |k: usize| -> Result<&PairGeometry, ConcreteError> {
            self.pairs.get(&(ego, idx[k])).ok_or_else(|| {
                ConcreteError::Inconsistent(format!(
                    "{} does not overlap ego maneuver {}",
                    logical.assignment[k], logical.assignment[0]
                ))
            })
        };
        for &k in &order {
            pair(k)?;
        }
        order.sort_by(|&a, &b| {
            let (pa, pb) = (&self.pairs[&(ego, idx[a])], &self.pairs[&(ego, idx[b])]);
            pa.ego_entry
                .total_cmp(&pb.ego_entry)
                .then_with(|| logical.assignment[a].cmp(&logical.assignment[b]))
                .then(a.cmp(&b))
        });

        let mut actors: Vec<Option<ConcreteActor>> = vec![None; n];
        let mut plans: Vec<Option<ConflictPlan>> = vec![None; n - 1];
        let mut prior = Vec::new();
        for (rank, &k) in order.iter().enumerate() {
            let j = idx[k];
            let pg = pair(k)?;
            let profile = &profiles[k];
            let cand = self.ext_candidate(j, pg.target.s_ext, pg.chord.1, profile)?;

            let s_ego_target = ego_path.points.project(pg.target.point).s;
            let t_meet = ego_sched.time_at(s_ego_target);
            let penalty = get_time_penalty(&prior);
            let budget = t_meet + penalty;

            // choose how many grid steps before the target the external starts
            let t_target = cand.schedule.time_at(cand.target_s);
            let cum = cand.path.points.cumulative();
            let mut best = cand.target_index;
            let mut best_err = f64::INFINITY;
            for start in 0..=cand.target_index {
                let err = ((t_target - cand.schedule.time_at(cum[start])) - budget).abs();
                if err < best_err - 1e-12 {
                    best_err = err;
                    best = start;
                }
            }
            let available = t_target;
            if best_err > TIMING_TOLERANCE {
                flags.push(Violation {
                    kind: ViolationKind::PathTooShort,
                    actors: vec![k],
                    detail: format!("needs {budget:.3} s of approach, lane provides {available:.3} s"),
                });
            }
            let pts = cand.path.points.points()[best..].to_vec();
            let points = if pts.len() >= 2 {
                Polyline::new(pts)?
            } else {
                // target at the very end of the lane: keep a minimal stub
                cand.path.points.slice(cum[best.saturating_sub(1)], cum[best])?
            };
            let path = ConcretePath::new(points, &self.bounds);
            let sched = path.schedule(profile)?;
            let conflict_arclength = cand.target_s - cum[best];
            // Predict the first contact of the co-arrival configuration (the external
            // reaching the conflict point together with the ego) and anchor the plan there.
            let contact = if self.cfg.contact_alignment {
                self.first_contact(&ego_path, &ego_sched, &path, &sched, penalty)
            } else {
                None
            };
            let (target_point, ego_eta, ext_target_arclength) = match contact {
                Some(c) => {
                    let s_c = sched.s_at(c + penalty);
                    (path.pose_at(s_c).0, c, s_c)
                }
                None => (pg.target.point, t_meet, conflict_arclength),
            };
            let ext_eta = sched.time_at(ext_target_arclength);
            let traversal_time = (pg.chord.1 - pg.chord.0) / profile.in_junction_speed;
            prior.push(traversal_time);

            plans[k - 1] = Some(ConflictPlan {
                ext_index: k,
                order: rank,
                target_point,
                ego_eta,
                ext_eta,
                penalty,
                conflict_point: pg.target.point,
                conflict_eta: t_meet,
                traversal_time,
                ego_conflict_arclength: s_ego_target,
                ext_target_arclength,
                crossing: pg.target.crossing,
            });
            actors[k] = Some(ConcreteActor { role: Role::External, mi: logical.assignment[k].clone(), path, profile: *profile });
        }
        actors[0] = Some(ConcreteActor { role: Role::Ego, mi: logical.assignment[0].clone(), path: ego_path, profile: profiles[0] });
        let actors = actors.into_iter().map(|a| a.expect("every actor assigned")).collect();
        let conflict_plan = plans.into_iter().map(|p| p.expect("every external planned")).collect();
        flags.sort_by_key(|v: &Violation| v.actors.clone());
        Ok(ConcreteScenario {
            id: logical.id(),
            junction: self.catalog.junction_id.clone(),
            logical: logical.clone(),
            actors,
            conflict_plan,
            derivation_flags: flags,
            static_report: StaticCheckReport::default(),
        })
    }
}
