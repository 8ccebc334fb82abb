//! Fixed-timestep kinematic simulation of concrete scenarios.

mod events;
mod sensors;
mod trace;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concrete_gen::{ConcreteError, ConcreteScenario, Footprint, Role, SpeedSchedule};
use crate::geometry::{rect_gap, Vec2};
use crate::provenance::Provenance;

pub use events::{Event, EventDetector, EventKind};
pub use sensors::{camera_sees, lidar_box, sense, Detection};
pub use trace::{read_trace_jsonl, trace_to_csv, trace_to_jsonl, TraceRecord};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("malformed scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Concrete(#[from] ConcreteError),
    #[error("trace parse error at line {line}: {reason}")]
    TraceParse { line: usize, reason: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub timestep: f64,
    pub max_duration: f64,
    pub near_miss_threshold: f64,
    /// Full camera opening angle (rad).
    pub camera_fov: f64,
    pub camera_range: f64,
    /// Forward extent × lateral extent of the lidar box (m).
    pub lidar_box: [f64; 2],
    pub footprint: Footprint,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            timestep: 0.05,
            max_duration: 30.0,
            near_miss_threshold: 1.0,
            camera_fov: 132f64.to_radians(),
            camera_range: 60.0,
            lidar_box: [32.0, 32.0],
            footprint: Footprint::default(),
            rng_seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.timestep) || !pos(self.max_duration) {
            return Err(SimError::Config("timestep and max_duration must be positive".into()));
        }
        if !pos(self.near_miss_threshold) || !pos(self.camera_range) || !pos(self.camera_fov) {
            return Err(SimError::Config("sensor and near-miss thresholds must be positive".into()));
        }
        if !pos(self.lidar_box[0]) || !pos(self.lidar_box[1]) || !pos(self.footprint.length) || !pos(self.footprint.width) {
            return Err(SimError::Config("lidar box and footprint must have positive size".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReactiveParams {
    pub decel: f64,
    /// Acceleration used to get back to profile speed after braking.
    pub accel: f64,
    pub conflict_horizon: f64,
    pub resume_gap: f64,
    pub jitter_std: f64,
}

impl Default for ReactiveParams {
    fn default() -> Self {
        ReactiveParams { decel: 4.0, accel: 2.0, conflict_horizon: 2.5, resume_gap: 6.0, jitter_std: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EgoPolicy {
    Oblivious,
    ReactiveBrake(ReactiveParams),
}

impl EgoPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            EgoPolicy::Oblivious => "oblivious",
            EgoPolicy::ReactiveBrake(_) => "reactive_brake",
        }
    }

    pub fn reactive() -> Self {
        EgoPolicy::ReactiveBrake(ReactiveParams::default())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if let EgoPolicy::ReactiveBrake(p) = self {
            let pos = |v: f64| v > 0.0 && v.is_finite();
            if !pos(p.decel) || !pos(p.accel) || !pos(p.conflict_horizon) || !pos(p.resume_gap) {
                return Err(SimError::Config("reactive parameters must be positive".into()));
            }
            if !(p.jitter_std >= 0.0 && p.jitter_std.is_finite()) {
                return Err(SimError::Config("jitter_std must be non-negative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActorState {
    pub position: Vec2,
    pub heading: f64,
    pub speed: f64,
    pub path_progress: f64,
    /// False once the actor has left the end of its path.
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: f64,
    /// Profile speed of the ego at its current position.
    pub ego_nominal_speed: f64,
    pub actors: Vec<ActorState>,
    /// `detections[i]` belongs to actor `i + 1`.
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    EgoCollision,
    EgoPathEnd,
    MaxDuration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub run_id: String,
    pub scenario_id: String,
    pub junction: String,
    pub actors: Vec<String>,
    pub policy: EgoPolicy,
    pub seed: u64,
    pub timestep: f64,
    /// Planned first ego contact (ego_eta + penalty of the first conflict).
    pub planned_collision_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub header: TraceHeader,
    pub frames: Vec<Frame>,
    pub events: Vec<Event>,
    pub end_reason: EndReason,
}

impl SimulationTrace {
    pub fn ego_collision(&self) -> Option<&Event> {
        self.events.iter().find(|e| e.is_collision())
    }

    pub fn ego_positions(&self) -> Vec<Vec2> {
        self.frames.iter().map(|f| f.actors[0].position).collect()
    }

    /// Whether the ego ever drove slower than `fraction` of its profile speed.
    pub fn ego_slowed_below(&self, fraction: f64) -> bool {
        self.frames.iter().any(|f| f.actors[0].speed < fraction * f.ego_nominal_speed)
    }
}

pub fn run_id(scenario_id: &str, policy: &EgoPolicy, seed: u64) -> String {
    format!("{scenario_id}@{}#{seed}", policy.name())
}

/// The same scenario with every external removed.
pub fn without_externals(sc: &ConcreteScenario) -> ConcreteScenario {
    let mut out = sc.clone();
    out.actors.truncate(1);
    out.conflict_plan.clear();
    out.logical.assignment.truncate(1);
    out.logical.overlaps.clear();
    out
}

struct Reactive {
    p: ReactiveParams,
    braking: bool,
    rng: Option<(ChaCha8Rng, Normal<f64>)>,
}

impl Reactive {
    fn new(p: ReactiveParams, seed: u64) -> Result<Self, SimError> {
        let rng = if p.jitter_std > 0.0 {
            let normal = Normal::new(0.0, p.jitter_std).map_err(|e| SimError::Config(e.to_string()))?;
            Some((ChaCha8Rng::seed_from_u64(seed), normal))
        } else {
            None
        };
        Ok(Reactive { p, braking: false, rng })
    }

    /// Would continuing at profile speed bring the ego within `threshold` of a detected
    /// actor moving at constant velocity?
    fn threat(&self, sc: &ConcreteScenario, ego_sched: &SpeedSchedule, frame: &Frame, cfg: &SimConfig) -> bool {
        let ego = &frame.actors[0];
        let t0 = ego_sched.time_at(ego.path_progress);
        let steps = (self.p.conflict_horizon / cfg.timestep).ceil() as usize;
        let path = &sc.actors[0].path;
        frame.actors[1..].iter().zip(&frame.detections).any(|(o, d)| {
            if !o.active || !d.any() {
                return false;
            }
            let vel = Vec2::from_heading(o.heading) * o.speed;
            (0..=steps).any(|m| {
                let tau = m as f64 * cfg.timestep;
                let (pe, he) = path.pose_at(ego_sched.s_at(t0 + tau));
                let er = cfg.footprint.at(pe, he);
                let or = cfg.footprint.at(o.position + vel * tau, o.heading);
                rect_gap(&er, &or) < cfg.near_miss_threshold
            })
        })
    }

    fn clear(&self, frame: &Frame, cfg: &SimConfig) -> bool {
        let ego = &frame.actors[0];
        let er = cfg.footprint.at(ego.position, ego.heading);
        frame.actors[1..].iter().zip(&frame.detections).all(|(o, d)| {
            !o.active || !d.any() || rect_gap(&er, &cfg.footprint.at(o.position, o.heading)) >= self.p.resume_gap
        })
    }

    /// Speed for the next step and the distance actually travelled.
    fn step(&mut self, v: f64, nominal: f64, threat: bool, clear: bool, dt: f64) -> (f64, f64) {
        if threat {
            self.braking = true;
        } else if self.braking && clear {
            self.braking = false;
        }
        let v_next = if self.braking { (v - self.p.decel * dt).max(0.0) } else { (v + self.p.accel * dt).min(nominal) };
        let applied = match &mut self.rng {
            Some((rng, normal)) => (v_next + normal.sample(rng)).max(0.0),
            None => v_next,
        };
        (v_next, applied * dt)
    }
}

fn check_scenario(sc: &ConcreteScenario) -> Result<(), SimError> {
    if sc.actors.is_empty() || sc.actors[0].role != Role::Ego {
        return Err(SimError::Scenario("first actor must be the ego".into()));
    }
    if let Some(a) = sc.actors[1..].iter().find(|a| a.role != Role::External) {
        return Err(SimError::Scenario(format!("{} listed as a second ego", a.mi)));
    }
    for a in &sc.actors {
        if a.path.region_class.len() != a.path.points.points().len() {
            return Err(SimError::Scenario(format!("{}: region classes do not match path points", a.mi)));
        }
    }
    Ok(())
}

/// Runs one scenario. Externals follow their schedules exactly; the ego follows the policy.
pub fn simulate(sc: &ConcreteScenario, policy: &EgoPolicy, cfg: &SimConfig) -> Result<SimulationTrace, SimError> {
    cfg.validate()?;
    policy.validate()?;
    check_scenario(sc)?;
    let schedules = sc.schedules()?;
    let n = sc.n_actors();
    let ego_sched = &schedules[0];
    let ego_len = ego_sched.length();
    let dt = cfg.timestep;
    let max_frames = (cfg.max_duration / dt + 1e-9).floor() as usize;

    let mut reactive = match policy {
        EgoPolicy::ReactiveBrake(p) => Some(Reactive::new(*p, cfg.rng_seed)?),
        EgoPolicy::Oblivious => None,
    };
    let mut detector = EventDetector::new(n, cfg.near_miss_threshold);
    let mut frames = Vec::new();
    let (mut s, mut v) = (0.0f64, ego_sched.speed_at(0.0));
    let end_reason;
    let mut k = 0usize;
    loop {
        let t = k as f64 * dt;
        let (pe, he) = sc.actors[0].path.pose_at(s);
        let nominal = ego_sched.speed_at(s);
        let ego = ActorState { position: pe, heading: he, speed: v, path_progress: s, active: true };
        let mut actors = vec![ego];
        for i in 1..n {
            let sched = &schedules[i];
            let active = t <= sched.total_time() + 1e-9;
            let si = sched.s_at(t);
            let (p, h) = sc.actors[i].path.pose_at(si);
            let speed = if active { sched.speed_at(si) } else { 0.0 };
            actors.push(ActorState { position: p, heading: h, speed, path_progress: si, active });
        }
        let detections = sense(&actors[0], &actors[1..], cfg);
        let ego_rect = cfg.footprint.at(pe, he);
        let others: Vec<_> = actors[1..].iter().map(|a| a.active.then(|| cfg.footprint.at(a.position, a.heading))).collect();
        let collided = detector.observe(k, t, &ego_rect, &others);
        let frame = Frame { t, ego_nominal_speed: nominal, actors, detections };

        let next = match reactive.as_mut() {
            Some(r) => {
                let threat = r.threat(sc, ego_sched, &frame, cfg);
                let clear = r.clear(&frame, cfg);
                let (v_next, ds) = r.step(v, ego_sched.speed_at(s), threat, clear, dt);
                (v_next, (s + ds).min(ego_len))
            }
            None => {
                let s_next = ego_sched.s_at((k + 1) as f64 * dt);
                (ego_sched.speed_at(s_next), s_next)
            }
        };
        frames.push(frame);

        if collided {
            end_reason = EndReason::EgoCollision;
            break;
        }
        if s >= ego_len - 1e-9 {
            end_reason = EndReason::EgoPathEnd;
            break;
        }
        if k + 1 > max_frames {
            end_reason = EndReason::MaxDuration;
            break;
        }
        (v, s) = next;
        k += 1;
    }

    let header = TraceHeader {
        run_id: run_id(&sc.id, policy, cfg.rng_seed),
        scenario_id: sc.id.clone(),
        junction: sc.junction.clone(),
        actors: sc.actors.iter().map(|a| a.mi.clone()).collect(),
        policy: *policy,
        seed: cfg.rng_seed,
        timestep: dt,
        planned_collision_time: sc.first_conflict().map(|p| p.planned_collision_time()),
        provenance: None,
    };
    Ok(SimulationTrace { header, frames, events: detector.finish(), end_reason })
}
