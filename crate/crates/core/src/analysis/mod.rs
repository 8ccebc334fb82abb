//! Outcome classification, avoidability, slow-down detection and group statistics for
//! simulation traces.

mod aggregate;
mod reference;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{EventKind, SimulationTrace};

pub use aggregate::{aggregate, render_csv, render_markdown, AggregateReport, Comparison, GroupStats, Scheme};
pub use reference::{
    detect_preventive_maneuver, driven_path, frame_counts, hausdorff, medoid_index, medoid_reference_path, ReferencePath,
    MIN_EXTRA_FRAMES, REFERENCE_STEP,
};
pub use stats::{fisher_exact_p, odds_ratio, ContingencyTable2x2};

/// Frames before a collision inspected for avoidability.
pub const AVOIDABILITY_WINDOW: usize = 60;
/// Share of the window in which camera and lidar must both see the other actor.
pub const AVOIDABILITY_RATIO: f64 = 0.9;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no collision with actor {0} in trace")]
    NoCollision(usize),
    #[error("contingency table is all zeros")]
    EmptyTable,
    #[error("no candidate paths")]
    NoPaths,
    #[error("run never moved; cannot build a path")]
    DegeneratePath,
    #[error("unknown grouping scheme {0:?}")]
    UnknownScheme(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Collision,
    NearMiss,
    NoIncident,
}

impl Outcome {
    pub fn is_unsafe(self) -> bool {
        self != Outcome::NoIncident
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Avoidability {
    Avoidable,
    Unavoidable,
    NotApplicable,
}

pub fn classify_outcome(trace: &SimulationTrace) -> Outcome {
    if trace.events.iter().any(|e| e.is_collision()) {
        Outcome::Collision
    } else if trace.events.iter().any(|e| matches!(e.kind, EventKind::NearMiss { .. })) {
        Outcome::NearMiss
    } else {
        Outcome::NoIncident
    }
}

/// Avoidable iff camera and lidar both saw `external` in at least 90% of the (up to) 60
/// frames preceding the collision frame.
pub fn classify_avoidability(trace: &SimulationTrace, external: usize) -> Result<Avoidability, AnalysisError> {
    let hit = trace
        .events
        .iter()
        .find(|e| e.is_collision() && e.actor == external)
        .ok_or(AnalysisError::NoCollision(external))?;
    let end = hit.frame.min(trace.frames.len());
    let start = end.saturating_sub(AVOIDABILITY_WINDOW);
    let window = end - start;
    if window == 0 {
        return Ok(Avoidability::Unavoidable);
    }
    let seen = trace.frames[start..end]
        .iter()
        .filter(|f| f.detections.get(external - 1).is_some_and(|d| d.both()))
        .count();
    Ok(if seen as f64 >= AVOIDABILITY_RATIO * window as f64 - 1e-9 {
        Avoidability::Avoidable
    } else {
        Avoidability::Unavoidable
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run_id: String,
    pub scenario_id: String,
    pub policy: String,
    pub seed: u64,
    pub n_actors: usize,
    pub ego_mi: String,
    pub ego_maneuver: String,
    pub outcome: Outcome,
    pub avoidability: Avoidability,
    pub pm_detected: bool,
    pub pm_locations: Vec<f64>,
}

/// Classifies one run. Without a reference path no slow-down is reported.
pub fn analyze_run(trace: &SimulationTrace, reference: Option<&ReferencePath>, ego_maneuver: &str) -> Result<RunOutcome, AnalysisError> {
    let outcome = classify_outcome(trace);
    let avoidability = match trace.ego_collision() {
        Some(e) => classify_avoidability(trace, e.actor)?,
        None => Avoidability::NotApplicable,
    };
    let (pm_detected, pm_locations) = match reference {
        Some(r) => detect_preventive_maneuver(&trace.ego_positions(), r, MIN_EXTRA_FRAMES),
        None => (false, Vec::new()),
    };
    let h = &trace.header;
    Ok(RunOutcome {
        run_id: h.run_id.clone(),
        scenario_id: h.scenario_id.clone(),
        policy: h.policy.name().to_string(),
        seed: h.seed,
        n_actors: h.actors.len(),
        ego_mi: h.actors.first().cloned().unwrap_or_default(),
        ego_maneuver: ego_maneuver.to_string(),
        outcome,
        avoidability,
        pm_detected,
        pm_locations,
    })
}
