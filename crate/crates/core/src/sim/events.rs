use serde::{Deserialize, Serialize};

use crate::geometry::{rect_gap, rect_overlap, OrientedRect};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Collision,
    NearMiss { gap: f64 },
}

/// Ego/external event. `actor` is the external's index in the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub frame: usize,
    pub actor: usize,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl Event {
    pub fn is_collision(&self) -> bool {
        matches!(self.kind, EventKind::Collision)
    }
}

/// Tracks ego/external footprint contact over a run: one collision per pair at most,
/// and the minimum gap of pairs that never touched.
#[derive(Debug, Clone)]
pub struct EventDetector {
    threshold: f64,
    collided: Vec<bool>,
    min_gap: Vec<Option<(f64, f64, usize)>>,
    events: Vec<Event>,
}

impl EventDetector {
    pub fn new(n_actors: usize, near_miss_threshold: f64) -> Self {
        EventDetector {
            threshold: near_miss_threshold,
            collided: vec![false; n_actors],
            min_gap: vec![None; n_actors],
            events: Vec::new(),
        }
    }

    /// Feeds one frame; `others[i]` is the footprint of actor `i + 1` (None once despawned).
    /// Returns true if a new collision happened in this frame.
    pub fn observe(&mut self, frame: usize, t: f64, ego: &OrientedRect, others: &[Option<OrientedRect>]) -> bool {
        let mut hit = false;
        for (i, r) in others.iter().enumerate() {
            let actor = i + 1;
            let Some(r) = r else { continue };
            if self.collided[actor] {
                continue;
            }
            if rect_overlap(ego, r) {
                self.collided[actor] = true;
                self.events.push(Event { t, frame, actor, kind: EventKind::Collision });
                hit = true;
            } else {
                let g = rect_gap(ego, r);
                if self.min_gap[actor].is_none_or(|(best, _, _)| g < best) {
                    self.min_gap[actor] = Some((g, t, frame));
                }
            }
        }
        hit
    }

    pub fn finish(mut self) -> Vec<Event> {
        for (actor, m) in self.min_gap.iter().enumerate() {
            if let Some((gap, t, frame)) = *m {
                if !self.collided[actor] && gap <= self.threshold {
                    self.events.push(Event { t, frame, actor, kind: EventKind::NearMiss { gap } });
                }
            }
        }
        self.events.sort_by(|a, b| a.frame.cmp(&b.frame).then(a.actor.cmp(&b.actor)));
        self.events
    }
}
