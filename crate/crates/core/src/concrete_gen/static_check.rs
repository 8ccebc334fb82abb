use serde::{Deserialize, Serialize};

use super::{ConcreteError, ConcreteScenario, Footprint};
use crate::geometry::rect_overlap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    InitialOverlap,
    ExternalPreCollision,
    PathTooShort,
}

impl ViolationKind {
    pub const ALL: [ViolationKind; 3] =
        [ViolationKind::InitialOverlap, ViolationKind::ExternalPreCollision, ViolationKind::PathTooShort];

    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::InitialOverlap => "InitialOverlap",
            ViolationKind::ExternalPreCollision => "ExternalPreCollision",
            ViolationKind::PathTooShort => "PathTooShort",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub actors: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StaticCheckReport {
    pub violations: Vec<Violation>,
}

impl StaticCheckReport {
    pub fn is_eligible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Start-footprint overlaps, external/external collisions before the first planned ego
/// conflict (oblivious replay at `dt`), and path-length flags from derivation.
pub fn static_check(sc: &ConcreteScenario, footprint: &Footprint, dt: f64) -> Result<StaticCheckReport, ConcreteError> {
    let mut violations = sc.derivation_flags.clone();
    let n = sc.n_actors();
    let starts: Vec<_> = sc
        .actors
        .iter()
        .map(|a| {
            let (p, h) = a.path.pose_at(0.0);
            footprint.at(p, h)
        })
        .collect();
    let mut flagged = vec![vec![false; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            if rect_overlap(&starts[a], &starts[b]) {
                flagged[a][b] = true;
                violations.push(Violation {
                    kind: ViolationKind::InitialOverlap,
                    actors: vec![a, b],
                    detail: format!("{} and {} start on top of each other", sc.actors[a].mi, sc.actors[b].mi),
                });
            }
        }
    }

    let horizon = sc.conflict_plan.iter().map(|p| p.planned_collision_time()).fold(f64::INFINITY, f64::min);
    if n > 2 && horizon.is_finite() {
        let schedules = sc.schedules()?;
        let mut k = 0usize;
        loop {
            let t = k as f64 * dt;
            if t >= horizon - 1e-9 {
                break;
            }
            let rects: Vec<_> = (1..n)
                .map(|i| {
                    let sched = &schedules[i];
                    (t <= sched.total_time()).then(|| {
                        let (p, h) = sc.actors[i].path.pose_at(sched.s_at(t));
                        footprint.at(p, h)
                    })
                })
                .collect();
            for a in 1..n {
                for b in a + 1..n {
                    if flagged[a][b] {
                        continue;
                    }
                    if let (Some(ra), Some(rb)) = (&rects[a - 1], &rects[b - 1]) {
                        if rect_overlap(ra, rb) {
                            flagged[a][b] = true;
                            violations.push(Violation {
                                kind: ViolationKind::ExternalPreCollision,
                                actors: vec![a, b],
                                detail: format!("externals collide at t={t:.2} s, before the ego conflict at {horizon:.2} s"),
                            });
                        }
                    }
                }
            }
            k += 1;
        }
    }
    violations.sort_by(|x, y| x.kind.cmp(&y.kind).then_with(|| x.actors.cmp(&y.actors)));
    Ok(StaticCheckReport { violations })
}
