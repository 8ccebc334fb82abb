use serde::{Deserialize, Serialize};

use super::{ActorState, SimConfig};
use crate::geometry::{rect_overlap, wrap_angle, OrientedRect, Vec2};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub camera: bool,
    pub lidar: bool,
}

impl Detection {
    pub fn any(self) -> bool {
        self.camera || self.lidar
    }

    pub fn both(self) -> bool {
        self.camera && self.lidar
    }
}

/// Spacing of boundary samples used for the camera sector test.
const BOUNDARY_STEP: f64 = 0.05;

/// Closest point of the rectangle to `p`.
fn closest_point(r: &OrientedRect, p: Vec2) -> Vec2 {
    let (f, l) = r.axes();
    let d = p - r.center;
    let x = d.dot(f).clamp(-r.length / 2.0, r.length / 2.0);
    let y = d.dot(l).clamp(-r.width / 2.0, r.width / 2.0);
    r.center + f * x + l * y
}

pub fn camera_sees(origin: Vec2, heading: f64, fov: f64, range: f64, target: &OrientedRect) -> bool {
    let in_sector = |q: Vec2| {
        let d = q - origin;
        let dist = d.norm();
        dist <= range && (dist < 1e-12 || wrap_angle(d.heading() - heading).abs() <= fov / 2.0)
    };
    if target.contains(origin) {
        return true;
    }
    in_sector(closest_point(target, origin)) || target.perimeter_samples(BOUNDARY_STEP).into_iter().any(in_sector)
}

/// Axis box of the given size whose rear edge is centered on `front`.
pub fn lidar_box(front: Vec2, heading: f64, size: [f64; 2]) -> OrientedRect {
    let center = front + Vec2::from_heading(heading) * (size[0] / 2.0);
    OrientedRect { center, heading, length: size[0], width: size[1] }
}

/// Per-actor camera/lidar flags as seen from the ego.
pub fn sense(ego: &ActorState, others: &[ActorState], cfg: &SimConfig) -> Vec<Detection> {
    let ego_rect = cfg.footprint.at(ego.position, ego.heading);
    let bx = lidar_box(ego_rect.front_center(), ego.heading, cfg.lidar_box);
    others
        .iter()
        .map(|o| {
            if !o.active {
                return Detection::default();
            }
            let r = cfg.footprint.at(o.position, o.heading);
            Detection {
                camera: camera_sees(ego.position, ego.heading, cfg.camera_fov, cfg.camera_range, &r),
                lidar: rect_overlap(&bx, &r),
            }
        })
        .collect()
}
