use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ConcreteError;
use crate::geometry::{Polygon, Polyline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionClass {
    InJunction,
    Outside,
}

pub fn classify_points(path: &Polyline, bounds: &Polygon) -> Vec<RegionClass> {
    path.points()
        .iter()
        .map(|&p| if bounds.contains(p) { RegionClass::InJunction } else { RegionClass::Outside })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Acceleration {
    Instantaneous,
    Finite(f64),
}

impl Serialize for Acceleration {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Acceleration::Instantaneous => s.serialize_str("instantaneous"),
            Acceleration::Finite(a) => s.serialize_f64(*a),
        }
    }
}

impl<'de> Deserialize<'de> for Acceleration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(a) => Ok(Acceleration::Finite(a)),
            Raw::Name(n) if n == "instantaneous" => Ok(Acceleration::Instantaneous),
            Raw::Name(n) => Err(serde::de::Error::custom(format!("unknown acceleration {n:?}"))),
        }
    }
}

/// Target speeds inside/outside the junction and how speed changes between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedProfile {
    #[serde(rename = "in")]
    pub in_junction_speed: f64,
    #[serde(rename = "out")]
    pub outside_speed: f64,
    #[serde(rename = "accel")]
    pub acceleration: Acceleration,
}

impl Default for SpeedProfile {
    fn default() -> Self {
        SpeedProfile { in_junction_speed: 3.0, outside_speed: 4.0, acceleration: Acceleration::Instantaneous }
    }
}

impl SpeedProfile {
    pub fn validate(&self) -> Result<(), ConcreteError> {
        let ok_speed = |v: f64| v > 0.0 && v.is_finite();
        if !ok_speed(self.in_junction_speed) || !ok_speed(self.outside_speed) {
            return Err(ConcreteError::InvalidProfile("speeds must be positive".into()));
        }
        if let Acceleration::Finite(a) = self.acceleration {
            if !(a > 0.0 && a.is_finite()) {
                return Err(ConcreteError::InvalidProfile("acceleration must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn speed_for(&self, class: RegionClass) -> f64 {
        match class {
            RegionClass::InJunction => self.in_junction_speed,
            RegionClass::Outside => self.outside_speed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    s0: f64,
    t0: f64,
    v0: f64,
    /// Signed acceleration along the piece (0 = cruise).
    acc: f64,
}

/// Arc-length ↔ time mapping for an actor following a path at its profile speeds.
///
/// Segment `i` (between points `i` and `i+1`) takes the class of point `i`. With a
/// finite acceleration, speed ramps linearly in time from the start of a segment whose
/// class differs from the current speed; the actor starts at the speed of its first segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedSchedule {
    pieces: Vec<Piece>,
    length: f64,
    total_time: f64,
}

impl SpeedSchedule {
    pub fn new(path: &Polyline, classes: &[RegionClass], profile: &SpeedProfile) -> Result<Self, ConcreteError> {
        profile.validate()?;
        if classes.len() != path.points().len() {
            return Err(ConcreteError::Inconsistent(format!(
                "{} region classes for {} path points",
                classes.len(),
                path.points().len()
            )));
        }
        let cum = path.cumulative();
        let mut pieces = Vec::new();
        let mut t = 0.0;
        let mut v = profile.speed_for(classes[0]);
        for i in 0..path.segment_count() {
            let (s0, s1) = (cum[i], cum[i + 1]);
            let target = profile.speed_for(classes[i]);
            let a = match profile.acceleration {
                Acceleration::Instantaneous => {
                    v = target;
                    0.0
                }
                Acceleration::Finite(a) => a,
            };
            let mut s = s0;
            if a > 0.0 && (v - target).abs() > 1e-12 {
                let acc = if target > v { a } else { -a };
                let ramp = (target * target - v * v).abs() / (2.0 * a);
                let end = (s + ramp).min(s1);
                let v_end = (v * v + 2.0 * acc * (end - s)).max(0.0).sqrt();
                pieces.push(Piece { s0: s, t0: t, v0: v, acc });
                t += (v_end - v) / acc;
                v = if end < s1 { target } else { v_end };
                s = end;
            }
            if s1 - s > 1e-12 {
                pieces.push(Piece { s0: s, t0: t, v0: v, acc: 0.0 });
                t += (s1 - s) / v;
            }
        }
        Ok(SpeedSchedule { pieces, length: path.length(), total_time: t })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    fn piece_by_s(&self, s: f64) -> usize {
        self.pieces.partition_point(|p| p.s0 <= s).saturating_sub(1)
    }

    fn piece_by_t(&self, t: f64) -> usize {
        self.pieces.partition_point(|p| p.t0 <= t).saturating_sub(1)
    }

    /// Time to reach arc-length `s` (clamped to the path).
    pub fn time_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.length);
        let p = self.pieces[self.piece_by_s(s)];
        let d = s - p.s0;
        if p.acc == 0.0 {
            p.t0 + d / p.v0
        } else {
            let v = (p.v0 * p.v0 + 2.0 * p.acc * d).max(0.0).sqrt();
            p.t0 + (v - p.v0) / p.acc
        }
    }

    /// Arc-length reached at time `t` (clamped to the path).
    pub fn s_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.total_time {
            return self.length;
        }
        let i = self.piece_by_t(t);
        let p = self.pieces[i];
        let tau = t - p.t0;
        let s = p.s0 + p.v0 * tau + 0.5 * p.acc * tau * tau;
        let next = self.pieces.get(i + 1).map_or(self.length, |q| q.s0);
        s.min(next)
    }

    pub fn speed_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.length);
        let p = self.pieces[self.piece_by_s(s)];
        (p.v0 * p.v0 + 2.0 * p.acc * (s - p.s0)).max(0.0).sqrt()
    }
}

/// Time to traverse the whole path at the profile speeds.
pub fn path_time(path: &Polyline, classes: &[RegionClass], profile: &SpeedProfile) -> Result<f64, ConcreteError> {
    Ok(SpeedSchedule::new(path, classes, profile)?.total_time())
}
