use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EndReason, Event, Frame, SimError, SimulationTrace, TraceHeader};

/// One line of a JSONL trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceRecord {
    Header(TraceHeader),
    Frame(Frame),
    Events { events: Vec<Event>, end_reason: EndReason },
}

pub fn trace_to_jsonl(trace: &SimulationTrace) -> Result<String, SimError> {
    let mut out = serde_json::to_string(&TraceRecord::Header(trace.header.clone()))?;
    out.push('\n');
    for f in &trace.frames {
        out.push_str(&serde_json::to_string(&TraceRecord::Frame(f.clone()))?);
        out.push('\n');
    }
    let tail = TraceRecord::Events { events: trace.events.clone(), end_reason: trace.end_reason };
    out.push_str(&serde_json::to_string(&tail)?);
    out.push('\n');
    Ok(out)
}

pub fn read_trace_jsonl(text: &str) -> Result<SimulationTrace, SimError> {
    let mut header = None;
    let mut frames = Vec::new();
    let mut tail = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: String| SimError::TraceParse { line: i + 1, reason };
        let rec: TraceRecord = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        match rec {
            TraceRecord::Header(h) if header.is_none() => header = Some(h),
            TraceRecord::Header(_) => return Err(bad("duplicate header".into())),
            TraceRecord::Frame(_) | TraceRecord::Events { .. } if header.is_none() => {
                return Err(bad("record before header".into()))
            }
            TraceRecord::Frame(f) if tail.is_none() => frames.push(f),
            TraceRecord::Events { events, end_reason } if tail.is_none() => tail = Some((events, end_reason)),
            _ => return Err(bad("record after events".into())),
        }
    }
    let header = header.ok_or(SimError::TraceParse { line: 0, reason: "missing header".into() })?;
    let (events, end_reason) = tail.ok_or(SimError::TraceParse { line: 0, reason: "missing events record".into() })?;
    Ok(SimulationTrace { header, frames, events, end_reason })
}

/// Flat per-frame, per-actor table for plotting. The ego row has empty sensor columns.
pub fn trace_to_csv(trace: &SimulationTrace) -> String {
    let mut out = String::from("t,actor,x,y,heading,speed,cam,lidar\n");
    for f in &trace.frames {
        for (i, a) in f.actors.iter().enumerate() {
            if !a.active {
                continue;
            }
            let (cam, lidar) = match i.checked_sub(1).map(|j| f.detections[j]) {
                Some(d) => (u8::from(d.camera).to_string(), u8::from(d.lidar).to_string()),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                out,
                "{:.2},{},{:.6},{:.6},{:.6},{:.6},{},{}",
                f.t, i, a.position.x, a.position.y, a.heading, a.speed, cam, lidar
            );
        }
    }
    out
}
