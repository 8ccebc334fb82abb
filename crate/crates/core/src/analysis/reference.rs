use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::geometry::{Polyline, Vec2};

/// Spacing of reference path points and of the points compared by the path distance.
pub const REFERENCE_STEP: f64 = 0.5;
/// A reference point needs this many more frames than its predecessor to count as a
/// slow-down location.
pub const MIN_EXTRA_FRAMES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePath {
    pub points: Polyline,
    /// Run the medoid came from first, then the others it was chosen among.
    pub source_run_ids: Vec<String>,
}

/// Discrete symmetric Hausdorff distance between two point sets.
pub fn hausdorff(a: &[Vec2], b: &[Vec2]) -> f64 {
    let directed = |x: &[Vec2], y: &[Vec2]| {
        x.iter()
            .map(|p| y.iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Path driven by a run, resampled at the reference spacing. Stationary frames collapse.
pub fn driven_path(positions: &[Vec2]) -> Result<Polyline, AnalysisError> {
    let line = Polyline::from_points_dedup(positions.iter().copied()).map_err(|_| AnalysisError::DegeneratePath)?;
    Ok(line.resample(REFERENCE_STEP))
}

/// Index of the path whose largest distance to any other path is smallest (lowest index on ties).
pub fn medoid_index(paths: &[Polyline]) -> Result<usize, AnalysisError> {
    if paths.is_empty() {
        return Err(AnalysisError::NoPaths);
    }
    let n = paths.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = hausdorff(paths[i].points(), paths[j].points());
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let ecc: Vec<f64> = dist.iter().map(|row| row.iter().copied().fold(0.0, f64::max)).collect();
    let mut best = 0;
    for i in 1..n {
        if ecc[i] < ecc[best] {
            best = i;
        }
    }
    Ok(best)
}

pub fn medoid_reference_path(paths: &[Polyline], run_ids: &[String]) -> Result<ReferencePath, AnalysisError> {
    let i = medoid_index(paths)?;
    let mut ids = vec![run_ids.get(i).cloned().unwrap_or_default()];
    ids.extend(run_ids.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, id)| id.clone()));
    Ok(ReferencePath { points: paths[i].clone(), source_run_ids: ids })
}

/// Number of positions whose nearest reference point is each point (ties to the lower index).
pub fn frame_counts(positions: &[Vec2], reference: &[Vec2]) -> Vec<usize> {
    let mut counts = vec![0usize; reference.len()];
    for p in positions {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in reference.iter().enumerate() {
            let d = p.distance(*q);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        if !reference.is_empty() {
            counts[best] += 1;
        }
    }
    counts
}

/// Reference arc-lengths where the run lingers: points holding at least `min_extra`
/// more frames than their predecessor (the first point is compared against zero).
pub fn detect_preventive_maneuver(positions: &[Vec2], reference: &ReferencePath, min_extra: usize) -> (bool, Vec<f64>) {
    let counts = frame_counts(positions, reference.points.points());
    let cum = reference.points.cumulative();
    let locations: Vec<f64> = (0..counts.len())
        .filter(|&i| {
            let prev = if i == 0 { 0 } else { counts[i - 1] };
            counts[i] >= prev + min_extra
        })
        .map(|i| cum[i])
        .collect();
    (!locations.is_empty(), locations)
}
