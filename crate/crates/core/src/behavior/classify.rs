//! Rule engine turning a trajectory on a lane graph into behavior tokens.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::token::{BehaviorSet, BehaviorToken};
use crate::map_model::{is_on_road, nearest_lane_with_tolerance, LaneGraph, LaneId, DEFAULT_LANE_HEADING_TOL};
use crate::trajectory::{cumulative_heading_change, smoothed_speed_deltas, speeds, total_displacement, Trajectory};

/// Standard gravity used by the friction-circle cornering limit.
pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    /// Total displacement below which an object is static (m).
    pub static_disp: f64,
    /// Relaxation on per-step smoothed speed changes (m/s).
    pub epsilon: f64,
    /// Moving-average window over interval speeds (samples).
    pub window: usize,
    /// Frames an object must spend in each lane for a lane change.
    pub lane_change_min_frames: usize,
    /// Heading tolerance for lane ownership (rad).
    pub heading_tol: f64,
    /// Cumulative heading change that counts as a turn (rad).
    pub turn_threshold: f64,
    /// Distance to an intersection centroid that counts as approaching (m).
    pub lookahead: f64,
    /// Tire-road friction coefficient for the cornering speed limit.
    pub mu: f64,
    /// Mean speed below which an object is moving slowly (m/s).
    pub slow_speed: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            static_disp: 0.5,
            epsilon: 0.2,
            window: 5,
            lane_change_min_frames: 3,
            heading_tol: DEFAULT_LANE_HEADING_TOL,
            turn_threshold: PI / 6.0,
            lookahead: 30.0,
            mu: 0.7,
            slow_speed: 1.5,
        }
    }
}

impl ClassifierParams {
    /// Maximum cornering speed at radius `r` under the friction-circle model.
    pub fn safe_speed(&self, r: f64) -> f64 {
        (self.mu * GRAVITY * r.max(0.0)).sqrt()
    }
}

/// Per-frame lane assignment of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneOwnership {
    pub per_frame: Vec<Option<LaneId>>,
    /// Lane held for the most frames; ties go to the lane seen first.
    pub dominant: Option<LaneId>,
    /// First matched lane.
    pub initial: Option<LaneId>,
}

impl LaneOwnership {
    pub fn unmatched(&self) -> usize {
        self.per_frame.iter().filter(|l| l.is_none()).count()
    }

    /// Strict majority of frames without a lane.
    pub fn mostly_unmatched(&self) -> bool {
        self.unmatched() * 2 > self.per_frame.len()
    }
}

pub fn lane_ownership(traj: &Trajectory, map: &LaneGraph, p: &ClassifierParams) -> LaneOwnership {
    let per_frame: Vec<Option<LaneId>> = traj
        .samples()
        .iter()
        .map(|s| nearest_lane_with_tolerance(map, s.position(), s.heading, p.heading_tol))
        .collect();
    let mut counts: BTreeMap<LaneId, (usize, usize)> = BTreeMap::new();
    for (i, lane) in per_frame.iter().enumerate() {
        if let Some(l) = lane {
            counts.entry(*l).or_insert((0, i)).0 += 1;
        }
    }
    let dominant = counts
        .iter()
        .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
        .map(|(l, _)| *l);
    let initial = per_frame.iter().flatten().next().copied();
    LaneOwnership { per_frame, dominant, initial }
}

/// Static, or one speed-trend token, plus moving slowly.
pub fn classify_kinematics(traj: &Trajectory, p: &ClassifierParams) -> BehaviorSet {
    let mut out = BehaviorSet::new();
    if traj.len() < 2 || total_displacement(traj) < p.static_disp {
        out.insert(BehaviorToken::Static);
        return out;
    }
    let v = speeds(traj).expect("two samples checked above");
    let window = p.window.clamp(1, v.len());
    let deltas = smoothed_speed_deltas(traj, window).expect("window fits the samples");
    let net: f64 = deltas.iter().sum();
    if net.abs() > p.epsilon {
        let token = if net > 0.0 && deltas.iter().all(|&d| d >= -p.epsilon) {
            BehaviorToken::SpeedingUp
        } else if net < 0.0 && deltas.iter().all(|&d| d <= p.epsilon) {
            BehaviorToken::SlowingDown
        } else {
            BehaviorToken::VaryingSpeed
        };
        out.insert(token);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    if mean < p.slow_speed {
        out.insert(BehaviorToken::MovingSlowly);
    }
    out
}

fn laterally_adjacent(map: &LaneGraph, a: LaneId, b: LaneId) -> bool {
    let around = |id: LaneId| -> Vec<LaneId> {
        let mut v = vec![id];
        if let Ok(l) = map.lane(id) {
            v.extend(&l.successors);
            v.extend(&l.predecessors);
        }
        v
    };
    let (xa, xb) = (around(a), around(b));
    xa.iter().any(|&x| xb.iter().any(|&y| map.are_neighbors(x, y)))
}

/// Lane position or lane-change tokens, or off main roads when most frames have no lane.
pub fn classify_lane(traj: &Trajectory, map: &LaneGraph, p: &ClassifierParams) -> BehaviorSet {
    let own = lane_ownership(traj, map, p);
    let mut out = BehaviorSet::new();
    if own.mostly_unmatched() {
        out.insert(BehaviorToken::OffMainRoads);
        return out;
    }
    // Runs of consecutive frames in one lane; unmatched frames are skipped.
    let mut runs: Vec<(LaneId, usize)> = Vec::new();
    for lane in own.per_frame.iter().flatten() {
        match runs.last_mut() {
            Some((l, n)) if l == lane => *n += 1,
            _ => runs.push((*lane, 1)),
        }
    }
    let min = p.lane_change_min_frames.max(1);
    let mut kept: Vec<(LaneId, usize)> = Vec::new();
    for (lane, n) in runs.into_iter().filter(|&(_, n)| n >= min) {
        match kept.last_mut() {
            Some((l, c)) if *l == lane => *c += n,
            _ => kept.push((lane, n)),
        }
    }
    for pair in kept.windows(2) {
        let (a, b) = (pair[0].0, pair[1].0);
        if map.are_successors(a, b) || !laterally_adjacent(map, a, b) {
            continue;
        }
        if let (Ok(ca), Ok(cb)) = (map.position_class(a), map.position_class(b)) {
            if let Some(t) = BehaviorToken::lane_change(ca, cb) {
                out.insert(t);
            }
        }
    }
    if out.is_empty() {
        if let Some(class) = own.dominant.and_then(|d| map.position_class(d).ok()) {
            out.extend(BehaviorToken::lane_position(class));
        }
    }
    out
}

/// Approaching / crossing an intersection and the turn direction.
pub fn classify_intersection(traj: &Trajectory, map: &LaneGraph, p: &ClassifierParams) -> BehaviorSet {
    let mut out = BehaviorSet::new();
    let samples = traj.samples();
    let v = speeds(traj).unwrap_or_default();
    let speed_at = |i: usize| if v.is_empty() { 0.0 } else { v[i.min(v.len() - 1)] };

    let mut crossing = false;
    let mut approaching = false;
    for ix in map.intersections() {
        let entered = samples.iter().any(|s| ix.contains(s.position()));
        if entered {
            crossing = true;
            continue;
        }
        approaching |= samples.iter().enumerate().any(|(i, s)| {
            let r = s.position().distance(ix.centroid);
            r <= p.lookahead && speed_at(i) < p.safe_speed(r)
        });
    }
    if crossing {
        out.insert(BehaviorToken::CrossingIntersection);
    } else if approaching {
        out.insert(BehaviorToken::ApproachingIntersection);
    }

    if traj.len() >= 2 && total_displacement(traj) >= p.static_disp {
        let turn = cumulative_heading_change(traj).expect("two samples");
        out.insert(if turn > p.turn_threshold {
            BehaviorToken::TurningLeft
        } else if turn < -p.turn_threshold {
            BehaviorToken::TurningRight
        } else {
            BehaviorToken::GoingStraight
        });
    }
    out
}

/// Ground-truth description of one trajectory.
pub fn describe(traj: &Trajectory, map: &LaneGraph, p: &ClassifierParams) -> BehaviorSet {
    let kin = classify_kinematics(traj, p);
    if kin.contains(BehaviorToken::Static) {
        let own = lane_ownership(traj, map, p);
        let parked_frames = traj
            .samples()
            .iter()
            .zip(&own.per_frame)
            .filter(|(s, lane)| lane.is_none() && is_on_road(map, s.position()))
            .count();
        let token = if parked_frames * 2 > traj.len() { BehaviorToken::Parked } else { BehaviorToken::Static };
        return BehaviorSet::from([token]);
    }
    kin.union(&classify_lane(traj, map, p)).union(&classify_intersection(traj, map, p))
}
