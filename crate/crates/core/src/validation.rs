//! Behavior alignment, off-road and collision checks for generated trajectories.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{describe, BehaviorSet, ClassifierParams};
use crate::map_model::{is_on_road, LaneGraph};
use crate::scene_graph::{NodeId, ObjectKind, ScenarioGraph};
use crate::trajectory::{oriented_box_at, sat_overlap, Footprint, OrientedBox, Trajectory};

#[derive(Debug, Error, PartialEq)]
pub enum ValidationError {
    #[error("node {node}: samples {first} and {second} share frame {frame}")]
    SharedFrame { node: NodeId, frame: i64, first: usize, second: usize },
    #[error("target {0} has no trajectory")]
    MissingTarget(NodeId),
}

/// Scene frame index of a timestamp: nearest frame, so pairing tolerance is dt/2.
pub fn frame_index(t: f64, fps: f64) -> i64 {
    (t * fps).round() as i64
}

/// Frame index to sample index; two samples in one frame slot is an error.
pub fn frame_map(node: NodeId, traj: &Trajectory, fps: f64) -> Result<BTreeMap<i64, usize>, ValidationError> {
    let mut out = BTreeMap::new();
    for (i, s) in traj.samples().iter().enumerate() {
        let frame = frame_index(s.t, fps);
        if let Some(first) = out.insert(frame, i) {
            return Err(ValidationError::SharedFrame { node, frame, first, second: i });
        }
    }
    Ok(out)
}

pub fn check_alignment(traj: &Trajectory, target: &BehaviorSet, map: &LaneGraph, p: &ClassifierParams) -> bool {
    target.is_subset(&describe(traj, map, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffRoad {
    pub off_road: bool,
    pub fraction: f64,
}

/// Off road when a strict majority of samples lies outside the drivable area.
pub fn check_offroad(traj: &Trajectory, map: &LaneGraph) -> OffRoad {
    let off = traj.positions().filter(|&p| !is_on_road(map, p)).count();
    let fraction = off as f64 / traj.len() as f64;
    OffRoad { off_road: fraction > 0.5, fraction }
}

/// One object's boxes keyed by scene frame.
#[derive(Debug, Clone)]
pub struct FrameBoxes {
    pub id: NodeId,
    pub boxes: BTreeMap<i64, OrientedBox>,
}

impl FrameBoxes {
    pub fn new(id: NodeId, traj: &Trajectory, footprint: Footprint, fps: f64) -> Result<Self, ValidationError> {
        let frames = frame_map(id, traj, fps)?;
        let boxes = frames
            .into_iter()
            .map(|(f, i)| (f, oriented_box_at(traj, i, footprint).expect("index from frame map")))
            .collect();
        Ok(Self { id, boxes })
    }

    /// Frames where both objects exist and their boxes overlap, ascending.
    pub fn overlap_frames(&self, other: &FrameBoxes) -> Vec<i64> {
        self.boxes
            .iter()
            .filter_map(|(f, a)| other.boxes.get(f).filter(|b| sat_overlap(a, b)).map(|_| *f))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CollisionFinding {
    /// Scene frame of the first overlap with this partner.
    pub frame: i64,
    pub partner: NodeId,
}

/// Vehicle boxes for every non-pedestrian node, with `edited` overriding the scene.
pub fn vehicle_boxes(scene: &ScenarioGraph, edited: &BTreeMap<NodeId, Trajectory>) -> Result<Vec<FrameBoxes>, ValidationError> {
    scene
        .nodes()
        .filter(|n| n.kind != ObjectKind::Pedestrian)
        .map(|n| FrameBoxes::new(n.id, edited.get(&n.id).unwrap_or(&n.trajectory), n.footprint, scene.fps))
        .collect()
}

/// Per node, every partner it overlaps with and the first frame of contact; sorted by (frame, partner).
pub fn check_collisions(
    scene: &ScenarioGraph,
    edited: &BTreeMap<NodeId, Trajectory>,
) -> Result<BTreeMap<NodeId, Vec<CollisionFinding>>, ValidationError> {
    let boxes = vehicle_boxes(scene, edited)?;
    let mut out: BTreeMap<NodeId, Vec<CollisionFinding>> = BTreeMap::new();
    for (i, a) in boxes.iter().enumerate() {
        for b in &boxes[i + 1..] {
            if let Some(&frame) = a.overlap_frames(b).first() {
                out.entry(a.id).or_default().push(CollisionFinding { frame, partner: b.id });
                out.entry(b.id).or_default().push(CollisionFinding { frame, partner: a.id });
            }
        }
    }
    for findings in out.values_mut() {
        findings.sort();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aspect {
    BehaviorAlignment,
    OnRoad,
    NoCollision,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct NodeReport {
    pub behavior_aligned: bool,
    pub collision: bool,
    pub collisions: Vec<CollisionFinding>,
    pub off_road: bool,
    pub off_road_fraction: f64,
    pub overall_success: bool,
}

impl NodeReport {
    pub fn new(behavior_aligned: bool, collisions: Vec<CollisionFinding>, off_road: OffRoad) -> Self {
        let collision = !collisions.is_empty();
        Self {
            behavior_aligned,
            collision,
            collisions,
            off_road: off_road.off_road,
            off_road_fraction: off_road.fraction,
            overall_success: behavior_aligned && !collision && !off_road.off_road,
        }
    }

    pub fn failed_aspects(&self) -> Vec<Aspect> {
        let mut out = Vec::new();
        if !self.behavior_aligned {
            out.push(Aspect::BehaviorAlignment);
        }
        if self.off_road {
            out.push(Aspect::OnRoad);
        }
        if self.collision {
            out.push(Aspect::NoCollision);
        }
        out
    }

    pub fn status(&self) -> &'static str {
        if self.overall_success {
            "success"
        } else {
            "fail"
        }
    }
}

impl Serialize for NodeReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("NodeReport", 8)?;
        st.serialize_field("status", self.status())?;
        st.serialize_field("failed_aspects", &self.failed_aspects())?;
        st.serialize_field("behavior_aligned", &self.behavior_aligned)?;
        st.serialize_field("collision", &self.collision)?;
        st.serialize_field("collisions", &self.collisions)?;
        st.serialize_field("off_road", &self.off_road)?;
        st.serialize_field("off_road_fraction", &self.off_road_fraction)?;
        st.serialize_field("overall_success", &self.overall_success)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub nodes: BTreeMap<NodeId, NodeReport>,
}

impl ValidationReport {
    pub fn all_success(&self) -> bool {
        self.nodes.values().all(|r| r.overall_success)
    }

    pub fn success_count(&self) -> usize {
        self.nodes.values().filter(|r| r.overall_success).count()
    }
}

/// Checks every target; other nodes only take part in collision checks.
pub fn validate(
    scene: &ScenarioGraph,
    edited: &BTreeMap<NodeId, Trajectory>,
    targets: &BTreeMap<NodeId, BehaviorSet>,
    map: &LaneGraph,
    p: &ClassifierParams,
) -> Result<ValidationReport, ValidationError> {
    let mut collisions = check_collisions(scene, edited)?;
    let mut nodes = BTreeMap::new();
    for (&id, target) in targets {
        let traj = match edited.get(&id) {
            Some(t) => t,
            None => &scene.node(id).map_err(|_| ValidationError::MissingTarget(id))?.trajectory,
        };
        let pedestrian = scene.node(id).map(|n| n.kind == ObjectKind::Pedestrian).unwrap_or(false);
        let mut off = check_offroad(traj, map);
        if pedestrian {
            off.off_road = false;
        }
        let aligned = check_alignment(traj, target, map, p);
        nodes.insert(id, NodeReport::new(aligned, collisions.remove(&id).unwrap_or_default(), off));
    }
    Ok(ValidationReport { nodes })
}
