//! Editable scenario: a background map reference plus per-object nodes with
//! trajectories, node edits, placement and text-free object grounding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{describe, lane_ownership, BehaviorSet, ClassifierParams};
use crate::geometry::Point;
use crate::map_model::{is_on_road, LaneGraph};
use crate::trajectory::{Footprint, Sample, Trajectory, TrajectoryError};

pub type NodeId = u32;

/// Tolerance for sample times landing on the scene's frame grid.
const TIME_GRID_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("the ego node cannot be removed")]
    RemoveEgo,
    #[error("ego node {0} is not in the scene")]
    MissingEgo(NodeId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("placement ({x:.3}, {y:.3}) is off the drivable area")]
    OffRoad { x: f64, y: f64 },
    #[error("fps and duration must be positive and finite")]
    BadTimeBase,
    #[error("node {node}: sample at t={t} is off the {fps} fps frame grid or outside the scene")]
    OffGrid { node: NodeId, t: f64, fps: f64 },
    #[error("node {node}: {source}")]
    Trajectory { node: NodeId, source: TrajectoryError },
    #[error("no candidate objects remain after the direction filter")]
    NoCandidates,
    #[error("no object matches {0:?}")]
    NotFound(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Vehicle,
    Pedestrian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    #[default]
    Original,
    Inserted,
    Replaced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectNode {
    pub id: NodeId,
    pub kind: ObjectKind,
    pub attributes: BTreeSet<String>,
    pub footprint: Footprint,
    pub trajectory: Trajectory,
    pub provenance: Provenance,
    /// Behavior requested at insertion time.
    pub requested: Option<BehaviorSet>,
}

pub fn normalize_attributes<I, S>(attrs: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    attrs
        .into_iter()
        .map(|a| a.as_ref().split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase())
        .filter(|a| !a.is_empty())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Front,
    Back,
    Left,
    Right,
}

impl FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "front" => Ok(Direction::Front),
            "back" => Ok(Direction::Back),
            "left" => Ok(Direction::Left),
            "right" => Ok(Direction::Right),
            other => Err(format!("direction must be front, back, left or right, got {other:?}")),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Front => "front",
            Direction::Back => "back",
            Direction::Left => "left",
            Direction::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundingQuery {
    /// Reference node; the ego when absent.
    pub reference: Option<NodeId>,
    pub direction: Option<Direction>,
    pub target_attrs: BTreeSet<String>,
    pub target_behavior: Option<BehaviorSet>,
    /// Front/back additionally require a lateral offset under half the reference lane width.
    #[serde(default)]
    pub strict_direction: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGraph {
    pub fps: f64,
    pub duration: f64,
    pub map_ref: Option<String>,
    ego_id: NodeId,
    nodes: BTreeMap<NodeId, ObjectNode>,
}

impl ScenarioGraph {
    pub fn new(
        fps: f64,
        duration: f64,
        map_ref: Option<String>,
        ego_id: NodeId,
        nodes: Vec<ObjectNode>,
    ) -> Result<Self, SceneError> {
        if !(fps > 0.0 && fps.is_finite() && duration >= 0.0 && duration.is_finite()) {
            return Err(SceneError::BadTimeBase);
        }
        let mut map = BTreeMap::new();
        for node in nodes {
            check_time_base(&node, fps, duration)?;
            let id = node.id;
            if map.insert(id, node).is_some() {
                return Err(SceneError::DuplicateNode(id));
            }
        }
        if !map.contains_key(&ego_id) {
            return Err(SceneError::MissingEgo(ego_id));
        }
        Ok(Self { fps, duration, map_ref, ego_id, nodes: map })
    }

    pub fn ego_id(&self) -> NodeId {
        self.ego_id
    }

    pub fn ego(&self) -> &ObjectNode {
        &self.nodes[&self.ego_id]
    }

    pub fn nodes(&self) -> impl DoubleEndedIterator<Item = &ObjectNode> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Result<&ObjectNode, SceneError> {
        self.nodes.get(&id).ok_or(SceneError::UnknownNode(id))
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.fps
    }

    /// Number of frames on the scene grid, both ends included.
    pub fn frame_count(&self) -> usize {
        (self.duration * self.fps).round() as usize + 1
    }

    /// First timestamp of the ego trajectory; inserted nodes start here.
    pub fn start_time(&self) -> f64 {
        self.ego().trajectory.first().t
    }

    pub fn end_time(&self) -> f64 {
        self.start_time() + self.duration
    }

    pub fn remove_node(&self, id: NodeId) -> Result<Self, SceneError> {
        if id == self.ego_id {
            return Err(SceneError::RemoveEgo);
        }
        let mut out = self.clone();
        out.nodes.remove(&id).ok_or(SceneError::UnknownNode(id))?;
        Ok(out)
    }

    /// Adds a single-pose seed node with a fresh id.
    pub fn insert_node(
        &self,
        map: &LaneGraph,
        kind: ObjectKind,
        attributes: BTreeSet<String>,
        footprint: Footprint,
        pose: Pose,
        behavior: Option<BehaviorSet>,
    ) -> Result<(Self, NodeId), SceneError> {
        if !is_on_road(map, pose.position()) {
            return Err(SceneError::OffRoad { x: pose.x, y: pose.y });
        }
        let id = self.nodes.keys().next_back().map_or(0, |m| m + 1);
        let seed = Trajectory::new(vec![Sample::new(self.start_time(), pose.x, pose.y, pose.heading)], self.dt())
            .map_err(|source| SceneError::Trajectory { node: id, source })?;
        let node = ObjectNode {
            id,
            kind,
            attributes: normalize_attributes(attributes),
            footprint,
            trajectory: seed,
            provenance: Provenance::Inserted,
            requested: behavior,
        };
        let mut out = self.clone();
        out.nodes.insert(id, node);
        Ok((out, id))
    }

    /// Swaps appearance while keeping id and trajectory.
    pub fn replace_node(&self, id: NodeId, attributes: BTreeSet<String>, footprint: Footprint) -> Result<Self, SceneError> {
        let mut out = self.clone();
        let node = out.nodes.get_mut(&id).ok_or(SceneError::UnknownNode(id))?;
        node.attributes = normalize_attributes(attributes);
        node.footprint = footprint;
        node.provenance = Provenance::Replaced;
        Ok(out)
    }

    pub fn with_trajectory(&self, id: NodeId, trajectory: Trajectory) -> Result<Self, SceneError> {
        let mut out = self.clone();
        let node = out.nodes.get_mut(&id).ok_or(SceneError::UnknownNode(id))?;
        node.trajectory = trajectory;
        check_time_base(node, self.fps, self.duration)?;
        Ok(out)
    }

    pub fn with_requested(&self, id: NodeId, requested: Option<BehaviorSet>) -> Result<Self, SceneError> {
        let mut out = self.clone();
        out.nodes.get_mut(&id).ok_or(SceneError::UnknownNode(id))?.requested = requested;
        Ok(out)
    }

    /// Nodes satisfying `direction` in the reference's first-sample frame.
    pub fn filter_direction(
        &self,
        map: &LaneGraph,
        reference: NodeId,
        direction: Option<Direction>,
        strict: bool,
    ) -> Result<BTreeSet<NodeId>, SceneError> {
        let r = self.node(reference)?;
        let origin = r.trajectory.first();
        let params = ClassifierParams::default();
        let ref_lane = lane_ownership(&r.trajectory, map, &params).dominant;
        let half_width = ref_lane.and_then(|l| map.lane(l).ok()).map(|l| l.width / 2.0);
        let mut out = BTreeSet::new();
        for node in self.nodes.values().filter(|n| n.id != reference) {
            let local = to_local(origin, node.trajectory.first().position());
            let other_lane = || lane_ownership(&node.trajectory, map, &params).dominant;
            let keep = match direction {
                None => true,
                Some(Direction::Front) => local.x > 0.0 && (!strict || half_width.is_some_and(|h| local.y.abs() < h)),
                Some(Direction::Back) => local.x < 0.0 && (!strict || half_width.is_some_and(|h| local.y.abs() < h)),
                Some(Direction::Left) => local.y > 0.0 && other_lane() != ref_lane,
                Some(Direction::Right) => local.y < 0.0 && other_lane() != ref_lane,
            };
            if keep {
                out.insert(node.id);
            }
        }
        Ok(out)
    }

    /// Resolves a query to a single node: best attribute/behavior score, then nearest, then lowest id.
    pub fn ground(&self, map: &LaneGraph, q: &GroundingQuery) -> Result<NodeId, SceneError> {
        let reference = q.reference.unwrap_or(self.ego_id);
        let candidates = self.filter_direction(map, reference, q.direction, q.strict_direction)?;
        if candidates.is_empty() {
            return Err(SceneError::NoCandidates);
        }
        let wanted = normalize_attributes(&q.target_attrs);
        let origin = self.node(reference)?.trajectory.first().position();
        let params = ClassifierParams::default();
        let mut best: Option<(usize, f64, NodeId)> = None;
        for id in candidates {
            let node = &self.nodes[&id];
            let mut score = wanted.intersection(&node.attributes).count();
            if let Some(b) = &q.target_behavior {
                score += b.intersection_len(&describe(&node.trajectory, map, &params));
            }
            let dist = node.trajectory.first().position().distance(origin);
            let better = match best {
                None => true,
                Some((s, d, _)) => score > s || (score == s && dist < d),
            };
            if better {
                best = Some((score, dist, id));
            }
        }
        let (score, _, id) = best.expect("non-empty candidates");
        let asked = !wanted.is_empty() || q.target_behavior.as_ref().is_some_and(|b| !b.is_empty());
        if asked && score == 0 {
            return Err(SceneError::NotFound(wanted.into_iter().collect::<Vec<_>>().join(" ")));
        }
        Ok(id)
    }
}

fn check_time_base(node: &ObjectNode, fps: f64, duration: f64) -> Result<(), SceneError> {
    for s in node.trajectory.samples() {
        let frame = s.t * fps;
        if (frame - frame.round()).abs() > TIME_GRID_TOL * fps.max(1.0) {
            return Err(SceneError::OffGrid { node: node.id, t: s.t, fps });
        }
    }
    let span = node.trajectory.last().t - node.trajectory.first().t;
    if span > duration + TIME_GRID_TOL {
        return Err(SceneError::OffGrid { node: node.id, t: node.trajectory.last().t, fps });
    }
    Ok(())
}

fn to_local(origin: &Sample, p: Point) -> Point {
    (p - origin.position()).rotate(-origin.heading)
}

/// Pose `front` metres ahead and `left` metres to the left of the ego's first sample.
pub fn initial_position(ego: &Trajectory, left: f64, front: f64) -> Pose {
    let s = ego.first();
    let (sin, cos) = s.heading.sin_cos();
    Pose { x: s.x + front * cos - left * sin, y: s.y + front * sin + left * cos, heading: s.heading }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FootprintFile {
    length: f64,
    width: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ObjectFile {
    id: NodeId,
    kind: ObjectKind,
    #[serde(default)]
    attributes: Vec<String>,
    footprint: FootprintFile,
    trajectory: Vec<[f64; 4]>,
    #[serde(default, skip_serializing_if = "is_original")]
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    requested_behavior: Option<BehaviorSet>,
}

fn is_original(p: &Provenance) -> bool {
    *p == Provenance::Original
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SceneFile {
    fps: f64,
    duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    map_ref: Option<String>,
    ego_id: NodeId,
    objects: Vec<ObjectFile>,
}

impl Serialize for ScenarioGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let objects = self
            .nodes
            .values()
            .map(|n| ObjectFile {
                id: n.id,
                kind: n.kind,
                attributes: n.attributes.iter().cloned().collect(),
                footprint: FootprintFile { length: n.footprint.length, width: n.footprint.width },
                trajectory: n.trajectory.samples().iter().map(|p| [p.t, p.x, p.y, p.heading]).collect(),
                provenance: n.provenance,
                requested_behavior: n.requested.clone(),
            })
            .collect();
        SceneFile { fps: self.fps, duration: self.duration, map_ref: self.map_ref.clone(), ego_id: self.ego_id, objects }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ScenarioGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let file = SceneFile::deserialize(d)?;
        if file.fps.is_nan() || file.fps <= 0.0 {
            return Err(D::Error::custom(SceneError::BadTimeBase));
        }
        let dt = 1.0 / file.fps;
        let mut nodes = Vec::with_capacity(file.objects.len());
        for o in file.objects {
            let samples = o.trajectory.iter().map(|r| Sample::new(r[0], r[1], r[2], r[3])).collect();
            let trajectory = Trajectory::new(samples, dt)
                .map_err(|source| D::Error::custom(SceneError::Trajectory { node: o.id, source }))?;
            let footprint = Footprint::new(o.footprint.length, o.footprint.width)
                .map_err(|source| D::Error::custom(SceneError::Trajectory { node: o.id, source }))?;
            nodes.push(ObjectNode {
                id: o.id,
                kind: o.kind,
                attributes: normalize_attributes(&o.attributes),
                footprint,
                trajectory,
                provenance: o.provenance,
                requested: o.requested_behavior,
            });
        }
        ScenarioGraph::new(file.fps, file.duration, file.map_ref, file.ego_id, nodes).map_err(D::Error::custom)
    }
}
