//! Seeded sample-and-score trajectory generator over a kinematic unicycle.
//!
//! For each target node a pool of candidate rollouts is drawn around nominal
//! controls (taken from the node's logged trajectory, or from a reference in
//! pre-trajectory mode) and the candidate with the lowest guided cost wins.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::behavior::{describe, BehaviorSet, ClassifierParams};
use crate::geometry::{wrap_angle, Point};
use crate::map_model::{is_on_road, LaneGraph};
use crate::scene_graph::{NodeId, ObjectKind, ObjectNode, ScenarioGraph};
use crate::trajectory::{Footprint, Sample, Trajectory, TrajectoryError};
use crate::validation::{FrameBoxes, ValidationError};

pub const DEFAULT_CF_WEIGHT: f64 = 2.5;
pub const PRE_TRAJ_INITIAL_WEIGHT: f64 = 1e4;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("no target nodes")]
    NoTargets,
    #[error("unknown target node {0}")]
    UnknownTarget(NodeId),
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("invalid guidance for node {node}: {reason}")]
    BadGuidance { node: NodeId, reason: String },
    #[error("node {node}: {source}")]
    Trajectory { node: NodeId, source: TrajectoryError },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// Guidance applied to one node's sampler.
#[derive(Debug, Clone, PartialEq)]
pub enum GuidanceConfig {
    Cf { cf_weight: f64, on_road_weight: Option<f64>, no_collision_weight: Option<f64> },
    PreTraj { pre_traj_weight: f64, reference: Trajectory },
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        GuidanceConfig::Cf { cf_weight: DEFAULT_CF_WEIGHT, on_road_weight: None, no_collision_weight: None }
    }
}

/// Effective weights; absent guidance terms are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Weights {
    pub cf: f64,
    pub on_road: f64,
    pub no_collision: f64,
    pub pre_traj: f64,
}

impl GuidanceConfig {
    pub fn pre_traj(reference: Trajectory) -> Self {
        GuidanceConfig::PreTraj { pre_traj_weight: PRE_TRAJ_INITIAL_WEIGHT, reference }
    }

    pub fn mode(&self) -> &'static str {
        match self {
            GuidanceConfig::Cf { .. } => "cf_guidance",
            GuidanceConfig::PreTraj { .. } => "pre_traj_guidance",
        }
    }

    pub fn weights(&self) -> Weights {
        match *self {
            GuidanceConfig::Cf { cf_weight, on_road_weight, no_collision_weight } => Weights {
                cf: cf_weight,
                on_road: on_road_weight.unwrap_or(0.0),
                no_collision: no_collision_weight.unwrap_or(0.0),
                pre_traj: 0.0,
            },
            GuidanceConfig::PreTraj { pre_traj_weight, .. } => Weights { pre_traj: pre_traj_weight, ..Weights::default() },
        }
    }

    pub fn reference(&self) -> Option<&Trajectory> {
        match self {
            GuidanceConfig::PreTraj { reference, .. } => Some(reference),
            GuidanceConfig::Cf { .. } => None,
        }
    }

    /// Every present weight must be positive and finite.
    pub fn check(&self) -> Result<(), String> {
        let present: Vec<f64> = match *self {
            GuidanceConfig::Cf { cf_weight, on_road_weight, no_collision_weight } => {
                [Some(cf_weight), on_road_weight, no_collision_weight].into_iter().flatten().collect()
            }
            GuidanceConfig::PreTraj { pre_traj_weight, .. } => vec![pre_traj_weight],
        };
        match present.into_iter().find(|w| !(w.is_finite() && *w > 0.0)) {
            Some(w) => Err(format!("weight {w} is not positive and finite")),
            None => Ok(()),
        }
    }
}

/// Weight map only; the reference trajectory is not serialized.
struct WeightMap<'a>(&'a GuidanceConfig);

impl Serialize for WeightMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        match *self.0 {
            GuidanceConfig::Cf { cf_weight, on_road_weight, no_collision_weight } => {
                m.serialize_entry("classifier_free", &cf_weight)?;
                if let Some(w) = on_road_weight {
                    m.serialize_entry("on_road", &w)?;
                }
                if let Some(w) = no_collision_weight {
                    m.serialize_entry("no_collision", &w)?;
                }
            }
            GuidanceConfig::PreTraj { pre_traj_weight, .. } => m.serialize_entry("pre_traj", &pre_traj_weight)?,
        }
        m.end()
    }
}

impl Serialize for GuidanceConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("mode", self.mode())?;
        m.serialize_entry("guidance_config", &WeightMap(self))?;
        m.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub num_candidates: usize,
    /// Acceleration noise scale (m/s²).
    pub sigma_accel: f64,
    /// Yaw-rate noise scale (rad/s).
    pub sigma_yaw: f64,
    pub accel_limit: f64,
    pub yaw_rate_limit: f64,
    pub max_speed: f64,
    /// Spacing of the piecewise-linear noise knots (s).
    pub knot_interval: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            num_candidates: 64,
            sigma_accel: 1.0,
            sigma_yaw: 0.15,
            accel_limit: 3.0,
            yaw_rate_limit: 0.5,
            max_speed: 40.0,
            knot_interval: 1.0,
        }
    }
}

/// Per-candidate multipliers on the noise scales; candidate 0 is noise free.
const YAW_SCALES: [f64; 8] = [0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2];
const ACCEL_SCALES: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

pub fn candidate_scales(index: usize) -> (f64, f64) {
    (ACCEL_SCALES[(index / YAW_SCALES.len()) % ACCEL_SCALES.len()], YAW_SCALES[index % YAW_SCALES.len()])
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        let mut z = h ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

/// Start state and per-step nominal controls.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPlan {
    pub start_frame: i64,
    pub start: Point,
    pub heading: f64,
    pub speed: f64,
    /// Nominal acceleration and yaw rate applied before step i (index 0 unused).
    pub accel: Vec<f64>,
    pub yaw_rate: Vec<f64>,
}

impl ControlPlan {
    /// Controls that replay `source` (interval speeds and directions) followed by holding.
    pub fn from_source(source: &Trajectory, steps: usize, fps: f64, fallback_speed: f64) -> Self {
        let dt = 1.0 / fps;
        let s = source.samples();
        let first = &s[0];
        let mut accel = vec![0.0; steps.max(1)];
        let mut yaw_rate = vec![0.0; steps.max(1)];
        let (speed, heading) = if s.len() >= 2 {
            let seg = |j: usize| {
                let d = s[j + 1].position() - s[j].position();
                (d.norm() / (s[j + 1].t - s[j].t), if d.norm() > 0.0 { d.y.atan2(d.x) } else { s[j].heading })
            };
            let segs: Vec<(f64, f64)> = (0..s.len() - 1).map(seg).collect();
            for i in 1..steps.min(segs.len()) {
                accel[i] = (segs[i].0 - segs[i - 1].0) / dt;
                yaw_rate[i] = wrap_angle(segs[i].1 - segs[i - 1].1) / dt;
            }
            segs[0]
        } else {
            (fallback_speed, first.heading)
        };
        Self { start_frame: (first.t * fps).round() as i64, start: first.position(), heading, speed, accel, yaw_rate }
    }
}

/// Integrates a unicycle (semi-implicit Euler) under clamped controls.
pub fn integrate(plan: &ControlPlan, accel: &[f64], yaw_rate: &[f64], steps: usize, fps: f64, p: &SynthParams) -> Trajectory {
    let dt = 1.0 / fps;
    let (mut pos, mut v, mut phi) = (plan.start, plan.speed.clamp(0.0, p.max_speed), plan.heading);
    let time = |i: usize| (plan.start_frame + i as i64) as f64 / fps;
    let mut samples = Vec::with_capacity(steps + 1);
    for i in 0..steps {
        if i > 0 {
            v = (v + accel[i].clamp(-p.accel_limit, p.accel_limit) * dt).clamp(0.0, p.max_speed);
            phi += yaw_rate[i].clamp(-p.yaw_rate_limit, p.yaw_rate_limit) * dt;
        }
        samples.push(Sample::new(time(i), pos.x, pos.y, phi));
        pos = pos + Point::from_heading(phi) * (v * dt);
    }
    samples.push(Sample::new(time(steps), pos.x, pos.y, phi));
    Trajectory::new(samples, dt).expect("finite integration")
}

fn knot_noise(rng: &mut ChaCha8Rng, steps: usize, fps: f64, knot_interval: f64) -> Vec<f64> {
    let bias: f64 = rng.sample(StandardNormal);
    let span = steps as f64 / fps;
    let n_knots = (span / knot_interval).ceil() as usize + 2;
    let knots: Vec<f64> = (0..n_knots).map(|_| rng.sample(StandardNormal)).collect();
    (0..steps.max(1))
        .map(|i| {
            let u = i as f64 / fps / knot_interval;
            let k = (u.floor() as usize).min(n_knots - 2);
            let frac = u - k as f64;
            bias + knots[k] * (1.0 - frac) + knots[k + 1] * frac
        })
        .collect()
}

/// The seeded pool of candidate rollouts for one node.
pub fn candidate_pool(plan: &ControlPlan, steps: usize, fps: f64, seed: u64, node: NodeId, p: &SynthParams) -> Vec<Trajectory> {
    (0..p.num_candidates.max(1))
        .into_par_iter()
        .map(|k| {
            let (sa, sw) = candidate_scales(k);
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, node as u64, k as u64]));
            let na = knot_noise(&mut rng, steps, fps, p.knot_interval);
            let nw = knot_noise(&mut rng, steps, fps, p.knot_interval);
            let accel: Vec<f64> = plan.accel.iter().zip(&na).map(|(a, n)| a + sa * p.sigma_accel * n).collect();
            let yaw: Vec<f64> = plan.yaw_rate.iter().zip(&nw).map(|(w, n)| w + sw * p.sigma_yaw * n).collect();
            integrate(plan, &accel, &yaw, steps, fps, p)
        })
        .collect()
}

/// Everything a cost evaluation needs besides the candidate.
#[derive(Debug, Clone)]
pub struct CostContext<'a> {
    pub map: &'a LaneGraph,
    pub classifier: &'a ClassifierParams,
    pub fps: f64,
    pub footprint: Footprint,
    pub kind: ObjectKind,
    /// Boxes of the other vehicles, already excluding pedestrians.
    pub others: Vec<FrameBoxes>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CostTerms {
    pub behavior_miss: f64,
    pub offroad_fraction: f64,
    pub collision_count: usize,
    pub pre_traj_mse: f64,
}

impl CostTerms {
    pub fn total(&self, w: &Weights) -> f64 {
        w.cf * self.behavior_miss
            + w.on_road * self.offroad_fraction
            + w.no_collision * self.collision_count as f64
            + w.pre_traj * self.pre_traj_mse
    }
}

/// Fraction of target tokens missing from the trajectory's description; zero for an empty target.
pub fn behavior_miss(traj: &Trajectory, target: &BehaviorSet, map: &LaneGraph, p: &ClassifierParams) -> f64 {
    if target.is_empty() {
        return 0.0;
    }
    target.missing_from(&describe(traj, map, p)) as f64 / target.len() as f64
}

/// Mean squared position deviation over index-paired samples.
pub fn mean_squared_deviation(traj: &Trajectory, reference: &Trajectory) -> f64 {
    let n = traj.len().min(reference.len());
    if n == 0 {
        return 0.0;
    }
    let sum: f64 = traj.positions().zip(reference.positions()).take(n).map(|(a, b)| (a - b).dot(a - b)).sum();
    sum / n as f64
}

pub fn cost_terms(traj: &Trajectory, target: &BehaviorSet, cfg: &GuidanceConfig, ctx: &CostContext) -> CostTerms {
    let w = cfg.weights();
    let offroad_fraction = if w.on_road > 0.0 {
        traj.positions().filter(|&p| !is_on_road(ctx.map, p)).count() as f64 / traj.len() as f64
    } else {
        0.0
    };
    let collision_count = if w.no_collision > 0.0 && ctx.kind != ObjectKind::Pedestrian {
        let mine = FrameBoxes::new(NodeId::MAX, traj, ctx.footprint, ctx.fps).expect("rollout frames are distinct");
        let mut frames: Vec<i64> = ctx.others.iter().flat_map(|o| mine.overlap_frames(o)).collect();
        frames.sort_unstable();
        frames.dedup();
        frames.len()
    } else {
        0
    };
    CostTerms {
        behavior_miss: if w.cf > 0.0 { behavior_miss(traj, target, ctx.map, ctx.classifier) } else { 0.0 },
        offroad_fraction,
        collision_count,
        pre_traj_mse: cfg.reference().map_or(0.0, |r| mean_squared_deviation(traj, r)),
    }
}

/// Weighted sum of the active guidance terms; non-negative.
pub fn total_cost(traj: &Trajectory, target: &BehaviorSet, cfg: &GuidanceConfig, ctx: &CostContext) -> f64 {
    cost_terms(traj, target, cfg, ctx).total(&cfg.weights())
}

/// Index of the cheapest candidate; ties go to the lower index.
pub fn select_candidate(costs: &[f64]) -> usize {
    costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("non-empty pool")
}

#[derive(Debug, Clone)]
pub struct SynthTarget {
    pub behavior: BehaviorSet,
    pub guidance: GuidanceConfig,
}

#[derive(Debug, Clone)]
pub struct SynthRequest<'a> {
    pub scene: &'a ScenarioGraph,
    pub map: &'a LaneGraph,
    pub targets: BTreeMap<NodeId, SynthTarget>,
    /// Defaults to the scene duration.
    pub horizon: Option<f64>,
    pub seed: u64,
    pub params: SynthParams,
    pub classifier: ClassifierParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedCandidate {
    pub index: usize,
    pub cost: f64,
    pub terms: CostTerms,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    /// New trajectories of the targets; other nodes keep their logged ones.
    pub trajectories: BTreeMap<NodeId, Trajectory>,
    pub selected: BTreeMap<NodeId, SelectedCandidate>,
    /// Some horizon was cut to fit the scene.
    pub truncated: bool,
}

/// Something that turns a request into target trajectories.
pub trait TrajectorySimulator: Sync {
    fn simulate(&self, req: &SynthRequest) -> Result<RolloutResult, SynthError>;
}

/// The default sample-and-score simulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleSimulator;

impl TrajectorySimulator for SampleSimulator {
    fn simulate(&self, req: &SynthRequest) -> Result<RolloutResult, SynthError> {
        rollout(req)
    }
}

fn nominal_source<'a>(node: &'a ObjectNode, cfg: &'a GuidanceConfig) -> &'a Trajectory {
    cfg.reference().unwrap_or(&node.trajectory)
}

/// Steps for a node starting at `start_frame`, cut to the scene end when needed.
fn horizon_steps(scene: &ScenarioGraph, start_frame: i64, horizon: f64) -> (usize, bool) {
    let wanted = (horizon * scene.fps).round() as i64;
    let end_frame = (scene.end_time() * scene.fps).round() as i64;
    let available = (end_frame - start_frame).max(0);
    if wanted > available {
        (available as usize, true)
    } else {
        (wanted as usize, false)
    }
}

/// Samples every target in ascending id order; each sees the selections already made.
pub fn rollout(req: &SynthRequest) -> Result<RolloutResult, SynthError> {
    if req.targets.is_empty() {
        return Err(SynthError::NoTargets);
    }
    let horizon = req.horizon.unwrap_or(req.scene.duration);
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(SynthError::BadHorizon(horizon));
    }
    for (&id, t) in &req.targets {
        req.scene.node(id).map_err(|_| SynthError::UnknownTarget(id))?;
        t.guidance.check().map_err(|reason| SynthError::BadGuidance { node: id, reason })?;
    }
    let fps = req.scene.fps;
    let fallback_speed = req.scene.ego().trajectory.speeds().ok().and_then(|v| v.first().copied()).unwrap_or(0.0);
    let mut current: BTreeMap<NodeId, Trajectory> = BTreeMap::new();
    let mut selected = BTreeMap::new();
    let mut truncated = false;
    for (&id, target) in &req.targets {
        let node = req.scene.node(id).expect("checked above");
        let source = nominal_source(node, &target.guidance);
        let start_frame = (source.first().t * fps).round() as i64;
        let (steps, cut) = horizon_steps(req.scene, start_frame, horizon);
        if cut {
            log::warn!("node {id}: horizon {horizon}s truncated to {steps} steps");
            truncated = true;
        }
        let plan = ControlPlan::from_source(source, steps, fps, fallback_speed);
        let others = req
            .scene
            .nodes()
            .filter(|n| n.id != id && n.kind != ObjectKind::Pedestrian)
            .map(|n| FrameBoxes::new(n.id, current.get(&n.id).unwrap_or(&n.trajectory), n.footprint, fps))
            .collect::<Result<Vec<_>, _>>()?;
        let ctx = CostContext { map: req.map, classifier: &req.classifier, fps, footprint: node.footprint, kind: node.kind, others };
        let pool = candidate_pool(&plan, steps, fps, req.seed, id, &req.params);
        let weights = target.guidance.weights();
        let terms: Vec<CostTerms> = pool.par_iter().map(|c| cost_terms(c, &target.behavior, &target.guidance, &ctx)).collect();
        let costs: Vec<f64> = terms.iter().map(|t| t.total(&weights)).collect();
        let best = select_candidate(&costs);
        selected.insert(id, SelectedCandidate { index: best, cost: costs[best], terms: terms[best] });
        current.insert(id, pool[best].clone());
    }
    Ok(RolloutResult { trajectories: current, selected, truncated })
}
