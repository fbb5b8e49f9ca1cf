//! Closed-loop review: validate each rollout and retune guidance until every target passes.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::behavior::{BehaviorSet, ClassifierParams};
use crate::map_model::LaneGraph;
use crate::scene_graph::{NodeId, ScenarioGraph};
use crate::synth::{mix_seed, GuidanceConfig, SynthError, SynthParams, SynthRequest, SynthTarget, TrajectorySimulator};
use crate::trajectory::Trajectory;
use crate::validation::{validate, Aspect, NodeReport, ValidationError, ValidationReport};

pub const DEFAULT_MAX_ITERATIONS: usize = 5;
const INITIAL_PENALTY_WEIGHT: f64 = 1e3;
const PENALTY_FACTOR: f64 = 3.0;

#[derive(Debug, Error, PartialEq)]
pub enum ReviewError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("max_iterations must be at least 1")]
    NoIterations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReviewConfig {
    pub max_iterations: usize,
    pub seed: u64,
    pub horizon: Option<f64>,
    pub synth: SynthParams,
    pub classifier: ClassifierParams,
}

impl Default for ReviewConfig {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed: 0,
            horizon: None,
            synth: SynthParams::default(),
            classifier: ClassifierParams::default(),
        }
    }
}

/// Next guidance for one node plus a human-readable log of what changed.
pub fn adjust(cfg: &GuidanceConfig, report: &NodeReport, traj: &Trajectory) -> (GuidanceConfig, Vec<String>) {
    let bump = |w: Option<f64>| Some(w.map_or(INITIAL_PENALTY_WEIGHT, |w| w * PENALTY_FACTOR));
    match cfg {
        GuidanceConfig::Cf { .. } if report.overall_success => (
            GuidanceConfig::pre_traj(traj.clone()),
            vec!["switched to pre_traj_guidance anchored on the successful trajectory".to_string()],
        ),
        &GuidanceConfig::Cf { mut cf_weight, mut on_road_weight, mut no_collision_weight } => {
            let mut log = Vec::new();
            for aspect in report.failed_aspects() {
                match aspect {
                    Aspect::BehaviorAlignment => {
                        cf_weight += 1.0;
                        log.push(format!("classifier_free raised to {cf_weight}"));
                    }
                    Aspect::OnRoad => {
                        on_road_weight = bump(on_road_weight);
                        log.push(format!("on_road set to {}", on_road_weight.unwrap()));
                    }
                    Aspect::NoCollision => {
                        no_collision_weight = bump(no_collision_weight);
                        log.push(format!("no_collision set to {}", no_collision_weight.unwrap()));
                    }
                }
            }
            (GuidanceConfig::Cf { cf_weight, on_road_weight, no_collision_weight }, log)
        }
        GuidanceConfig::PreTraj { .. } if report.overall_success => (cfg.clone(), Vec::new()),
        GuidanceConfig::PreTraj { pre_traj_weight, reference } => {
            let w = pre_traj_weight * PENALTY_FACTOR;
            (
                GuidanceConfig::PreTraj { pre_traj_weight: w, reference: reference.clone() },
                vec![format!("pre_traj raised to {w}")],
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeIteration {
    pub node: NodeId,
    #[serde(flatten)]
    pub guidance: GuidanceConfig,
    pub status: &'static str,
    pub failed_aspects: Vec<Aspect>,
    pub adjustments_made: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub success_count: usize,
    pub nodes: Vec<NodeIteration>,
    #[serde(skip)]
    pub report: ValidationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReviewOutcome {
    /// Per target: the last successful trajectory, else the last attempt.
    #[serde(skip)]
    pub trajectories: BTreeMap<NodeId, Trajectory>,
    /// Validation of `trajectories` taken together.
    #[serde(skip)]
    pub report: ValidationReport,
    #[serde(skip)]
    pub saved_successes: BTreeMap<NodeId, Trajectory>,
    pub converged: bool,
    pub truncated: bool,
    pub history: Vec<IterationRecord>,
}

impl ReviewOutcome {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn exhausted(&self) -> bool {
        !self.converged
    }
}

/// Runs up to `max_iterations` rollouts, stopping as soon as every target passes.
pub fn review(
    sim: &dyn TrajectorySimulator,
    scene: &ScenarioGraph,
    map: &LaneGraph,
    targets: &BTreeMap<NodeId, BehaviorSet>,
    initial: &BTreeMap<NodeId, GuidanceConfig>,
    cfg: &ReviewConfig,
) -> Result<ReviewOutcome, ReviewError> {
    if cfg.max_iterations == 0 {
        return Err(ReviewError::NoIterations);
    }
    let mut guidance: BTreeMap<NodeId, GuidanceConfig> =
        targets.keys().map(|&id| (id, initial.get(&id).cloned().unwrap_or_default())).collect();
    let mut history = Vec::new();
    let mut saved: BTreeMap<NodeId, Trajectory> = BTreeMap::new();
    let mut last: BTreeMap<NodeId, Trajectory> = BTreeMap::new();
    let mut truncated = false;
    let mut converged = false;

    for iteration in 1..=cfg.max_iterations {
        let req = SynthRequest {
            scene,
            map,
            targets: targets
                .iter()
                .map(|(&id, b)| (id, SynthTarget { behavior: b.clone(), guidance: guidance[&id].clone() }))
                .collect(),
            horizon: cfg.horizon,
            seed: mix_seed(&[cfg.seed, iteration as u64]),
            params: cfg.synth,
            classifier: cfg.classifier,
        };
        let result = sim.simulate(&req)?;
        truncated |= result.truncated;
        let report = validate(scene, &result.trajectories, targets, map, &cfg.classifier)?;
        let success_count = report.success_count();
        let done = report.all_success();

        let mut nodes = Vec::with_capacity(targets.len());
        let mut next = BTreeMap::new();
        for (&id, node_report) in &report.nodes {
            let current = &guidance[&id];
            let traj = result.trajectories.get(&id).unwrap_or(&scene.node(id).expect("validated").trajectory);
            let (updated, adjustments_made) =
                if done || iteration == cfg.max_iterations { (current.clone(), Vec::new()) } else { adjust(current, node_report, traj) };
            log::debug!("iteration {iteration} node {id}: {} {:?}", node_report.status(), adjustments_made);
            nodes.push(NodeIteration {
                node: id,
                guidance: current.clone(),
                status: node_report.status(),
                failed_aspects: node_report.failed_aspects(),
                adjustments_made,
            });
            next.insert(id, updated);
            if node_report.overall_success {
                saved.insert(id, traj.clone());
            }
            last.insert(id, traj.clone());
        }
        history.push(IterationRecord { iteration, success_count, nodes, report });
        if done {
            converged = true;
            break;
        }
        guidance = next;
    }

    if !converged {
        log::warn!("review exhausted {} iterations", cfg.max_iterations);
    }
    let trajectories: BTreeMap<NodeId, Trajectory> =
        last.into_iter().map(|(id, t)| (id, saved.get(&id).cloned().unwrap_or(t))).collect();
    let report = if converged {
        history.last().expect("at least one iteration").report.clone()
    } else {
        validate(scene, &trajectories, targets, map, &cfg.classifier)?
    };
    Ok(ReviewOutcome { trajectories, report, saved_successes: saved, converged, truncated, history })
}
