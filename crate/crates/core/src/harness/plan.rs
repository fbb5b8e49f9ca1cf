//! Turns an edit program into an ordered plan and runs it.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::dsl::{EditProgram, ObjRef, Statement};
use super::HarnessError;
use crate::behavior::{describe, BehaviorSet};
use crate::counterfactual::{pipeline, select, ContextFilter, Tables};
use crate::map_model::LaneGraph;
use crate::reviewer::{review, ReviewConfig, ReviewOutcome};
use crate::scene_graph::{initial_position, normalize_attributes, GroundingQuery, NodeId, ObjectKind, ScenarioGraph};
use crate::synth::TrajectorySimulator;
use crate::trajectory::{Footprint, Trajectory};
use crate::validation::ValidationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ground,
    NodeEdits,
    Describe,
    Counterfactual,
    Select,
    Review,
    Validate,
    Emit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub program: EditProgram,
    pub stages: Vec<Stage>,
    pub notes: Vec<String>,
}

/// Stages follow a fixed template; statement order inside each stage is program order.
pub fn build_plan(prog: &EditProgram) -> Plan {
    let st = &prog.statements;
    let has_refs = st.iter().any(|s| s.target().is_some());
    let node_edits = st.iter().any(|s| !matches!(s, Statement::Behavior { .. }));
    let behavior_edits = st.iter().any(|s| matches!(s, Statement::Behavior { .. }));
    let generates = behavior_edits || st.iter().any(|s| matches!(s, Statement::Insert { .. }));

    let mut stages = Vec::new();
    if has_refs {
        stages.push(Stage::Ground);
    }
    if node_edits {
        stages.push(Stage::NodeEdits);
    }
    if behavior_edits {
        stages.extend([Stage::Describe, Stage::Counterfactual, Stage::Select]);
    }
    if generates {
        stages.extend([Stage::Review, Stage::Validate]);
    }
    stages.push(Stage::Emit);

    let mut notes = Vec::new();
    for (i, a) in st.iter().enumerate() {
        for (j, b) in st.iter().enumerate().skip(i + 1) {
            if let (Some(ra), Some(rb)) = (a.target(), b.target()) {
                if ra == rb {
                    notes.push(format!(
                        "statements {i} ({}) and {j} ({}) both address {ra}; node edits run before behavior edits",
                        a.keyword(),
                        b.keyword()
                    ));
                }
            }
        }
    }
    Plan { program: prog.clone(), stages, notes }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EditStatus {
    Applied,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub statement: usize,
    pub node: Option<NodeId>,
    pub requested: BehaviorSet,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSource {
    Behavior,
    Insert,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSummary {
    pub node: NodeId,
    pub statement: usize,
    pub source: TargetSource,
    pub original: Option<BehaviorSet>,
    pub requested: Option<BehaviorSet>,
    pub counterfactual_count: Option<usize>,
    pub target: BehaviorSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EditOutcome {
    pub status: EditStatus,
    pub stages: Vec<Stage>,
    pub notes: Vec<String>,
    pub targets: Vec<TargetSummary>,
    pub rejections: Vec<Rejection>,
    pub review: Option<ReviewOutcome>,
    pub validation: Option<ValidationReport>,
    #[serde(skip)]
    pub scene: ScenarioGraph,
    /// The scene after node edits but before generation; what renderers draw as the original.
    #[serde(skip)]
    pub base: ScenarioGraph,
}

impl EditOutcome {
    pub fn edited(&self) -> BTreeMap<NodeId, Trajectory> {
        self.targets.iter().map(|t| (t.node, self.scene.node(t.node).expect("target in scene").trajectory.clone())).collect()
    }
}

const PEDESTRIAN_WORDS: [&str; 2] = ["pedestrian", "person"];

fn kind_for(attrs: &BTreeSet<String>) -> (ObjectKind, Footprint) {
    if attrs.iter().any(|a| PEDESTRIAN_WORDS.iter().any(|w| a.split(' ').any(|p| p == *w))) {
        (ObjectKind::Pedestrian, Footprint { length: 0.8, width: 0.8 })
    } else {
        (ObjectKind::Vehicle, Footprint::default())
    }
}

fn resolve(scene: &ScenarioGraph, map: &LaneGraph, r: &ObjRef, statement: usize) -> Result<NodeId, HarnessError> {
    let fail = |reason: String| HarnessError::Grounding { statement, reason };
    match r {
        ObjRef::Ego => Ok(scene.ego_id()),
        ObjRef::Id(id) => scene.node(*id).map(|n| n.id).map_err(|e| fail(e.to_string())),
        ObjRef::Query { attrs, relation } => {
            let (reference, direction) = match relation {
                Some((dir, inner)) => (Some(resolve(scene, map, inner, statement)?), Some(*dir)),
                None => (None, None),
            };
            let q = GroundingQuery {
                reference,
                direction,
                target_attrs: normalize_attributes(attrs),
                target_behavior: None,
                strict_direction: false,
            };
            scene.ground(map, &q).map_err(|e| fail(format!("{r}: {e}")))
        }
    }
}

/// Grounds against the input scene, applies node edits, derives behavior targets, then reviews.
pub fn execute(
    plan: &Plan,
    scene: &ScenarioGraph,
    map: &LaneGraph,
    tables: &Tables,
    cfg: &ReviewConfig,
    sim: &dyn TrajectorySimulator,
) -> Result<EditOutcome, HarnessError> {
    let statements = &plan.program.statements;
    let mut notes = plan.notes.clone();
    let resolved: Vec<Option<NodeId>> = statements
        .iter()
        .enumerate()
        .map(|(i, s)| s.target().map(|r| resolve(scene, map, r, i)).transpose())
        .collect::<Result<_, _>>()?;

    let mut edited = scene.clone();
    let mut removed = BTreeSet::new();
    let mut inserted: Vec<(usize, NodeId, Option<BehaviorSet>)> = Vec::new();
    for (i, s) in statements.iter().enumerate() {
        match s {
            Statement::Remove(_) => {
                let id = resolved[i].expect("resolved");
                edited = edited.remove_node(id)?;
                removed.insert(id);
            }
            Statement::Replace { attrs, .. } => {
                let id = resolved[i].expect("resolved");
                if removed.contains(&id) {
                    return Err(HarnessError::Grounding { statement: i, reason: format!("node {id} was removed earlier") });
                }
                let fp = edited.node(id)?.footprint;
                edited = edited.replace_node(id, normalize_attributes(attrs), fp)?;
            }
            Statement::Insert { attrs, placement, behavior } => {
                let attrs = normalize_attributes(attrs);
                let (kind, fp) = kind_for(&attrs);
                let pose = initial_position(&scene.ego().trajectory, placement.left, placement.front);
                let (next, id) = edited.insert_node(map, kind, attrs, fp, pose, behavior.clone())?;
                edited = next;
                inserted.push((i, id, behavior.clone()));
            }
            Statement::Behavior { .. } => {}
        }
    }

    let mut targets: BTreeMap<NodeId, TargetSummary> = BTreeMap::new();
    let mut rejections = Vec::new();
    for (i, s) in statements.iter().enumerate() {
        let Statement::Behavior { behavior, .. } = s else { continue };
        let id = resolved[i].expect("resolved");
        if removed.contains(&id) {
            return Err(HarnessError::Grounding { statement: i, reason: format!("node {id} was removed earlier") });
        }
        let node = edited.node(id)?;
        let original = describe(&node.trajectory, map, &cfg.classifier);
        let out = pipeline(&original, &node.trajectory, map, tables, &cfg.classifier)?;
        log::info!(
            "node {id}: {} expanded, {} compatible, {} in context, {} after subset pruning",
            out.expanded,
            out.compatible,
            out.contextual,
            out.space.len()
        );
        match select(&out.space, behavior, &original) {
            Some(target) => {
                if targets.contains_key(&id) {
                    notes.push(format!("statement {i} overrides an earlier behavior edit of node {id}"));
                }
                targets.insert(
                    id,
                    TargetSummary {
                        node: id,
                        statement: i,
                        source: TargetSource::Behavior,
                        original: Some(original),
                        requested: Some(behavior.clone()),
                        counterfactual_count: Some(out.space.len()),
                        target,
                    },
                );
            }
            None => rejections.push(Rejection {
                statement: i,
                node: Some(id),
                requested: behavior.clone(),
                reason: format!("no feasible counterfactual of [{original}] contains [{behavior}]"),
            }),
        }
    }
    for (i, id, behavior) in inserted {
        let requested = behavior.unwrap_or_default();
        let seed = &edited.node(id)?.trajectory;
        let conflicts = tables.compat.violations(&requested);
        if let Some((a, b)) = conflicts.first() {
            rejections.push(Rejection {
                statement: i,
                node: Some(id),
                requested: requested.clone(),
                reason: format!("{} is incompatible with {}", a.text(), b.text()),
            });
            continue;
        }
        if !ContextFilter::new(seed, map, &cfg.classifier).allows_set(&requested) {
            rejections.push(Rejection {
                statement: i,
                node: Some(id),
                requested: requested.clone(),
                reason: format!("[{requested}] is not feasible at the inserted pose"),
            });
            continue;
        }
        targets.insert(
            id,
            TargetSummary {
                node: id,
                statement: i,
                source: TargetSource::Insert,
                original: None,
                requested: Some(requested.clone()),
                counterfactual_count: None,
                target: requested,
            },
        );
    }

    let targets_list: Vec<TargetSummary> = targets.values().cloned().collect();
    if !rejections.is_empty() {
        return Ok(EditOutcome {
            status: EditStatus::Rejected,
            stages: plan.stages.clone(),
            notes,
            targets: targets_list,
            rejections,
            review: None,
            validation: None,
            scene: scene.clone(),
            base: edited,
        });
    }
    if targets.is_empty() {
        return Ok(EditOutcome {
            status: EditStatus::Applied,
            stages: plan.stages.clone(),
            notes,
            targets: targets_list,
            rejections,
            review: None,
            validation: None,
            scene: edited.clone(),
            base: edited,
        });
    }

    let goal: BTreeMap<NodeId, BehaviorSet> = targets.iter().map(|(&id, t)| (id, t.target.clone())).collect();
    let outcome = review(sim, &edited, map, &goal, &BTreeMap::new(), cfg)?;
    let mut out_scene = edited.clone();
    for (&id, traj) in &outcome.trajectories {
        out_scene = out_scene.with_trajectory(id, traj.clone())?;
        if targets[&id].source == TargetSource::Behavior {
            out_scene = out_scene.with_requested(id, Some(goal[&id].clone()))?;
        }
    }
    Ok(EditOutcome {
        status: EditStatus::Applied,
        stages: plan.stages.clone(),
        notes,
        targets: targets_list,
        rejections,
        validation: Some(outcome.report.clone()),
        review: Some(outcome),
        scene: out_scene,
        base: edited,
    })
}
