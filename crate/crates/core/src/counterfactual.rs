//! Counterfactual behavior generation: expansion through the alternatives
//! table, compatibility pruning, map-context pruning, subset pruning and
//! instruction-conditioned selection.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{lane_ownership, BehaviorSet, BehaviorToken, ClassifierParams, UnknownToken};
use crate::geometry::distance_to_polygon;
use crate::map_model::{LaneGraph, LanePositionClass};
use crate::trajectory::Trajectory;

/// Embedded copies of the shipped tables.
pub const PHI_JSON: &str = include_str!("../data/phi.json");
pub const COMPATIBILITY_JSON: &str = include_str!("../data/compatibility.json");
/// Directory override for the table files.
pub const DATA_DIR_ENV: &str = "SCENARIO_FORGE_DATA";
pub const DEFAULT_SPACE_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum CounterfactualError {
    #[error("malformed table: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Token(#[from] UnknownToken),
    #[error("table has no row for {0:?}")]
    MissingRow(BehaviorToken),
    #[error("{0:?} lists itself as an alternative")]
    SelfAlternative(BehaviorToken),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("ground-truth set is empty")]
    EmptyGroundTruth,
    #[error("candidate space of {projected} combinations exceeds cap {cap}")]
    SpaceTooLarge { projected: u128, cap: usize },
}

#[derive(Deserialize)]
struct PhiFile {
    counterfactuals: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize)]
struct CompatibilityFile {
    incompatible: BTreeMap<String, Vec<String>>,
}

fn parse_rows(rows: BTreeMap<String, Vec<String>>) -> Result<BTreeMap<BehaviorToken, BehaviorSet>, CounterfactualError> {
    let mut out = BTreeMap::new();
    for (key, values) in rows {
        let token = BehaviorToken::from_text(&key)?;
        let set = values.iter().map(|v| BehaviorToken::from_text(v)).collect::<Result<BehaviorSet, _>>()?;
        out.insert(token, set);
    }
    for t in BehaviorToken::ALL {
        if !out.contains_key(&t) {
            return Err(CounterfactualError::MissingRow(t));
        }
    }
    Ok(out)
}

fn read(dir: &Path, name: &str) -> Result<String, CounterfactualError> {
    let path = dir.join(name);
    std::fs::read_to_string(&path).map_err(|source| CounterfactualError::Io { path: path.display().to_string(), source })
}

/// Alternatives each token may be replaced by; dropping is always allowed in addition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiTable {
    rows: BTreeMap<BehaviorToken, BehaviorSet>,
}

impl PhiTable {
    pub fn from_json(text: &str) -> Result<Self, CounterfactualError> {
        let file: PhiFile = serde_json::from_str(text)?;
        let rows = parse_rows(file.counterfactuals)?;
        if let Some((t, _)) = rows.iter().find(|(t, alts)| alts.contains(**t)) {
            return Err(CounterfactualError::SelfAlternative(*t));
        }
        Ok(Self { rows })
    }

    pub fn embedded() -> Self {
        Self::from_json(PHI_JSON).expect("embedded table is valid")
    }

    pub fn alternatives(&self, t: BehaviorToken) -> &BehaviorSet {
        &self.rows[&t]
    }

    pub fn rows(&self) -> &BTreeMap<BehaviorToken, BehaviorSet> {
        &self.rows
    }
}

/// Symmetric pairwise incompatibility relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityMatrix {
    pairs: BTreeSet<(BehaviorToken, BehaviorToken)>,
}

impl CompatibilityMatrix {
    /// Loads the listed pairs and closes them under symmetry.
    pub fn from_json(text: &str) -> Result<Self, CounterfactualError> {
        let file: CompatibilityFile = serde_json::from_str(text)?;
        let mut pairs = BTreeSet::new();
        for (a, row) in parse_rows(file.incompatible)? {
            for b in &row {
                pairs.insert((a, b));
                pairs.insert((b, a));
            }
        }
        Ok(Self { pairs })
    }

    pub fn embedded() -> Self {
        Self::from_json(COMPATIBILITY_JSON).expect("embedded table is valid")
    }

    pub fn incompatible(&self, a: BehaviorToken, b: BehaviorToken) -> bool {
        self.pairs.contains(&(a, b))
    }

    /// Every token incompatible with `a`.
    pub fn row(&self, a: BehaviorToken) -> BehaviorSet {
        self.pairs.range((a, BehaviorToken::ALL[0])..).take_while(|(x, _)| *x == a).map(|(_, b)| *b).collect()
    }

    pub fn is_valid(&self, set: &BehaviorSet) -> bool {
        self.violations(set).is_empty()
    }

    /// Incompatible pairs inside `set`, each reported once with the smaller token first.
    pub fn violations(&self, set: &BehaviorSet) -> Vec<(BehaviorToken, BehaviorToken)> {
        let tokens: Vec<BehaviorToken> = set.iter().collect();
        let mut out = Vec::new();
        for (i, &a) in tokens.iter().enumerate() {
            for &b in &tokens[i + 1..] {
                if self.incompatible(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Both tables, loaded from `SCENARIO_FORGE_DATA` when set, else the embedded copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tables {
    pub phi: PhiTable,
    pub compat: CompatibilityMatrix,
}

impl Tables {
    pub fn embedded() -> Self {
        Self { phi: PhiTable::embedded(), compat: CompatibilityMatrix::embedded() }
    }

    pub fn load_dir(dir: &Path) -> Result<Self, CounterfactualError> {
        Ok(Self {
            phi: PhiTable::from_json(&read(dir, "phi.json")?)?,
            compat: CompatibilityMatrix::from_json(&read(dir, "compatibility.json")?)?,
        })
    }

    pub fn load() -> Result<Self, CounterfactualError> {
        match std::env::var_os(DATA_DIR_ENV) {
            Some(dir) => Self::load_dir(Path::new(&dir)),
            None => Ok(Self::embedded()),
        }
    }
}

pub type CandidateSpace = BTreeSet<BehaviorSet>;

/// Every combination replacing each ground-truth token by itself, an alternative, or nothing.
pub fn expand(gt: &BehaviorSet, phi: &PhiTable) -> Result<CandidateSpace, CounterfactualError> {
    expand_with_cap(gt, phi, DEFAULT_SPACE_CAP)
}

pub fn expand_with_cap(gt: &BehaviorSet, phi: &PhiTable, cap: usize) -> Result<CandidateSpace, CounterfactualError> {
    if gt.is_empty() {
        return Err(CounterfactualError::EmptyGroundTruth);
    }
    let choices: Vec<Vec<Option<BehaviorToken>>> = gt
        .iter()
        .map(|t| {
            let mut c = vec![None, Some(t)];
            c.extend(phi.alternatives(t).iter().map(Some));
            c
        })
        .collect();
    let projected = choices.iter().map(|c| c.len() as u128).product::<u128>();
    if projected > cap as u128 {
        return Err(CounterfactualError::SpaceTooLarge { projected, cap });
    }
    let mut out = CandidateSpace::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let combo: BehaviorSet = idx.iter().zip(&choices).filter_map(|(&i, c)| c[i]).collect();
        if !combo.is_empty() {
            out.insert(combo);
        }
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(out);
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn prune_compatibility(space: &CandidateSpace, c: &CompatibilityMatrix) -> CandidateSpace {
    space.iter().filter(|s| c.is_valid(s)).cloned().collect()
}

/// Map facts about one object that decide which lane and turn tokens are feasible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContextFilter {
    /// Position class of the lane the object starts in.
    pub reference: Option<LanePositionClass>,
    pub left_neighbor: Option<LanePositionClass>,
    pub right_neighbor: Option<LanePositionClass>,
    /// Position classes present on the reference lane's road.
    pub road_classes: BTreeSet<LanePositionClass>,
    /// An intersection lies within lookahead of some sample.
    pub near_intersection: bool,
}

fn class_rank(c: LanePositionClass) -> u8 {
    match c {
        LanePositionClass::Leftmost => 0,
        LanePositionClass::Middle | LanePositionClass::Single => 1,
        LanePositionClass::Rightmost => 2,
    }
}

impl ContextFilter {
    pub fn new(traj: &Trajectory, map: &LaneGraph, p: &ClassifierParams) -> Self {
        let own = lane_ownership(traj, map, p);
        let mut filter = ContextFilter {
            reference: None,
            left_neighbor: None,
            right_neighbor: None,
            road_classes: BTreeSet::new(),
            near_intersection: false,
        };
        if let Some(lane) = own.initial.and_then(|id| map.lane(id).ok()) {
            let class_of = |id| map.position_class(id).ok();
            filter.reference = map.position_class(lane.id).ok();
            filter.left_neighbor = lane.left_neighbor.and_then(class_of);
            filter.right_neighbor = lane.right_neighbor.and_then(class_of);
            filter.road_classes = map.road_classes(lane.id).unwrap_or_default();
        }
        filter.near_intersection = map.intersections().iter().any(|ix| {
            traj.positions().any(|s| {
                s.distance(ix.centroid) <= p.lookahead || distance_to_polygon(s, &ix.buffer_polygon) <= p.lookahead
            })
        });
        filter
    }

    pub fn allows(&self, t: BehaviorToken) -> bool {
        if t.is_turn() {
            return self.near_intersection;
        }
        if let Some(class) = t.lane_position_class() {
            return self.reference.is_some() && self.road_classes.contains(&class);
        }
        if let Some((src, dst)) = t.lane_change_classes() {
            if self.reference != Some(src) {
                return false;
            }
            let neighbor = if class_rank(dst) < class_rank(src) { self.left_neighbor } else { self.right_neighbor };
            return neighbor == Some(dst);
        }
        true
    }

    pub fn allows_set(&self, set: &BehaviorSet) -> bool {
        set.iter().all(|t| self.allows(t))
    }
}

pub fn prune_context(space: &CandidateSpace, traj: &Trajectory, map: &LaneGraph, p: &ClassifierParams) -> CandidateSpace {
    let filter = ContextFilter::new(traj, map, p);
    prune_with_filter(space, &filter)
}

pub fn prune_with_filter(space: &CandidateSpace, filter: &ContextFilter) -> CandidateSpace {
    space.iter().filter(|s| filter.allows_set(s)).cloned().collect()
}

/// Drops every combination that is a strict subset of another.
pub fn prune_subsets(space: &CandidateSpace) -> CandidateSpace {
    // Larger sets first, so each candidate only needs checking against kept ones.
    let mut by_size: Vec<&BehaviorSet> = space.iter().collect();
    by_size.sort_by_key(|s| std::cmp::Reverse(s.len()));
    let mut kept: Vec<&BehaviorSet> = Vec::new();
    for s in by_size {
        if !kept.iter().any(|k| s.is_strict_subset(k)) {
            kept.push(s);
        }
    }
    kept.into_iter().cloned().collect()
}

/// Combination containing every requested token with the smallest symmetric
/// difference to `original`; ties go to the lexicographically smallest text list.
pub fn select(space: &CandidateSpace, requested: &BehaviorSet, original: &BehaviorSet) -> Option<BehaviorSet> {
    space
        .iter()
        .filter(|s| requested.is_subset(s))
        .min_by(|a, b| {
            a.symmetric_difference_len(original)
                .cmp(&b.symmetric_difference_len(original))
                .then_with(|| a.sorted_texts().cmp(&b.sorted_texts()))
        })
        .cloned()
}

/// Sizes after each stage plus the final space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineOutput {
    pub expanded: usize,
    pub compatible: usize,
    pub contextual: usize,
    pub space: CandidateSpace,
}

pub fn pipeline(
    gt: &BehaviorSet,
    traj: &Trajectory,
    map: &LaneGraph,
    tables: &Tables,
    p: &ClassifierParams,
) -> Result<PipelineOutput, CounterfactualError> {
    let expanded = expand(gt, &tables.phi)?;
    let compatible = prune_compatibility(&expanded, &tables.compat);
    let contextual = prune_context(&compatible, traj, map, p);
    let space = prune_subsets(&contextual);
    Ok(PipelineOutput { expanded: expanded.len(), compatible: compatible.len(), contextual: contextual.len(), space })
}
