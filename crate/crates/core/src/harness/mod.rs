//! File formats, the edit language, orchestration, metrics and rendering.

pub mod dsl;
pub mod io;
pub mod metrics;
pub mod plan;
pub mod render;

use std::path::PathBuf;

use thiserror::Error;

use crate::counterfactual::CounterfactualError;
use crate::map_model::MapError;
use crate::reviewer::ReviewError;
use crate::scene_graph::SceneError;

pub use dsl::{parse_instruction, EditProgram, ObjRef, ParseError, Placement, Statement};
pub use metrics::{compute_metrics, MetricsSummary};
pub use plan::{build_plan, execute, EditOutcome, EditStatus, Plan, Rejection, Stage};
pub use render::{render_bev, render_map};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{context}: {source}")]
    Json { context: String, source: serde_json::Error },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Counterfactual(#[from] CounterfactualError),
    #[error(transparent)]
    Review(#[from] ReviewError),
    #[error("statement {statement}: {reason}")]
    Grounding { statement: usize, reason: String },
    #[error("metrics need at least one target report")]
    EmptyMetrics,
}
