use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::validation::ValidationReport;

/// Suite-level rates, in percent of target entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub behavior_alignment_rate: f64,
    pub collision_rate: f64,
    pub offroad_rate: f64,
    pub overall_success_rate: f64,
    pub targets: usize,
}

pub fn compute_metrics(reports: &[ValidationReport]) -> Result<MetricsSummary, HarnessError> {
    let entries: Vec<_> = reports.iter().flat_map(|r| r.nodes.values()).collect();
    if entries.is_empty() {
        return Err(HarnessError::EmptyMetrics);
    }
    let n = entries.len() as f64;
    let rate = |count: usize| 100.0 * count as f64 / n;
    Ok(MetricsSummary {
        behavior_alignment_rate: rate(entries.iter().filter(|e| e.behavior_aligned).count()),
        collision_rate: rate(entries.iter().filter(|e| e.collision).count()),
        offroad_rate: rate(entries.iter().filter(|e| e.off_road).count()),
        overall_success_rate: rate(entries.iter().filter(|e| e.behavior_aligned && !e.collision && !e.off_road).count()),
        targets: entries.len(),
    })
}
