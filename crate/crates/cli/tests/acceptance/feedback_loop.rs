use std::collections::BTreeMap;

use anyhow::ensure;

use scenario_forge::behavior::{BehaviorSet, BehaviorToken};
use scenario_forge::fixtures::{highway_map, straight_path, DT};
use scenario_forge::geometry::Point;
use scenario_forge::harness::compute_metrics;
use scenario_forge::map_model::LaneGraph;
use scenario_forge::reviewer::{review, ReviewConfig};
use scenario_forge::scene_graph::ScenarioGraph;
use scenario_forge::synth::SampleSimulator;
use scenario_forge::validation::ValidationReport;

use crate::common::{scene, vehicle};

/// Lane changes on the three-lane highway with a second car near the destination lane.
pub fn suite() -> Vec<(ScenarioGraph, BTreeMap<u32, BehaviorSet>)> {
    (0..20)
        .map(|k| {
            let (lane_y, target, other_y) = match k % 3 {
                0 => (0.0, BehaviorToken::ChangeMidToLeft, 3.5),
                1 => (3.5, BehaviorToken::ChangeLeftToMid, 0.0),
                _ => (-3.5, BehaviorToken::ChangeRightToMid, 0.0),
            };
            let ego = straight_path(Point::new(20.0, lane_y), 0.0, 10.0 + 0.2 * k as f64, 81, DT);
            let other = straight_path(Point::new(30.0 + k as f64, other_y), 0.0, 10.0, 81, DT);
            (scene(vec![vehicle(0, ego), vehicle(1, other)]), BTreeMap::from([(0, BehaviorSet::from([target]))]))
        })
        .collect()
}

fn success_rate(map: &LaneGraph, max_iterations: usize) -> anyhow::Result<f64> {
    let mut reports: Vec<ValidationReport> = Vec::new();
    for (sg, targets) in suite() {
        let cfg = ReviewConfig { max_iterations, seed: 0, ..ReviewConfig::default() };
        reports.push(review(&SampleSimulator, &sg, map, &targets, &BTreeMap::new(), &cfg)?.report);
    }
    Ok(compute_metrics(&reports)?.overall_success_rate)
}

pub fn run() -> anyhow::Result<String> {
    let map = highway_map();
    let one = success_rate(&map, 1)?;
    let five = success_rate(&map, 5)?;
    ensure!(five - one >= 15.0, "success {one:.1}% with one iteration vs {five:.1}% with five");
    Ok(format!("overall success {one:.1}% -> {five:.1}% over 20 scenarios"))
}
