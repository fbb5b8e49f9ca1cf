use anyhow::ensure;

use scenario_forge::counterfactual::Tables;
use scenario_forge::fixtures::{highway_map, single_lane_map, straight_path, two_lane_map, DT};
use scenario_forge::geometry::Point;
use scenario_forge::harness::{build_plan, execute, parse_instruction, EditStatus};
use scenario_forge::map_model::LaneGraph;
use scenario_forge::reviewer::ReviewConfig;
use scenario_forge::scene_graph::ScenarioGraph;
use scenario_forge::synth::SampleSimulator;

use crate::common::{scene, vehicle};

fn cruise(y: f64) -> scenario_forge::trajectory::Trajectory {
    straight_path(Point::new(20.0, y), 0.0, 10.0, 81, DT)
}

/// Ego cruising at `ego_y`, plus a car in the leftmost highway lane 30 m ahead.
fn highway(ego_y: f64) -> ScenarioGraph {
    scene(vec![vehicle(0, cruise(ego_y)), vehicle(1, straight_path(Point::new(50.0, 3.5), 0.0, 10.0, 81, DT))])
}

fn solo(ego_y: f64) -> ScenarioGraph {
    scene(vec![vehicle(0, cruise(ego_y))])
}

/// Turns on roads without intersections and lane changes with no lane on the requested side.
fn suite() -> Vec<(ScenarioGraph, LaneGraph, &'static str)> {
    let hw = highway_map;
    vec![
        (highway(0.0), hw(), "behavior ego: turning left"),
        (highway(0.0), hw(), "behavior ego: turning right"),
        (highway(3.5), hw(), "behavior ego: turning left"),
        (highway(-3.5), hw(), "behavior ego: turning right, slowing down"),
        (highway(3.5), hw(), "behavior ego: changing lanes from middle lane to leftmost lane"),
        (highway(3.5), hw(), "behavior ego: changing lanes from rightmost lane to leftmost lane"),
        (highway(3.5), hw(), "behavior ego: changing lanes from leftmost lane to middle lane, turning left"),
        (highway(0.0), hw(), "behavior id 1: changing lanes from middle lane to leftmost lane"),
        (highway(0.0), hw(), "insert [car] at left=3.5m, front=10m with turning left"),
        (highway(3.5), hw(), "insert [car] at left=0m, front=15m with changing lanes from middle lane to leftmost lane"),
        (solo(1.75), two_lane_map(), "behavior ego: changing lanes from rightmost lane to leftmost lane"),
        (solo(1.75), two_lane_map(), "behavior ego: turning left"),
        (solo(-1.75), two_lane_map(), "behavior ego: turning left, speeding up"),
        (solo(0.0), single_lane_map(), "behavior ego: turning right"),
        (solo(0.0), single_lane_map(), "behavior ego: changing lanes from middle lane to leftmost lane"),
    ]
}

pub fn run() -> anyhow::Result<String> {
    let tables = Tables::embedded();
    let cfg = ReviewConfig::default();
    let cases = suite();
    let mut accepted = Vec::new();
    for (sg, map, text) in &cases {
        let out = execute(&build_plan(&parse_instruction(text)?), sg, map, &tables, &cfg, &SampleSimulator)?;
        if out.status != EditStatus::Rejected || out.rejections.is_empty() {
            accepted.push(*text);
        } else {
            ensure!(*sg == out.scene, "rejected edit {text:?} changed the scene");
        }
    }
    let rate = 100.0 * (cases.len() - accepted.len()) as f64 / cases.len() as f64;
    ensure!(accepted.is_empty(), "rejection rate {rate:.2}%, accepted: {accepted:?}");
    Ok(format!("{} of {} infeasible instructions rejected ({rate:.2}%)", cases.len(), cases.len()))
}
