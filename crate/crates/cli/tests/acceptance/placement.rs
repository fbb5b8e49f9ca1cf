use anyhow::ensure;

use scenario_forge::fixtures::{straight_path, DT};
use scenario_forge::geometry::Point;
use scenario_forge::scene_graph::initial_position;

pub fn run() -> anyhow::Result<String> {
    let ego = straight_path(Point::new(0.0, 0.0), 0.0, 10.0, 81, DT);
    let pose = initial_position(&ego, 4.0, 9.0);
    ensure!((pose.x, pose.y, pose.heading) == (9.0, 4.0, 0.0), "pose {pose:?}");
    Ok(format!("left 4 m, front 9 m gives ({}, {}, {})", pose.x, pose.y, pose.heading))
}
