use scenario_forge::scene_graph::{ObjectKind, ObjectNode, Provenance, ScenarioGraph};
use scenario_forge::trajectory::{Footprint, Trajectory};

pub fn vehicle(id: u32, trajectory: Trajectory) -> ObjectNode {
    ObjectNode {
        id,
        kind: ObjectKind::Vehicle,
        attributes: ["car".to_string()].into(),
        footprint: Footprint::default(),
        trajectory,
        provenance: Provenance::Original,
        requested: None,
    }
}

/// 8 s at 10 fps with node 0 as ego.
pub fn scene(nodes: Vec<ObjectNode>) -> ScenarioGraph {
    ScenarioGraph::new(10.0, 8.0, None, 0, nodes).expect("valid scene")
}
