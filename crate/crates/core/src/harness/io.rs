use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::Point;
use crate::map_model::{Lane, LaneGraph, DEFAULT_DBSCAN_EPS, DEFAULT_DBSCAN_MIN_PTS};
use crate::scene_graph::ScenarioGraph;

/// On-disk map layout; intersections are always recomputed on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub lanes: Vec<Lane>,
    pub drivable_area: Vec<Vec<Point>>,
}

impl From<&LaneGraph> for MapFile {
    fn from(g: &LaneGraph) -> Self {
        Self { lanes: g.lanes().to_vec(), drivable_area: g.drivable_area().to_vec() }
    }
}

pub fn read_text(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

pub fn map_from_json(text: &str) -> Result<LaneGraph, HarnessError> {
    let file: MapFile = serde_json::from_str(text).map_err(|source| HarnessError::Json { context: "map".into(), source })?;
    Ok(LaneGraph::new(file.lanes, file.drivable_area)?.with_intersections(DEFAULT_DBSCAN_EPS, DEFAULT_DBSCAN_MIN_PTS))
}

pub fn scene_from_json(text: &str) -> Result<ScenarioGraph, HarnessError> {
    serde_json::from_str(text).map_err(|source| HarnessError::Json { context: "scene".into(), source })
}

pub fn load_map(path: &Path) -> Result<LaneGraph, HarnessError> {
    map_from_json(&read_text(path)?)
}

pub fn load_scene(path: &Path) -> Result<ScenarioGraph, HarnessError> {
    scene_from_json(&read_text(path)?)
}

/// Pretty JSON with a trailing newline; the canonical form for every output file.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn map_to_json(map: &LaneGraph) -> String {
    to_json(&MapFile::from(map))
}
