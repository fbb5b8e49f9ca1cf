use std::path::Path;
use std::process::Command;

use anyhow::{ensure, Context};

use scenario_forge::fixtures::{highway_map, straight_path, DT};
use scenario_forge::geometry::Point;
use scenario_forge::harness::io::{map_to_json, to_json};

use crate::common::{scene, vehicle};

const OUTPUTS: [&str; 3] = ["scene.json", "report.json", "bev.svg"];

fn edit(dir: &Path, out: &str, threads: Option<usize>) -> anyhow::Result<Vec<Vec<u8>>> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_scenario-forge"));
    if let Some(n) = threads {
        cmd.args(["--threads", &n.to_string()]);
    }
    let status = cmd
        .arg("edit")
        .arg("--scene")
        .arg(dir.join("scene.json"))
        .arg("--map")
        .arg(dir.join("map.json"))
        .args(["--instruction", "behavior ego: changing lanes from middle lane to rightmost lane; insert [car] at left=3.5m, front=12m"])
        .args(["--seed", "7", "--max-iter", "3"])
        .arg("--out")
        .arg(dir.join(out))
        .output()
        .context("running the binary")?;
    ensure!(status.status.success(), "edit failed: {}", String::from_utf8_lossy(&status.stderr));
    OUTPUTS.iter().map(|f| std::fs::read(dir.join(out).join(f)).with_context(|| format!("reading {f}"))).collect()
}

pub fn run() -> anyhow::Result<String> {
    let dir = tempfile::tempdir()?;
    let sg = scene(vec![
        vehicle(0, straight_path(Point::new(20.0, 0.0), 0.0, 10.0, 81, DT)),
        vehicle(1, straight_path(Point::new(45.0, -3.5), 0.0, 9.0, 81, DT)),
    ]);
    std::fs::write(dir.path().join("scene.json"), to_json(&sg))?;
    std::fs::write(dir.path().join("map.json"), map_to_json(&highway_map()))?;

    let runs = [("a", None), ("b", None), ("c", None), ("t1", Some(1)), ("t4", Some(4))];
    let mut outputs = Vec::new();
    for (name, threads) in runs {
        outputs.push((name, edit(dir.path(), name, threads)?));
    }
    let (_, first) = &outputs[0];
    for (name, out) in &outputs[1..] {
        for (k, f) in OUTPUTS.iter().enumerate() {
            ensure!(out[k] == first[k], "{f} of run {name} differs from run a");
        }
    }
    let bytes: usize = first.iter().map(Vec::len).sum();
    Ok(format!("{} runs byte-identical across 3 files ({bytes} bytes), threads 1 and 4 included", runs.len()))
}
