//! Static bird's-eye SVG of a scene. Output depends only on the inputs, so it can be diffed.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::geometry::Point;
use crate::map_model::LaneGraph;
use crate::scene_graph::{NodeId, ScenarioGraph};
use crate::trajectory::{oriented_box_at, Footprint, Trajectory};

const SCALE: f64 = 4.0;
const MARGIN: f64 = 10.0;
const LEGEND_ROW: f64 = 16.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

struct Frame {
    min: Point,
    max: Point,
}

impl Frame {
    fn fit<'a>(points: impl Iterator<Item = &'a Point>) -> Self {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min = Point::new(min.x.min(p.x), min.y.min(p.y));
            max = Point::new(max.x.max(p.x), max.y.max(p.y));
        }
        if !min.is_finite() {
            (min, max) = (Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        }
        Self { min, max }
    }

    fn width(&self) -> f64 {
        (self.max.x - self.min.x) * SCALE + 2.0 * MARGIN
    }

    fn height(&self) -> f64 {
        (self.max.y - self.min.y) * SCALE + 2.0 * MARGIN
    }

    /// World to canvas; y points down on the canvas.
    fn xy(&self, p: Point) -> String {
        format!("{},{}", num((p.x - self.min.x) * SCALE + MARGIN), num((self.max.y - p.y) * SCALE + MARGIN))
    }

    fn points(&self, pts: impl IntoIterator<Item = Point>) -> String {
        pts.into_iter().map(|p| self.xy(p)).collect::<Vec<_>>().join(" ")
    }
}

fn boxes(out: &mut String, f: &Frame, traj: &Trajectory, fp: Footprint, color: &str) {
    let ends = if traj.len() > 1 { vec![0, traj.len() - 1] } else { vec![0] };
    for i in ends {
        let b = oriented_box_at(traj, i, fp).expect("index in range");
        writeln!(out, r#"    <polygon points="{}" fill="{color}" fill-opacity="0.35" stroke="{color}" stroke-width="1"/>"#, f.points(b.corners())).unwrap();
    }
}

/// Map layers, then per-object trajectories (original dashed, edited solid) and a legend.
pub fn render_bev(scene: &ScenarioGraph, map: &LaneGraph, edited: Option<&BTreeMap<NodeId, Trajectory>>) -> String {
    render(Some(scene), map, edited)
}

/// Map layers only.
pub fn render_map(map: &LaneGraph) -> String {
    render(None, map, None)
}

fn render(scene: Option<&ScenarioGraph>, map: &LaneGraph, edited: Option<&BTreeMap<NodeId, Trajectory>>) -> String {
    let empty = BTreeMap::new();
    let edited = edited.unwrap_or(&empty);
    let traj_points: Vec<Point> = scene
        .into_iter()
        .flat_map(|s| s.nodes())
        .map(|n| &n.trajectory)
        .chain(edited.values())
        .flat_map(|t| t.positions())
        .collect();
    let frame = Frame::fit(
        map.drivable_area()
            .iter()
            .flatten()
            .chain(map.lanes().iter().flat_map(|l| &l.centerline))
            .chain(map.intersections().iter().flat_map(|i| &i.buffer_polygon))
            .chain(&traj_points),
    );

    let mut ids: Vec<NodeId> = scene.into_iter().flat_map(|s| s.node_ids()).chain(edited.keys().copied()).collect();
    ids.sort_unstable();
    ids.dedup();
    let legend_h = LEGEND_ROW * ids.len() as f64;
    let (w, h) = (frame.width(), frame.height() + legend_h);

    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#, num(w), num(h), num(w), num(h)).unwrap();
    writeln!(s, r##"  <rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##, num(w), num(h)).unwrap();

    writeln!(s, r#"  <g id="drivable-area">"#).unwrap();
    for poly in map.drivable_area() {
        writeln!(s, r##"    <polygon points="{}" fill="#e4e4e4" stroke="#b0b0b0" stroke-width="1"/>"##, frame.points(poly.iter().copied())).unwrap();
    }
    writeln!(s, "  </g>").unwrap();

    writeln!(s, r#"  <g id="lane-centerlines">"#).unwrap();
    for lane in map.lanes() {
        writeln!(
            s,
            r##"    <polyline data-lane="{}" points="{}" fill="none" stroke="#9a9a9a" stroke-width="0.8"/>"##,
            lane.id.0,
            frame.points(lane.centerline.iter().copied())
        )
        .unwrap();
    }
    writeln!(s, "  </g>").unwrap();

    writeln!(s, r#"  <g id="intersections">"#).unwrap();
    for inter in map.intersections() {
        writeln!(
            s,
            r##"    <polygon points="{}" fill="#ffd27f" fill-opacity="0.3" stroke="#e69500" stroke-width="1"/>"##,
            frame.points(inter.buffer_polygon.iter().copied())
        )
        .unwrap();
    }
    writeln!(s, "  </g>").unwrap();

    writeln!(s, r#"  <g id="objects">"#).unwrap();
    for (k, &id) in ids.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let node = scene.and_then(|s| s.node(id).ok());
        let fp = node.map_or(Footprint::default(), |n| n.footprint);
        writeln!(s, r#"   <g data-node="{id}">"#).unwrap();
        if let Some(n) = node {
            if n.trajectory.len() > 1 {
                writeln!(
                    s,
                    r#"    <polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
                    frame.points(n.trajectory.positions())
                )
                .unwrap();
            }
        }
        let shown = edited.get(&id).or(node.map(|n| &n.trajectory));
        if let Some(t) = edited.get(&id) {
            writeln!(s, r#"    <polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, frame.points(t.positions())).unwrap();
        }
        if let Some(t) = shown {
            boxes(&mut s, &frame, t, fp, color);
        }
        writeln!(s, "   </g>").unwrap();
    }
    writeln!(s, "  </g>").unwrap();

    writeln!(s, r#"  <g id="legend" font-family="monospace" font-size="12">"#).unwrap();
    for (k, &id) in ids.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let y = frame.height() + LEGEND_ROW * k as f64;
        let tag = if edited.contains_key(&id) { " (edited)" } else { "" };
        writeln!(s, r#"    <rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#, num(MARGIN), num(y)).unwrap();
        writeln!(s, r#"    <text x="{}" y="{}">node {id}{tag}</text>"#, num(MARGIN + 14.0), num(y + 10.0)).unwrap();
    }
    writeln!(s, "  </g>").unwrap();
    writeln!(s, "</svg>").unwrap();
    s
}
