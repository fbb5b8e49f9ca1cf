//! Vector map: lane centerlines, lane topology, drivable area and inferred intersections.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    convex_hull, dilated_hull, heading_difference, is_self_intersecting, mean_point,
    point_in_polygon, point_segment_distance, segment_intersection, Point, SegmentIntersection,
};

/// Default DBSCAN neighborhood radius in meters.
pub const DEFAULT_DBSCAN_EPS: f64 = 15.0;
/// Default DBSCAN core-point threshold (the point itself included).
pub const DEFAULT_DBSCAN_MIN_PTS: usize = 2;
/// Default heading tolerance when matching a pose to a lane.
pub const DEFAULT_LANE_HEADING_TOL: f64 = 10.0 * std::f64::consts::PI / 180.0;
/// Matches farther than this multiple of the lane width are rejected.
pub const LANE_MATCH_WIDTH_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LaneId(pub u32);

impl fmt::Display for LaneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("lane {0} has fewer than two centerline points")]
    ShortCenterline(LaneId),
    #[error("lane {0} has repeated consecutive centerline points")]
    RepeatedPoint(LaneId),
    #[error("lane {0} has non-positive width")]
    BadWidth(LaneId),
    #[error("duplicate lane id {0}")]
    DuplicateLane(LaneId),
    #[error("lane {lane} references unknown lane {target}")]
    UnknownReference { lane: LaneId, target: LaneId },
    #[error("lane {0} lists itself as a successor")]
    SelfSuccessor(LaneId),
    #[error("neighbor relation between lanes {0} and {1} is not symmetric")]
    AsymmetricNeighbor(LaneId, LaneId),
    #[error("drivable polygon {0} is degenerate or self-intersecting")]
    BadPolygon(usize),
    #[error("unknown lane id {0}")]
    UnknownLane(LaneId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub id: LaneId,
    pub centerline: Vec<Point>,
    /// Per-vertex tangent direction, same length as the centerline.
    #[serde(skip)]
    pub headings: Vec<f64>,
    pub width: f64,
    #[serde(default)]
    pub successors: Vec<LaneId>,
    #[serde(default)]
    pub predecessors: Vec<LaneId>,
    #[serde(default)]
    pub left_neighbor: Option<LaneId>,
    #[serde(default)]
    pub right_neighbor: Option<LaneId>,
}

impl Lane {
    pub fn new(id: u32, centerline: Vec<Point>, width: f64) -> Self {
        let mut lane = Self {
            id: LaneId(id),
            centerline,
            headings: Vec::new(),
            width,
            successors: Vec::new(),
            predecessors: Vec::new(),
            left_neighbor: None,
            right_neighbor: None,
        };
        lane.headings = vertex_headings(&lane.centerline);
        lane
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.centerline.windows(2).map(|w| (w[0], w[1]))
    }

    /// Perpendicular distance from `p` to the centerline and the tangent of the closest segment.
    pub fn project(&self, p: Point) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for (a, b) in self.segments() {
            let (d, _) = point_segment_distance(p, a, b);
            if d < best.0 {
                let t = b - a;
                best = (d, t.y.atan2(t.x));
            }
        }
        best
    }
}

fn vertex_headings(centerline: &[Point]) -> Vec<f64> {
    let n = centerline.len();
    (0..n)
        .map(|i| {
            let (a, b) = if i + 1 < n {
                (centerline[i], centerline[i + 1])
            } else if n >= 2 {
                (centerline[n - 2], centerline[n - 1])
            } else {
                return 0.0;
            };
            (b.y - a.y).atan2(b.x - a.x)
        })
        .collect()
}

/// Lateral position of a lane among its same-direction neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanePositionClass {
    Leftmost,
    Middle,
    Rightmost,
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub centroid: Point,
    pub buffer_polygon: Vec<Point>,
    pub member_conflicts: Vec<Point>,
}

impl Intersection {
    pub fn contains(&self, p: Point) -> bool {
        point_in_polygon(p, &self.buffer_polygon)
    }
}

/// Lane graph with drivable area. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneGraph {
    lanes: Vec<Lane>,
    index: BTreeMap<LaneId, usize>,
    drivable_area: Vec<Vec<Point>>,
    intersections: Vec<Intersection>,
}

impl LaneGraph {
    /// Validates the lanes and polygons. Intersections start empty; see [`LaneGraph::with_intersections`].
    pub fn new(mut lanes: Vec<Lane>, drivable_area: Vec<Vec<Point>>) -> Result<Self, MapError> {
        lanes.sort_by_key(|l| l.id);
        let mut index = BTreeMap::new();
        for (i, lane) in lanes.iter_mut().enumerate() {
            if index.insert(lane.id, i).is_some() {
                return Err(MapError::DuplicateLane(lane.id));
            }
            if lane.centerline.len() < 2 {
                return Err(MapError::ShortCenterline(lane.id));
            }
            if lane.centerline.windows(2).any(|w| w[0] == w[1]) {
                return Err(MapError::RepeatedPoint(lane.id));
            }
            if lane.width.is_nan() || lane.width <= 0.0 {
                return Err(MapError::BadWidth(lane.id));
            }
            lane.headings = vertex_headings(&lane.centerline);
        }
        for lane in &lanes {
            let refs = lane
                .successors
                .iter()
                .chain(&lane.predecessors)
                .chain(lane.left_neighbor.iter())
                .chain(lane.right_neighbor.iter());
            for &target in refs {
                if !index.contains_key(&target) {
                    return Err(MapError::UnknownReference { lane: lane.id, target });
                }
            }
            if lane.successors.contains(&lane.id) {
                return Err(MapError::SelfSuccessor(lane.id));
            }
        }
        for lane in &lanes {
            if let Some(left) = lane.left_neighbor {
                if lanes[index[&left]].right_neighbor != Some(lane.id) {
                    return Err(MapError::AsymmetricNeighbor(lane.id, left));
                }
            }
            if let Some(right) = lane.right_neighbor {
                if lanes[index[&right]].left_neighbor != Some(lane.id) {
                    return Err(MapError::AsymmetricNeighbor(lane.id, right));
                }
            }
        }
        for (i, poly) in drivable_area.iter().enumerate() {
            if poly.len() < 3 || is_self_intersecting(poly) {
                return Err(MapError::BadPolygon(i));
            }
        }
        Ok(Self { lanes, index, drivable_area, intersections: Vec::new() })
    }

    /// Runs [`detect_intersections`] and stores the result on the graph.
    pub fn with_intersections(mut self, eps: f64, min_pts: usize) -> Self {
        self.intersections = detect_intersections(&self, eps, min_pts);
        self
    }

    pub fn lanes(&self) -> &[Lane] {
        &self.lanes
    }

    pub fn lane(&self, id: LaneId) -> Result<&Lane, MapError> {
        self.index.get(&id).map(|&i| &self.lanes[i]).ok_or(MapError::UnknownLane(id))
    }

    pub fn drivable_area(&self) -> &[Vec<Point>] {
        &self.drivable_area
    }

    pub fn intersections(&self) -> &[Intersection] {
        &self.intersections
    }

    pub fn are_neighbors(&self, a: LaneId, b: LaneId) -> bool {
        match self.lane(a) {
            Ok(l) => l.left_neighbor == Some(b) || l.right_neighbor == Some(b),
            Err(_) => false,
        }
    }

    /// True when `b` directly follows `a` or vice versa.
    pub fn are_successors(&self, a: LaneId, b: LaneId) -> bool {
        let follows = |x: LaneId, y: LaneId| {
            self.lane(x).map(|l| l.successors.contains(&y)).unwrap_or(false)
                || self.lane(y).map(|l| l.predecessors.contains(&x)).unwrap_or(false)
        };
        follows(a, b) || follows(b, a)
    }

    fn upstream(&self, id: LaneId) -> BTreeSet<LaneId> {
        let mut out: BTreeSet<LaneId> = self.lane(id).map(|l| l.predecessors.iter().copied().collect()).unwrap_or_default();
        for lane in &self.lanes {
            if lane.successors.contains(&id) {
                out.insert(lane.id);
            }
        }
        out
    }

    fn downstream(&self, id: LaneId) -> BTreeSet<LaneId> {
        let mut out: BTreeSet<LaneId> = self.lane(id).map(|l| l.successors.iter().copied().collect()).unwrap_or_default();
        for lane in &self.lanes {
            if lane.predecessors.contains(&id) {
                out.insert(lane.id);
            }
        }
        out
    }

    /// Lanes that split from a common predecessor or merge into a common successor.
    pub fn are_siblings(&self, a: LaneId, b: LaneId) -> bool {
        !self.upstream(a).is_disjoint(&self.upstream(b)) || !self.downstream(a).is_disjoint(&self.downstream(b))
    }

    /// Lane position classes present on the road that contains `id`, found by walking neighbors.
    pub fn road_classes(&self, id: LaneId) -> Result<BTreeSet<LanePositionClass>, MapError> {
        let mut out = BTreeSet::new();
        for lane in self.lateral_chain(id)? {
            out.insert(self.position_class(lane)?);
        }
        Ok(out)
    }

    /// All lanes reachable from `id` through left/right neighbor links.
    pub fn lateral_chain(&self, id: LaneId) -> Result<Vec<LaneId>, MapError> {
        let mut chain = vec![id];
        let mut cur = self.lane(id)?;
        let mut seen = BTreeSet::from([id]);
        while let Some(l) = cur.left_neighbor {
            if !seen.insert(l) {
                break;
            }
            chain.insert(0, l);
            cur = self.lane(l)?;
        }
        cur = self.lane(id)?;
        while let Some(r) = cur.right_neighbor {
            if !seen.insert(r) {
                break;
            }
            chain.push(r);
            cur = self.lane(r)?;
        }
        Ok(chain)
    }

    pub fn position_class(&self, id: LaneId) -> Result<LanePositionClass, MapError> {
        lane_position_class(self, id)
    }
}

/// Crossing points between centerlines of lanes that are not neighbors, not
/// successors and do not share a predecessor or successor.
pub fn find_conflict_points(graph: &LaneGraph) -> Vec<Point> {
    let mut out = Vec::new();
    let lanes = graph.lanes();
    for (i, a) in lanes.iter().enumerate() {
        for b in &lanes[i + 1..] {
            if graph.are_neighbors(a.id, b.id) || graph.are_successors(a.id, b.id) || graph.are_siblings(a.id, b.id) {
                continue;
            }
            let mut pair_points: Vec<Point> = Vec::new();
            for (p1, p2) in a.segments() {
                for (q1, q2) in b.segments() {
                    let hit = match segment_intersection(p1, p2, q1, q2) {
                        SegmentIntersection::None => continue,
                        SegmentIntersection::Point(p) => p,
                        SegmentIntersection::Overlap(s, e) => (s + e) * 0.5,
                    };
                    // A crossing exactly at a shared vertex shows up on two segment pairs.
                    if !pair_points.iter().any(|q| q.distance(hit) <= 1e-6) {
                        pair_points.push(hit);
                    }
                }
            }
            out.extend(pair_points);
        }
    }
    out
}

/// Standard DBSCAN. Points are visited in lexicographic order so the result does
/// not depend on input order. Returns clusters as index lists into `points`;
/// noise is dropped.
pub fn dbscan(points: &[Point], eps: f64, min_pts: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].x.total_cmp(&points[j].x).then(points[i].y.total_cmp(&points[j].y)));
    let neighbors = |i: usize| -> Vec<usize> {
        order.iter().copied().filter(|&j| points[i].distance(points[j]) <= eps).collect()
    };
    const UNVISITED: usize = usize::MAX;
    const NOISE: usize = usize::MAX - 1;
    let mut label = vec![UNVISITED; points.len()];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &p in &order {
        if label[p] != UNVISITED {
            continue;
        }
        let seeds = neighbors(p);
        if seeds.len() < min_pts {
            label[p] = NOISE;
            continue;
        }
        let cid = clusters.len();
        clusters.push(Vec::new());
        label[p] = cid;
        let mut queue: Vec<usize> = seeds;
        let mut k = 0;
        while k < queue.len() {
            let q = queue[k];
            k += 1;
            if label[q] == NOISE {
                label[q] = cid;
            }
            if label[q] != UNVISITED {
                continue;
            }
            label[q] = cid;
            let nq = neighbors(q);
            if nq.len() >= min_pts {
                queue.extend(nq);
            }
        }
    }
    for (i, &l) in label.iter().enumerate() {
        if l < clusters.len() {
            clusters[l].push(i);
        }
    }
    clusters
}

/// Clusters conflict points into intersections. Each cluster becomes the
/// convex hull of its members dilated by `eps`.
pub fn detect_intersections(graph: &LaneGraph, eps: f64, min_pts: usize) -> Vec<Intersection> {
    let conflicts = find_conflict_points(graph);
    let mut out: Vec<Intersection> = dbscan(&conflicts, eps, min_pts.max(1))
        .into_iter()
        .map(|members| {
            let mut pts: Vec<Point> = members.iter().map(|&i| conflicts[i]).collect();
            pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
            let hull = convex_hull(&pts);
            Intersection { centroid: mean_point(&pts), buffer_polygon: dilated_hull(&hull, eps), member_conflicts: pts }
        })
        .collect();
    out.sort_by(|a, b| a.centroid.x.total_cmp(&b.centroid.x).then(a.centroid.y.total_cmp(&b.centroid.y)));
    out
}

/// Nearest heading-compatible lane within 1.5 lane widths of `position`.
pub fn nearest_lane(graph: &LaneGraph, position: Point, heading: f64) -> Option<LaneId> {
    nearest_lane_with_tolerance(graph, position, heading, DEFAULT_LANE_HEADING_TOL)
}

pub fn nearest_lane_with_tolerance(graph: &LaneGraph, position: Point, heading: f64, heading_tol: f64) -> Option<LaneId> {
    let mut best: Option<(f64, LaneId)> = None;
    for lane in graph.lanes() {
        let (d, tangent) = lane.project(position);
        if heading_difference(heading, tangent).abs() > heading_tol + 1e-12 {
            continue;
        }
        if d > lane.width * LANE_MATCH_WIDTH_FACTOR {
            continue;
        }
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, lane.id));
        }
    }
    best.map(|(_, id)| id)
}

pub fn lane_position_class(graph: &LaneGraph, lane: LaneId) -> Result<LanePositionClass, MapError> {
    let l = graph.lane(lane)?;
    Ok(match (l.left_neighbor.is_some(), l.right_neighbor.is_some()) {
        (false, true) => LanePositionClass::Leftmost,
        (true, false) => LanePositionClass::Rightmost,
        (true, true) => LanePositionClass::Middle,
        (false, false) => LanePositionClass::Single,
    })
}

/// Boundary-inclusive test against every drivable polygon.
pub fn is_on_road(graph: &LaneGraph, point: Point) -> bool {
    graph.drivable_area().iter().any(|poly| point_in_polygon(point, poly))
}
