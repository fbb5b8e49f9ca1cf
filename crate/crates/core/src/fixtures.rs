//! Synthetic maps and trajectories shared by tests, examples and the CLI demo suite.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::{point_segment_distance, Point};
use crate::map_model::{Lane, LaneGraph, LaneId, DEFAULT_DBSCAN_EPS, DEFAULT_DBSCAN_MIN_PTS};
use crate::trajectory::{Sample, Trajectory};

pub const LANE_WIDTH: f64 = 3.5;
pub const FPS: f64 = 10.0;
pub const DT: f64 = 0.1;

pub const HIGHWAY_LEFT_A: LaneId = LaneId(1);
pub const HIGHWAY_MID_A: LaneId = LaneId(2);
pub const HIGHWAY_RIGHT_A: LaneId = LaneId(3);
pub const HIGHWAY_LEFT_B: LaneId = LaneId(4);
pub const HIGHWAY_MID_B: LaneId = LaneId(5);
pub const HIGHWAY_RIGHT_B: LaneId = LaneId(6);
/// x coordinate where each highway lane is split into two successor segments.
pub const HIGHWAY_SPLIT_X: f64 = 150.0;
pub const HIGHWAY_LENGTH: f64 = 300.0;
/// Northbound lane crossing the highway in [`junction_map`].
pub const JUNCTION_CROSS: LaneId = LaneId(7);
pub const JUNCTION_X: f64 = 75.0;

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
    vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)]
}

fn line(id: u32, a: (f64, f64), b: (f64, f64)) -> Lane {
    Lane::new(id, vec![Point::new(a.0, a.1), Point::new(b.0, b.1)], LANE_WIDTH)
}

fn link_lateral(lanes: &mut [Lane], left: usize, right: usize) {
    lanes[left].right_neighbor = Some(lanes[right].id);
    lanes[right].left_neighbor = Some(lanes[left].id);
}

fn highway_lanes() -> Vec<Lane> {
    let ys = [3.5, 0.0, -3.5];
    let mut lanes = Vec::new();
    for (i, &y) in ys.iter().enumerate() {
        lanes.push(line(1 + i as u32, (0.0, y), (HIGHWAY_SPLIT_X, y)));
    }
    for (i, &y) in ys.iter().enumerate() {
        lanes.push(line(4 + i as u32, (HIGHWAY_SPLIT_X, y), (HIGHWAY_LENGTH, y)));
    }
    for base in [0, 3] {
        link_lateral(&mut lanes, base, base + 1);
        link_lateral(&mut lanes, base + 1, base + 2);
    }
    for i in 0..3 {
        let (pred, succ) = (lanes[i].id, lanes[i + 3].id);
        lanes[i].successors.push(succ);
        lanes[i + 3].predecessors.push(pred);
    }
    lanes
}

/// Three eastbound lanes (left y=3.5, middle y=0, right y=−3.5) with a
/// parking shoulder at y ∈ [−12, −5.25].
pub fn highway_map() -> LaneGraph {
    let drivable = vec![rect(0.0, -5.25, HIGHWAY_LENGTH, 5.25), rect(0.0, -12.0, HIGHWAY_LENGTH, -5.25)];
    LaneGraph::new(highway_lanes(), drivable)
        .expect("valid highway")
        .with_intersections(DEFAULT_DBSCAN_EPS, DEFAULT_DBSCAN_MIN_PTS)
}

/// Highway crossed by one northbound lane at x = 75.
pub fn junction_map() -> LaneGraph {
    let mut lanes = highway_lanes();
    lanes.push(line(JUNCTION_CROSS.0, (JUNCTION_X, -40.0), (JUNCTION_X, 40.0)));
    let drivable = vec![
        rect(0.0, -5.25, HIGHWAY_LENGTH, 5.25),
        rect(0.0, -12.0, HIGHWAY_LENGTH, -5.25),
        rect(JUNCTION_X - 3.5, 5.25, JUNCTION_X + 3.5, 40.0),
        rect(JUNCTION_X - 3.5, -40.0, JUNCTION_X + 3.5, -12.0),
    ];
    LaneGraph::new(lanes, drivable)
        .expect("valid junction")
        .with_intersections(DEFAULT_DBSCAN_EPS, DEFAULT_DBSCAN_MIN_PTS)
}

/// Two eastbound lanes, left at y = 1.75 (id 1) and right at y = −1.75 (id 2).
pub fn two_lane_map() -> LaneGraph {
    let mut lanes = vec![line(1, (0.0, 1.75), (200.0, 1.75)), line(2, (0.0, -1.75), (200.0, -1.75))];
    link_lateral(&mut lanes, 0, 1);
    LaneGraph::new(lanes, vec![rect(0.0, -3.5, 200.0, 3.5)]).expect("valid road")
}

/// One eastbound lane (id 1) along y = 0.
pub fn single_lane_map() -> LaneGraph {
    LaneGraph::new(vec![line(1, (0.0, 0.0), (200.0, 0.0))], vec![rect(0.0, -1.75, 200.0, 1.75)]).expect("valid road")
}

/// Travel direction on entry to the four-way junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Approach {
    East,
    North,
    West,
    South,
}

impl Approach {
    pub const ALL: [Approach; 4] = [Approach::East, Approach::North, Approach::West, Approach::South];

    fn index(self) -> u32 {
        self as u32
    }

    fn from_index(i: u32) -> Self {
        Self::ALL[(i % 4) as usize]
    }

    fn rotation(self) -> f64 {
        self.index() as f64 * FRAC_PI_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Straight,
    Left,
    Right,
}

const BOX: f64 = 10.0;
const ARM: f64 = 60.0;
const HALF: f64 = 1.75;
const ARC_SEGMENTS: usize = 16;

fn arc(center: Point, r: f64, from: f64, to: f64) -> Vec<Point> {
    (0..=ARC_SEGMENTS)
        .map(|i| {
            let a = from + (to - from) * i as f64 / ARC_SEGMENTS as f64;
            center + Point::new(r * a.cos(), r * a.sin())
        })
        .collect()
}

/// Lane id of movement `kind` for an approach: 1 inbound, 2 through, 3 left, 4 right, 5 outbound.
pub fn four_way_lane(approach: Approach, kind: u32) -> LaneId {
    LaneId(10 * (approach.index() + 1) + kind)
}

/// Centerlines for the eastbound approach; others are rotations.
fn eastbound_centerlines() -> [Vec<Point>; 5] {
    [
        vec![Point::new(-ARM, -HALF), Point::new(-BOX, -HALF)],
        vec![Point::new(-BOX, -HALF), Point::new(BOX, -HALF)],
        arc(Point::new(-BOX, BOX), BOX + HALF, -FRAC_PI_2, 0.0),
        arc(Point::new(-BOX, -BOX), BOX - HALF, FRAC_PI_2, 0.0),
        vec![Point::new(BOX, -HALF), Point::new(ARM, -HALF)],
    ]
}

fn approach_centerlines(approach: Approach) -> [Vec<Point>; 5] {
    let rot = approach.rotation();
    eastbound_centerlines().map(|cl| cl.into_iter().map(|p| snap(p.rotate(rot))).collect())
}

fn snap(p: Point) -> Point {
    let r = |v: f64| {
        let k = (v * 1e9).round() / 1e9;
        if k == 0.0 {
            0.0
        } else {
            k
        }
    };
    Point::new(r(p.x), r(p.y))
}

/// One lane per direction meeting at the origin, with turning connectors.
pub fn four_way_map() -> LaneGraph {
    let mut lanes = Vec::new();
    for a in Approach::ALL {
        let [inbound, through, left, right, outbound] = approach_centerlines(a);
        let left_dir = Approach::from_index(a.index() + 1);
        let right_dir = Approach::from_index(a.index() + 3);
        let mut l_in = Lane::new(four_way_lane(a, 1).0, inbound, LANE_WIDTH);
        l_in.successors = vec![four_way_lane(a, 2), four_way_lane(a, 3), four_way_lane(a, 4)];
        let mut l_through = Lane::new(four_way_lane(a, 2).0, through, LANE_WIDTH);
        l_through.successors = vec![four_way_lane(a, 5)];
        let mut l_left = Lane::new(four_way_lane(a, 3).0, left, LANE_WIDTH);
        l_left.successors = vec![four_way_lane(left_dir, 5)];
        let mut l_right = Lane::new(four_way_lane(a, 4).0, right, LANE_WIDTH);
        l_right.successors = vec![four_way_lane(right_dir, 5)];
        let l_out = Lane::new(four_way_lane(a, 5).0, outbound, LANE_WIDTH);
        lanes.extend([l_in, l_through, l_left, l_right, l_out]);
    }
    let (c, w) = (12.0, 3.5);
    let quarter = [(-ARM, -w), (-c, -w), (-w, -c), (-w, -ARM)];
    let mut ring = Vec::new();
    for k in 0..4 {
        for &(x, y) in &quarter {
            ring.push(snap(Point::new(x, y).rotate(k as f64 * FRAC_PI_2)));
        }
    }
    LaneGraph::new(lanes, vec![ring])
        .expect("valid four-way")
        .with_intersections(DEFAULT_DBSCAN_EPS, DEFAULT_DBSCAN_MIN_PTS)
}

/// Concatenated centerline of one movement through the four-way junction.
pub fn four_way_route(approach: Approach, turn: Turn) -> Vec<Point> {
    let lines = approach_centerlines(approach);
    let (mid, exit) = match turn {
        Turn::Straight => (1, approach),
        Turn::Left => (2, Approach::from_index(approach.index() + 1)),
        Turn::Right => (3, Approach::from_index(approach.index() + 3)),
    };
    let mut route = lines[0].clone();
    route.extend(lines[mid].iter().skip(1).copied());
    route.extend(approach_centerlines(exit)[4].iter().skip(1).copied());
    route
}

/// Position and tangent heading at arc length `s` along a polyline, extrapolating past the end.
pub fn point_along(route: &[Point], s: f64) -> (Point, f64) {
    let mut remaining = s.max(0.0);
    for w in route.windows(2) {
        let seg = w[1] - w[0];
        let len = seg.norm();
        if remaining <= len {
            return (w[0] + seg * (remaining / len), seg.y.atan2(seg.x));
        }
        remaining -= len;
    }
    let n = route.len();
    let seg = route[n - 1] - route[n - 2];
    let dir = seg * (1.0 / seg.norm());
    (route[n - 1] + dir * remaining, seg.y.atan2(seg.x))
}

/// Follows `route` from arc length `s0` with speed profile `speed(t)`.
pub fn route_path(route: &[Point], s0: f64, speed: &dyn Fn(f64) -> f64, n: usize, dt: f64) -> Trajectory {
    let mut s = s0;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * dt;
        if i > 0 {
            s += speed(t - 0.5 * dt) * dt;
        }
        let (p, h) = point_along(route, s);
        samples.push(Sample::new(t, p.x, p.y, h));
    }
    Trajectory::new(samples, dt).expect("route path")
}

/// Movement through the four-way junction starting 25 m before the junction box.
pub fn four_way_turn(approach: Approach, turn: Turn, speed: &dyn Fn(f64) -> f64, n: usize) -> Trajectory {
    route_path(&four_way_route(approach, turn), ARM - BOX - 25.0, speed, n, DT)
}

/// Constant-velocity straight line.
pub fn straight_path(start: Point, heading: f64, speed: f64, n: usize, dt: f64) -> Trajectory {
    speed_profile_path(start, heading, &|_| speed, n, dt)
}

/// Straight line with a speed profile; interval i moves at `speed` evaluated at its midpoint.
pub fn speed_profile_path(start: Point, heading: f64, speed: &dyn Fn(f64) -> f64, n: usize, dt: f64) -> Trajectory {
    let route = [start, start + Point::from_heading(heading)];
    route_path(&route, 0.0, speed, n, dt)
}

/// Constant-speed eastbound run with a smooth lateral shift of `offset`
/// metres between `t_start` and `t_start + duration`.
pub fn lane_change_path(start: Point, offset: f64, speed: f64, t_start: f64, duration: f64, n: usize, dt: f64) -> Trajectory {
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            let u = ((t - t_start) / duration).clamp(0.0, 1.0);
            let y = start.y + offset * (1.0 - (PI * u).cos()) / 2.0;
            let vy = if (0.0..1.0).contains(&u) && t >= t_start { offset * PI / (2.0 * duration) * (PI * u).sin() } else { 0.0 };
            Sample::new(t, start.x + speed * t, y, vy.atan2(speed))
        })
        .collect();
    Trajectory::new(samples, dt).expect("lane change path")
}

/// Distance from `p` to the closest point of a polyline.
pub fn distance_to_route(route: &[Point], p: Point) -> f64 {
    route.windows(2).map(|w| point_segment_distance(p, w[0], w[1]).0).fold(f64::INFINITY, f64::min)
}
