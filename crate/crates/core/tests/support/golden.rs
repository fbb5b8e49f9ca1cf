//! Hand-labelled trajectories on the fixture maps with their expected token sets.
//! Each expectation was worked out from the classifier definitions, not by running it.

use std::f64::consts::PI;

use scenario_forge::fixtures::{
    four_way_map, four_way_route, four_way_turn, highway_map, junction_map, lane_change_path, route_path,
    speed_profile_path, straight_path, two_lane_map, Approach, Turn, DT,
};
use scenario_forge::geometry::Point;
use scenario_forge::map_model::LaneGraph;
use scenario_forge::trajectory::{Sample, Trajectory};

pub const N: usize = 81;

pub struct GoldenCase {
    pub name: &'static str,
    pub map: LaneGraph,
    pub traj: Trajectory,
    pub expected: &'static [&'static str],
}

fn case(name: &'static str, map: LaneGraph, traj: Trajectory, expected: &'static [&'static str]) -> GoldenCase {
    GoldenCase { name, map, traj, expected }
}

fn east(x: f64, y: f64, speed: f64) -> Trajectory {
    straight_path(Point::new(x, y), 0.0, speed, N, DT)
}

/// Eastbound at 10 m/s along y = 0 with every sample reporting `heading`.
fn skewed(heading: f64) -> Trajectory {
    let samples = (0..N).map(|i| Sample::new(i as f64 * DT, 20.0 + i as f64, 0.0, heading)).collect();
    Trajectory::new(samples, DT).unwrap()
}

/// Constant-speed arc whose heading grows linearly to `total` radians.
fn arc(start: Point, speed: f64, total: f64) -> Trajectory {
    let mut p = start;
    let mut samples = Vec::with_capacity(N);
    for i in 0..N {
        let h = total * i as f64 / (N - 1) as f64;
        if i > 0 {
            let mid = total * (i as f64 - 0.5) / (N - 1) as f64;
            p = p + Point::from_heading(mid) * (speed * DT);
        }
        samples.push(Sample::new(i as f64 * DT, p.x, p.y, h));
    }
    Trajectory::new(samples, DT).unwrap()
}

/// Middle-lane cruise with `frames` samples displaced into the left lane.
fn blip(frames: usize) -> Trajectory {
    let samples = (0..N)
        .map(|i| {
            let y = if (30..30 + frames).contains(&i) { 3.5 } else { 0.0 };
            Sample::new(i as f64 * DT, 20.0 + i as f64, y, 0.0)
        })
        .collect();
    Trajectory::new(samples, DT).unwrap()
}

/// Westbound on the inbound arm with headings alternating across the ±π seam.
fn seam_wobble() -> Trajectory {
    let samples = (0..N)
        .map(|i| {
            let h = if i % 2 == 0 { PI - 0.02 } else { -PI + 0.02 };
            Sample::new(i as f64 * DT, 58.0 - 0.3 * i as f64, 1.75, h)
        })
        .collect();
    Trajectory::new(samples, DT).unwrap()
}

pub fn cases() -> Vec<GoldenCase> {
    let hw = highway_map;
    let mut v = vec![
        case("static in middle lane", hw(), east(20.0, 0.0, 0.03), &["static"]),
        case("parked on shoulder", hw(), east(20.0, -10.0, 0.03), &["parked"]),
        case("below displacement threshold", hw(), east(20.0, 0.0, 0.45 / 8.0), &["static"]),
        case("above displacement threshold", hw(), east(20.0, 0.0, 0.6 / 8.0), &["moving slowly", "going straight", "in middle lane"]),
        case("cruise middle", hw(), east(20.0, 0.0, 10.0), &["going straight", "in middle lane"]),
        case("cruise left", hw(), east(20.0, 3.5, 10.0), &["going straight", "in leftmost lane"]),
        case("cruise right", hw(), east(20.0, -3.5, 10.0), &["going straight", "in rightmost lane"]),
        case("slow crawl", hw(), east(20.0, 0.0, 1.0), &["moving slowly", "going straight", "in middle lane"]),
        case(
            "accelerating",
            hw(),
            speed_profile_path(Point::new(20.0, 0.0), 0.0, &|t| 5.0 + t, N, DT),
            &["speeding up", "going straight", "in middle lane"],
        ),
        case(
            "braking",
            hw(),
            speed_profile_path(Point::new(20.0, 0.0), 0.0, &|t| 15.0 - 1.5 * t, N, DT),
            &["slowing down", "going straight", "in middle lane"],
        ),
        case(
            "surging",
            hw(),
            speed_profile_path(Point::new(20.0, 0.0), 0.0, &|t| 10.0 + 4.0 * (PI * t / 3.0).sin(), N, DT),
            &["varying speed", "going straight", "in middle lane"],
        ),
        case(
            "middle to left",
            hw(),
            lane_change_path(Point::new(20.0, 0.0), 3.5, 10.0, 2.0, 4.0, N, DT),
            &["changing lanes from middle lane to leftmost lane", "going straight"],
        ),
        case(
            "middle to right",
            hw(),
            lane_change_path(Point::new(20.0, 0.0), -3.5, 10.0, 2.0, 4.0, N, DT),
            &["changing lanes from middle lane to rightmost lane", "going straight"],
        ),
        case(
            "left to middle",
            hw(),
            lane_change_path(Point::new(20.0, 3.5), -3.5, 10.0, 2.0, 4.0, N, DT),
            &["changing lanes from leftmost lane to middle lane", "going straight"],
        ),
        case(
            "right to middle",
            hw(),
            lane_change_path(Point::new(20.0, -3.5), 3.5, 10.0, 2.0, 4.0, N, DT),
            &["changing lanes from rightmost lane to middle lane", "going straight"],
        ),
        case(
            "double change",
            hw(),
            lane_change_path(Point::new(20.0, 3.5), -7.0, 10.0, 0.5, 7.0, N, DT),
            &[
                "changing lanes from leftmost lane to middle lane",
                "changing lanes from middle lane to rightmost lane",
                "going straight",
            ],
        ),
        case("two-frame blip is ignored", hw(), blip(2), &["going straight", "in middle lane"]),
        case(
            "three-frame blip counts",
            hw(),
            blip(3),
            &["changing lanes from middle lane to leftmost lane", "changing lanes from leftmost lane to middle lane", "going straight"],
        ),
        case(
            "two-lane left to right",
            two_lane_map(),
            lane_change_path(Point::new(20.0, 1.75), -3.5, 10.0, 2.0, 4.0, N, DT),
            &["changing lanes from leftmost lane to rightmost lane", "going straight"],
        ),
        case(
            "two-lane right to left",
            two_lane_map(),
            lane_change_path(Point::new(20.0, -1.75), 3.5, 10.0, 2.0, 4.0, N, DT),
            &["changing lanes from rightmost lane to leftmost lane", "going straight"],
        ),
        case("far off road", hw(), east(20.0, -30.0, 10.0), &["off main roads", "going straight"]),
        case("heading inside tolerance", hw(), skewed(9f64.to_radians()), &["going straight", "in middle lane"]),
        case("heading outside tolerance", hw(), skewed(11f64.to_radians()), &["off main roads", "going straight"]),
        case("gentle curve", hw(), arc(Point::new(20.0, -40.0), 10.0, 0.50), &["off main roads", "going straight"]),
        case("sharper curve left", hw(), arc(Point::new(20.0, -40.0), 10.0, 0.55), &["off main roads", "turning left"]),
        case("sharper curve right", hw(), arc(Point::new(20.0, -40.0), 10.0, -0.55), &["off main roads", "turning right"]),
    ];

    let fw = four_way_map;
    v.extend([
        case("east through", fw(), four_way_turn(Approach::East, Turn::Straight, &|_| 10.0, N), &["crossing an intersection", "going straight"]),
        case("east left", fw(), four_way_turn(Approach::East, Turn::Left, &|_| 6.0, N), &["crossing an intersection", "turning left"]),
        case("east right", fw(), four_way_turn(Approach::East, Turn::Right, &|_| 6.0, N), &["crossing an intersection", "turning right"]),
        case("north left", fw(), four_way_turn(Approach::North, Turn::Left, &|_| 6.0, N), &["crossing an intersection", "turning left"]),
        case("south right", fw(), four_way_turn(Approach::South, Turn::Right, &|_| 6.0, N), &["crossing an intersection", "turning right"]),
        case("west through", fw(), four_way_turn(Approach::West, Turn::Straight, &|_| 10.0, N), &["crossing an intersection", "going straight"]),
        case("westbound seam wobble", fw(), seam_wobble(), &["going straight"]),
        case(
            "braking toward the box",
            fw(),
            route_path(&four_way_route(Approach::East, Turn::Straight), 0.0, &|t| 7.75 * (1.0 - t / 8.0), N, DT),
            &["approaching an intersection", "slowing down", "going straight"],
        ),
    ]);

    let jn = junction_map;
    v.extend([
        case("junction through", jn(), east(20.0, 0.0, 10.0), &["crossing an intersection", "going straight", "in middle lane"]),
        case(
            "junction too fast to count as approaching",
            jn(),
            straight_path(Point::new(2.0, 0.0), 0.0, 15.0, 31, DT),
            &["going straight", "in middle lane"],
        ),
        case(
            "junction stop short",
            jn(),
            speed_profile_path(Point::new(10.0, 0.0), 0.0, &|t| 10.0 * (1.0 - t / 8.0), N, DT),
            &["approaching an intersection", "slowing down", "going straight", "in middle lane"],
        ),
    ]);
    v
}

