//! Brute-force reference for the counterfactual space: enumerate every token set that a
//! choice of replacements can produce, then filter with test-side rules in one pass.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scenario_forge::behavior::{BehaviorSet, BehaviorToken};
use scenario_forge::counterfactual::ContextFilter;
use scenario_forge::fixtures::*;
use scenario_forge::geometry::Point;
use scenario_forge::map_model::{LaneGraph, LanePositionClass};
use scenario_forge::trajectory::Trajectory;

use super::lexicon;

pub struct OracleCase {
    pub label: String,
    pub map: &'static str,
    pub gt: BehaviorSet,
    pub traj: Trajectory,
}

pub fn maps() -> Vec<(&'static str, LaneGraph, Vec<Trajectory>)> {
    let n = 81;
    let east = |x: f64, y: f64| straight_path(Point::new(x, y), 0.0, 10.0, n, DT);
    vec![
        (
            "highway",
            highway_map(),
            vec![
                east(20.0, 0.0),
                east(20.0, 3.5),
                east(20.0, -3.5),
                lane_change_path(Point::new(20.0, 0.0), 3.5, 10.0, 2.0, 4.0, n, DT),
                straight_path(Point::new(20.0, -10.0), 0.0, 0.03, n, DT),
                east(20.0, -30.0),
            ],
        ),
        ("junction", junction_map(), vec![east(20.0, 0.0), east(150.0, 3.5), east(150.0, -3.5)]),
        ("two_lane", two_lane_map(), vec![east(20.0, 1.75), east(20.0, -1.75)]),
        ("single_lane", single_lane_map(), vec![east(20.0, 0.0)]),
        (
            "four_way",
            four_way_map(),
            vec![
                four_way_turn(Approach::East, Turn::Straight, &|_| 10.0, n),
                four_way_turn(Approach::North, Turn::Left, &|_| 6.0, n),
                route_path(&four_way_route(Approach::West, Turn::Straight), 0.0, &|t| 7.75 * (1.0 - t / 8.0), n, DT),
            ],
        ),
    ]
}

/// `count` random ground-truth sets of one to four tokens, each paired with a fixture trajectory.
pub fn random_cases(count: usize, seed: u64) -> Vec<OracleCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maps = maps();
    (0..count)
        .map(|i| {
            let (name, _, trajs) = &maps[i % maps.len()];
            let k = rng.random_range(1..=4);
            let gt: BehaviorSet = BehaviorToken::ALL.choose_multiple(&mut rng, k).copied().collect();
            let t = rng.random_range(0..trajs.len());
            OracleCase { label: format!("#{i} {name}/{t} {:?}", gt.sorted_texts()), map: name, gt, traj: trajs[t].clone() }
        })
        .collect()
}

fn options(t: BehaviorToken) -> BTreeSet<&'static str> {
    let mut o: BTreeSet<&str> = lexicon::phi_rows().remove(t.text()).unwrap_or_default();
    o.insert(t.text());
    o
}

/// Each member of `s` needs its own ground-truth token that may become it; the remaining
/// tokens are dropped.
fn reachable(s: &[&'static str], opts: &[BTreeSet<&'static str>], used: &mut Vec<bool>) -> bool {
    let Some((first, rest)) = s.split_first() else { return true };
    for (g, o) in opts.iter().enumerate() {
        if !used[g] && o.contains(first) {
            used[g] = true;
            let ok = reachable(rest, opts, used);
            used[g] = false;
            if ok {
                return true;
            }
        }
    }
    false
}

fn class_of(position: &str) -> LanePositionClass {
    match position {
        "leftmost" => LanePositionClass::Leftmost,
        "middle" => LanePositionClass::Middle,
        _ => LanePositionClass::Rightmost,
    }
}

fn rank(c: LanePositionClass) -> i32 {
    match c {
        LanePositionClass::Leftmost => 0,
        LanePositionClass::Rightmost => 2,
        _ => 1,
    }
}

fn context_ok(token: &str, facts: &ContextFilter) -> bool {
    let words: Vec<&str> = token.split_whitespace().collect();
    match words.as_slice() {
        ["turning", _] => facts.near_intersection,
        ["in", pos, "lane"] => facts.reference.is_some() && facts.road_classes.contains(&class_of(pos)),
        ["changing", "lanes", "from", src, "lane", "to", dst, "lane"] => {
            let (src, dst) = (class_of(src), class_of(dst));
            let neighbor = if rank(dst) < rank(src) { facts.left_neighbor } else { facts.right_neighbor };
            facts.reference == Some(src) && neighbor == Some(dst)
        }
        _ => true,
    }
}

fn combinations<'a>(pool: &[&'a str], max: usize, start: usize, cur: &mut Vec<&'a str>, out: &mut Vec<Vec<&'a str>>) {
    if !cur.is_empty() {
        out.push(cur.clone());
    }
    if cur.len() == max {
        return;
    }
    for i in start..pool.len() {
        cur.push(pool[i]);
        combinations(pool, max, i + 1, cur, out);
        cur.pop();
    }
}

pub fn oracle(gt: &BehaviorSet, facts: &ContextFilter) -> BTreeSet<BehaviorSet> {
    let opts: Vec<BTreeSet<&str>> = gt.iter().map(options).collect();
    let pool: Vec<&str> = opts.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let pairs = lexicon::incompatible_pairs();
    let mut all = Vec::new();
    combinations(&pool, gt.len(), 0, &mut Vec::new(), &mut all);
    let feasible: Vec<BTreeSet<&str>> = all
        .into_iter()
        .filter(|s| reachable(s, &opts, &mut vec![false; opts.len()]))
        .filter(|s| s.iter().all(|a| s.iter().all(|b| !lexicon::is_incompatible(&pairs, a, b))))
        .filter(|s| s.iter().all(|t| context_ok(t, facts)))
        .map(|s| s.into_iter().collect())
        .collect();
    feasible
        .iter()
        .filter(|s| !feasible.iter().any(|o| o.len() > s.len() && s.is_subset(o)))
        .map(|s| s.iter().map(|t| BehaviorToken::from_text(t).unwrap()).collect())
        .collect()
}
