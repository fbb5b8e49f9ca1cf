//! Independent transcript of the alternative and incompatibility tables, written with
//! the table's own wording and expanded here rather than read from the shipped data.

use std::collections::{BTreeMap, BTreeSet};

use scenario_forge::behavior::BehaviorToken;

const LL: &str = "in leftmost lane";
const ML: &str = "in middle lane";
const RL: &str = "in rightmost lane";
const L2M: &str = "changing lanes from leftmost lane to middle lane";
const L2R: &str = "changing lanes from leftmost lane to rightmost lane";
const M2L: &str = "changing lanes from middle lane to leftmost lane";
const M2R: &str = "changing lanes from middle lane to rightmost lane";
const R2L: &str = "changing lanes from rightmost lane to leftmost lane";
const R2M: &str = "changing lanes from rightmost lane to middle lane";

pub const PHI_ROWS: &[(&str, &[&str])] = &[
    ("going straight", &["turning left", "turning right", "slowing down", "speeding up"]),
    ("turning left", &["going straight", "turning right", "slowing down"]),
    ("turning right", &["going straight", "turning left", "slowing down"]),
    ("approaching an intersection", &["crossing an intersection", "turning left", "turning right", "going straight"]),
    ("crossing an intersection", &["approaching an intersection", "turning left", "turning right", "going straight"]),
    ("off main roads", &["slowing down", "speeding up", "turning left", "turning right", "going straight"]),
    ("speeding up", &["slowing down", "varying speed"]),
    ("slowing down", &["speeding up", "varying speed"]),
    ("varying speed", &["slowing down", "speeding up"]),
    ("moving slowly", &["static", "parked", "off main roads", "speeding up"]),
    ("static", &["speeding up", "moving slowly"]),
    ("parked", &["speeding up", "moving slowly"]),
    (LL, &[L2M, L2R, "going straight"]),
    (ML, &[M2L, M2R, "going straight"]),
    (RL, &[R2L, R2M, "going straight"]),
    (L2M, &[LL, L2R, M2L, M2R]),
    (L2R, &[LL, L2M, R2L, R2M]),
    (M2L, &[ML, M2R, L2M, L2R]),
    (M2R, &[ML, M2L, R2L, R2M]),
    (R2L, &[RL, R2M, L2M, L2R]),
    (R2M, &[RL, R2L, M2L, M2R]),
];

const LANE_POSITIONS: [&str; 3] = [LL, ML, RL];
const LANE_CHANGES: [&str; 6] = [L2M, L2R, M2L, M2R, R2L, R2M];

fn rank(lane: &str) -> i32 {
    match lane {
        "leftmost" => 0,
        "middle" => 1,
        _ => 2,
    }
}

/// (from, to) ranks parsed out of the change wording.
fn endpoints(change: &str) -> (i32, i32) {
    let words: Vec<&str> = change.split_whitespace().collect();
    (rank(words[3]), rank(words[6]))
}

/// Two changes go together only when one continues the other in the same lateral direction.
fn chained(a: &str, b: &str) -> bool {
    let ((a0, a1), (b0, b1)) = (endpoints(a), endpoints(b));
    let same_direction = (a1 - a0).signum() == (b1 - b0).signum();
    same_direction && (a1 == b0 || b1 == a0)
}

/// Rows as written, with category phrases spelled out.
pub fn incompatibility_rows() -> BTreeMap<&'static str, BTreeSet<&'static str>> {
    let all: Vec<&str> = BehaviorToken::ALL.iter().map(|t| t.text()).collect();
    let lane_behaviors: Vec<&str> = LANE_POSITIONS.iter().chain(&LANE_CHANGES).copied().collect();
    let hold = ["static", "parked"];
    let mut rows: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut row = |k: &'static str, v: Vec<&'static str>| {
        rows.insert(k, v.into_iter().collect());
    };
    let with_hold = |v: &[&'static str]| v.iter().chain(&hold).copied().collect::<Vec<_>>();

    row("static", all.iter().copied().filter(|t| *t != "static").collect());
    row("parked", all.iter().copied().filter(|t| *t != "parked").collect());
    row(
        "off main roads",
        ["static", "crossing an intersection", "approaching an intersection"].into_iter().chain(lane_behaviors.iter().copied()).collect(),
    );
    row("going straight", with_hold(&["turning left", "turning right"]));
    row(
        "turning left",
        with_hold(&["going straight", "turning right", "crossing an intersection", "approaching an intersection"]),
    );
    row(
        "turning right",
        with_hold(&["going straight", "turning left", "crossing an intersection", "approaching an intersection"]),
    );
    row("speeding up", with_hold(&["slowing down", "moving slowly"]));
    row("slowing down", with_hold(&["speeding up", "moving slowly"]));
    row("varying speed", with_hold(&["slowing down", "speeding up", "moving slowly"]));
    row("moving slowly", hold.to_vec());
    row(
        "approaching an intersection",
        with_hold(&["crossing an intersection", "turning left", "turning right", "speeding up", "varying speed"]),
    );
    row("crossing an intersection", with_hold(&["approaching an intersection", "turning left", "turning right"]));
    for pos in LANE_POSITIONS {
        let others = LANE_POSITIONS.iter().copied().filter(|p| *p != pos);
        row(pos, others.chain(hold).chain(LANE_CHANGES).collect());
    }
    for change in LANE_CHANGES {
        let unrelated = LANE_CHANGES.iter().copied().filter(|c| *c != change && !chained(change, c));
        row(change, LANE_POSITIONS.into_iter().chain(hold).chain(unrelated).collect());
    }
    rows
}

pub fn phi_rows() -> BTreeMap<&'static str, BTreeSet<&'static str>> {
    PHI_ROWS.iter().map(|(k, v)| (*k, v.iter().copied().collect())).collect()
}

/// Unordered incompatible pairs after closing the rows under symmetry.
pub fn incompatible_pairs() -> BTreeSet<(&'static str, &'static str)> {
    let mut out = BTreeSet::new();
    for (a, row) in incompatibility_rows() {
        for b in row {
            out.insert(if a < b { (a, b) } else { (b, a) });
        }
    }
    out
}

pub fn is_incompatible(pairs: &BTreeSet<(&str, &str)>, a: &str, b: &str) -> bool {
    let key = if a < b { (a, b) } else { (b, a) };
    pairs.contains(&key)
}
