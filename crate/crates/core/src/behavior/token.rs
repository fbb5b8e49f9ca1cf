use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::map_model::LanePositionClass;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown behavior token {0:?}")]
pub struct UnknownToken(pub String);

/// The closed behavior lexicon.
///
/// Declaration order is the display order used when a set is rendered as a
/// description: heading, speed, global state, lane, intersection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BehaviorToken {
    GoingStraight,
    TurningLeft,
    TurningRight,
    SpeedingUp,
    SlowingDown,
    VaryingSpeed,
    MovingSlowly,
    Static,
    Parked,
    OffMainRoads,
    InLeftmostLane,
    InMiddleLane,
    InRightmostLane,
    ChangeLeftToMid,
    ChangeLeftToRight,
    ChangeMidToLeft,
    ChangeMidToRight,
    ChangeRightToLeft,
    ChangeRightToMid,
    ApproachingIntersection,
    CrossingIntersection,
}

use BehaviorToken::*;

impl BehaviorToken {
    pub const ALL: [BehaviorToken; 21] = [
        GoingStraight,
        TurningLeft,
        TurningRight,
        SpeedingUp,
        SlowingDown,
        VaryingSpeed,
        MovingSlowly,
        Static,
        Parked,
        OffMainRoads,
        InLeftmostLane,
        InMiddleLane,
        InRightmostLane,
        ChangeLeftToMid,
        ChangeLeftToRight,
        ChangeMidToLeft,
        ChangeMidToRight,
        ChangeRightToLeft,
        ChangeRightToMid,
        ApproachingIntersection,
        CrossingIntersection,
    ];

    pub const LANE_POSITIONS: [BehaviorToken; 3] = [InLeftmostLane, InMiddleLane, InRightmostLane];

    pub const LANE_CHANGES: [BehaviorToken; 6] =
        [ChangeLeftToMid, ChangeLeftToRight, ChangeMidToLeft, ChangeMidToRight, ChangeRightToLeft, ChangeRightToMid];

    /// Canonical lowercase text used in files, the instruction language and reports.
    pub fn text(self) -> &'static str {
        match self {
            GoingStraight => "going straight",
            TurningLeft => "turning left",
            TurningRight => "turning right",
            SpeedingUp => "speeding up",
            SlowingDown => "slowing down",
            VaryingSpeed => "varying speed",
            MovingSlowly => "moving slowly",
            Static => "static",
            Parked => "parked",
            OffMainRoads => "off main roads",
            InLeftmostLane => "in leftmost lane",
            InMiddleLane => "in middle lane",
            InRightmostLane => "in rightmost lane",
            ChangeLeftToMid => "changing lanes from leftmost lane to middle lane",
            ChangeLeftToRight => "changing lanes from leftmost lane to rightmost lane",
            ChangeMidToLeft => "changing lanes from middle lane to leftmost lane",
            ChangeMidToRight => "changing lanes from middle lane to rightmost lane",
            ChangeRightToLeft => "changing lanes from rightmost lane to leftmost lane",
            ChangeRightToMid => "changing lanes from rightmost lane to middle lane",
            ApproachingIntersection => "approaching an intersection",
            CrossingIntersection => "crossing an intersection",
        }
    }

    pub fn from_text(text: &str) -> Result<Self, UnknownToken> {
        let norm = text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        Self::ALL
            .into_iter()
            .find(|t| t.text() == norm)
            .ok_or_else(|| UnknownToken(text.trim().to_string()))
    }

    pub fn is_lane_position(self) -> bool {
        Self::LANE_POSITIONS.contains(&self)
    }

    pub fn is_lane_change(self) -> bool {
        Self::LANE_CHANGES.contains(&self)
    }

    pub fn is_turn(self) -> bool {
        matches!(self, TurningLeft | TurningRight)
    }

    /// Source and destination classes of a lane-change token.
    pub fn lane_change_classes(self) -> Option<(LanePositionClass, LanePositionClass)> {
        use LanePositionClass::{Leftmost as L, Middle as M, Rightmost as R};
        Some(match self {
            ChangeLeftToMid => (L, M),
            ChangeLeftToRight => (L, R),
            ChangeMidToLeft => (M, L),
            ChangeMidToRight => (M, R),
            ChangeRightToLeft => (R, L),
            ChangeRightToMid => (R, M),
            _ => return None,
        })
    }

    /// Lane-change token for a move between two position classes, if one exists.
    pub fn lane_change(from: LanePositionClass, to: LanePositionClass) -> Option<Self> {
        Self::LANE_CHANGES.into_iter().find(|t| t.lane_change_classes() == Some((from, to)))
    }

    /// Lane-position token for a class; single lanes have none.
    pub fn lane_position(class: LanePositionClass) -> Option<Self> {
        match class {
            LanePositionClass::Leftmost => Some(InLeftmostLane),
            LanePositionClass::Middle => Some(InMiddleLane),
            LanePositionClass::Rightmost => Some(InRightmostLane),
            LanePositionClass::Single => None,
        }
    }

    pub fn lane_position_class(self) -> Option<LanePositionClass> {
        match self {
            InLeftmostLane => Some(LanePositionClass::Leftmost),
            InMiddleLane => Some(LanePositionClass::Middle),
            InRightmostLane => Some(LanePositionClass::Rightmost),
            _ => None,
        }
    }
}

impl fmt::Display for BehaviorToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

impl FromStr for BehaviorToken {
    type Err = UnknownToken;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_text(s)
    }
}

impl Serialize for BehaviorToken {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.text())
    }
}

impl<'de> Deserialize<'de> for BehaviorToken {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::from_text(&s).map_err(serde::de::Error::custom)
    }
}

/// A set of behavior tokens, e.g. one object's ground-truth description.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BehaviorSet(BTreeSet<BehaviorToken>);

impl BehaviorSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, t: BehaviorToken) -> bool {
        self.0.insert(t)
    }

    pub fn remove(&mut self, t: BehaviorToken) -> bool {
        self.0.remove(&t)
    }

    pub fn contains(&self, t: BehaviorToken) -> bool {
        self.0.contains(&t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = BehaviorToken> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &BehaviorSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_strict_subset(&self, other: &BehaviorSet) -> bool {
        self.0.len() < other.0.len() && self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &BehaviorSet) -> BehaviorSet {
        BehaviorSet(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection_len(&self, other: &BehaviorSet) -> usize {
        self.0.intersection(&other.0).count()
    }

    /// |A \ B| + |B \ A|.
    pub fn symmetric_difference_len(&self, other: &BehaviorSet) -> usize {
        self.0.symmetric_difference(&other.0).count()
    }

    /// Number of tokens in `self` missing from `other`.
    pub fn missing_from(&self, other: &BehaviorSet) -> usize {
        self.0.difference(&other.0).count()
    }

    /// Canonical texts sorted lexicographically; the tie-break key for selection.
    pub fn sorted_texts(&self) -> Vec<&'static str> {
        let mut v: Vec<&'static str> = self.iter().map(BehaviorToken::text).collect();
        v.sort_unstable();
        v
    }

    /// Parses a comma-separated description such as "going straight, in middle lane".
    pub fn parse(text: &str) -> Result<Self, UnknownToken> {
        text.split(',').filter(|p| !p.trim().is_empty()).map(BehaviorToken::from_text).collect()
    }
}

impl FromIterator<BehaviorToken> for BehaviorSet {
    fn from_iter<I: IntoIterator<Item = BehaviorToken>>(iter: I) -> Self {
        BehaviorSet(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[BehaviorToken; N]> for BehaviorSet {
    fn from(arr: [BehaviorToken; N]) -> Self {
        arr.into_iter().collect()
    }
}

impl Extend<BehaviorToken> for BehaviorSet {
    fn extend<I: IntoIterator<Item = BehaviorToken>>(&mut self, iter: I) {
        self.0.extend(iter)
    }
}

impl<'a> IntoIterator for &'a BehaviorSet {
    type Item = BehaviorToken;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, BehaviorToken>>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

impl fmt::Display for BehaviorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.iter().map(BehaviorToken::text).collect();
        f.write_str(&parts.join(", "))
    }
}
