//! Behavior lexicon and the rule-based classifier.

mod classify;
mod token;

pub use classify::{
    classify_intersection, classify_kinematics, classify_lane, describe, lane_ownership, ClassifierParams, LaneOwnership,
    GRAVITY,
};
pub use token::{BehaviorSet, BehaviorToken, UnknownToken};
