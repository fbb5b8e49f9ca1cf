pub mod behavior;
pub mod counterfactual;
pub mod fixtures;
pub mod geometry;
pub mod harness;
pub mod map_model;
pub mod reviewer;
pub mod scene_graph;
pub mod synth;
pub mod trajectory;
pub mod validation;
