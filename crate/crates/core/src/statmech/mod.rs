//! Replica spin models of random circuit averages and their large-q
//! minimal-cut predictions.
//!
//! All predictions are in units of `log q`.

mod geometry;
mod mincut;
mod perm;
mod predict;

pub use geometry::{future_cone, past_cone, Geometry, Scenario};
pub use mincut::{
    min_cut, three_label_cut, BrickworkGraph, Cut, Leg, NodeKind, Side, Spin, SpinSet,
    ThreeLabelCut, LATTICE_GUARD,
};
pub use perm::{
    weingarten_matrix, HaarWeingarten, Permutation, WeightMode, WeightModel, PERMUTATION_GUARD,
};
pub use predict::{
    concentration_mana, contiguous_entanglement, early_time_injection_cost,
    early_time_injection_mana, entanglement_cut, haar_log_moment, haar_mana,
    late_time_injection_mana, past_cone_overlap, predict, replica_limit, vertical_wall,
    Prediction,
};
