//! Direction-of-arrival simulation: a uniform linear array observing
//! narrowband sources that switch on and off, tracked with a sliding window.

pub mod array;
pub mod scenario;
pub mod sweep;
pub mod tracking;

pub use array::{generate_snapshot, population_covariance, steering_vector, subspace_error, true_subspace, TrueSubspace};
pub use scenario::{Scenario, SignalEvent};
pub use sweep::{sweep_sampling_rate, SweepRow};
pub use tracking::{mean_abs_error, run_tracking, run_tracking_with, TrackingRecord, TrackingTrace};

/// Text of the shipped varying-rank scenario.
pub const VARYING_RANK: &str = include_str!("../../scenarios/varying_rank.ini");
/// Text of the shipped constant-rank scenario.
pub const CONSTANT_RANK: &str = include_str!("../../scenarios/constant_rank.ini");

pub fn varying_rank() -> Scenario {
    Scenario::parse(VARYING_RANK).expect("shipped scenario parses")
}

pub fn constant_rank() -> Scenario {
    Scenario::parse(CONSTANT_RANK).expect("shipped scenario parses")
}
