//! Simulation of Galton-Watson trees and exhaustive enumeration of small
//! ones, both evaluating `V_{N,n}` directly from its recursive definition:
//! every node has `V_{N,0} = 1`, and `V_{N,k+1}(v) = floor(C / N)` where `C`
//! counts the children `u` of `v` with `V_{N,k}(u) > 0`.

mod enumerate;
mod estimate;
mod tree;

pub use enumerate::{brute_force_joint, MAX_ENUMERATED_TUPLES};
pub use estimate::{mc_estimate, mc_run, Estimate, McConfig, MonteCarloSummary, TrackMode, DEFAULT_BUDGET};
pub use tree::{count_vnn, replicate_rng, simulate_heights, simulate_vnn, SampleOutcome};
