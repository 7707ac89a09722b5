//! Freshness-of-information toolkit for a symmetric N-state source watched
//! over a lossy slotted channel.
//!
//! The penalty of record is the age of incorrect information: how long the
//! monitor's estimate has been wrong. The crate provides the exact
//! steady-state analysis of threshold transmission policies, a constrained
//! optimizer that meets a transmit-budget by randomizing two adjacent
//! thresholds, an average-cost dynamic-programming oracle, a Monte Carlo
//! simulator of the full system, and a classical-age baseline, all sharing
//! the model types in [`model`].
//!
//! The three computational routes (closed forms, dynamic programming,
//! simulation) are deliberately independent so they can certify each other;
//! the test suite leans on that.

pub mod analysis;
pub mod baseline;
pub mod mdp;
pub mod model;
pub mod optimizer;
pub mod sim;

pub use analysis::{
    active_fraction, avg_penalty, cost_always_update, cost_never_update, lagrange_cost,
    lambda_intersection, policy_cost, stationary, AnalysisError, PolicyCost,
    StationaryDistribution,
};
pub use baseline::{
    aoi_active_fraction, avg_aoi_threshold, solve_aoi_constrained, AoiMixturePolicy,
    BaselineError,
};
pub use mdp::{
    evaluate_threshold, extract_threshold, solve_lagrangian, solve_unconstrained, Action,
    MdpConfig, MdpError, MdpSolution, ThresholdDecision,
};
pub use model::{
    aoii_kernel, step_aoi, step_aoii, ParamError, PenaltyState, SystemParams,
    TransitionDistribution,
};
pub use optimizer::{
    find_threshold, solve_constrained, verify_optimality, CertificateReport, ConstrainedSolution,
    MixtureSolution, OptimizerError, ThresholdSearch,
};
pub use sim::{run, run_sweep, PolicySpec, SimError, SimMetrics, SweepCell, SweepRow};
