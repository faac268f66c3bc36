//! Offline policy evaluation with linear function approximation, at desk scale.
//!
//! This crate provides the pieces needed to study how per-level regression
//! errors propagate through a finite horizon when evaluating a fixed policy
//! from off-policy data:
//!
//! - [`mdp`]: layered finite-horizon MDPs, exact dynamic-programming value
//!   oracles, and seeded offline-dataset sampling;
//! - [`features`]: feature maps, linear-realizability fitting, and coverage
//!   spectra of data distributions;
//! - [`instances`]: parametric generators for two hard instance families in
//!   which the evaluation error is amplified geometrically in the horizon;
//! - [`lspe`]: least-squares policy evaluation (backward ridge regressions
//!   with plug-in targets) and an exact error-identity diagnostic;
//! - [`shift`]: distribution-shift coefficients, lookahead covariances, and
//!   a policy-completeness checker.
//!
//! Everything here is deterministic given explicit seeds, pure with respect
//! to its inputs, and free of I/O; the companion CLI crate carries file
//! formats and experiment harnesses.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
// Indexed loops follow the level/state/action structure of the recursions.
#![allow(clippy::needless_range_loop)]
// "d % 2 != 0" reads as the evenness check it is.
#![allow(clippy::manual_is_multiple_of)]

extern crate alloc;

pub mod error;
pub mod features;
pub mod instances;
mod linalg;
pub mod lspe;
pub mod mdp;
pub mod rng;
pub mod shift;

pub use error::Error;
pub use features::{
    check_coverage, covariance, fit_linear_q, spot_check_realizability, CovarianceReport,
    CoverageReport, FeatureMap, RealizabilityReport,
};
pub use instances::{
    build_det_instance, build_optimality_reduction, build_sparse_instance, Basis,
    HardInstanceBundle, InstanceKind,
};
pub use lspe::{
    check_error_identity, evaluate_theorem_bound, run_lspe, BoundReport, IdentityReport,
    LinearQEstimate,
};
pub use mdp::{
    exact_policy_value, exact_q_values, marginal_occupancy, sample_offline, DataDistribution,
    ExactValues, LayeredMdp, OfflineDataset, Policy, Reward, Transition,
};
pub use shift::{
    completeness_residual, lookahead_covariance, minimal_shift_coefficient, shift_report,
    CompletenessReport, ShiftReport,
};

/// `Result` alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
