//! Statistical experiments on sampled Airy paths and deterministic tables.
//!
//! Inequalities that hold exactly in the limit are tested as hypotheses: a
//! verdict fails only when the violation exceeds three standard errors.

mod descriptive;
mod experiments;
mod functional;
mod inequalities;
mod paths;
mod report;

pub use descriptive::{
    covariance, delta_method, ks_distance, linear_fit, mean, proportion, skewness, std_error, trapezoid, variance,
    variance_estimate, Estimate,
};
pub use experiments::{
    clt_experiment, ergodicity_decay, exceedance_measure, max_growth, poisson_experiment, poisson_tv, CltConfig,
    ExceedanceConfig, MaxProcess, PoissonConfig, SmoothedIndicator, Trig, AIRY1_MAX_LIMIT, AIRY2_MAX_WINDOW,
};
pub use functional::{MonotoneFunctional, Shape};
pub use inequalities::{
    a2_modulus_tail, association_catalogue, association_suite, covariance_probability_bound, fkg_catalogue, fkg_suite,
    newman_catalogue, newman_sides, newman_suite, FkgCase, NewmanCase, NewmanSides, MIN_REPLICAS, VIOLATION_SE,
};
pub use paths::PathSet;
pub use report::{Comparison, ExperimentReport, Verdict, Z99};

use crate::tracy_widom::TwError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least {need} replicas, got {got}")]
    InsufficientReplicas { need: usize, got: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("sample grid is not uniform")]
    NonUniformGrid,
    #[error("replicas disagree on the grid or contain non-finite values")]
    RaggedSample,
    #[error("point {x} is not on the sample grid")]
    OffGrid { x: f64 },
    #[error("experiment needs a spatial extent of {need}, the sample covers {have}")]
    ExtentExceedsSample { need: f64, have: f64 },
    #[error("grid step {step} is coarser than {max}")]
    GridTooCoarse { step: f64, max: f64 },
    #[error("spacing multiplier {multiplier} must exceed 1")]
    SpacingTooSmall { multiplier: f64 },
    #[error("estimated long-run variance {0} is not positive")]
    NonPositiveVariance(f64),
    #[error("invalid {name}: {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("functional {id}: {reason}")]
    BadFunctional { id: String, reason: String },
    #[error(transparent)]
    TracyWidom(#[from] TwError),
}
