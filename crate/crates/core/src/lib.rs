//! Statistics for quantifying performance, and performance change, from
//! benchmark measurements repeated at several nested levels (for example
//! binaries, executions of each binary, and measurements within each
//! execution).
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `std` feature for
//! `std::error::Error` integration and `parallel` to spread bootstrap and
//! Monte-Carlo iterations over a rayon thread pool. Results are identical
//! with and without `parallel`: every iteration draws from its own random
//! substream (see [`rng`]).
//!
//! Modules, bottom-up:
//!
//! - [`hierarchy`]: the balanced nested data set and its level means.
//! - [`estimators`]: per-level variance estimates `S²ᵢ` and `T²ᵢ`.
//! - [`intervals`]: t/normal quantiles, the asymptotic mean interval, the
//!   Fieller ratio interval, and threshold decisions.
//! - [`bootstrap`]: hierarchical resampling and percentile intervals.
//! - [`planner`]: cost model and optimal repetition counts.
//! - [`simulation`]: hierarchical normal data, false-alarm rates, coverage.

#![no_std]
#![deny(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod bootstrap;
mod error;
pub mod estimators;
pub mod hierarchy;
pub mod intervals;
mod par;
pub mod planner;
pub mod rng;
pub mod simulation;
mod stats;

pub use bootstrap::{
    mean_ci_bootstrap, percentile_interval, ratio_ci_bootstrap, resample, BootstrapConfig,
    IndexSource, ResamplingStrategy, ScriptedDraws,
};
pub use error::{Error, Result};
pub use estimators::{
    biased_variance_estimates, mean_variance_estimate, unbiased_variance_estimates,
    VarianceDecomposition,
};
pub use hierarchy::MeasurementHierarchy;
pub use intervals::{
    mean_ci_asymptotic, normal_quantile, ratio_ci_fieller, t_quantile, threshold_decision,
    ChangeDecision, ConfidenceInterval, Distribution, IntervalMethod,
};
pub use planner::{
    optimal_counts, plan_experiment, precision_objective, total_cost, CostModel, ExperimentPlan,
    PlanOptions,
};
pub use rng::RandomStreams;
pub use simulation::{
    coverage, false_alarm_rate, generate_hierarchical_normal, CoverageSpec, FalseAlarmSpec,
    HierarchicalNormalModel, RatioMethod, ReportKind, SimulationCell, SimulationReport,
};
