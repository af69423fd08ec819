//! Monte-Carlo evaluation of the interval methods.
//!
//! Two experiments are supported. The false-alarm experiment compares a
//! system with itself: each iteration draws two independent sets of
//! top-level sub-trees (with replacement) from one source data set and
//! counts how often the ratio interval falls wholly outside `1 ± threshold`.
//! The coverage experiment generates both systems from a hierarchical
//! normal model with a known ratio `θ` and counts how often the interval
//! contains it.
//!
//! Iterations whose interval cannot be formed (an unbounded Fieller
//! interval, or a zero bootstrap denominator) are counted as failures and
//! left out of the rate.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::bootstrap::{ratio_ci_bootstrap, BootstrapConfig, IndexSource, StrategyPreset};
use crate::error::{Error, Result};
use crate::hierarchy::MeasurementHierarchy;
use crate::intervals::{
    check_alpha, ratio_ci_fieller, threshold_decision, ConfidenceInterval, Distribution,
};
use crate::par::map_range;
use crate::rng::RandomStreams;

/// Normal at every level: top-level means `N(μ, σ²ₙ₊₁)`, each child mean
/// normal around its parent with that level's `σ`, measurements `N(·, σ²₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalNormalModel {
    pub mu: f64,
    /// `σ₁ … σₙ₊₁`, lowest level first.
    pub sigmas: Vec<f64>,
}

impl HierarchicalNormalModel {
    pub fn new(mu: f64, sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::EmptyShape);
        }
        if !mu.is_finite() || sigmas.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidConfig(String::from(
                "model needs a finite mean and finite non-negative sigmas",
            )));
        }
        Ok(Self { mu, sigmas })
    }

    fn with_mean(&self, mu: f64) -> Self {
        Self {
            mu,
            sigmas: self.sigmas.clone(),
        }
    }
}

/// Draws one data set of the given shape (highest level first).
pub fn generate_hierarchical_normal<R: RngCore + ?Sized>(
    model: &HierarchicalNormalModel,
    shape: &[usize],
    rng: &mut R,
) -> Result<MeasurementHierarchy> {
    if shape.len() != model.sigmas.len() {
        return Err(Error::LengthMismatch {
            expected: model.sigmas.len(),
            actual: shape.len(),
        });
    }
    if let Some(position) = shape.iter().position(|&n| n == 0) {
        return Err(Error::ZeroCount { position });
    }
    let levels = shape.len();
    let mut means = alloc::vec![model.mu];
    for (idx, &n) in shape.iter().enumerate() {
        let sigma = model.sigmas[levels - 1 - idx];
        let mut next = Vec::with_capacity(means.len() * n);
        for &m in &means {
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                next.push(m + sigma * z);
            }
        }
        means = next;
    }
    Ok(MeasurementHierarchy::from_parts(shape.to_vec(), means))
}

/// How a ratio interval is built inside a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioMethod {
    Fieller(Distribution),
    Bootstrap {
        iterations: usize,
        strategy: StrategyPreset,
    },
}

impl RatioMethod {
    pub fn label(&self) -> String {
        match self {
            RatioMethod::Fieller(Distribution::StudentT) => String::from("fieller"),
            RatioMethod::Fieller(Distribution::Normal) => String::from("fieller-normal"),
            RatioMethod::Bootstrap { strategy, .. } => {
                alloc::format!("bootstrap-{}", strategy.as_str())
            }
        }
    }

    fn interval(
        &self,
        old: &MeasurementHierarchy,
        new: &MeasurementHierarchy,
        alpha: f64,
        seed: u64,
    ) -> Result<ConfidenceInterval> {
        match *self {
            RatioMethod::Fieller(dist) => ratio_ci_fieller(old, new, alpha, dist),
            RatioMethod::Bootstrap {
                iterations,
                strategy,
            } => ratio_ci_bootstrap(
                old,
                new,
                &BootstrapConfig {
                    iterations,
                    alpha,
                    strategy,
                    seed,
                },
            ),
        }
    }
}

fn is_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::UnboundedInterval | Error::DegenerateDenominator { .. }
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    FalseAlarm,
    Coverage,
}

impl ReportKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportKind::FalseAlarm => "false-alarm",
            ReportKind::Coverage => "coverage",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationCell {
    /// Shape of each compared data set.
    pub shape: Vec<usize>,
    /// Threshold (false alarm) or `θ` (coverage).
    pub parameter: f64,
    pub method: String,
    pub iterations: usize,
    /// Iterations that produced an interval.
    pub valid: usize,
    /// Iterations without a usable interval; excluded from `estimate`.
    pub failures: usize,
    /// Detection rate or coverage over the valid iterations.
    pub estimate: f64,
    /// `√(p(1 − p)/valid)`.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub kind: ReportKind,
    pub cells: Vec<SimulationCell>,
    pub seed: u64,
}

fn rate(hits: usize, valid: usize) -> Result<(f64, f64)> {
    if valid == 0 {
        return Err(Error::InvalidConfig(String::from(
            "no iteration produced an interval",
        )));
    }
    let p = hits as f64 / valid as f64;
    Ok((p, libm::sqrt(p * (1.0 - p) / valid as f64)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FalseAlarmSpec {
    /// Top-level group counts to try; one group of cells per entry.
    pub binaries: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub iterations: usize,
    pub alpha: f64,
    pub method: RatioMethod,
    pub seed: u64,
}

/// Same-system comparisons drawn from `source`. Cells are ordered by
/// `binaries`, then `thresholds`. Entry `g` of `binaries` uses child family
/// `g` of the seed, iteration `i` its substream `i`.
pub fn false_alarm_rate(
    source: &MeasurementHierarchy,
    spec: &FalseAlarmSpec,
) -> Result<SimulationReport> {
    check_alpha(spec.alpha)?;
    let available = source.shape()[0];
    if available < 2 {
        return Err(Error::InsufficientGroups {
            available,
            required: 2,
        });
    }
    if spec.iterations == 0 {
        return Err(Error::InvalidConfig(String::from(
            "iterations must be positive",
        )));
    }
    if let Some(&b) = spec.binaries.iter().find(|&&b| b < 2) {
        return Err(Error::InvalidConfig(alloc::format!(
            "need at least 2 binaries per system, got {b}"
        )));
    }
    if let Some(&t) = spec.thresholds.iter().find(|&&t| !(t >= 0.0)) {
        return Err(Error::NegativeThreshold(t));
    }

    let streams = RandomStreams::new(spec.seed);
    let mut cells = Vec::new();
    for (g, &binaries) in spec.binaries.iter().enumerate() {
        let family = streams.child(g as u64);
        let mut shape = source.shape().to_vec();
        shape[0] = binaries;
        let outcomes = map_range(spec.iterations, |i| {
            let mut rng = family.stream(i as u64);
            let old = draw_top_groups(source, binaries, &mut rng);
            let new = draw_top_groups(source, binaries, &mut rng);
            let seed = rng.next_u64();
            spec.method.interval(&old, &new, spec.alpha, seed)
        });
        let mut intervals = Vec::with_capacity(outcomes.len());
        let mut failures = 0;
        for o in outcomes {
            match o {
                Ok(ci) => intervals.push(ci),
                Err(e) if is_failure(&e) => failures += 1,
                Err(e) => return Err(e),
            }
        }
        for &threshold in &spec.thresholds {
            let mut hits = 0;
            for ci in &intervals {
                if threshold_decision(ci, threshold)?.detected {
                    hits += 1;
                }
            }
            let (estimate, std_error) = rate(hits, intervals.len())?;
            cells.push(SimulationCell {
                shape: shape.clone(),
                parameter: threshold,
                method: spec.method.label(),
                iterations: spec.iterations,
                valid: intervals.len(),
                failures,
                estimate,
                std_error,
            });
        }
    }
    Ok(SimulationReport {
        kind: ReportKind::FalseAlarm,
        cells,
        seed: spec.seed,
    })
}

/// `count` top-level sub-trees of `source`, drawn with replacement.
fn draw_top_groups<S: IndexSource + ?Sized>(
    source: &MeasurementHierarchy,
    count: usize,
    draws: &mut S,
) -> MeasurementHierarchy {
    let available = source.shape()[0];
    let mut values = Vec::with_capacity(count * source.top_group(0).len());
    for _ in 0..count {
        values.extend_from_slice(source.top_group(draws.draw_index(available)));
    }
    let mut shape = source.shape().to_vec();
    shape[0] = count;
    MeasurementHierarchy::from_parts(shape, values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSpec {
    pub model_old: HierarchicalNormalModel,
    /// True ratio `μ_new / μ_old`; the new system shares the old `σ`s.
    pub theta: f64,
    pub method: RatioMethod,
    /// One cell per shape (highest level first).
    pub shapes: Vec<Vec<usize>>,
    pub iterations: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Analyze with the top level merged into the one below, as an
    /// experimenter who ignores that source of variation would.
    pub ignore_top_level: bool,
}

/// Fraction of intervals containing `θ`. Shape `g` uses child family `g`
/// of the seed; each iteration generates old then new data from its own
/// substream.
pub fn coverage(spec: &CoverageSpec) -> Result<SimulationReport> {
    check_alpha(spec.alpha)?;
    if !(spec.theta > 0.0) || !spec.theta.is_finite() {
        return Err(Error::InvalidConfig(alloc::format!(
            "theta must be positive, got {}",
            spec.theta
        )));
    }
    if spec.iterations == 0 {
        return Err(Error::InvalidConfig(String::from(
            "iterations must be positive",
        )));
    }
    let model_new = spec.model_old.with_mean(spec.model_old.mu * spec.theta);
    let streams = RandomStreams::new(spec.seed);
    let mut cells = Vec::new();
    for (g, shape) in spec.shapes.iter().enumerate() {
        if shape.len() != spec.model_old.sigmas.len() {
            return Err(Error::LengthMismatch {
                expected: spec.model_old.sigmas.len(),
                actual: shape.len(),
            });
        }
        if spec.ignore_top_level && shape.len() < 2 {
            return Err(Error::InvalidConfig(String::from(
                "ignoring the top level needs at least two levels",
            )));
        }
        let family = streams.child(g as u64);
        let outcomes = map_range(spec.iterations, |i| -> Result<Option<bool>> {
            let mut rng = family.stream(i as u64);
            let mut old = generate_hierarchical_normal(&spec.model_old, shape, &mut rng)?;
            let mut new = generate_hierarchical_normal(&model_new, shape, &mut rng)?;
            if spec.ignore_top_level {
                old = old.collapse_level(old.levels())?;
                new = new.collapse_level(new.levels())?;
            }
            let seed = rng.next_u64();
            match spec.method.interval(&old, &new, spec.alpha, seed) {
                Ok(ci) => Ok(Some(ci.contains(spec.theta))),
                Err(e) if is_failure(&e) => Ok(None),
                Err(e) => Err(e),
            }
        });
        let mut hits = 0;
        let mut valid = 0;
        for o in outcomes {
            if let Some(covered) = o? {
                valid += 1;
                hits += covered as usize;
            }
        }
        let (estimate, std_error) = rate(hits, valid)?;
        cells.push(SimulationCell {
            shape: shape.clone(),
            parameter: spec.theta,
            method: spec.method.label(),
            iterations: spec.iterations,
            valid,
            failures: spec.iterations - valid,
            estimate,
            std_error,
        });
    }
    Ok(SimulationReport {
        kind: ReportKind::Coverage,
        cells,
        seed: spec.seed,
    })
}
