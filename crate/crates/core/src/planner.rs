//! Experiment dimensioning.
//!
//! Costs are expressed in lowest-level measurements: `c₁` is the warm-up
//! discarded by every new execution, `c₂` the price of a new binary, and so
//! on. For an `(n+1)`-level experiment the total cost is
//! `(cₙ + … (c₂ + (c₁ + n₁)·n₂)·n₃ … )·nₙ₊₁`, and the variance of the grand
//! mean is `f = Σᵢ σ²ᵢ / ∏ₖ₌ᵢⁿ⁺¹ nₖ`. Minimizing `f` at fixed cost gives
//! counts that depend only on adjacent levels:
//! `n₁ = √(c₁·σ²₁/σ²₂)` and `nᵢ = √((cᵢ/cᵢ₋₁)·σ²ᵢ/σ²ᵢ₊₁)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{ceil, floor, sqrt};

use crate::error::{Error, Result};
use crate::estimators::{
    biased_variance_estimates, unbiased_variance_estimates, VarianceDecomposition,
};
use crate::hierarchy::MeasurementHierarchy;
use crate::intervals::{check_alpha, t_quantile};

#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    /// `c₁ … cₙ`, lowest level first.
    pub costs: Vec<f64>,
    /// Total allowed cost, in measurements.
    pub budget: Option<f64>,
}

impl CostModel {
    pub fn new(costs: Vec<f64>, budget: Option<f64>) -> Result<Self> {
        if let Some(i) = costs.iter().position(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "cost c{} must be a finite non-negative number, got {}",
                i + 1,
                costs[i]
            )));
        }
        if let Some(b) = budget {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "budget must be positive, got {b}"
                )));
            }
        }
        Ok(Self { costs, budget })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptions {
    /// Confidence level of the predicted half-width is `1 − alpha`.
    pub alpha: f64,
    /// Plan with `S²` in place of `T²`; no level is ever dropped.
    pub assume_t_equals_s: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            assume_t_equals_s: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    /// `n₁ … nₙ` for the retained levels, lowest first.
    pub counts: Vec<usize>,
    /// `nₙ₊₁`, present when a budget was given.
    pub top_count: Option<usize>,
    /// Levels removed, in removal order, numbered in the level scheme of
    /// the data at the time of removal.
    pub dropped_levels: Vec<usize>,
    /// Half-width of the `1 − alpha` interval for the mean, relative to
    /// the pilot grand mean, at the planned counts. Needs a budget.
    pub predicted_halfwidth: Option<f64>,
    /// Estimates the counts were computed from (after any drops).
    pub variances: VarianceDecomposition,
    /// Costs after any drops.
    pub costs: CostModel,
    pub warnings: Vec<String>,
}

/// Cost of one top-level repetition for counts `n₁ … nₙ`.
fn unit_cost(counts: &[f64], costs: &[f64]) -> f64 {
    let mut c = 1.0;
    for (n, cost) in counts.iter().zip(costs) {
        c = (c * n) + cost;
    }
    c
}

/// `(cₙ + … (c₁ + n₁)·n₂ …)·nₙ₊₁` for counts `n₁ … nₙ₊₁`.
pub fn total_cost(counts: &[usize], costs: &CostModel) -> Result<f64> {
    if counts.len() != costs.costs.len() + 1 {
        return Err(Error::LengthMismatch {
            expected: costs.costs.len() + 1,
            actual: counts.len(),
        });
    }
    let real: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
    Ok(total_cost_real(&real, &costs.costs))
}

pub fn total_cost_real(counts: &[f64], costs: &[f64]) -> f64 {
    let (top, lower) = counts.split_last().expect("at least one count");
    unit_cost(lower, costs) * top
}

/// Variance of the grand mean, `Σ σ²ᵢ / ∏ₖ₌ᵢⁿ⁺¹ nₖ`. Both slices are lowest
/// level first and of equal length.
pub fn precision_objective(counts: &[usize], variances: &[f64]) -> Result<f64> {
    if counts.len() != variances.len() {
        return Err(Error::LengthMismatch {
            expected: variances.len(),
            actual: counts.len(),
        });
    }
    let real: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
    Ok(precision_objective_real(&real, variances))
}

pub fn precision_objective_real(counts: &[f64], variances: &[f64]) -> f64 {
    let mut f = 0.0;
    let mut prod = 1.0;
    for i in (0..counts.len()).rev() {
        prod *= counts[i];
        f += variances[i] / prod;
    }
    f
}

/// Unrounded optimal `n₁ … nₙ`. `variances` is `σ²₁ … σ²ₙ₊₁`.
pub fn optimal_counts_real(variances: &[f64], costs: &CostModel) -> Result<Vec<f64>> {
    let n = costs.costs.len();
    if variances.len() != n + 1 {
        return Err(Error::LengthMismatch {
            expected: n + 1,
            actual: variances.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if let Some(i) = variances.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::NonpositiveVariance { level: i + 1 });
    }
    let c = &costs.costs;
    let mut counts = Vec::with_capacity(n);
    counts.push(sqrt(c[0] * variances[0] / variances[1]));
    for i in 1..n {
        let ratio = if c[i - 1] == 0.0 {
            if c[i] != 0.0 {
                return Err(Error::CostDomain {
                    level: i + 1,
                    below: i,
                });
            }
            // 0/0: neither level costs anything to repeat.
            1.0
        } else {
            c[i] / c[i - 1]
        };
        counts.push(sqrt(ratio * variances[i] / variances[i + 1]));
    }
    Ok(counts)
}

/// Ceiling-rounded optimal `n₁ … nₙ`, each at least 1.
pub fn optimal_counts(variances: &[f64], costs: &CostModel) -> Result<Vec<usize>> {
    Ok(optimal_counts_real(variances, costs)?
        .into_iter()
        .map(|x| (ceil(x - 1e-12) as usize).max(1))
        .collect())
}

/// Dimensions a new experiment from pilot data.
///
/// While some level `i ≥ 2` has `T²ᵢ ≤ 0`, the highest such level is
/// merged into the one below it and the estimates are recomputed. Removing
/// level `i` removes cost `cᵢ` (`cₙ` for the top level). The counts then
/// follow from [`optimal_counts`]; with a budget, `nₙ₊₁` is the number of
/// whole top-level repetitions it can pay for.
pub fn plan_experiment(
    pilot: &MeasurementHierarchy,
    costs: &CostModel,
    options: &PlanOptions,
) -> Result<ExperimentPlan> {
    check_alpha(options.alpha)?;
    if costs.costs.len() + 1 != pilot.levels() {
        return Err(Error::LengthMismatch {
            expected: pilot.levels() - 1,
            actual: costs.costs.len(),
        });
    }
    let mut data = pilot.clone();
    let mut cost_vec = costs.costs.clone();
    let mut dropped = Vec::new();
    let mut warnings = Vec::new();

    let (decomp, variances) = loop {
        let s = biased_variance_estimates(&data)?;
        let decomp = unbiased_variance_estimates(&s, data.shape())?;
        if options.assume_t_equals_s {
            break (decomp, s);
        }
        match decomp.nonpositive_levels.last() {
            Some(&level) => {
                let n = data.levels() - 1;
                cost_vec.remove(level.min(n) - 1);
                data = data.collapse_level(level)?;
                dropped.push(level);
            }
            None => {
                let t = decomp.t_squared.clone();
                break (decomp, t);
            }
        }
    };

    let reduced = CostModel {
        costs: cost_vec,
        budget: costs.budget,
    };
    let counts = optimal_counts(&variances, &reduced)?;
    if counts.iter().any(|&c| c < 5) {
        warnings.push(String::from(
            "planned repetition count below 5; estimates from such small groups are unreliable",
        ));
    }
    if !dropped.is_empty() && data.levels() == 1 {
        warnings.push(String::from(
            "every level above the measurements was dropped; plan is a flat sample",
        ));
    }

    let mut top_count = None;
    let mut predicted_halfwidth = None;
    if let Some(budget) = costs.budget {
        let real: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
        let unit = unit_cost(&real, &reduced.costs);
        let top = floor(budget / unit + 1e-9);
        if top < 2.0 {
            return Err(Error::InfeasibleBudget {
                budget,
                unit_cost: unit,
            });
        }
        let top = top as usize;
        let mut all = counts.clone();
        all.push(top);
        let f = precision_objective(&all, &variances)?;
        let q = t_quantile(1.0 - options.alpha / 2.0, (top - 1) as u64)?;
        predicted_halfwidth = Some(q * sqrt(f) / libm::fabs(pilot.grand_mean()));
        top_count = Some(top);
    }

    Ok(ExperimentPlan {
        counts,
        top_count,
        dropped_levels: dropped,
        predicted_halfwidth,
        variances: decomp,
        costs: reduced,
        warnings,
    })
}
