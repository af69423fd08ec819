//! Parametric confidence intervals for one mean and for the ratio of two
//! means, and the threshold rule that turns a ratio interval into a
//! change/no-change decision.

mod quantile;

pub use quantile::{normal_quantile, t_quantile};

use core::fmt;

use libm::sqrt;

use crate::error::{Error, Result};
use crate::estimators::mean_variance_estimate;
use crate::hierarchy::MeasurementHierarchy;

/// Reference distribution for the critical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distribution {
    /// Student's t with `n_{n+1} − 1` degrees of freedom.
    #[default]
    StudentT,
    Normal,
}

impl Distribution {
    /// Two-sided critical value `q` with `P(|X| ≤ q) = 1 − alpha`.
    pub fn critical_value(self, alpha: f64, dof: u64) -> Result<f64> {
        check_alpha(alpha)?;
        let p = 1.0 - alpha / 2.0;
        match self {
            Distribution::StudentT => t_quantile(p, dof),
            Distribution::Normal => normal_quantile(p),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Distribution::StudentT => "student-t",
            Distribution::Normal => "normal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalMethod {
    AsymptoticT,
    AsymptoticNormal,
    Fieller,
    BootstrapPercentile,
}

impl IntervalMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            IntervalMethod::AsymptoticT => "asymptotic-t",
            IntervalMethod::AsymptoticNormal => "asymptotic-normal",
            IntervalMethod::Fieller => "fieller",
            IntervalMethod::BootstrapPercentile => "bootstrap-percentile",
        }
    }
}

impl fmt::Display for IntervalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    /// `1 − alpha`.
    pub confidence: f64,
    pub method: IntervalMethod,
    /// Grand mean for one system, `N̄/Ō` for a ratio.
    pub point_estimate: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

impl fmt::Display for ConfidenceInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = f.precision().unwrap_or(4);
        write!(
            f,
            "{:.prec$} [{:.prec$}, {:.prec$}] ({}%, {})",
            self.point_estimate,
            self.lower,
            self.upper,
            self.confidence * 100.0,
            self.method
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeDecision {
    pub detected: bool,
    pub threshold: f64,
    pub interval: ConfidenceInterval,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

fn top_dof(h: &MeasurementHierarchy) -> u64 {
    (h.count(h.levels()) - 1) as u64
}

/// `Ȳ ± q·√(S²ₙ₊₁/nₙ₊₁)`, `q` the `1 − α/2` quantile of `distribution`.
pub fn mean_ci_asymptotic(
    h: &MeasurementHierarchy,
    alpha: f64,
    distribution: Distribution,
) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    let var = mean_variance_estimate(h)?;
    let q = distribution.critical_value(alpha, top_dof(h))?;
    let center = h.grand_mean();
    let half = q * sqrt(var);
    Ok(ConfidenceInterval {
        lower: center - half,
        upper: center + half,
        confidence: 1.0 - alpha,
        method: match distribution {
            Distribution::StudentT => IntervalMethod::AsymptoticT,
            Distribution::Normal => IntervalMethod::AsymptoticNormal,
        },
        point_estimate: center,
    })
}

/// Fieller interval for `θ = μ_new / μ_old`, assuming independent systems.
///
/// With `a = q²·Ō-variance` and `b = q²·N̄-variance` (variances of the means)
/// the limits are `(Ō·N̄ ∓ √D) / (Ō² − a)`, where the discriminant
/// `D = (Ō·N̄)² − (Ō² − a)(N̄² − b)` is evaluated as `a·N̄² + b·(Ō² − a)`.
/// That form is exact for zero variances and nonnegative whenever the
/// interval is bounded (`Ō² > a`).
pub fn ratio_ci_fieller(
    old: &MeasurementHierarchy,
    new: &MeasurementHierarchy,
    alpha: f64,
    distribution: Distribution,
) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    if old.shape() != new.shape() {
        return Err(Error::ShapeMismatch {
            old: old.shape().to_vec(),
            new: new.shape().to_vec(),
        });
    }
    let v_old = mean_variance_estimate(old)?;
    let v_new = mean_variance_estimate(new)?;
    let q = distribution.critical_value(alpha, top_dof(old))?;
    fieller_limits(old.grand_mean(), new.grand_mean(), v_old, v_new, q * q).map(|(lower, upper)| {
        ConfidenceInterval {
            lower,
            upper,
            confidence: 1.0 - alpha,
            method: IntervalMethod::Fieller,
            point_estimate: new.grand_mean() / old.grand_mean(),
        }
    })
}

pub(crate) fn fieller_limits(
    old_mean: f64,
    new_mean: f64,
    old_var: f64,
    new_var: f64,
    q2: f64,
) -> Result<(f64, f64)> {
    let a = q2 * old_var;
    let b = q2 * new_var;
    let denom = old_mean * old_mean - a;
    if !(denom > 0.0) {
        return Err(Error::UnboundedInterval);
    }
    let disc = a * new_mean * new_mean + b * denom;
    if !(disc >= 0.0) {
        return Err(Error::UnboundedInterval);
    }
    let center = old_mean * new_mean;
    let root = sqrt(disc);
    let lo = (center - root) / denom;
    let hi = (center + root) / denom;
    Ok((lo.min(hi), lo.max(hi)))
}

/// A change is detected only when the whole interval lies above
/// `1 + threshold` or below `1 − threshold`.
pub fn threshold_decision(ci: &ConfidenceInterval, threshold: f64) -> Result<ChangeDecision> {
    if !(threshold >= 0.0) {
        return Err(Error::NegativeThreshold(threshold));
    }
    Ok(ChangeDecision {
        detected: ci.lower > 1.0 + threshold || ci.upper < 1.0 - threshold,
        threshold,
        interval: *ci,
    })
}
