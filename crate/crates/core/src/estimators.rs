//! Per-level variance estimates for a balanced nested experiment.
//!
//! `S²ᵢ` is the average sample variance of level-`i` group means within
//! their parent group (the top level has a single parent). It overestimates
//! the level's variance component because lower-level noise leaks into
//! every group mean; `T²ᵢ = S²ᵢ − S²ᵢ₋₁/nᵢ₋₁` removes that leak and is
//! unbiased, at the price of possibly going negative.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hierarchy::MeasurementHierarchy;
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceDecomposition {
    /// `S²₁ … S²ₙ₊₁`, lowest level first.
    pub s_squared: Vec<f64>,
    /// `T²₁ … T²ₙ₊₁`, lowest level first. May be negative.
    pub t_squared: Vec<f64>,
    /// Levels `i ≥ 2` whose `T²ᵢ ≤ 0`, ascending.
    pub nonpositive_levels: Vec<usize>,
    /// Shape of the source data, highest level first.
    pub shape: Vec<usize>,
}

impl VarianceDecomposition {
    /// Estimates both `S²` and `T²` from the data.
    pub fn from_hierarchy(h: &MeasurementHierarchy) -> Result<Self> {
        let s = biased_variance_estimates(h)?;
        unbiased_variance_estimates(&s, h.shape())
    }
}

/// `S²₁ … S²ₙ₊₁`, lowest level first. Every level needs at least two
/// repetitions.
pub fn biased_variance_estimates(h: &MeasurementHierarchy) -> Result<Vec<f64>> {
    (1..=h.levels())
        .map(|level| level_variance(h, level))
        .collect()
}

fn level_variance(h: &MeasurementHierarchy, level: usize) -> Result<f64> {
    let n = h.count(level);
    if n < 2 {
        return Err(Error::UndefinedVariance { level });
    }
    let means = h.block_means(level - 1);
    let groups = means.len() / n;
    let total: f64 = means.chunks_exact(n).map(stats::sample_variance).sum();
    Ok(total / groups as f64)
}

/// Applies `T²₁ = S²₁`, `T²ᵢ = S²ᵢ − S²ᵢ₋₁/nᵢ₋₁`. `shape` is highest level
/// first, as in [`MeasurementHierarchy::shape`].
pub fn unbiased_variance_estimates(
    s_squared: &[f64],
    shape: &[usize],
) -> Result<VarianceDecomposition> {
    if s_squared.len() != shape.len() {
        return Err(Error::LengthMismatch {
            expected: shape.len(),
            actual: s_squared.len(),
        });
    }
    let levels = shape.len();
    let count = |level: usize| shape[levels - level] as f64;
    let mut t_squared = Vec::with_capacity(levels);
    let mut nonpositive_levels = Vec::new();
    for (i, &s) in s_squared.iter().enumerate() {
        let level = i + 1;
        let t = if level == 1 {
            s
        } else {
            s - s_squared[i - 1] / count(level - 1)
        };
        if level >= 2 && t <= 0.0 {
            nonpositive_levels.push(level);
        }
        t_squared.push(t);
    }
    Ok(VarianceDecomposition {
        s_squared: s_squared.to_vec(),
        t_squared,
        nonpositive_levels,
        shape: shape.to_vec(),
    })
}

/// `S²ₙ₊₁ / nₙ₊₁`, an unbiased estimate of the variance of the grand mean.
pub fn mean_variance_estimate(h: &MeasurementHierarchy) -> Result<f64> {
    let top = h.levels();
    Ok(level_variance(h, top)? / h.count(top) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn three_level() -> MeasurementHierarchy {
        MeasurementHierarchy::new(
            &[3, 2, 2],
            &[9., 5., 8., 3., 10., 6., 7., 11., 1., 12., 2., 4.],
            None,
        )
        .unwrap()
    }

    fn old_system() -> MeasurementHierarchy {
        MeasurementHierarchy::new(
            &[3, 2, 2],
            &[9., 11., 5., 6., 16., 13., 12., 8., 15., 7., 10., 14.],
            None,
        )
        .unwrap()
    }

    #[test]
    fn three_level_biased() {
        let s = biased_variance_estimates(&three_level()).unwrap();
        assert_abs_diff_eq!(s[0], 16.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1], 31.0 / 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[2], 3.5625, epsilon = 1e-12);
    }

    #[test]
    fn collapsed_biased() {
        let h = three_level().collapse_level(2).unwrap();
        let s = biased_variance_estimates(&h).unwrap();
        assert_abs_diff_eq!(s[0], 12.722_222_222_222, epsilon = 1e-9);
        assert_abs_diff_eq!(s[1], 3.5625, epsilon = 1e-12);
    }

    #[test]
    fn three_level_unbiased() {
        let d = VarianceDecomposition::from_hierarchy(&three_level()).unwrap();
        assert_abs_diff_eq!(d.t_squared[0], 16.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d.t_squared[1], 31.0 / 12.0 - 8.25, epsilon = 1e-12);
        assert_abs_diff_eq!(d.t_squared[2], 3.5625 - 31.0 / 24.0, epsilon = 1e-12);
        assert_eq!(d.nonpositive_levels, vec![2]);
    }

    #[test]
    fn collapsed_unbiased() {
        let s = biased_variance_estimates(&three_level().collapse_level(2).unwrap()).unwrap();
        let d = unbiased_variance_estimates(&s, &[3, 4]).unwrap();
        assert_abs_diff_eq!(d.t_squared[0], 12.722, epsilon = 1e-3);
        assert_abs_diff_eq!(d.t_squared[1], 0.382, epsilon = 1e-3);
        assert!(d.nonpositive_levels.is_empty());
    }

    #[test]
    fn zeros_flag_upper_levels() {
        let d = unbiased_variance_estimates(&[0.0; 3], &[2, 2, 2]).unwrap();
        assert_eq!(d.t_squared, vec![0.0; 3]);
        assert_eq!(d.nonpositive_levels, vec![2, 3]);
    }

    #[test]
    fn constant_data_is_zero() {
        let h = MeasurementHierarchy::new(&[2, 3, 2], &[5.0; 12], None).unwrap();
        assert_eq!(biased_variance_estimates(&h).unwrap(), vec![0.0; 3]);
        assert_eq!(mean_variance_estimate(&h).unwrap(), 0.0);
    }

    #[test]
    fn undefined_variance() {
        let h = MeasurementHierarchy::new(&[3, 1, 2], &[1.0; 6], None).unwrap();
        assert_eq!(
            biased_variance_estimates(&h),
            Err(Error::UndefinedVariance { level: 2 })
        );
        let h = MeasurementHierarchy::new(&[1, 2], &[1.0, 2.0], None).unwrap();
        assert_eq!(
            mean_variance_estimate(&h),
            Err(Error::UndefinedVariance { level: 2 })
        );
    }

    #[test]
    fn mean_variance_worked() {
        assert_abs_diff_eq!(
            mean_variance_estimate(&old_system()).unwrap(),
            5.8125 / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn mean_variance_top_means_1_2_3() {
        // Top-level means 1, 2, 3: sample variance 1.
        let h = MeasurementHierarchy::new(&[3, 2], &[0.5, 1.5, 2., 2., 3., 3.], None).unwrap();
        assert_abs_diff_eq!(
            mean_variance_estimate(&h).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn stable_with_large_offset() {
        let base = 1.0e9;
        let vals: Vec<f64> = [1., 2., 3., 4.].iter().map(|d| base + d * 1e-3).collect();
        let h = MeasurementHierarchy::new(&[4], &vals, None).unwrap();
        let s = biased_variance_estimates(&h).unwrap();
        assert_abs_diff_eq!(s[0], 1.6666e-6, epsilon = 1e-9);
    }
}
