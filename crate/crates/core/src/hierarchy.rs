//! Balanced nested measurement data.
//!
//! Levels are numbered from the bottom: level 1 holds individual
//! measurements, level `n+1` is the top (for example binaries). The shape is
//! stored highest level first, `(n_{n+1}, …, n_1)`, and values are row-major
//! with the top-level index varying slowest.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementHierarchy {
    shape: Vec<usize>,
    values: Vec<f64>,
    level_names: Option<Vec<String>>,
}

impl MeasurementHierarchy {
    /// Validates and copies the input. `shape` is highest level first.
    pub fn new(shape: &[usize], values: &[f64], level_names: Option<&[String]>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::EmptyShape);
        }
        if let Some(position) = shape.iter().position(|&n| n == 0) {
            return Err(Error::ZeroCount { position });
        }
        let expected: usize = shape.iter().product();
        if values.len() != expected {
            return Err(Error::MisSized {
                expected,
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if let Some(names) = level_names {
            if names.len() != shape.len() {
                return Err(Error::LengthMismatch {
                    expected: shape.len(),
                    actual: names.len(),
                });
            }
        }
        Ok(Self {
            shape: shape.to_vec(),
            values: values.to_vec(),
            level_names: level_names.map(<[String]>::to_vec),
        })
    }

    /// Builds without copying; used internally where the invariants hold by
    /// construction.
    pub(crate) fn from_parts(shape: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), values.len());
        Self {
            shape,
            values,
            level_names: None,
        }
    }

    /// Highest level first.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn level_names(&self) -> Option<&[String]> {
        self.level_names.as_deref()
    }

    /// Number of levels, `n + 1`.
    pub fn levels(&self) -> usize {
        self.shape.len()
    }

    /// Repetition count `n_level` (1-based, level 1 is the bottom).
    pub fn count(&self, level: usize) -> usize {
        self.shape[self.levels() - level]
    }

    /// Number of values in one group of `level` (product of `n_1..=n_level`).
    pub(crate) fn block_len(&self, level: usize) -> usize {
        self.shape[self.levels() - level..].iter().product()
    }

    pub(crate) fn check_level(&self, level: usize, min: usize) -> Result<()> {
        if level < min || level > self.levels() {
            return Err(Error::LevelOutOfRange {
                level,
                min,
                max: self.levels(),
            });
        }
        Ok(())
    }

    pub fn grand_mean(&self) -> f64 {
        stats::mean(&self.values)
    }

    /// Means over every index at and below `level`, row-major over the
    /// remaining indices. `level_means(1)` gives execution means in a
    /// three-level experiment; `level_means(n+1)` is the grand mean alone.
    pub fn level_means(&self, level: usize) -> Result<Vec<f64>> {
        self.check_level(level, 1)?;
        Ok(self.block_means(level))
    }

    /// `level_means` with level 0 meaning the raw values.
    pub(crate) fn block_means(&self, level: usize) -> Vec<f64> {
        if level == 0 {
            return self.values.clone();
        }
        self.values
            .chunks_exact(self.block_len(level))
            .map(stats::mean)
            .collect()
    }

    /// Merges `level` into the level below it, as if the experiment had been
    /// run with one fewer level. Value order is unchanged.
    pub fn collapse_level(&self, level: usize) -> Result<Self> {
        self.check_level(level, 2)?;
        let idx = self.levels() - level;
        let mut shape = Vec::with_capacity(self.levels() - 1);
        shape.extend_from_slice(&self.shape[..idx]);
        shape.push(self.shape[idx] * self.shape[idx + 1]);
        shape.extend_from_slice(&self.shape[idx + 2..]);
        let level_names = self.level_names.as_ref().map(|names| {
            let mut names = names.clone();
            names.remove(idx);
            names
        });
        Ok(Self {
            shape,
            values: self.values.clone(),
            level_names,
        })
    }

    /// Top-level sub-tree `j` (0-based) as a flat slice.
    pub fn top_group(&self, j: usize) -> &[f64] {
        let len = self.values.len() / self.shape[0];
        &self.values[j * len..(j + 1) * len]
    }

    /// Drops the first `k` values of every lowest-level group.
    pub fn drop_leading(&self, k: usize) -> Result<Self> {
        let n1 = self.count(1);
        if k >= n1 {
            return Err(Error::InvalidConfig(alloc::format!(
                "dropping {k} of {n1} measurements per group leaves none"
            )));
        }
        let values = self
            .values
            .chunks_exact(n1)
            .flat_map(|g| g[k..].iter().copied())
            .collect();
        let mut shape = self.shape.clone();
        *shape.last_mut().unwrap() = n1 - k;
        Ok(Self {
            shape,
            values,
            level_names: self.level_names.clone(),
        })
    }
}
