//! Hierarchical bootstrap: resampling strategies and percentile intervals
//! for one mean and for the ratio of two means.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hierarchy::MeasurementHierarchy;
use crate::intervals::{check_alpha, ConfidenceInterval, IntervalMethod};
use crate::par::map_range;
use crate::rng::RandomStreams;
use crate::stats;

/// Source of uniform indices. Implemented for every RNG, and by
/// [`ScriptedDraws`] for replaying a fixed draw sequence.
pub trait IndexSource {
    /// Uniform index in `0..bound`.
    fn draw_index(&mut self, bound: usize) -> usize;
}

impl<R: rand::RngCore + ?Sized> IndexSource for R {
    fn draw_index(&mut self, bound: usize) -> usize {
        self.random_range(0..bound)
    }
}

/// Replays a fixed list of 0-based indices. Panics when exhausted or when a
/// scripted index is out of bounds.
#[derive(Debug, Clone)]
pub struct ScriptedDraws {
    draws: Vec<usize>,
    next: usize,
}

impl ScriptedDraws {
    pub fn new(draws: Vec<usize>) -> Self {
        Self { draws, next: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.draws.len() - self.next
    }
}

impl IndexSource for ScriptedDraws {
    fn draw_index(&mut self, bound: usize) -> usize {
        let i = self.draws[self.next];
        assert!(i < bound, "scripted index {i} out of bounds {bound}");
        self.next += 1;
        i
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResamplingStrategy {
    /// Replacement flag per level, highest level first.
    Hierarchical(Vec<bool>),
    /// Pool every measurement and draw from the pool, ignoring structure.
    Flat,
}

impl ResamplingStrategy {
    /// Replacement at all `levels` levels.
    pub fn rrr(levels: usize) -> Self {
        Self::Hierarchical(alloc::vec![true; levels])
    }

    /// Replacement at every level except the lowest.
    pub fn rrn(levels: usize) -> Self {
        let mut flags = alloc::vec![true; levels];
        if let Some(last) = flags.last_mut() {
            *last = levels == 1;
        }
        Self::Hierarchical(flags)
    }

    /// Replacement at the top level only.
    pub fn rnn(levels: usize) -> Self {
        let mut flags = alloc::vec![false; levels];
        flags[0] = true;
        Self::Hierarchical(flags)
    }
}

/// Named strategy presets, resolved against a hierarchy's level count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StrategyPreset {
    #[default]
    Rrr,
    Rrn,
    Rnn,
    Flat,
}

impl StrategyPreset {
    pub fn resolve(self, levels: usize) -> ResamplingStrategy {
        match self {
            StrategyPreset::Rrr => ResamplingStrategy::rrr(levels),
            StrategyPreset::Rrn => ResamplingStrategy::rrn(levels),
            StrategyPreset::Rnn => ResamplingStrategy::rnn(levels),
            StrategyPreset::Flat => ResamplingStrategy::Flat,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyPreset::Rrr => "rrr",
            StrategyPreset::Rrn => "rrn",
            StrategyPreset::Rnn => "rnn",
            StrategyPreset::Flat => "flat",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub iterations: usize,
    pub alpha: f64,
    pub strategy: StrategyPreset,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            alpha: 0.05,
            strategy: StrategyPreset::Rrr,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 2 {
            return Err(Error::InvalidConfig(alloc::format!(
                "bootstrap needs at least 2 iterations, got {}",
                self.iterations
            )));
        }
        check_alpha(self.alpha)
    }
}

/// Draws one bootstrap replicate with the same shape as `h`.
///
/// Hierarchical strategies walk the tree top-down: at each group all child
/// indices are drawn first (uniformly with replacement, or `0..n` in order
/// for levels without replacement), then each selected child is expanded in
/// turn.
pub fn resample<S: IndexSource + ?Sized>(
    h: &MeasurementHierarchy,
    strategy: &ResamplingStrategy,
    draws: &mut S,
) -> MeasurementHierarchy {
    let mut out = Vec::with_capacity(h.values().len());
    match strategy {
        ResamplingStrategy::Flat => {
            let pool = h.values();
            out.extend((0..pool.len()).map(|_| pool[draws.draw_index(pool.len())]));
        }
        ResamplingStrategy::Hierarchical(flags) => {
            assert_eq!(
                flags.len(),
                h.levels(),
                "strategy has {} levels, data has {}",
                flags.len(),
                h.levels()
            );
            resample_group(h.values(), h.shape(), flags, draws, &mut out);
        }
    }
    MeasurementHierarchy::from_parts(h.shape().to_vec(), out)
}

fn resample_group<S: IndexSource + ?Sized>(
    values: &[f64],
    shape: &[usize],
    flags: &[bool],
    draws: &mut S,
    out: &mut Vec<f64>,
) {
    let n = shape[0];
    let child_len = values.len() / n;
    if !flags[0] {
        if flags[1..].iter().all(|r| !r) {
            out.extend_from_slice(values);
            return;
        }
        for j in 0..n {
            let child = &values[j * child_len..(j + 1) * child_len];
            resample_group(child, &shape[1..], &flags[1..], draws, out);
        }
        return;
    }
    let picks: Vec<usize> = (0..n).map(|_| draws.draw_index(n)).collect();
    for j in picks {
        let child = &values[j * child_len..(j + 1) * child_len];
        if shape.len() == 1 {
            out.push(child[0]);
        } else {
            resample_group(child, &shape[1..], &flags[1..], draws, out);
        }
    }
}

/// Grand mean of one replicate.
fn resampled_mean<S: IndexSource + ?Sized>(
    h: &MeasurementHierarchy,
    strategy: &ResamplingStrategy,
    draws: &mut S,
) -> f64 {
    stats::mean(resample(h, strategy, draws).values())
}

/// Percentile interval with 1-based ranks `max(1, ⌊(α/2)·B⌋)` and
/// `min(B, ⌈(1 − α/2)·B⌉)` into the sorted samples. With `B = 1000` and
/// `α = 0.05` these are the 25th and 975th values.
pub fn percentile_interval(samples: &[f64], alpha: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    check_alpha(alpha)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = percentile_ranks(sorted.len(), alpha);
    Ok((sorted[lo - 1], sorted[hi - 1]))
}

/// 1-based ranks; a relative slack absorbs representation error in
/// products such as `0.975 · 1000`.
pub(crate) fn percentile_ranks(b: usize, alpha: f64) -> (usize, usize) {
    const SLACK: f64 = 1e-9;
    let bf = b as f64;
    let lo = libm::floor(alpha / 2.0 * bf + SLACK) as usize;
    let hi = libm::ceil((1.0 - alpha / 2.0) * bf - SLACK) as usize;
    (lo.max(1), hi.min(b).max(1))
}

/// Percentile bootstrap interval for the grand mean. Iteration `i` uses
/// substream `i` of `config.seed`.
pub fn mean_ci_bootstrap(
    h: &MeasurementHierarchy,
    config: &BootstrapConfig,
) -> Result<ConfidenceInterval> {
    config.validate()?;
    let strategy = config.strategy.resolve(h.levels());
    let streams = RandomStreams::new(config.seed);
    let means = map_range(config.iterations, |i| {
        resampled_mean(h, &strategy, &mut streams.stream(i as u64))
    });
    let (lower, upper) = percentile_interval(&means, config.alpha)?;
    Ok(ConfidenceInterval {
        lower,
        upper,
        confidence: 1.0 - config.alpha,
        method: IntervalMethod::BootstrapPercentile,
        point_estimate: h.grand_mean(),
    })
}

/// Percentile bootstrap interval for `μ_new / μ_old`. Each iteration
/// resamples the new system, then the old one, independently from the same
/// substream.
pub fn ratio_ci_bootstrap(
    old: &MeasurementHierarchy,
    new: &MeasurementHierarchy,
    config: &BootstrapConfig,
) -> Result<ConfidenceInterval> {
    config.validate()?;
    if old.shape() != new.shape() {
        return Err(Error::ShapeMismatch {
            old: old.shape().to_vec(),
            new: new.shape().to_vec(),
        });
    }
    let strategy = config.strategy.resolve(old.levels());
    let streams = RandomStreams::new(config.seed);
    let ratios = map_range(config.iterations, |i| {
        let mut rng = streams.stream(i as u64);
        let n = resampled_mean(new, &strategy, &mut rng);
        let o = resampled_mean(old, &strategy, &mut rng);
        if o == 0.0 {
            Err(Error::DegenerateDenominator { iteration: i })
        } else {
            Ok(n / o)
        }
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let (lower, upper) = percentile_interval(&ratios, config.alpha)?;
    Ok(ConfidenceInterval {
        lower,
        upper,
        confidence: 1.0 - config.alpha,
        method: IntervalMethod::BootstrapPercentile,
        point_estimate: new.grand_mean() / old.grand_mean(),
    })
}
