//! Fixtures, independent reference computations and reusable checks shared
//! by the integration suites. The oracles never call the code under test.

#![allow(dead_code)]

use perfquant_core::MeasurementHierarchy;

pub const THREE_LEVEL: [f64; 12] = [9., 5., 8., 3., 10., 6., 7., 11., 1., 12., 2., 4.];
pub const OLD_SYSTEM: [f64; 12] = [9., 11., 5., 6., 16., 13., 12., 8., 15., 7., 10., 14.];
pub const NEW_SYSTEM: [f64; 12] = [10., 12., 6., 7., 9., 1., 11., 4., 8., 5., 3., 2.];

/// Relative standard deviations of a compiled benchmark, lowest level first
/// (measurement, execution, compilation).
pub const PROFILE_SIGMAS: [f64; 3] = [0.046, 0.067, 0.041];

pub fn h(shape: &[usize], values: &[f64]) -> MeasurementHierarchy {
    MeasurementHierarchy::new(shape, values, None).unwrap()
}

pub fn three_level() -> MeasurementHierarchy {
    h(&[3, 2, 2], &THREE_LEVEL)
}

pub fn two_systems() -> (MeasurementHierarchy, MeasurementHierarchy) {
    (h(&[3, 2, 2], &OLD_SYSTEM), h(&[3, 2, 2], &NEW_SYSTEM))
}

pub fn m(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn v(xs: &[f64]) -> f64 {
    let mu = m(xs);
    xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// `S²₁, S²₂, S²₃` of a three-level array by explicit composition of `M` and
/// `V` in the orders MMV, MVM and VMM.
pub fn three_level_oracle(values: &[f64], b: usize, e: usize, n: usize) -> [f64; 3] {
    let y = |i: usize, j: usize, k: usize| values[(i * e + j) * n + k];
    let exec = |i: usize, j: usize| (0..n).map(|k| y(i, j, k)).collect::<Vec<_>>();
    let s1 = m(&(0..b)
        .map(|i| m(&(0..e).map(|j| v(&exec(i, j))).collect::<Vec<_>>()))
        .collect::<Vec<_>>());
    let s2 = m(&(0..b)
        .map(|i| v(&(0..e).map(|j| m(&exec(i, j))).collect::<Vec<_>>()))
        .collect::<Vec<_>>());
    let s3 = v(&(0..b)
        .map(|i| m(&(0..e).map(|j| m(&exec(i, j))).collect::<Vec<_>>()))
        .collect::<Vec<_>>());
    [s1, s2, s3]
}

/// Student-t quantile by bisection on the CDF written through statrs'
/// regularized incomplete beta.
pub fn t_quantile_oracle(p: f64, dof: f64) -> f64 {
    use statrs::function::beta::beta_reg;
    let cdf = |t: f64| {
        let tail = 0.5 * beta_reg(dof / 2.0, 0.5, dof / (dof + t * t));
        if t >= 0.0 {
            1.0 - tail
        } else {
            tail
        }
    };
    let (mut lo, mut hi) = (-1e4, 1e4);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fieller limits straight from the textbook quadratic, without the
/// rearranged discriminant.
pub fn fieller_oracle(o: f64, n: f64, vo: f64, vn: f64, t2: f64) -> (f64, f64) {
    let den = o * o - t2 * vo;
    let disc = (o * n).powi(2) - den * (n * n - t2 * vn);
    ((o * n - disc.sqrt()) / den, (o * n + disc.sqrt()) / den)
}

/// Pilot data whose `T²` estimates are exactly `t2` (lowest level first),
/// with grand mean `mu`, on a 2×2×2 design: `±c` within executions, `±b`
/// between executions, `±a` between binaries give `S² = (2c², 2b², 2a²)`.
pub fn exact_pilot(mu: f64, t2: [f64; 3]) -> MeasurementHierarchy {
    let c2 = t2[0] / 2.0;
    let b2 = (t2[1] + c2) / 2.0;
    let a2 = (t2[2] + b2) / 2.0;
    let (a, b, c) = (a2.sqrt(), b2.sqrt(), c2.sqrt());
    let mut values = Vec::new();
    for sa in [-1.0, 1.0] {
        for sb in [-1.0, 1.0] {
            for sc in [-1.0, 1.0] {
                values.push(mu + sa * a + sb * b + sc * c);
            }
        }
    }
    h(&[2, 2, 2], &values)
}

use perfquant_core::bootstrap::StrategyPreset;
use perfquant_core::planner::{optimal_counts_real, precision_objective_real, total_cost_real};
use perfquant_core::{
    mean_ci_bootstrap, ratio_ci_fieller, resample, BootstrapConfig, CostModel, Distribution,
    ResamplingStrategy,
};

pub type Check = Result<(), String>;

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

/// Collapsing any level leaves the grand mean bit-identical.
pub fn check_collapse_preserves_mean(h: &MeasurementHierarchy) -> Check {
    for level in 2..=h.levels() {
        let c = h.collapse_level(level).unwrap();
        ensure(c.grand_mean() == h.grand_mean(), || {
            format!("collapse {level}: {} vs {}", c.grand_mean(), h.grand_mean())
        })?;
        ensure(c.values() == h.values(), || {
            format!("collapse {level} reordered values")
        })?;
    }
    Ok(())
}

/// Equal inputs and seed give equal intervals; every replicate keeps the
/// shape and draws only original values.
pub fn check_bootstrap_determinism_and_support(h: &MeasurementHierarchy, seed: u64) -> Check {
    let cfg = BootstrapConfig {
        iterations: 200,
        seed,
        ..Default::default()
    };
    let a = mean_ci_bootstrap(h, &cfg).unwrap();
    let b = mean_ci_bootstrap(h, &cfg).unwrap();
    ensure(a == b, || format!("nondeterministic: {a:?} vs {b:?}"))?;
    let streams = perfquant_core::RandomStreams::new(seed);
    for preset in [
        StrategyPreset::Rrr,
        StrategyPreset::Rrn,
        StrategyPreset::Rnn,
        StrategyPreset::Flat,
    ] {
        let r = resample(h, &preset.resolve(h.levels()), &mut streams.stream(7));
        ensure(r.shape() == h.shape(), || {
            format!("{preset:?} changed shape")
        })?;
        ensure(r.values().iter().all(|x| h.values().contains(x)), || {
            format!("{preset:?} produced a value outside the data")
        })?;
    }
    // With RNN every top-level group is an original sub-tree verbatim.
    let r = resample(
        h,
        &ResamplingStrategy::rnn(h.levels()),
        &mut streams.stream(8),
    );
    for j in 0..h.shape()[0] {
        let g = r.top_group(j);
        ensure((0..h.shape()[0]).any(|k| h.top_group(k) == g), || {
            format!("RNN group {j} is not an original sub-tree")
        })?;
    }
    Ok(())
}

/// Scaling both systems leaves the Fieller interval unchanged; scaling only
/// the new system by `a` scales both limits by `a`.
pub fn check_fieller_scale_equivariance(
    old: &MeasurementHierarchy,
    new: &MeasurementHierarchy,
    a: f64,
) -> Check {
    let scale = |x: &MeasurementHierarchy, k: f64| {
        let vals: Vec<f64> = x.values().iter().map(|v| v * k).collect();
        MeasurementHierarchy::new(x.shape(), &vals, None).unwrap()
    };
    let base = match ratio_ci_fieller(old, new, 0.05, Distribution::StudentT) {
        Ok(ci) => ci,
        Err(_) => return Ok(()),
    };
    let both = ratio_ci_fieller(&scale(old, a), &scale(new, a), 0.05, Distribution::StudentT)
        .map_err(|e| format!("scaled both: {e}"))?;
    ensure(
        close(both.lower, base.lower, 1e-9) && close(both.upper, base.upper, 1e-9),
        || format!("both scaled by {a}: {both:?} vs {base:?}"),
    )?;
    let only_new = ratio_ci_fieller(old, &scale(new, a), 0.05, Distribution::StudentT)
        .map_err(|e| format!("scaled new: {e}"))?;
    ensure(
        close(only_new.lower, a * base.lower, 1e-9) && close(only_new.upper, a * base.upper, 1e-9),
        || format!("new scaled by {a}: {only_new:?} vs {base:?}"),
    )
}

/// The unrounded optimal counts beat every neighbour that doubles or halves
/// one count, with the top-level count adjusted to keep the total cost.
pub fn check_local_optimality(variances: &[f64], costs: &[f64]) -> Check {
    let model = CostModel::new(costs.to_vec(), None).unwrap();
    let opt = optimal_counts_real(variances, &model).unwrap();
    let budget = 1.0e6;
    let objective = |lower: &[f64]| {
        let unit = total_cost_real(&[lower, &[1.0]].concat(), costs);
        let mut all = lower.to_vec();
        all.push(budget / unit);
        precision_objective_real(&all, variances)
    };
    let best = objective(&opt);
    for i in 0..opt.len() {
        for factor in [2.0, 0.5] {
            let mut other = opt.clone();
            other[i] *= factor;
            let f = objective(&other);
            ensure(best <= f * (1.0 + 1e-12), || {
                format!("counts {other:?} beat optimum {opt:?}: {f} < {best}")
            })?;
        }
    }
    Ok(())
}

use perfquant_core::{
    coverage, false_alarm_rate, generate_hierarchical_normal, CoverageSpec, FalseAlarmSpec,
    HierarchicalNormalModel, RandomStreams, RatioMethod, SimulationReport,
};

/// Mean of each T² over many generated data sets lies within four standard
/// errors of the true component variance.
pub fn check_estimator_unbiasedness(seed: u64, reps: usize) -> Check {
    let sigmas = vec![1.0, 2.0, 3.0];
    let model = HierarchicalNormalModel::new(5.0, sigmas.clone()).unwrap();
    let streams = RandomStreams::new(seed);
    let mut draws = vec![Vec::with_capacity(reps); sigmas.len()];
    for r in 0..reps {
        let data = generate_hierarchical_normal(&model, &[4, 3, 5], &mut streams.stream(r as u64))
            .unwrap();
        let t = perfquant_core::VarianceDecomposition::from_hierarchy(&data)
            .unwrap()
            .t_squared;
        for (d, x) in draws.iter_mut().zip(t) {
            d.push(x);
        }
    }
    for (i, d) in draws.iter().enumerate() {
        let se = (v(d) / reps as f64).sqrt();
        let target = sigmas[i] * sigmas[i];
        ensure((m(d) - target).abs() <= 4.0 * se, || {
            format!("level {}: mean T² {} vs {} (se {se})", i + 1, m(d), target)
        })?;
    }
    Ok(())
}

pub fn profile_model() -> HierarchicalNormalModel {
    HierarchicalNormalModel::new(1.0, PROFILE_SIGMAS.to_vec()).unwrap()
}

pub fn profile_coverage(
    binaries: &[usize],
    inner: usize,
    iterations: usize,
    seed: u64,
) -> SimulationReport {
    coverage(&CoverageSpec {
        model_old: profile_model(),
        theta: 0.95,
        method: RatioMethod::Fieller(Distribution::StudentT),
        shapes: binaries.iter().map(|&b| vec![b, inner, inner]).collect(),
        iterations,
        alpha: 0.05,
        seed,
        ignore_top_level: false,
    })
    .unwrap()
}

pub fn profile_false_alarm(binaries: usize, iterations: usize, seed: u64) -> SimulationReport {
    let streams = RandomStreams::new(seed);
    let source =
        generate_hierarchical_normal(&profile_model(), &[500, 10, 10], &mut streams.stream(0))
            .unwrap();
    false_alarm_rate(
        &source,
        &FalseAlarmSpec {
            binaries: vec![binaries],
            thresholds: vec![0.0],
            iterations,
            alpha: 0.05,
            method: RatioMethod::Fieller(Distribution::StudentT),
            seed: streams.child(1).seed(),
        },
    )
    .unwrap()
}
