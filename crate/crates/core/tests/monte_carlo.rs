//! Statistical behaviour checked by simulation. Every seed is fixed.

mod common;

use common::*;
use perfquant_core::{
    coverage, generate_hierarchical_normal, mean_ci_bootstrap, ratio_ci_bootstrap,
    ratio_ci_fieller, BootstrapConfig, CoverageSpec, Distribution, HierarchicalNormalModel,
    MeasurementHierarchy, RandomStreams, RatioMethod, SimulationReport,
};

fn estimates(r: &SimulationReport) -> Vec<f64> {
    r.cells.iter().map(|c| c.estimate).collect()
}

#[test]
fn variance_estimators_are_unbiased() {
    check_estimator_unbiasedness(7, 20_000).unwrap();
}

#[test]
fn bootstrap_mean_interval_has_nominal_coverage() {
    let model = HierarchicalNormalModel::new(10.0, vec![0.5, 0.5, 2.0]).unwrap();
    let streams = RandomStreams::new(3);
    let trials = 1000;
    let covered = (0..trials)
        .filter(|&i| {
            let data =
                generate_hierarchical_normal(&model, &[100, 2, 2], &mut streams.stream(i)).unwrap();
            let cfg = BootstrapConfig {
                seed: i,
                ..Default::default()
            };
            mean_ci_bootstrap(&data, &cfg).unwrap().contains(10.0)
        })
        .count();
    let rate = covered as f64 / trials as f64;
    assert!((rate - 0.95).abs() <= 0.02, "coverage {rate}");
}

#[test]
fn coverage_does_not_grow_with_binaries() {
    let report = profile_coverage(&[3, 10, 50], 20, 2000, 5);
    for w in report.cells.windows(2) {
        let se = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        assert!(
            w[1].estimate <= w[0].estimate + 2.0 * se,
            "{:?}",
            estimates(&report)
        );
    }
}

#[test]
fn normal_quantiles_never_cover_more_than_t() {
    let spec = |d| CoverageSpec {
        model_old: profile_model(),
        theta: 0.95,
        method: RatioMethod::Fieller(d),
        shapes: vec![vec![3, 10, 10], vec![10, 10, 10]],
        iterations: 2000,
        alpha: 0.05,
        seed: 9,
        ignore_top_level: false,
    };
    let t = coverage(&spec(Distribution::StudentT)).unwrap();
    let z = coverage(&spec(Distribution::Normal)).unwrap();
    for (a, b) in t.cells.iter().zip(&z.cells) {
        assert!(
            b.estimate <= a.estimate,
            "normal {} > t {}",
            b.estimate,
            a.estimate
        );
    }
    // Three binaries leave two degrees of freedom, where the gap is large.
    assert!(t.cells[0].estimate - z.cells[0].estimate > 0.05);
}

#[test]
fn ignoring_binaries_loses_coverage_as_executions_grow() {
    let report = coverage(&CoverageSpec {
        model_old: profile_model(),
        theta: 0.95,
        method: RatioMethod::Fieller(Distribution::StudentT),
        shapes: vec![vec![5, 2, 10], vec![5, 8, 10], vec![5, 32, 10]],
        iterations: 2000,
        alpha: 0.05,
        seed: 13,
        ignore_top_level: true,
    })
    .unwrap();
    let e = estimates(&report);
    for w in report.cells.windows(2) {
        let se = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        assert!(w[1].estimate < w[0].estimate - 2.0 * se, "{e:?}");
    }
    assert!(e[0] < 0.95, "{e:?}");
}

#[test]
fn doubled_system_ratio_contains_two() {
    let (old, _) = two_systems();
    let doubled: Vec<f64> = old.values().iter().map(|x| 2.0 * x).collect();
    let new = MeasurementHierarchy::new(old.shape(), &doubled, None).unwrap();
    let boot = ratio_ci_bootstrap(&old, &new, &BootstrapConfig::default()).unwrap();
    assert!(boot.contains(2.0), "{boot:?}");
    assert_eq!(boot.point_estimate, 2.0);
    let f = ratio_ci_fieller(&old, &new, 0.05, Distribution::StudentT).unwrap();
    assert!(f.contains(2.0), "{f:?}");
}

#[test]
fn worked_bootstrap_ratio_is_pinned() {
    let (old, new) = two_systems();
    let ci = ratio_ci_bootstrap(&old, &new, &BootstrapConfig::default()).unwrap();
    // Regression value for seed 0, 1000 RRR iterations.
    assert_eq!(
        (ci.lower, ci.upper),
        (0.3275862068965517, 1.0093457943925233)
    );
    assert!(ci.contains(ci.point_estimate));
}
