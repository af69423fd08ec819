//! Argument definitions and the four commands.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use perfquant_core::bootstrap::StrategyPreset;
use perfquant_core::{
    coverage, false_alarm_rate, generate_hierarchical_normal, mean_ci_asymptotic,
    mean_ci_bootstrap, plan_experiment, ratio_ci_bootstrap, ratio_ci_fieller, threshold_decision,
    total_cost, BootstrapConfig, CostModel, CoverageSpec, Distribution, FalseAlarmSpec,
    HierarchicalNormalModel, MeasurementHierarchy, PlanOptions, RandomStreams, RatioMethod,
    VarianceDecomposition,
};
use serde::{Serialize, Serializer};

use crate::dataset::{drop_warmup, read_dataset};
use crate::report::{
    cells, cells_to_csv, AnalysisReport, DecisionBlock, DecompositionBlock, IntervalBlock,
    PlanBlock, SystemSummary, SystemsBlock,
};

/// Exit status of `compare` when the interval lies beyond the threshold.
pub const EXIT_DETECTED: u8 = 10;
/// Exit status for every analysis or input error.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "perfquant",
    version,
    about = "Quantify performance and performance change from nested benchmark measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grand mean, variance decomposition and a confidence interval for one system.
    Summarize(SummarizeArgs),
    /// Ratio of means new/old with a confidence interval and a threshold decision.
    /// Exits 10 when a change is detected.
    Compare(CompareArgs),
    /// Repetition counts per level that minimise the interval width for a cost.
    Plan(PlanArgs),
    /// Monte-Carlo false-alarm and coverage grids.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionArg {
    StudentT,
    Normal,
}

impl From<DistributionArg> for Distribution {
    fn from(d: DistributionArg) -> Self {
        match d {
            DistributionArg::StudentT => Distribution::StudentT,
            DistributionArg::Normal => Distribution::Normal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Rrr,
    Rrn,
    Rnn,
    Flat,
}

impl From<StrategyArg> for StrategyPreset {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Rrr => StrategyPreset::Rrr,
            StrategyArg::Rrn => StrategyPreset::Rrn,
            StrategyArg::Rnn => StrategyPreset::Rnn,
            StrategyArg::Flat => StrategyPreset::Flat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SummaryMethod {
    Asymptotic,
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioMethodArg {
    Fieller,
    Bootstrap,
}

/// A comma-separated list such as `50,100,100`.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|part| {
                part.trim()
                    .parse()
                    .map_err(|_| format!("'{}' is not a valid entry", part.trim()))
            })
            .collect::<Result<Vec<T>, String>>()
            .map(List)
    }
}

impl<T: Serialize> Serialize for List<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CommonArgs {
    /// One minus the confidence level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct BootstrapArgs {
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Rrr)]
    pub strategy: StrategyArg,
}

#[derive(Debug, Args, Serialize)]
pub struct SummarizeArgs {
    /// Measurements (.csv or .json).
    #[serde(skip)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SummaryMethod::Asymptotic)]
    pub method: SummaryMethod,
    #[arg(long, value_enum, default_value_t = DistributionArg::StudentT)]
    pub distribution: DistributionArg,
    /// Fraction of leading measurements to drop from every lowest-level group.
    #[arg(long, default_value_t = 0.0)]
    pub drop_warmup: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub bootstrap: BootstrapArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Measurements of the old system.
    #[serde(skip)]
    pub old: PathBuf,
    /// Measurements of the new system.
    #[serde(skip)]
    pub new: PathBuf,
    #[arg(long, value_enum, default_value_t = RatioMethodArg::Fieller)]
    pub method: RatioMethodArg,
    #[arg(long, value_enum, default_value_t = DistributionArg::StudentT)]
    pub distribution: DistributionArg,
    /// Smallest relative change of interest, e.g. 0.02.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.0)]
    pub drop_warmup: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub bootstrap: BootstrapArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct PlanArgs {
    /// Pilot measurements.
    #[serde(skip)]
    pub input: PathBuf,
    /// Costs c₁,…,cₙ of one new repetition at each level below the top, in
    /// units of one measurement.
    #[arg(long)]
    pub costs: List<f64>,
    /// Total cost available, in units of one measurement.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Use S² in place of T² for the variance components.
    #[arg(long)]
    pub assume_t_equals_s: bool,
    #[arg(long, default_value_t = 0.0)]
    pub drop_warmup: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(subcommand)]
    pub kind: SimulateKind,
}

#[derive(Debug, Subcommand)]
pub enum SimulateKind {
    /// Rate of detected changes between two samples of the same system.
    FalseAlarm(FalseAlarmArgs),
    /// Fraction of ratio intervals that contain the true ratio.
    Coverage(CoverageArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SimMethodArgs {
    #[arg(long, value_enum, default_value_t = RatioMethodArg::Fieller)]
    pub method: RatioMethodArg,
    #[arg(long, value_enum, default_value_t = DistributionArg::StudentT)]
    pub distribution: DistributionArg,
    /// Simulation iterations per grid cell.
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    /// Bootstrap replicates inside each iteration.
    #[arg(long, default_value_t = 1000)]
    pub bootstrap_iterations: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Rrr)]
    pub strategy: StrategyArg,
}

impl SimMethodArgs {
    fn method(&self) -> RatioMethod {
        match self.method {
            RatioMethodArg::Fieller => RatioMethod::Fieller(self.distribution.into()),
            RatioMethodArg::Bootstrap => RatioMethod::Bootstrap {
                iterations: self.bootstrap_iterations,
                strategy: self.strategy.into(),
            },
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    /// Standard deviation of each level, lowest level first.
    #[arg(long)]
    pub sigmas: Option<List<f64>>,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct FalseAlarmArgs {
    /// Measurements to draw top-level groups from. Without it, a source is
    /// generated from --sigmas, --mu and --shape.
    #[arg(long)]
    #[serde(skip)]
    pub source: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Shape of the generated source, highest level first.
    #[arg(long)]
    pub shape: Option<List<usize>>,
    /// Top-level groups drawn per system, one cell each.
    #[arg(long, default_value = "50")]
    pub binaries: List<usize>,
    #[arg(long, default_value = "0")]
    pub thresholds: List<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimMethodArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CoverageArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// True ratio of the new mean to the old.
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    /// Shape of each simulated system, highest level first. Repeat for
    /// several cells.
    #[arg(long, required = true)]
    pub shape: Vec<List<usize>>,
    /// Replaces the top-level count of every --shape, one cell per entry.
    #[arg(long)]
    pub binaries: Option<List<usize>>,
    /// Analyze as if the top level did not exist.
    #[arg(long)]
    pub ignore_top_level: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimMethodArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

/// A finished command: what to print and how to exit.
#[derive(Debug)]
pub struct Outcome {
    pub report: AnalysisReport,
    pub output: String,
    pub exit_code: u8,
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Summarize(a) => summarize(&a),
        Command::Compare(a) => compare(&a),
        Command::Plan(a) => plan(&a),
        Command::Simulate(SimulateArgs {
            kind: SimulateKind::FalseAlarm(a),
        }) => simulate_false_alarm(&a),
        Command::Simulate(SimulateArgs {
            kind: SimulateKind::Coverage(a),
        }) => simulate_coverage(&a),
    }
}

fn config<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn load(path: &Path, warmup: f64) -> Result<MeasurementHierarchy> {
    let h = read_dataset(path).with_context(|| format!("reading {}", path.display()))?;
    drop_warmup(&h, warmup).context("--drop-warmup")
}

fn json_only(report: AnalysisReport, common: &CommonArgs, exit_code: u8) -> Result<Outcome> {
    if common.format == OutputFormat::Csv {
        bail!("--format csv is only available for simulate");
    }
    Ok(Outcome {
        output: report.to_json(),
        report,
        exit_code,
    })
}

fn bootstrap_config(b: &BootstrapArgs, common: &CommonArgs) -> BootstrapConfig {
    BootstrapConfig {
        iterations: b.iterations,
        alpha: common.alpha,
        strategy: b.strategy.into(),
        seed: common.seed,
    }
}

fn require_top_repetitions(h: &MeasurementHierarchy) -> Result<()> {
    if h.count(h.levels()) < 2 {
        bail!(
            "only one repetition at the top level: no confidence interval can be computed, \
             and the bootstrap is not available either; rerun with at least two top-level repetitions"
        );
    }
    Ok(())
}

/// Decomposition, or a warning saying why it is unavailable.
fn decompose(
    h: &MeasurementHierarchy,
    label: &str,
    warnings: &mut Vec<String>,
) -> Option<VarianceDecomposition> {
    match VarianceDecomposition::from_hierarchy(h) {
        Ok(d) => {
            for level in &d.nonpositive_levels {
                warnings.push(format!(
                    "{label}T² at level {level} is not positive: that level adds no detectable variation"
                ));
            }
            if d.s_squared.last() == Some(&0.0) {
                warnings.push(format!(
                    "{label}zero variance between top-level means: the interval has zero width"
                ));
            }
            Some(d)
        }
        Err(e) => {
            warnings.push(format!("{label}variance decomposition unavailable: {e}"));
            None
        }
    }
}

pub fn summarize(a: &SummarizeArgs) -> Result<Outcome> {
    let h = load(&a.input, a.drop_warmup)?;
    require_top_repetitions(&h)?;
    let mut report = AnalysisReport::new("summarize", config(a), a.common.seed);
    let d = decompose(&h, "", &mut report.warnings);
    let ci = match a.method {
        SummaryMethod::Asymptotic => mean_ci_asymptotic(&h, a.common.alpha, a.distribution.into())?,
        SummaryMethod::Bootstrap => {
            mean_ci_bootstrap(&h, &bootstrap_config(&a.bootstrap, &a.common))?
        }
    };
    report.input_shape = Some(h.shape().to_vec());
    report.grand_mean = Some(h.grand_mean());
    report.variance_decomposition = d.as_ref().map(DecompositionBlock::from);
    report.interval = Some(IntervalBlock::from(&ci));
    json_only(report, &a.common, 0)
}

pub fn compare(a: &CompareArgs) -> Result<Outcome> {
    let old = load(&a.old, a.drop_warmup)?;
    let new = load(&a.new, a.drop_warmup)?;
    if old.shape() != new.shape() {
        bail!(
            "old and new systems have different shapes: {:?} and {:?}",
            old.shape(),
            new.shape()
        );
    }
    require_top_repetitions(&old)?;
    let mut report = AnalysisReport::new("compare", config(a), a.common.seed);
    let d_old = decompose(&old, "old: ", &mut report.warnings);
    let d_new = decompose(&new, "new: ", &mut report.warnings);
    let ci = match a.method {
        RatioMethodArg::Fieller => {
            ratio_ci_fieller(&old, &new, a.common.alpha, a.distribution.into())?
        }
        RatioMethodArg::Bootstrap => {
            ratio_ci_bootstrap(&old, &new, &bootstrap_config(&a.bootstrap, &a.common))?
        }
    };
    let decision = threshold_decision(&ci, a.threshold)?;
    report.input_shape = Some(old.shape().to_vec());
    report.systems = Some(SystemsBlock {
        old: SystemSummary {
            grand_mean: old.grand_mean(),
            variance_decomposition: d_old.as_ref().map(DecompositionBlock::from),
        },
        new: SystemSummary {
            grand_mean: new.grand_mean(),
            variance_decomposition: d_new.as_ref().map(DecompositionBlock::from),
        },
    });
    report.interval = Some(IntervalBlock::from(&ci));
    report.decision = Some(DecisionBlock::from(&decision));
    let code = if decision.detected { EXIT_DETECTED } else { 0 };
    json_only(report, &a.common, code)
}

pub fn plan(a: &PlanArgs) -> Result<Outcome> {
    let pilot = load(&a.input, a.drop_warmup)?;
    let needed = pilot.levels() - 1;
    if a.costs.0.len() != needed {
        bail!(
            "--costs needs one entry per level below the top ({needed} for a pilot of shape {:?}), got {}",
            pilot.shape(),
            a.costs.0.len()
        );
    }
    let mut report = AnalysisReport::new("plan", config(a), a.common.seed);
    let d = decompose(&pilot, "", &mut report.warnings);
    let costs = CostModel::new(a.costs.0.clone(), a.budget)?;
    let options = PlanOptions {
        alpha: a.common.alpha,
        assume_t_equals_s: a.assume_t_equals_s,
    };
    let plan = plan_experiment(&pilot, &costs, &options)?;
    let total = match plan.top_count {
        Some(top) => {
            let mut counts = plan.counts.clone();
            counts.push(top);
            Some(total_cost(&counts, &plan.costs)?)
        }
        None => None,
    };
    report.input_shape = Some(pilot.shape().to_vec());
    report.grand_mean = Some(pilot.grand_mean());
    report.variance_decomposition = d.as_ref().map(DecompositionBlock::from);
    report.plan = Some(PlanBlock::new(&plan, total));
    report.warnings.extend(plan.warnings.iter().cloned());
    json_only(report, &a.common, 0)
}

fn model(m: &ModelArgs) -> Result<HierarchicalNormalModel> {
    let Some(sigmas) = &m.sigmas else {
        bail!("--sigmas is required");
    };
    Ok(HierarchicalNormalModel::new(m.mu, sigmas.0.clone())?)
}

fn simulation_outcome(
    mut report: AnalysisReport,
    sim: &perfquant_core::SimulationReport,
    common: &CommonArgs,
) -> Outcome {
    let grid = cells(sim);
    for c in &grid {
        if c.failures > 0 {
            report.warnings.push(format!(
                "cell {:?} at {}: {} of {} iterations produced no interval and were excluded",
                c.shape, c.parameter, c.failures, c.iterations
            ));
        }
    }
    let output = match common.format {
        OutputFormat::Json => {
            report.simulation = Some(grid);
            report.to_json()
        }
        OutputFormat::Csv => {
            let csv = cells_to_csv(&grid);
            report.simulation = Some(grid);
            csv
        }
    };
    Outcome {
        report,
        output,
        exit_code: 0,
    }
}

/// Generated sources use substream 0 of the seed; the simulation itself
/// uses child family 1.
pub fn simulate_false_alarm(a: &FalseAlarmArgs) -> Result<Outcome> {
    let streams = RandomStreams::new(a.common.seed);
    let source = match (&a.source, &a.shape) {
        (Some(path), None) => {
            if a.model.sigmas.is_some() {
                bail!("--source and --sigmas are mutually exclusive");
            }
            read_dataset(path).with_context(|| format!("reading {}", path.display()))?
        }
        (None, Some(shape)) => {
            generate_hierarchical_normal(&model(&a.model)?, &shape.0, &mut streams.stream(0))?
        }
        (Some(_), Some(_)) => bail!("--source and --shape are mutually exclusive"),
        (None, None) => bail!("give either --source or --sigmas with --shape"),
    };
    let spec = FalseAlarmSpec {
        binaries: a.binaries.0.clone(),
        thresholds: a.thresholds.0.clone(),
        iterations: a.sim.iterations,
        alpha: a.common.alpha,
        method: a.sim.method(),
        seed: streams.child(1).seed(),
    };
    let sim = false_alarm_rate(&source, &spec)?;
    let mut report = AnalysisReport::new("simulate false-alarm", config(a), a.common.seed);
    report.input_shape = Some(source.shape().to_vec());
    Ok(simulation_outcome(report, &sim, &a.common))
}

pub fn simulate_coverage(a: &CoverageArgs) -> Result<Outcome> {
    let shapes: Vec<Vec<usize>> = match &a.binaries {
        None => a.shape.iter().map(|s| s.0.clone()).collect(),
        Some(b) => a
            .shape
            .iter()
            .flat_map(|s| {
                b.0.iter().map(move |&top| {
                    let mut shape = s.0.clone();
                    shape[0] = top;
                    shape
                })
            })
            .collect(),
    };
    let spec = CoverageSpec {
        model_old: model(&a.model)?,
        theta: a.theta,
        method: a.sim.method(),
        shapes,
        iterations: a.sim.iterations,
        alpha: a.common.alpha,
        seed: a.common.seed,
        ignore_top_level: a.ignore_top_level,
    };
    let sim = coverage(&spec)?;
    let report = AnalysisReport::new("simulate coverage", config(a), a.common.seed);
    Ok(simulation_outcome(report, &sim, &a.common))
}
