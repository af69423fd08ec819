//! The JSON analysis report and its CSV rendering for simulation grids.
//!
//! Every key is always present; blocks that do not apply to a command are
//! `null`. Floats are written in shortest round-trip form.

use perfquant_core::{
    ChangeDecision, ConfidenceInterval, ExperimentPlan, SimulationCell, SimulationReport,
    VarianceDecomposition,
};
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub command: String,
    pub config: Value,
    pub input_shape: Option<Vec<usize>>,
    pub grand_mean: Option<f64>,
    pub variance_decomposition: Option<DecompositionBlock>,
    /// Per-system summaries for `compare`.
    pub systems: Option<SystemsBlock>,
    pub interval: Option<IntervalBlock>,
    pub decision: Option<DecisionBlock>,
    pub plan: Option<PlanBlock>,
    pub simulation: Option<Vec<CellBlock>>,
    pub warnings: Vec<String>,
    pub seed: u64,
}

impl AnalysisReport {
    pub fn new(command: &str, config: Value, seed: u64) -> Self {
        AnalysisReport {
            command: command.to_string(),
            config,
            input_shape: None,
            grand_mean: None,
            variance_decomposition: None,
            systems: None,
            interval: None,
            decision: None,
            plan: None,
            simulation: None,
            warnings: Vec::new(),
            seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionBlock {
    pub s_squared: Vec<f64>,
    pub t_squared: Vec<f64>,
    pub nonpositive_levels: Vec<usize>,
}

impl From<&VarianceDecomposition> for DecompositionBlock {
    fn from(d: &VarianceDecomposition) -> Self {
        DecompositionBlock {
            s_squared: d.s_squared.clone(),
            t_squared: d.t_squared.clone(),
            nonpositive_levels: d.nonpositive_levels.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSummary {
    pub grand_mean: f64,
    pub variance_decomposition: Option<DecompositionBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemsBlock {
    pub old: SystemSummary,
    pub new: SystemSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalBlock {
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
    pub method: String,
    pub point_estimate: f64,
}

impl From<&ConfidenceInterval> for IntervalBlock {
    fn from(ci: &ConfidenceInterval) -> Self {
        IntervalBlock {
            lower: ci.lower,
            upper: ci.upper,
            confidence: ci.confidence,
            method: ci.method.as_str().to_string(),
            point_estimate: ci.point_estimate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionBlock {
    pub detected: bool,
    pub threshold: f64,
}

impl From<&ChangeDecision> for DecisionBlock {
    fn from(d: &ChangeDecision) -> Self {
        DecisionBlock {
            detected: d.detected,
            threshold: d.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanBlock {
    /// `n₁ … nₙ` of the retained levels, lowest first.
    pub counts: Vec<usize>,
    pub top_count: Option<usize>,
    pub dropped_levels: Vec<usize>,
    pub predicted_halfwidth: Option<f64>,
    pub retained_costs: Vec<f64>,
    pub retained_t_squared: Vec<f64>,
    pub total_cost: Option<f64>,
}

impl PlanBlock {
    pub fn new(plan: &ExperimentPlan, total_cost: Option<f64>) -> Self {
        PlanBlock {
            counts: plan.counts.clone(),
            top_count: plan.top_count,
            dropped_levels: plan.dropped_levels.clone(),
            predicted_halfwidth: plan.predicted_halfwidth,
            retained_costs: plan.costs.costs.clone(),
            retained_t_squared: plan.variances.t_squared.clone(),
            total_cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellBlock {
    pub kind: String,
    pub shape: Vec<usize>,
    /// Threshold for false-alarm cells, `θ` for coverage cells.
    pub parameter: f64,
    pub method: String,
    pub iterations: usize,
    pub valid: usize,
    pub failures: usize,
    pub estimate: f64,
    pub std_error: f64,
}

impl CellBlock {
    fn new(kind: &str, c: &SimulationCell) -> Self {
        CellBlock {
            kind: kind.to_string(),
            shape: c.shape.clone(),
            parameter: c.parameter,
            method: c.method.clone(),
            iterations: c.iterations,
            valid: c.valid,
            failures: c.failures,
            estimate: c.estimate,
            std_error: c.std_error,
        }
    }
}

pub fn cells(report: &SimulationReport) -> Vec<CellBlock> {
    let kind = report.kind.as_str();
    report
        .cells
        .iter()
        .map(|c| CellBlock::new(kind, c))
        .collect()
}

pub fn cells_to_csv(cells: &[CellBlock]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "kind",
        "shape",
        "parameter",
        "method",
        "iterations",
        "valid",
        "failures",
        "estimate",
        "std_error",
    ])
    .expect("write to memory");
    for c in cells {
        let shape: Vec<String> = c.shape.iter().map(usize::to_string).collect();
        w.write_record([
            c.kind.clone(),
            shape.join("x"),
            c.parameter.to_string(),
            c.method.clone(),
            c.iterations.to_string(),
            c.valid.to_string(),
            c.failures.to_string(),
            c.estimate.to_string(),
            c.std_error.to_string(),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}
