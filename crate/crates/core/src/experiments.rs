//! Study drivers: variant comparison, CDR penalty sweep, and load-scaling
//! scenarios, each with a CSV rendering. Sweep points are independent and
//! run in parallel; rows come back ordered by parameter value.

use crate::case::{scale_loads, CaseError, SystemCase};
use crate::model::{assemble_model, ModelError, ModelVariant};
use crate::mps::fmt_num;
use crate::schedule::extract_schedule;
use crate::solver::{solve_milp, MilpStatus};
use crate::topology::{build_contingency_set, TopologyError};
use rayon::prelude::*;
use std::fmt;
use std::time::Instant;

/// How one solve ended: a solver status, or a numerical failure message.
#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Solved(MilpStatus),
    Error(String),
}

impl RunStatus {
    /// True when the run produced a usable schedule.
    pub fn feasible(&self) -> bool {
        matches!(self, RunStatus::Solved(s) if s.has_solution())
    }

    pub fn label(&self) -> &str {
        match self {
            RunStatus::Solved(s) => s.as_str(),
            RunStatus::Error(_) => "error",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One line of the four-variant comparison table.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub variant: ModelVariant,
    pub status: RunStatus,
    pub objective: Option<f64>,
    pub achieved_gap: Option<f64>,
    pub wall_time_s: f64,
    /// Total curtailment over line-outage contingencies, `None` for
    /// variants without CDR.
    pub cdr_line_mw: Option<f64>,
    /// Total curtailment over generator-outage contingencies, `None` when
    /// the variant models none.
    pub cdr_gen_mw: Option<f64>,
}

/// One line of a penalty sweep.
#[derive(Debug, Clone)]
pub struct PenaltyRow {
    pub penalty: f64,
    pub status: RunStatus,
    pub objective: Option<f64>,
    pub achieved_gap: Option<f64>,
    pub cdr_line_mw: Option<f64>,
    pub cdr_gen_mw: Option<f64>,
}

/// One line of a load-scaling sweep.
#[derive(Debug, Clone)]
pub struct LoadRow {
    pub factor: f64,
    pub variant: ModelVariant,
    pub status: RunStatus,
    pub objective: Option<f64>,
    pub cdr_line_mw: Option<f64>,
    pub cdr_gen_mw: Option<f64>,
}

impl LoadRow {
    pub fn feasible(&self) -> bool {
        self.status.feasible()
    }
}

#[derive(Debug)]
pub enum ExperimentError {
    NotACdrVariant(ModelVariant),
    BadParameter { name: &'static str, value: f64 },
    Topology(TopologyError),
    Model(ModelError),
    Case(CaseError),
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::NotACdrVariant(v) => {
                write!(f, "penalty sweeps require a CDR variant, got {v}")
            }
            ExperimentError::BadParameter { name, value } => {
                write!(f, "{name} must be finite and nonnegative, got {value}")
            }
            ExperimentError::Topology(e) => write!(f, "{e}"),
            ExperimentError::Model(e) => write!(f, "{e}"),
            ExperimentError::Case(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<TopologyError> for ExperimentError {
    fn from(e: TopologyError) -> Self {
        ExperimentError::Topology(e)
    }
}

impl From<ModelError> for ExperimentError {
    fn from(e: ModelError) -> Self {
        ExperimentError::Model(e)
    }
}

impl From<CaseError> for ExperimentError {
    fn from(e: CaseError) -> Self {
        ExperimentError::Case(e)
    }
}

struct RunOutcome {
    status: RunStatus,
    objective: Option<f64>,
    achieved_gap: Option<f64>,
    cdr_line_mw: Option<f64>,
    cdr_gen_mw: Option<f64>,
    wall_time_s: f64,
}

fn run_one(
    case: &SystemCase,
    variant: ModelVariant,
    gap_target: f64,
    time_limit: Option<f64>,
) -> Result<RunOutcome, ExperimentError> {
    let start = Instant::now();
    let ctgs =
        build_contingency_set(case, true, variant.includes_generator_contingencies())?;
    let model = assemble_model(case, &ctgs, variant)?;
    let mut outcome = match solve_milp(&model, gap_target, time_limit) {
        Err(e) => RunOutcome {
            status: RunStatus::Error(e.to_string()),
            objective: None,
            achieved_gap: None,
            cdr_line_mw: None,
            cdr_gen_mw: None,
            wall_time_s: 0.0,
        },
        Ok(milp) if milp.status.has_solution() => {
            let schedule =
                extract_schedule(case, model.index.as_ref().unwrap(), &milp);
            let (line_mw, gen_mw) = schedule.cdr_totals();
            RunOutcome {
                status: RunStatus::Solved(milp.status),
                objective: Some(milp.objective),
                achieved_gap: schedule.achieved_gap,
                cdr_line_mw: variant.uses_cdr().then_some(line_mw),
                cdr_gen_mw: (variant.uses_cdr()
                    && variant.includes_generator_contingencies())
                .then_some(gen_mw),
                wall_time_s: 0.0,
            }
        }
        Ok(milp) => RunOutcome {
            status: RunStatus::Solved(milp.status),
            objective: None,
            achieved_gap: None,
            cdr_line_mw: None,
            cdr_gen_mw: None,
            wall_time_s: 0.0,
        },
    };
    outcome.wall_time_s = start.elapsed().as_secs_f64();
    Ok(outcome)
}

/// Solves all four variants at the same gap target. Infeasibility is data
/// and lands in the row; only malformed inputs error.
pub fn run_variant_comparison(
    case: &SystemCase,
    gap_target: f64,
    time_limit: Option<f64>,
) -> Result<Vec<ComparisonRow>, ExperimentError> {
    ModelVariant::ALL
        .par_iter()
        .map(|&variant| {
            let run = run_one(case, variant, gap_target, time_limit)?;
            Ok(ComparisonRow {
                variant,
                status: run.status,
                objective: run.objective,
                achieved_gap: run.achieved_gap,
                wall_time_s: run.wall_time_s,
                cdr_line_mw: run.cdr_line_mw,
                cdr_gen_mw: run.cdr_gen_mw,
            })
        })
        .collect()
}

/// Solves `variant` once per penalty, each time overriding every bus's CDR
/// penalty with the single swept value. Rows are ordered by penalty.
pub fn penalty_sweep(
    case: &SystemCase,
    penalties: &[f64],
    variant: ModelVariant,
    gap_target: f64,
    time_limit: Option<f64>,
) -> Result<Vec<PenaltyRow>, ExperimentError> {
    if !variant.uses_cdr() {
        return Err(ExperimentError::NotACdrVariant(variant));
    }
    for &p in penalties {
        if !p.is_finite() || p < 0.0 {
            return Err(ExperimentError::BadParameter { name: "penalty", value: p });
        }
    }
    let mut sorted = penalties.to_vec();
    sorted.sort_by(f64::total_cmp);

    sorted
        .par_iter()
        .map(|&penalty| {
            let mut swept = case.clone();
            swept.cdr.penalty = vec![penalty; case.buses.len()];
            let run = run_one(&swept, variant, gap_target, time_limit)?;
            Ok(PenaltyRow {
                penalty,
                status: run.status,
                objective: run.objective,
                achieved_gap: run.achieved_gap,
                cdr_line_mw: run.cdr_line_mw,
                cdr_gen_mw: run.cdr_gen_mw,
            })
        })
        .collect()
}

/// Solves every (factor, variant) pair on the load-scaled case. Rows are
/// ordered by factor, then by the given variant order. Infeasibility is
/// recorded, not raised.
pub fn load_scenario_sweep(
    case: &SystemCase,
    factors: &[f64],
    variants: &[ModelVariant],
    gap_target: f64,
    time_limit: Option<f64>,
) -> Result<Vec<LoadRow>, ExperimentError> {
    for &factor in factors {
        if !factor.is_finite() || factor < 0.0 {
            return Err(ExperimentError::BadParameter { name: "factor", value: factor });
        }
    }
    let mut sorted = factors.to_vec();
    sorted.sort_by(f64::total_cmp);

    let points: Vec<(f64, ModelVariant)> = sorted
        .iter()
        .flat_map(|&factor| variants.iter().map(move |&v| (factor, v)))
        .collect();
    points
        .par_iter()
        .map(|&(factor, variant)| {
            let scaled = scale_loads(case, factor)?;
            let run = run_one(&scaled, variant, gap_target, time_limit)?;
            Ok(LoadRow {
                factor,
                variant,
                status: run.status,
                objective: run.objective,
                cdr_line_mw: run.cdr_line_mw,
                cdr_gen_mw: run.cdr_gen_mw,
            })
        })
        .collect()
}

fn opt_num(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_num(v),
        None => "NA".to_string(),
    }
}

/// `variant,cost,gap,time_s,cdr_line_mw,cdr_gen_mw`. Wall time is the one
/// environment-dependent column.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("variant,cost,gap,time_s,cdr_line_mw,cdr_gen_mw\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{:.3},{},{}\n",
            row.variant,
            opt_num(row.objective),
            opt_num(row.achieved_gap),
            row.wall_time_s,
            opt_num(row.cdr_line_mw),
            opt_num(row.cdr_gen_mw),
        ));
    }
    out
}

/// `penalty,cost,cdr_line_mw,cdr_gen_mw,gap`.
pub fn penalty_csv(rows: &[PenaltyRow]) -> String {
    let mut out = String::from("penalty,cost,cdr_line_mw,cdr_gen_mw,gap\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_num(row.penalty),
            opt_num(row.objective),
            opt_num(row.cdr_line_mw),
            opt_num(row.cdr_gen_mw),
            opt_num(row.achieved_gap),
        ));
    }
    out
}

/// `factor,variant,feasible,cost,cdr_line_mw,cdr_gen_mw`.
pub fn load_csv(rows: &[LoadRow]) -> String {
    let mut out = String::from("factor,variant,feasible,cost,cdr_line_mw,cdr_gen_mw\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_num(row.factor),
            row.variant,
            row.feasible(),
            opt_num(row.objective),
            opt_num(row.cdr_line_mw),
            opt_num(row.cdr_gen_mw),
        ));
    }
    out
}
