//! Self-contained exact LP and MILP solver sized for desk-scale instances.
//!
//! LPs are solved by a bounded-variable revised simplex that returns duals
//! alongside the primal point; MILPs by best-bound branch and bound over the
//! binary variables. Both are deterministic: identical input yields
//! identical output, including node counts, whenever time limits are
//! disabled. Full-scale cases are meant to leave through MPS export
//! instead.

mod branch;
mod linalg;
mod simplex;

use crate::model::MilpModel;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Primal feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const OPTIMALITY_TOL: f64 = 1e-7;
/// Distance from an integer at which a value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// An LP solve outcome: primal values per variable, dual values per row,
/// and the objective. Duals are meaningful only when status is optimal.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MilpStatus {
    /// Proven optimal (search exhausted or bound gap closed to zero).
    Optimal,
    /// Incumbent in hand but the search stopped at a limit before reaching
    /// the gap target.
    Feasible,
    /// Incumbent within the requested gap target, not proven optimal.
    GapLimit,
    /// Proven infeasible: the search exhausted without an incumbent.
    Infeasible,
    /// Limits stopped the search before any incumbent was found; nothing is
    /// proven either way.
    Unknown,
}

impl MilpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            MilpStatus::Optimal => "optimal",
            MilpStatus::Feasible => "feasible",
            MilpStatus::GapLimit => "gap_limit",
            MilpStatus::Infeasible => "infeasible",
            MilpStatus::Unknown => "unknown",
        }
    }

    pub fn has_solution(&self) -> bool {
        matches!(
            self,
            MilpStatus::Optimal | MilpStatus::Feasible | MilpStatus::GapLimit
        )
    }
}

impl fmt::Display for MilpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A MILP solve outcome. `achieved_gap` is
/// `(objective - best_bound) / max(|objective|, 1e-9)` when an incumbent
/// exists, infinite otherwise.
#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub primal: Vec<f64>,
    pub objective: f64,
    pub best_bound: f64,
    pub achieved_gap: f64,
    pub node_count: u64,
}

/// Limits for a MILP solve. `gap_target` of zero demands a proven optimum;
/// time and node limits of `None` disable those stops (and are required for
/// bit-reproducible runs).
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub gap_target: f64,
    pub time_limit: Option<f64>,
    pub node_limit: Option<u64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gap_target: 0.0,
            time_limit: None,
            node_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverError {
    /// The simplex basis became numerically unusable (singular after
    /// refactorization) or an iteration cap was exceeded.
    NumericalFailure(String),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::NumericalFailure(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for SolverError {}

/// Solves the LP relaxation of `model` (integrality flags ignored).
pub fn solve_lp(model: &MilpModel) -> Result<LpSolution, SolverError> {
    simplex::solve_lp_bounded(model, &model.lower, &model.upper)
}

/// Solves the LP relaxation with tightened bounds, used to complete a fixed
/// commitment pattern or price a fixed-commitment market LP.
pub fn solve_lp_with_bounds(
    model: &MilpModel,
    lower: &[f64],
    upper: &[f64],
) -> Result<LpSolution, SolverError> {
    simplex::solve_lp_bounded(model, lower, upper)
}

/// Solves `model` to the requested relative gap, optionally time-limited.
pub fn solve_milp(
    model: &MilpModel,
    gap_target: f64,
    time_limit: Option<f64>,
) -> Result<MilpSolution, SolverError> {
    assert!(gap_target >= 0.0, "gap target must be nonnegative");
    solve_milp_with(
        model,
        &SolverOptions {
            gap_target,
            time_limit,
            node_limit: None,
        },
    )
}

/// Solves `model` under explicit limits.
pub fn solve_milp_with(
    model: &MilpModel,
    options: &SolverOptions,
) -> Result<MilpSolution, SolverError> {
    branch::branch_and_bound(model, options)
}
