//! Named schedule quantities extracted from raw solver vectors, with JSON
//! (de)serialization.
//!
//! All maps are keyed by element id (or contingency key like `"L7"`), so the
//! JSON is self-describing and byte-stable: map iteration order is sorted,
//! and numbers use the shortest round-trip decimal form.

use crate::case::SystemCase;
use crate::model::{ModelVariant, VariableIndex};
use crate::solver::{MilpSolution, MilpStatus, INTEGRALITY_TOL};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Post-contingency quantities for one outage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyOutcome {
    /// Generator output by generator id.
    pub p: BTreeMap<u32, Vec<f64>>,
    /// Line flow by line id.
    pub flows: BTreeMap<u32, Vec<f64>>,
    /// Bus angle by bus id.
    pub angles: BTreeMap<u32, Vec<f64>>,
    /// Corrective demand response by bus id; participating buses only,
    /// empty for variants without CDR.
    #[serde(default)]
    pub cdr: BTreeMap<u32, Vec<f64>>,
}

/// A complete solved schedule, every vector indexed `[period]` with the
/// first period at position 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSolution {
    pub variant: ModelVariant,
    pub status: MilpStatus,
    pub objective: f64,
    /// Relative optimality gap when the producing solver reported one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub achieved_gap: Option<f64>,
    pub horizon: usize,
    /// Commitment by generator id (0 or 1 for honest solutions).
    pub u: BTreeMap<u32, Vec<f64>>,
    /// Startup indicator by generator id.
    pub v: BTreeMap<u32, Vec<f64>>,
    /// Dispatch by generator id, MW.
    pub p: BTreeMap<u32, Vec<f64>>,
    /// Ten-minute reserve by generator id, MW.
    pub r: BTreeMap<u32, Vec<f64>>,
    /// Base-case flow by line id, MW.
    pub flows: BTreeMap<u32, Vec<f64>>,
    /// Base-case angle by bus id, rad.
    pub angles: BTreeMap<u32, Vec<f64>>,
    /// Post-contingency outcomes by contingency key (`"L7"`, `"G12"`).
    pub contingencies: BTreeMap<String, ContingencyOutcome>,
}

impl ScheduleSolution {
    /// Total CDR over buses and periods, split into (line-outage,
    /// generator-outage) contingency totals, MW.
    pub fn cdr_totals(&self) -> (f64, f64) {
        let mut line = 0.0;
        let mut gen = 0.0;
        for (key, outcome) in &self.contingencies {
            let total: f64 = outcome.cdr.values().flatten().sum();
            if key.starts_with('L') {
                line += total;
            } else {
                gen += total;
            }
        }
        (line, gen)
    }
}

/// Snaps a value to the nearest integer when it is within the integrality
/// tolerance, leaving genuine violations visible to the verifier.
fn snap_binary(x: f64) -> f64 {
    if (x - x.round()).abs() <= INTEGRALITY_TOL {
        x.round().abs() // .abs() turns -0.0 into 0.0
    } else {
        x
    }
}

/// Maps a solver's primal vector back to named schedule quantities.
///
/// Panics if the solution carries no primal point; callers check
/// [`MilpStatus::has_solution`] first.
pub fn extract_schedule(
    case: &SystemCase,
    index: &VariableIndex,
    milp: &MilpSolution,
) -> ScheduleSolution {
    assert!(
        milp.status.has_solution(),
        "cannot extract a schedule from status {}",
        milp.status
    );
    let x = &milp.primal;
    let horizon = index.horizon;
    let per_t = |f: &dyn Fn(usize) -> usize| -> Vec<f64> {
        (0..horizon).map(|t| x[f(t)]).collect()
    };

    let mut u = BTreeMap::new();
    let mut v = BTreeMap::new();
    let mut p = BTreeMap::new();
    let mut r = BTreeMap::new();
    for (g, gen) in case.generators.iter().enumerate() {
        u.insert(
            gen.id,
            (0..horizon).map(|t| snap_binary(x[index.u(g, t)])).collect(),
        );
        v.insert(
            gen.id,
            (0..horizon).map(|t| snap_binary(x[index.v(g, t)])).collect(),
        );
        p.insert(gen.id, per_t(&|t| index.p(g, t)));
        r.insert(gen.id, per_t(&|t| index.r(g, t)));
    }
    let mut flows = BTreeMap::new();
    for (k, line) in case.lines.iter().enumerate() {
        flows.insert(line.id, per_t(&|t| index.flow(k, t)));
    }
    let mut angles = BTreeMap::new();
    for (n, bus) in case.buses.iter().enumerate() {
        angles.insert(bus.id, per_t(&|t| index.theta(n, t)));
    }

    let mut contingencies = BTreeMap::new();
    for (c, ctg) in index.contingencies.iter().enumerate() {
        let mut outcome = ContingencyOutcome {
            p: BTreeMap::new(),
            flows: BTreeMap::new(),
            angles: BTreeMap::new(),
            cdr: BTreeMap::new(),
        };
        for (g, gen) in case.generators.iter().enumerate() {
            outcome.p.insert(gen.id, per_t(&|t| index.ctg_p(g, c, t)));
        }
        for (k, line) in case.lines.iter().enumerate() {
            outcome
                .flows
                .insert(line.id, per_t(&|t| index.ctg_flow(k, c, t)));
        }
        for (n, bus) in case.buses.iter().enumerate() {
            outcome
                .angles
                .insert(bus.id, per_t(&|t| index.ctg_theta(n, c, t)));
        }
        if index.variant.uses_cdr() {
            for (n, bus) in case.buses.iter().enumerate() {
                if index.cdr(n, c, 0).is_some() {
                    outcome.cdr.insert(
                        bus.id,
                        (0..horizon)
                            .map(|t| x[index.cdr(n, c, t).expect("participating bus")])
                            .collect(),
                    );
                }
            }
        }
        contingencies.insert(ctg.key(), outcome);
    }

    ScheduleSolution {
        variant: index.variant,
        status: milp.status,
        objective: milp.objective,
        achieved_gap: milp.achieved_gap.is_finite().then_some(milp.achieved_gap),
        horizon,
        u,
        v,
        p,
        r,
        flows,
        angles,
        contingencies,
    }
}

/// Serializes a schedule as pretty-printed JSON with a trailing newline.
pub fn schedule_to_json(schedule: &ScheduleSolution) -> String {
    let mut text =
        serde_json::to_string_pretty(schedule).expect("schedule serializes");
    text.push('\n');
    text
}

/// Parses a schedule from JSON.
pub fn schedule_from_json(text: &str) -> Result<ScheduleSolution, serde_json::Error> {
    serde_json::from_str(text)
}
