//! Independent validation of schedules and a brute-force optimum oracle.
//!
//! `check_solution` re-evaluates every constraint of a variant directly
//! from case data and the named schedule maps. It deliberately shares no
//! code with the model builder: the builder emits sparse rows over variable
//! indices, while this module recomputes each equation from ids, so a bug
//! must appear in both paths to go unnoticed.

use crate::case::SystemCase;
use crate::model::{
    assemble_model, ConstraintTag, CtgRef, ModelError, ModelVariant, Side,
};
use crate::schedule::{extract_schedule, ScheduleSolution};
use crate::solver::{
    solve_lp_with_bounds, LpStatus, MilpSolution, MilpStatus, SolverError,
    INTEGRALITY_TOL,
};
use crate::topology::{Contingency, ContingencySet, CtgKind};
use rayon::prelude::*;
use std::fmt;

/// Default absolute tolerance for MW-scale constraint rows.
pub const DEFAULT_TOLERANCE: f64 = 1e-4;
/// Default cap on enumerable binaries for the brute-force oracle.
pub const DEFAULT_BRUTE_FORCE_LIMIT: u32 = 12;

/// One constraint evaluated beyond tolerance. `slack` is negative by the
/// amount of the violation: `rhs - lhs` for a `<=` constraint, `lhs - rhs`
/// for `>=`, and `-|lhs - rhs|` for equalities.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub tag: ConstraintTag,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// The outcome of a full check: all violations beyond tolerance, sorted by
/// (equation, subscripts).
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
    pub max_violation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyError {
    ShapeMismatch { what: String },
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::ShapeMismatch { what } => write!(f, "shape mismatch: {what}"),
        }
    }
}

impl std::error::Error for VerifyError {}

enum Direction {
    Le,
    Ge,
    Eq,
}

struct Checker {
    tolerance: f64,
    violations: Vec<Violation>,
}

impl Checker {
    fn check(&mut self, tag: ConstraintTag, lhs: f64, dir: Direction, rhs: f64) {
        let slack = match dir {
            Direction::Le => rhs - lhs,
            Direction::Ge => lhs - rhs,
            Direction::Eq => -(lhs - rhs).abs(),
        };
        if slack < -self.tolerance {
            self.violations.push(Violation { tag, lhs, rhs, slack });
        }
    }
}

pub(crate) fn require_series<'a>(
    map: &'a std::collections::BTreeMap<u32, Vec<f64>>,
    id: u32,
    horizon: usize,
    what: &str,
) -> Result<&'a [f64], VerifyError> {
    let vec = map.get(&id).ok_or_else(|| VerifyError::ShapeMismatch {
        what: format!("{what} missing id {id}"),
    })?;
    if vec.len() != horizon {
        return Err(VerifyError::ShapeMismatch {
            what: format!(
                "{what} id {id} has {} periods, expected {horizon}",
                vec.len()
            ),
        });
    }
    Ok(vec)
}

/// Re-evaluates every constraint of `variant` against the schedule, from
/// raw case data. Returns all violations beyond `tolerance` (binary
/// integrality always uses 1e-6, the objective 1e-6 relative).
pub fn check_solution(
    case: &SystemCase,
    contingencies: &ContingencySet,
    variant: ModelVariant,
    sol: &ScheduleSolution,
    tolerance: f64,
) -> Result<ViolationReport, VerifyError> {
    if sol.variant != variant {
        return Err(VerifyError::ShapeMismatch {
            what: format!(
                "solution was produced for {}, checking {}",
                sol.variant, variant
            ),
        });
    }
    let horizon = case.horizon;
    if sol.horizon != horizon {
        return Err(VerifyError::ShapeMismatch {
            what: format!("horizon {} vs case {horizon}", sol.horizon),
        });
    }

    // Shape validation up front so the evaluation below can index freely.
    for gen in &case.generators {
        for (map, what) in [
            (&sol.u, "u"),
            (&sol.v, "v"),
            (&sol.p, "p"),
            (&sol.r, "r"),
        ] {
            require_series(map, gen.id, horizon, what)?;
        }
    }
    for line in &case.lines {
        require_series(&sol.flows, line.id, horizon, "flows")?;
    }
    for bus in &case.buses {
        require_series(&sol.angles, bus.id, horizon, "angles")?;
    }
    for ctg in contingencies.iter() {
        let outcome = sol
            .contingencies
            .get(&ctg.key())
            .ok_or_else(|| VerifyError::ShapeMismatch {
                what: format!("missing contingency {}", ctg.key()),
            })?;
        for gen in &case.generators {
            require_series(&outcome.p, gen.id, horizon, "contingency p")?;
        }
        for line in &case.lines {
            require_series(&outcome.flows, line.id, horizon, "contingency flows")?;
        }
        for bus in &case.buses {
            require_series(&outcome.angles, bus.id, horizon, "contingency angles")?;
        }
        if variant.uses_cdr() {
            for (n, bus) in case.buses.iter().enumerate() {
                if case.cdr.participating[n] {
                    require_series(&outcome.cdr, bus.id, horizon, "cdr")?;
                }
            }
        } else if outcome.cdr.values().flatten().any(|x| *x != 0.0) {
            return Err(VerifyError::ShapeMismatch {
                what: format!(
                    "contingency {} carries CDR but variant {} has none",
                    ctg.key(),
                    variant
                ),
            });
        }
    }
    if sol.contingencies.len() != contingencies.len() {
        return Err(VerifyError::ShapeMismatch {
            what: format!(
                "{} contingencies in solution, {} in set",
                sol.contingencies.len(),
                contingencies.len()
            ),
        });
    }

    let mut checker = Checker {
        tolerance,
        violations: Vec::new(),
    };
    check_base(case, sol, &mut checker);

    // Contingency blocks are independent; check them in parallel and splice
    // the results in contingency order.
    let blocks: Vec<Vec<Violation>> = contingencies
        .contingencies
        .par_iter()
        .map(|ctg| {
            let mut c = Checker {
                tolerance,
                violations: Vec::new(),
            };
            check_contingency(case, variant, sol, ctg, &mut c);
            c.violations
        })
        .collect();
    for block in blocks {
        checker.violations.extend(block);
    }

    check_objective(case, contingencies, variant, sol, &mut checker);

    let mut violations = checker.violations;
    violations.sort_by(|a, b| a.tag.cmp(&b.tag));
    let max_violation = violations
        .iter()
        .map(|v| -v.slack)
        .fold(0.0f64, f64::max);
    Ok(ViolationReport {
        pass: violations.is_empty(),
        max_violation,
        violations,
    })
}

fn check_base(case: &SystemCase, sol: &ScheduleSolution, c: &mut Checker) {
    let horizon = case.horizon;
    use Direction::*;

    for gen in &case.generators {
        let gid = gen.id;
        let u = &sol.u[&gid];
        let v = &sol.v[&gid];
        let p = &sol.p[&gid];
        let r = &sol.r[&gid];
        let u0 = if gen.initial_on { 1.0 } else { 0.0 };
        for t in 0..horizon {
            let t1 = (t + 1) as u32;
            let u_prev = if t == 0 { u0 } else { u[t - 1] };
            let p_prev = if t == 0 { 0.0 } else { p[t - 1] };

            c.check(ConstraintTag::GenMin { gen: gid, t: t1 }, p[t], Ge, gen.p_min * u[t]);
            c.check(
                ConstraintTag::GenMaxReserve { gen: gid, t: t1 },
                p[t] + r[t],
                Le,
                gen.p_max * u[t],
            );
            c.check(
                ConstraintTag::ReserveCap { gen: gid, t: t1 },
                r[t],
                Le,
                gen.ramp_10min * u[t],
            );
            c.check(ConstraintTag::ReserveCap { gen: gid, t: t1 }, r[t], Ge, 0.0);
            let total_reserve: f64 = case.generators.iter().map(|q| sol.r[&q.id][t]).sum();
            c.check(
                ConstraintTag::SystemReserve { gen: gid, t: t1 },
                total_reserve,
                Ge,
                p[t] + r[t],
            );
            c.check(
                ConstraintTag::RampUp { gen: gid, t: t1 },
                p[t] - p_prev,
                Le,
                gen.ramp_hourly * u_prev + gen.ramp_startup * v[t],
            );
            c.check(
                ConstraintTag::RampDown { gen: gid, t: t1 },
                p_prev - p[t],
                Le,
                gen.ramp_hourly * u[t] + gen.ramp_shutdown * (v[t] - u[t] + u_prev),
            );
            let window_start = (t + 1).saturating_sub(gen.min_up as usize);
            let startups: f64 = (window_start..=t).map(|q| v[q]).sum();
            c.check(ConstraintTag::MinUp { gen: gid, t: t1 }, startups, Le, u[t]);
            c.check(
                ConstraintTag::StartupLink { gen: gid, t: t1 },
                u[t] - u_prev,
                Le,
                v[t],
            );
            for (var, series) in [('u', u), ('v', v)] {
                let x = series[t];
                let dist = (x - x.round()).abs().max(-x.min(0.0)).max(x - 1.0);
                if dist > INTEGRALITY_TOL {
                    c.violations.push(Violation {
                        tag: ConstraintTag::Integrality { var, gen: gid, t: t1 },
                        lhs: x,
                        rhs: x.round().clamp(0.0, 1.0),
                        slack: -dist,
                    });
                }
            }
        }
        let dt = gen.min_down as usize;
        for t in 0..horizon.saturating_sub(dt) {
            let startups: f64 = ((t + 1)..=(t + dt)).map(|q| v[q]).sum();
            c.check(
                ConstraintTag::MinDown {
                    gen: gid,
                    t: (t + 1) as u32,
                },
                u[t] + startups,
                Le,
                1.0,
            );
        }
    }

    for (n, bus) in case.buses.iter().enumerate() {
        for t in 0..horizon {
            let gen_sum: f64 = case
                .generators
                .iter()
                .filter(|g| g.bus == bus.id)
                .map(|g| sol.p[&g.id][t])
                .sum();
            let inflow: f64 = case
                .lines
                .iter()
                .filter(|l| l.to == bus.id)
                .map(|l| sol.flows[&l.id][t])
                .sum();
            let outflow: f64 = case
                .lines
                .iter()
                .filter(|l| l.from == bus.id)
                .map(|l| sol.flows[&l.id][t])
                .sum();
            c.check(
                ConstraintTag::Balance {
                    bus: bus.id,
                    t: (t + 1) as u32,
                },
                gen_sum + inflow - outflow,
                Eq,
                case.demand_at(n, t),
            );
        }
    }

    for line in &case.lines {
        let flow = &sol.flows[&line.id];
        for t in 0..horizon {
            let t1 = (t + 1) as u32;
            c.check(
                ConstraintTag::FlowBound {
                    line: line.id,
                    t: t1,
                    side: Side::Lower,
                },
                flow[t],
                Ge,
                -line.rate_normal,
            );
            c.check(
                ConstraintTag::FlowBound {
                    line: line.id,
                    t: t1,
                    side: Side::Upper,
                },
                flow[t],
                Le,
                line.rate_normal,
            );
            c.check(
                ConstraintTag::FlowDef { line: line.id, t: t1 },
                flow[t],
                Eq,
                line.susceptance * (sol.angles[&line.from][t] - sol.angles[&line.to][t]),
            );
        }
    }

    let ref_angles = &sol.angles[&case.reference_bus];
    for t in 0..horizon {
        c.check(
            ConstraintTag::RefAngle { t: (t + 1) as u32 },
            ref_angles[t],
            Eq,
            0.0,
        );
    }
}

fn check_contingency(
    case: &SystemCase,
    variant: ModelVariant,
    sol: &ScheduleSolution,
    ctg: &Contingency,
    c: &mut Checker,
) {
    let horizon = case.horizon;
    let outcome = &sol.contingencies[&ctg.key()];
    let ctg_ref = CtgRef {
        kind: ctg.kind,
        element: ctg.element,
    };
    use Direction::*;

    for gen in &case.generators {
        let outaged = ctg.kind == CtgKind::Generator && ctg.element == gen.id;
        let pc = &outcome.p[&gen.id];
        if outaged {
            for t in 0..horizon {
                c.check(
                    ConstraintTag::OutagePin {
                        ctg: ctg_ref,
                        t: (t + 1) as u32,
                    },
                    pc[t],
                    Eq,
                    0.0,
                );
            }
            continue;
        }
        let gid = gen.id;
        let u = &sol.u[&gid];
        let p = &sol.p[&gid];
        for t in 0..horizon {
            let t1 = (t + 1) as u32;
            c.check(
                ConstraintTag::CtgRampUp { gen: gid, ctg: ctg_ref, t: t1 },
                p[t] - pc[t],
                Le,
                gen.ramp_10min * u[t],
            );
            c.check(
                ConstraintTag::CtgRampDown { gen: gid, ctg: ctg_ref, t: t1 },
                pc[t] - p[t],
                Le,
                gen.ramp_10min * u[t],
            );
            c.check(
                ConstraintTag::CtgGenMin { gen: gid, ctg: ctg_ref, t: t1 },
                pc[t],
                Ge,
                gen.p_min * u[t],
            );
            c.check(
                ConstraintTag::CtgGenMax { gen: gid, ctg: ctg_ref, t: t1 },
                pc[t],
                Le,
                gen.p_max * u[t],
            );
        }
    }

    for line in &case.lines {
        let outaged = ctg.kind == CtgKind::Line && ctg.element == line.id;
        let fc = &outcome.flows[&line.id];
        if outaged {
            for t in 0..horizon {
                c.check(
                    ConstraintTag::OutagePin {
                        ctg: ctg_ref,
                        t: (t + 1) as u32,
                    },
                    fc[t],
                    Eq,
                    0.0,
                );
            }
            continue;
        }
        for t in 0..horizon {
            let t1 = (t + 1) as u32;
            c.check(
                ConstraintTag::CtgFlowDef { line: line.id, ctg: ctg_ref, t: t1 },
                fc[t],
                Eq,
                line.susceptance
                    * (outcome.angles[&line.from][t] - outcome.angles[&line.to][t]),
            );
            c.check(
                ConstraintTag::CtgFlowBound {
                    line: line.id,
                    ctg: ctg_ref,
                    t: t1,
                    side: Side::Lower,
                },
                fc[t],
                Ge,
                -line.rate_emergency,
            );
            c.check(
                ConstraintTag::CtgFlowBound {
                    line: line.id,
                    ctg: ctg_ref,
                    t: t1,
                    side: Side::Upper,
                },
                fc[t],
                Le,
                line.rate_emergency,
            );
        }
    }

    for (n, bus) in case.buses.iter().enumerate() {
        let participates = variant.uses_cdr() && case.cdr.participating[n];
        for t in 0..horizon {
            let t1 = (t + 1) as u32;
            let gen_sum: f64 = case
                .generators
                .iter()
                .filter(|g| g.bus == bus.id)
                .map(|g| outcome.p[&g.id][t])
                .sum();
            let inflow: f64 = case
                .lines
                .iter()
                .filter(|l| l.to == bus.id)
                .map(|l| outcome.flows[&l.id][t])
                .sum();
            let outflow: f64 = case
                .lines
                .iter()
                .filter(|l| l.from == bus.id)
                .map(|l| outcome.flows[&l.id][t])
                .sum();
            let cdr = if participates { outcome.cdr[&bus.id][t] } else { 0.0 };
            c.check(
                ConstraintTag::CtgBalance {
                    bus: bus.id,
                    ctg: ctg_ref,
                    t: t1,
                    cdr: variant.uses_cdr(),
                },
                gen_sum + inflow - outflow + cdr,
                Eq,
                case.demand_at(n, t),
            );
            if participates {
                c.check(
                    ConstraintTag::CdrCap { bus: bus.id, ctg: ctg_ref, t: t1 },
                    cdr,
                    Le,
                    case.cdr.cap_fraction * case.demand_at(n, t),
                );
                c.check(
                    ConstraintTag::CdrCap { bus: bus.id, ctg: ctg_ref, t: t1 },
                    cdr,
                    Ge,
                    0.0,
                );
            }
        }
    }
}

fn check_objective(
    case: &SystemCase,
    contingencies: &ContingencySet,
    variant: ModelVariant,
    sol: &ScheduleSolution,
    c: &mut Checker,
) {
    let mut total = 0.0;
    for gen in &case.generators {
        for t in 0..case.horizon {
            total += gen.energy_cost * sol.p[&gen.id][t]
                + gen.no_load_cost * sol.u[&gen.id][t]
                + gen.startup_cost * sol.v[&gen.id][t];
        }
    }
    if variant.uses_cdr() {
        for ctg in contingencies.iter() {
            let outcome = &sol.contingencies[&ctg.key()];
            for (n, bus) in case.buses.iter().enumerate() {
                if !case.cdr.participating[n] {
                    continue;
                }
                let penalty = case.cdr.penalty[n];
                for t in 0..case.horizon {
                    total += ctg.probability * penalty * outcome.cdr[&bus.id][t];
                }
            }
        }
    }
    let diff = (total - sol.objective).abs();
    if diff > 1e-6 * sol.objective.abs().max(1.0) {
        c.violations.push(Violation {
            tag: ConstraintTag::Objective,
            lhs: total,
            rhs: sol.objective,
            slack: -diff,
        });
    }
}

/// The outcome of exhaustive enumeration.
#[derive(Debug, Clone)]
pub enum BruteForceOutcome {
    /// The proven optimum and its schedule.
    Optimal {
        objective: f64,
        schedule: ScheduleSolution,
    },
    /// No commitment pattern admits a feasible completion.
    Infeasible,
}

#[derive(Debug)]
pub enum BruteForceError {
    LimitExceeded { binaries: u32, limit: u32 },
    Model(ModelError),
    Solver(SolverError),
}

impl fmt::Display for BruteForceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BruteForceError::LimitExceeded { binaries, limit } => write!(
                f,
                "{binaries} commitment binaries exceed the enumeration limit {limit}"
            ),
            BruteForceError::Model(e) => write!(f, "{e}"),
            BruteForceError::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for BruteForceError {}

impl From<ModelError> for BruteForceError {
    fn from(e: ModelError) -> Self {
        BruteForceError::Model(e)
    }
}

impl From<SolverError> for BruteForceError {
    fn from(e: SolverError) -> Self {
        BruteForceError::Solver(e)
    }
}

/// True when the pinned `u`, `v` bits of one generator satisfy the logic
/// constraints (min-up, min-down, startup linking) by exact integer
/// arithmetic. The LP would reject the same patterns through its rows; this
/// just avoids paying a simplex call for each of them.
fn logic_feasible(u: &[u8], v: &[u8], u_init: u8, min_up: usize, min_down: usize) -> bool {
    let horizon = u.len();
    for t in 0..horizon {
        let u_prev = if t == 0 { u_init } else { u[t - 1] };
        if u[t] as i8 - u_prev as i8 > v[t] as i8 {
            return false;
        }
        let window_start = (t + 1).saturating_sub(min_up);
        let startups: u8 = (window_start..=t).map(|q| v[q]).sum();
        if startups > u[t] {
            return false;
        }
    }
    for t in 0..horizon.saturating_sub(min_down) {
        let startups: u8 = ((t + 1)..=(t + min_down)).map(|q| v[q]).sum();
        if u[t] + startups > 1 {
            return false;
        }
    }
    true
}

/// Enumerates every assignment of the commitment and startup binaries,
/// completes each with an LP, and returns the best. A proven optimum,
/// usable as an oracle for the branch-and-bound path. `v` is enumerated
/// rather than derived from `u` because the truncated min-down windows
/// leave a few periods where a committed unit may buy extra ramp headroom
/// through a paid startup.
pub fn brute_force_optimum(
    case: &SystemCase,
    contingencies: &ContingencySet,
    variant: ModelVariant,
    limit: u32,
) -> Result<BruteForceOutcome, BruteForceError> {
    let n_gens = case.generators.len();
    let horizon = case.horizon;
    let binaries = (2 * n_gens * horizon) as u32;
    if binaries > limit {
        return Err(BruteForceError::LimitExceeded { binaries, limit });
    }

    let model = assemble_model(case, contingencies, variant)?;
    let index = model.index.as_ref().expect("assembled model has an index");

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut u_bits = vec![0u8; horizon];
    let mut v_bits = vec![0u8; horizon];
    'patterns: for pattern in 0u64..(1u64 << binaries) {
        let mut lower = model.lower.clone();
        let mut upper = model.upper.clone();
        for (g, gen) in case.generators.iter().enumerate() {
            for t in 0..horizon {
                u_bits[t] = ((pattern >> (g * horizon + t)) & 1) as u8;
                v_bits[t] =
                    ((pattern >> (n_gens * horizon + g * horizon + t)) & 1) as u8;
            }
            let u_init = u8::from(gen.initial_on);
            if !logic_feasible(
                &u_bits,
                &v_bits,
                u_init,
                gen.min_up as usize,
                gen.min_down as usize,
            ) {
                continue 'patterns;
            }
            for t in 0..horizon {
                lower[index.u(g, t)] = f64::from(u_bits[t]);
                upper[index.u(g, t)] = f64::from(u_bits[t]);
                lower[index.v(g, t)] = f64::from(v_bits[t]);
                upper[index.v(g, t)] = f64::from(v_bits[t]);
            }
        }
        let lp = solve_lp_with_bounds(&model, &lower, &upper)?;
        if lp.status == LpStatus::Optimal {
            let improves = match &best {
                None => true,
                Some((obj, _)) => lp.objective < *obj,
            };
            if improves {
                best = Some((lp.objective, lp.primal));
            }
        }
    }

    match best {
        None => Ok(BruteForceOutcome::Infeasible),
        Some((objective, primal)) => {
            let milp = MilpSolution {
                status: MilpStatus::Optimal,
                primal,
                objective,
                best_bound: objective,
                achieved_gap: 0.0,
                node_count: 1 << binaries,
            };
            let schedule = extract_schedule(case, index, &milp);
            Ok(BruteForceOutcome::Optimal { objective, schedule })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::parse_case;
    use crate::solver::solve_milp;
    use crate::topology::build_contingency_set;

    fn pair_doc(horizon: usize, loads: &[f64]) -> String {
        serde_json::json!({
            "name": "pair",
            "reference_bus": 1,
            "horizon": horizon,
            "buses": [{"id": 1, "name": "a"}, {"id": 2, "name": "b"}],
            "generators": [
                {"id": 1, "bus": 1, "energy_cost": 10.0, "no_load_cost": 2.0,
                 "startup_cost": 20.0, "p_min": 0.0, "p_max": 90.0,
                 "ramp_hourly": 90.0, "ramp_startup": 90.0, "ramp_shutdown": 90.0,
                 "ramp_10min": 90.0, "min_up": 1, "min_down": 1},
                {"id": 2, "bus": 2, "energy_cost": 50.0, "no_load_cost": 1.0,
                 "startup_cost": 10.0, "p_min": 0.0, "p_max": 80.0,
                 "ramp_hourly": 80.0, "ramp_startup": 80.0, "ramp_shutdown": 80.0,
                 "ramp_10min": 80.0, "min_up": 1, "min_down": 1}
            ],
            "lines": [
                {"id": 1, "from": 1, "to": 2, "susceptance": 10.0,
                 "rate_normal": 35.0, "rate_emergency": 45.0},
                {"id": 2, "from": 1, "to": 2, "susceptance": 10.0,
                 "rate_normal": 35.0, "rate_emergency": 45.0}
            ],
            "load": {"2": loads},
            "cdr": {"cap_fraction": 0.3, "default_penalty": 120.0}
        })
        .to_string()
    }

    fn solved_schedule(
        case: &SystemCase,
        ctgs: &ContingencySet,
        variant: ModelVariant,
    ) -> ScheduleSolution {
        let model = assemble_model(case, ctgs, variant).unwrap();
        let milp = solve_milp(&model, 0.0, None).unwrap();
        assert!(milp.status.has_solution(), "expected a solution");
        extract_schedule(case, model.index.as_ref().unwrap(), &milp)
    }

    #[test]
    fn solver_output_passes_with_zero_violations() {
        let case = parse_case(&pair_doc(2, &[60.0, 40.0])).unwrap();
        for variant in ModelVariant::ALL {
            let ctgs = build_contingency_set(
                &case,
                true,
                variant.includes_generator_contingencies(),
            )
            .unwrap();
            let sol = solved_schedule(&case, &ctgs, variant);
            let report =
                check_solution(&case, &ctgs, variant, &sol, DEFAULT_TOLERANCE).unwrap();
            assert!(report.pass, "{variant}: {:?}", report.violations);
            assert!(report.violations.is_empty());
            assert_eq!(report.max_violation, 0.0);
        }
    }

    #[test]
    fn perturbed_dispatch_breaks_balance_by_exactly_one_mw() {
        let case = parse_case(&pair_doc(1, &[60.0])).unwrap();
        let ctgs = build_contingency_set(&case, true, false).unwrap();
        let mut sol = solved_schedule(&case, &ctgs, ModelVariant::TScuc);
        sol.p.get_mut(&1).unwrap()[0] += 1.0;
        let report =
            check_solution(&case, &ctgs, ModelVariant::TScuc, &sol, DEFAULT_TOLERANCE)
                .unwrap();
        assert!(!report.pass);
        let balance = report
            .violations
            .iter()
            .find(|v| v.tag == ConstraintTag::Balance { bus: 1, t: 1 })
            .expect("balance violation at the perturbed bus");
        assert!((-balance.slack - 1.0).abs() < 1e-9, "slack {}", balance.slack);
    }

    #[test]
    fn cdr_beyond_cap_is_reported() {
        let case = parse_case(&pair_doc(1, &[60.0])).unwrap();
        let ctgs = build_contingency_set(&case, true, false).unwrap();
        let mut sol = solved_schedule(&case, &ctgs, ModelVariant::TScucCdr);
        // 40% of the 60 MW demand: 6 MW beyond the 30% cap.
        let outcome = sol.contingencies.get_mut("L1").unwrap();
        outcome.cdr.insert(2, vec![24.0]);
        let report =
            check_solution(&case, &ctgs, ModelVariant::TScucCdr, &sol, DEFAULT_TOLERANCE)
                .unwrap();
        assert!(!report.pass);
        assert!(report.violations.iter().any(|v| matches!(
            v.tag,
            ConstraintTag::CdrCap { bus: 2, .. }
        )));
    }

    #[test]
    fn fractional_commitment_is_reported() {
        let case = parse_case(&pair_doc(1, &[60.0])).unwrap();
        let ctgs = build_contingency_set(&case, true, false).unwrap();
        let mut sol = solved_schedule(&case, &ctgs, ModelVariant::TScuc);
        sol.u.get_mut(&1).unwrap()[0] = 0.5;
        let report =
            check_solution(&case, &ctgs, ModelVariant::TScuc, &sol, DEFAULT_TOLERANCE)
                .unwrap();
        assert!(!report.pass);
        assert!(report.violations.iter().any(|v| matches!(
            v.tag,
            ConstraintTag::Integrality { var: 'u', gen: 1, t: 1 }
        )));
    }

    #[test]
    fn objective_mismatch_is_reported() {
        let case = parse_case(&pair_doc(1, &[60.0])).unwrap();
        let ctgs = build_contingency_set(&case, true, false).unwrap();
        let mut sol = solved_schedule(&case, &ctgs, ModelVariant::TScuc);
        sol.objective += 10.0;
        let report =
            check_solution(&case, &ctgs, ModelVariant::TScuc, &sol, DEFAULT_TOLERANCE)
                .unwrap();
        assert!(!report.pass);
        assert!(report
            .violations
            .iter()
            .any(|v| v.tag == ConstraintTag::Objective));
    }

    #[test]
    fn missing_series_is_a_shape_error() {
        let case = parse_case(&pair_doc(1, &[60.0])).unwrap();
        let ctgs = build_contingency_set(&case, true, false).unwrap();
        let mut sol = solved_schedule(&case, &ctgs, ModelVariant::TScuc);
        sol.u.remove(&2);
        let err = check_solution(&case, &ctgs, ModelVariant::TScuc, &sol, DEFAULT_TOLERANCE)
            .unwrap_err();
        assert!(matches!(err, VerifyError::ShapeMismatch { .. }));
    }

    #[test]
    fn variant_mismatch_is_a_shape_error() {
        let case = parse_case(&pair_doc(1, &[60.0])).unwrap();
        let ctgs = build_contingency_set(&case, true, false).unwrap();
        let sol = solved_schedule(&case, &ctgs, ModelVariant::TScuc);
        let err =
            check_solution(&case, &ctgs, ModelVariant::TScucCdr, &sol, DEFAULT_TOLERANCE)
                .unwrap_err();
        assert!(matches!(err, VerifyError::ShapeMismatch { .. }));
    }

    #[test]
    fn violations_are_sorted_by_tag() {
        let case = parse_case(&pair_doc(2, &[60.0, 40.0])).unwrap();
        let ctgs = build_contingency_set(&case, true, false).unwrap();
        let mut sol = solved_schedule(&case, &ctgs, ModelVariant::TScuc);
        // Break several families at once.
        sol.p.get_mut(&1).unwrap()[1] += 5.0;
        sol.u.get_mut(&2).unwrap()[0] = 0.4;
        sol.flows.get_mut(&1).unwrap()[0] += 3.0;
        let report =
            check_solution(&case, &ctgs, ModelVariant::TScuc, &sol, DEFAULT_TOLERANCE)
                .unwrap();
        assert!(!report.pass);
        assert!(report.violations.len() >= 2);
        for pair in report.violations.windows(2) {
            assert!(pair[0].tag <= pair[1].tag);
        }
        assert!(report.max_violation >= 3.0);
    }

    #[test]
    fn oracle_matches_branch_and_bound_on_two_gen_two_period_case() {
        let case = parse_case(&pair_doc(2, &[60.0, 40.0])).unwrap();
        for variant in [ModelVariant::TScuc, ModelVariant::TScucCdr] {
            let ctgs = build_contingency_set(&case, true, false).unwrap();
            let oracle = brute_force_optimum(&case, &ctgs, variant, 12).unwrap();
            let objective = match oracle {
                BruteForceOutcome::Optimal { objective, ref schedule } => {
                    let report =
                        check_solution(&case, &ctgs, variant, schedule, DEFAULT_TOLERANCE)
                            .unwrap();
                    assert!(report.pass, "{variant}: {:?}", report.violations);
                    objective
                }
                BruteForceOutcome::Infeasible => panic!("{variant} should be feasible"),
            };
            let model = assemble_model(&case, &ctgs, variant).unwrap();
            let milp = solve_milp(&model, 0.0, None).unwrap();
            assert!(
                (milp.objective - objective).abs() <= 1e-6 * (1.0 + objective.abs()),
                "{variant}: oracle {objective} vs solver {}",
                milp.objective
            );
        }
    }

    #[test]
    fn zero_demand_oracle_is_all_off_at_zero_cost() {
        let case = parse_case(&pair_doc(1, &[0.0])).unwrap();
        let ctgs = build_contingency_set(&case, true, false).unwrap();
        match brute_force_optimum(&case, &ctgs, ModelVariant::TScuc, 12).unwrap() {
            BruteForceOutcome::Optimal { objective, schedule } => {
                assert!(objective.abs() < 1e-9);
                assert_eq!(schedule.u[&1], vec![0.0]);
                assert_eq!(schedule.u[&2], vec![0.0]);
            }
            BruteForceOutcome::Infeasible => panic!("zero demand is feasible"),
        }
    }

    #[test]
    fn enumeration_limit_is_enforced() {
        let case = parse_case(&pair_doc(8, &[10.0; 8])).unwrap();
        let ctgs = build_contingency_set(&case, true, false).unwrap();
        let err = brute_force_optimum(&case, &ctgs, ModelVariant::TScuc, 12).unwrap_err();
        assert!(matches!(
            err,
            BruteForceError::LimitExceeded { binaries: 32, limit: 12 }
        ));
    }
}
