//! Objective, bounds, and constraint row emission.

use super::index::{index_variables, VariableIndex};
use super::{
    ConstraintTag, CtgRef, FormulationOptions, MilpModel, ModelError, ModelVariant, Row, Sense,
    Side,
};
use crate::case::SystemCase;
use crate::topology::{ContingencySet, CtgKind};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Accumulates coefficients for one row, merging repeated variables and
/// dropping exact zeros, so emitted terms are sorted and minimal.
struct RowBuilder {
    coeffs: BTreeMap<usize, f64>,
}

impl RowBuilder {
    fn new() -> Self {
        RowBuilder {
            coeffs: BTreeMap::new(),
        }
    }

    fn add(mut self, var: usize, coef: f64) -> Self {
        *self.coeffs.entry(var).or_insert(0.0) += coef;
        self
    }

    fn done(self, sense: Sense, rhs: f64, tag: ConstraintTag) -> Row {
        Row {
            terms: self
                .coeffs
                .into_iter()
                .filter(|(_, a)| *a != 0.0)
                .collect(),
            sense,
            rhs,
            tag,
        }
    }
}

/// Builds the linear objective: energy, no-load, and startup costs, plus the
/// probability-weighted CDR penalty in CDR variants.
pub fn build_objective(case: &SystemCase, index: &VariableIndex) -> Vec<f64> {
    let mut obj = vec![0.0; index.total_count()];
    for (g, gen) in case.generators.iter().enumerate() {
        for t in 0..index.horizon {
            obj[index.p(g, t)] = gen.energy_cost;
            obj[index.u(g, t)] = gen.no_load_cost;
            obj[index.v(g, t)] = gen.startup_cost;
        }
    }
    if index.variant.uses_cdr() {
        for (c, ctg) in index.contingencies.iter().enumerate() {
            for &n in &index.participating {
                for t in 0..index.horizon {
                    let var = index.cdr(n, c, t).expect("participating bus");
                    obj[var] = ctg.probability * case.cdr.penalty[n];
                }
            }
        }
    }
    obj
}

/// Variable bounds and integrality flags.
///
/// Commitment and startup indicators are binary. Dispatch lies in
/// `[0, p_max]`, reserve in `[0, ramp_10min]`, CDR in `[0, inf)` (the cap is
/// a row), and flows and angles are free. The outaged element of each
/// contingency has its post-contingency variable pinned to zero, and
/// post-contingency angle blocks pin the reference bus to remove the uniform
/// shift degree of freedom.
fn build_bounds(case: &SystemCase, index: &VariableIndex) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let total = index.total_count();
    let mut lower = vec![0.0; total];
    let mut upper = vec![0.0; total];
    let mut integer = vec![false; total];
    let horizon = index.horizon;
    let inf = f64::INFINITY;

    for (g, gen) in case.generators.iter().enumerate() {
        for t in 0..horizon {
            upper[index.p(g, t)] = gen.p_max;
            upper[index.u(g, t)] = 1.0;
            upper[index.v(g, t)] = 1.0;
            integer[index.u(g, t)] = true;
            integer[index.v(g, t)] = true;
            upper[index.r(g, t)] = gen.ramp_10min;
        }
    }
    for k in 0..index.num_lines() {
        for t in 0..horizon {
            lower[index.flow(k, t)] = -inf;
            upper[index.flow(k, t)] = inf;
        }
    }
    for n in 0..index.num_buses() {
        for t in 0..horizon {
            lower[index.theta(n, t)] = -inf;
            upper[index.theta(n, t)] = inf;
        }
    }

    let ref_pos = case.bus_pos(case.reference_bus).expect("validated reference");
    for (c, ctg) in index.contingencies.iter().enumerate() {
        let outaged_gen = match ctg.kind {
            CtgKind::Generator => case.gen_pos(ctg.element),
            CtgKind::Line => None,
        };
        let outaged_line = match ctg.kind {
            CtgKind::Line => case.line_pos(ctg.element),
            CtgKind::Generator => None,
        };
        for (g, gen) in case.generators.iter().enumerate() {
            for t in 0..horizon {
                let var = index.ctg_p(g, c, t);
                if outaged_gen == Some(g) {
                    // pinned to zero: lower == upper == 0
                } else {
                    upper[var] = gen.p_max;
                }
            }
        }
        for k in 0..index.num_lines() {
            for t in 0..horizon {
                let var = index.ctg_flow(k, c, t);
                if outaged_line == Some(k) {
                    // pinned to zero
                } else {
                    lower[var] = -inf;
                    upper[var] = inf;
                }
            }
        }
        for n in 0..index.num_buses() {
            for t in 0..horizon {
                let var = index.ctg_theta(n, c, t);
                if n == ref_pos {
                    // pinned to zero
                } else {
                    lower[var] = -inf;
                    upper[var] = inf;
                }
            }
        }
        if index.variant.uses_cdr() {
            for &n in &index.participating {
                for t in 0..horizon {
                    upper[index.cdr(n, c, t).expect("participating bus")] = inf;
                }
            }
        }
    }
    (lower, upper, integer)
}

/// Emits the base-case rows, equations (2) through (15).
///
/// Period 1 boundary conditions substitute the constants `P(g,0) = 0` and
/// `u(g,0) = initial_on`. Minimum-up windows are truncated at the first
/// period for every `t` by default; with
/// [`FormulationOptions::strict_min_up`] rows appear only once the full
/// window fits, mirroring the printed index range.
pub fn build_base_constraints(
    case: &SystemCase,
    index: &VariableIndex,
    options: FormulationOptions,
) -> Vec<Row> {
    let mut rows = Vec::new();
    let horizon = index.horizon;

    for (g, gen) in case.generators.iter().enumerate() {
        let gid = gen.id;
        let u0 = if gen.initial_on { 1.0 } else { 0.0 };
        for t in 0..horizon {
            let t1 = (t + 1) as u32;
            // (2)  P - p_min u >= 0
            rows.push(
                RowBuilder::new()
                    .add(index.p(g, t), 1.0)
                    .add(index.u(g, t), -gen.p_min)
                    .done(Sense::Ge, 0.0, ConstraintTag::GenMin { gen: gid, t: t1 }),
            );
            // (3)  P + r - p_max u <= 0
            rows.push(
                RowBuilder::new()
                    .add(index.p(g, t), 1.0)
                    .add(index.r(g, t), 1.0)
                    .add(index.u(g, t), -gen.p_max)
                    .done(
                        Sense::Le,
                        0.0,
                        ConstraintTag::GenMaxReserve { gen: gid, t: t1 },
                    ),
            );
            // (4)  r - R10 u <= 0 (the lower half, r >= 0, is a bound)
            rows.push(
                RowBuilder::new()
                    .add(index.r(g, t), 1.0)
                    .add(index.u(g, t), -gen.ramp_10min)
                    .done(Sense::Le, 0.0, ConstraintTag::ReserveCap { gen: gid, t: t1 }),
            );
            // (5)  sum_q r(q,t) - P(g,t) - r(g,t) >= 0
            let mut builder = RowBuilder::new();
            for q in 0..case.generators.len() {
                builder = builder.add(index.r(q, t), 1.0);
            }
            rows.push(
                builder
                    .add(index.p(g, t), -1.0)
                    .add(index.r(g, t), -1.0)
                    .done(
                        Sense::Ge,
                        0.0,
                        ConstraintTag::SystemReserve { gen: gid, t: t1 },
                    ),
            );
            // (6)  P(t) - P(t-1) - Rhr u(t-1) - Rsu v(t) <= 0
            let tag = ConstraintTag::RampUp { gen: gid, t: t1 };
            if t == 0 {
                rows.push(
                    RowBuilder::new()
                        .add(index.p(g, 0), 1.0)
                        .add(index.v(g, 0), -gen.ramp_startup)
                        .done(Sense::Le, gen.ramp_hourly * u0, tag),
                );
            } else {
                rows.push(
                    RowBuilder::new()
                        .add(index.p(g, t), 1.0)
                        .add(index.p(g, t - 1), -1.0)
                        .add(index.u(g, t - 1), -gen.ramp_hourly)
                        .add(index.v(g, t), -gen.ramp_startup)
                        .done(Sense::Le, 0.0, tag),
                );
            }
            // (7)  P(t-1) - P(t) - Rhr u(t) - Rsd (v(t) - u(t) + u(t-1)) <= 0
            let tag = ConstraintTag::RampDown { gen: gid, t: t1 };
            if t == 0 {
                rows.push(
                    RowBuilder::new()
                        .add(index.p(g, 0), -1.0)
                        .add(index.u(g, 0), gen.ramp_shutdown - gen.ramp_hourly)
                        .add(index.v(g, 0), -gen.ramp_shutdown)
                        .done(Sense::Le, gen.ramp_shutdown * u0, tag),
                );
            } else {
                rows.push(
                    RowBuilder::new()
                        .add(index.p(g, t - 1), 1.0)
                        .add(index.p(g, t), -1.0)
                        .add(index.u(g, t), gen.ramp_shutdown - gen.ramp_hourly)
                        .add(index.v(g, t), -gen.ramp_shutdown)
                        .add(index.u(g, t - 1), -gen.ramp_shutdown)
                        .done(Sense::Le, 0.0, tag),
                );
            }
            // (8)  sum_{q in window} v(q) <= u(t)
            let window_start = (t + 1).saturating_sub(gen.min_up as usize);
            let emit = if options.strict_min_up {
                t + 1 >= gen.min_up as usize
            } else {
                true
            };
            if emit {
                let mut builder = RowBuilder::new();
                for q in window_start..=t {
                    builder = builder.add(index.v(g, q), 1.0);
                }
                rows.push(builder.add(index.u(g, t), -1.0).done(
                    Sense::Le,
                    0.0,
                    ConstraintTag::MinUp { gen: gid, t: t1 },
                ));
            }
            // (10)  u(t) - u(t-1) - v(t) <= 0
            let tag = ConstraintTag::StartupLink { gen: gid, t: t1 };
            if t == 0 {
                rows.push(
                    RowBuilder::new()
                        .add(index.u(g, 0), 1.0)
                        .add(index.v(g, 0), -1.0)
                        .done(Sense::Le, u0, tag),
                );
            } else {
                rows.push(
                    RowBuilder::new()
                        .add(index.u(g, t), 1.0)
                        .add(index.u(g, t - 1), -1.0)
                        .add(index.v(g, t), -1.0)
                        .done(Sense::Le, 0.0, tag),
                );
            }
        }
        // (9)  sum_{q=t+1}^{t+DT} v(q) + u(t) <= 1, for t <= T - DT
        let dt = gen.min_down as usize;
        for t in 0..horizon.saturating_sub(dt) {
            let mut builder = RowBuilder::new();
            for q in (t + 1)..=(t + dt) {
                builder = builder.add(index.v(g, q), 1.0);
            }
            rows.push(builder.add(index.u(g, t), 1.0).done(
                Sense::Le,
                1.0,
                ConstraintTag::MinDown {
                    gen: gid,
                    t: (t + 1) as u32,
                },
            ));
        }
    }

    // (12)  nodal balance
    for (n, bus) in case.buses.iter().enumerate() {
        for t in 0..horizon {
            let mut builder = RowBuilder::new();
            for &g in case.gens_at(n) {
                builder = builder.add(index.p(g, t), 1.0);
            }
            for &k in case.lines_into(n) {
                builder = builder.add(index.flow(k, t), 1.0);
            }
            for &k in case.lines_out_of(n) {
                builder = builder.add(index.flow(k, t), -1.0);
            }
            rows.push(builder.done(
                Sense::Eq,
                case.demand_at(n, t),
                ConstraintTag::Balance {
                    bus: bus.id,
                    t: (t + 1) as u32,
                },
            ));
        }
    }

    // (13) flow limits and (14) flow definitions
    for (k, line) in case.lines.iter().enumerate() {
        let from = case.bus_pos(line.from).expect("validated bus");
        let to = case.bus_pos(line.to).expect("validated bus");
        for t in 0..horizon {
            let t1 = (t + 1) as u32;
            rows.push(RowBuilder::new().add(index.flow(k, t), 1.0).done(
                Sense::Ge,
                -line.rate_normal,
                ConstraintTag::FlowBound {
                    line: line.id,
                    t: t1,
                    side: Side::Lower,
                },
            ));
            rows.push(RowBuilder::new().add(index.flow(k, t), 1.0).done(
                Sense::Le,
                line.rate_normal,
                ConstraintTag::FlowBound {
                    line: line.id,
                    t: t1,
                    side: Side::Upper,
                },
            ));
            rows.push(
                RowBuilder::new()
                    .add(index.flow(k, t), 1.0)
                    .add(index.theta(from, t), -line.susceptance)
                    .add(index.theta(to, t), line.susceptance)
                    .done(
                        Sense::Eq,
                        0.0,
                        ConstraintTag::FlowDef {
                            line: line.id,
                            t: t1,
                        },
                    ),
            );
        }
    }

    // (15) reference angle
    let ref_pos = case.bus_pos(case.reference_bus).expect("validated reference");
    for t in 0..horizon {
        rows.push(RowBuilder::new().add(index.theta(ref_pos, t), 1.0).done(
            Sense::Eq,
            0.0,
            ConstraintTag::RefAngle { t: (t + 1) as u32 },
        ));
    }

    rows
}

/// Emits the post-contingency rows, equations (16) through (24), for every
/// contingency in the index.
///
/// The outaged generator is excluded from (16) to (19) and the outaged line
/// from (20) and (21); their post-contingency variables are pinned to zero
/// through bounds, so balance rows keep the full printed sums. Non-CDR
/// variants emit (22); CDR variants emit (23) with the CDR term on the left
/// and (24) capping CDR at `cap_fraction` of bus demand.
pub fn build_contingency_constraints(
    case: &SystemCase,
    index: &VariableIndex,
    variant: ModelVariant,
) -> Vec<Row> {
    let blocks: Vec<Vec<Row>> = index
        .contingencies
        .par_iter()
        .enumerate()
        .map(|(c, ctg)| {
            let ctg_ref = CtgRef {
                kind: ctg.kind,
                element: ctg.element,
            };
            let outaged_gen = match ctg.kind {
                CtgKind::Generator => case.gen_pos(ctg.element),
                CtgKind::Line => None,
            };
            let outaged_line = match ctg.kind {
                CtgKind::Line => case.line_pos(ctg.element),
                CtgKind::Generator => None,
            };
            contingency_block(case, index, variant, c, ctg_ref, outaged_gen, outaged_line)
        })
        .collect();
    blocks.into_iter().flatten().collect()
}

fn contingency_block(
    case: &SystemCase,
    index: &VariableIndex,
    variant: ModelVariant,
    c: usize,
    ctg: CtgRef,
    outaged_gen: Option<usize>,
    outaged_line: Option<usize>,
) -> Vec<Row> {
    let mut rows = Vec::new();
    let horizon = index.horizon;

    // (16)-(19) corrective redispatch limits for surviving units
    for (g, gen) in case.generators.iter().enumerate() {
        if outaged_gen == Some(g) {
            continue;
        }
        let gid = gen.id;
        for t in 0..horizon {
            let t1 = (t + 1) as u32;
            rows.push(
                RowBuilder::new()
                    .add(index.p(g, t), 1.0)
                    .add(index.ctg_p(g, c, t), -1.0)
                    .add(index.u(g, t), -gen.ramp_10min)
                    .done(Sense::Le, 0.0, ConstraintTag::CtgRampUp { gen: gid, ctg, t: t1 }),
            );
            rows.push(
                RowBuilder::new()
                    .add(index.ctg_p(g, c, t), 1.0)
                    .add(index.p(g, t), -1.0)
                    .add(index.u(g, t), -gen.ramp_10min)
                    .done(
                        Sense::Le,
                        0.0,
                        ConstraintTag::CtgRampDown { gen: gid, ctg, t: t1 },
                    ),
            );
            rows.push(
                RowBuilder::new()
                    .add(index.ctg_p(g, c, t), 1.0)
                    .add(index.u(g, t), -gen.p_min)
                    .done(Sense::Ge, 0.0, ConstraintTag::CtgGenMin { gen: gid, ctg, t: t1 }),
            );
            rows.push(
                RowBuilder::new()
                    .add(index.ctg_p(g, c, t), 1.0)
                    .add(index.u(g, t), -gen.p_max)
                    .done(Sense::Le, 0.0, ConstraintTag::CtgGenMax { gen: gid, ctg, t: t1 }),
            );
        }
    }

    // (20)-(21) post-contingency flows for surviving lines
    for (k, line) in case.lines.iter().enumerate() {
        if outaged_line == Some(k) {
            continue;
        }
        let from = case.bus_pos(line.from).expect("validated bus");
        let to = case.bus_pos(line.to).expect("validated bus");
        for t in 0..horizon {
            let t1 = (t + 1) as u32;
            rows.push(
                RowBuilder::new()
                    .add(index.ctg_flow(k, c, t), 1.0)
                    .add(index.ctg_theta(from, c, t), -line.susceptance)
                    .add(index.ctg_theta(to, c, t), line.susceptance)
                    .done(
                        Sense::Eq,
                        0.0,
                        ConstraintTag::CtgFlowDef {
                            line: line.id,
                            ctg,
                            t: t1,
                        },
                    ),
            );
            rows.push(RowBuilder::new().add(index.ctg_flow(k, c, t), 1.0).done(
                Sense::Ge,
                -line.rate_emergency,
                ConstraintTag::CtgFlowBound {
                    line: line.id,
                    ctg,
                    t: t1,
                    side: Side::Lower,
                },
            ));
            rows.push(RowBuilder::new().add(index.ctg_flow(k, c, t), 1.0).done(
                Sense::Le,
                line.rate_emergency,
                ConstraintTag::CtgFlowBound {
                    line: line.id,
                    ctg,
                    t: t1,
                    side: Side::Upper,
                },
            ));
        }
    }

    // (22) or (23) post-contingency balance; (24) CDR caps
    for (n, bus) in case.buses.iter().enumerate() {
        for t in 0..horizon {
            let t1 = (t + 1) as u32;
            let mut builder = RowBuilder::new();
            for &g in case.gens_at(n) {
                builder = builder.add(index.ctg_p(g, c, t), 1.0);
            }
            for &k in case.lines_into(n) {
                builder = builder.add(index.ctg_flow(k, c, t), 1.0);
            }
            for &k in case.lines_out_of(n) {
                builder = builder.add(index.ctg_flow(k, c, t), -1.0);
            }
            if let Some(var) = index.cdr(n, c, t) {
                builder = builder.add(var, 1.0);
            }
            rows.push(builder.done(
                Sense::Eq,
                case.demand_at(n, t),
                ConstraintTag::CtgBalance {
                    bus: bus.id,
                    ctg,
                    t: t1,
                    cdr: variant.uses_cdr(),
                },
            ));
            if let Some(var) = index.cdr(n, c, t) {
                rows.push(RowBuilder::new().add(var, 1.0).done(
                    Sense::Le,
                    case.cdr.cap_fraction * case.demand_at(n, t),
                    ConstraintTag::CdrCap {
                        bus: bus.id,
                        ctg,
                        t: t1,
                    },
                ));
            }
        }
    }

    rows
}

/// Assembles the complete model for a variant with default options.
pub fn assemble_model(
    case: &SystemCase,
    contingencies: &ContingencySet,
    variant: ModelVariant,
) -> Result<MilpModel, ModelError> {
    assemble_model_with(case, contingencies, variant, FormulationOptions::default())
}

/// Assembles the complete model: index, objective, bounds, base rows, and
/// per-contingency blocks concatenated in contingency order.
pub fn assemble_model_with(
    case: &SystemCase,
    contingencies: &ContingencySet,
    variant: ModelVariant,
    options: FormulationOptions,
) -> Result<MilpModel, ModelError> {
    let index = index_variables(case, contingencies, variant)?;
    let (lower, upper, integer) = build_bounds(case, &index);
    let objective = build_objective(case, &index);
    let mut rows = build_base_constraints(case, &index, options);
    rows.extend(build_contingency_constraints(case, &index, variant));
    Ok(MilpModel {
        lower,
        upper,
        integer,
        objective,
        rows,
        index: Some(index),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::parse_case;
    use crate::topology::build_contingency_set;

    fn triangle_doc(initial_on: bool) -> String {
        serde_json::json!({
            "name": "triangle",
            "reference_bus": 1,
            "horizon": 2,
            "buses": [
                {"id": 1, "name": "a"}, {"id": 2, "name": "b"}, {"id": 3, "name": "c"}
            ],
            "generators": [
                {"id": 1, "bus": 1, "energy_cost": 10.0, "no_load_cost": 1.0,
                 "startup_cost": 5.0, "p_min": 10.0, "p_max": 100.0,
                 "ramp_hourly": 60.0, "ramp_startup": 50.0, "ramp_shutdown": 55.0,
                 "ramp_10min": 30.0, "min_up": 2, "min_down": 1, "initial_on": initial_on},
                {"id": 2, "bus": 2, "energy_cost": 20.0, "no_load_cost": 1.0,
                 "startup_cost": 5.0, "p_min": 0.0, "p_max": 80.0,
                 "ramp_hourly": 80.0, "ramp_startup": 80.0, "ramp_shutdown": 80.0,
                 "ramp_10min": 80.0, "min_up": 1, "min_down": 1}
            ],
            "lines": [
                {"id": 1, "from": 1, "to": 2, "susceptance": 10.0,
                 "rate_normal": 100.0, "rate_emergency": 120.0},
                {"id": 2, "from": 2, "to": 3, "susceptance": 10.0,
                 "rate_normal": 100.0, "rate_emergency": 120.0},
                {"id": 3, "from": 1, "to": 3, "susceptance": 10.0,
                 "rate_normal": 100.0, "rate_emergency": 120.0}
            ],
            "load": {"3": [30.0, 100.0]},
            "cdr": {"cap_fraction": 0.3, "penalty": {"3": 300.0}, "default_penalty": 100.0}
        })
        .to_string()
    }

    fn triangle() -> SystemCase {
        parse_case(&triangle_doc(false)).unwrap()
    }

    fn count_tag(rows: &[Row], eq: u8) -> usize {
        rows.iter()
            .filter(|r| r.tag.equation() == Some(eq))
            .count()
    }

    #[test]
    fn row_counts_match_closed_form() {
        let case = triangle();
        let both = build_contingency_set(&case, true, true).unwrap();
        let model = assemble_model(&case, &both, ModelVariant::TgScucCdr).unwrap();
        let rows = &model.rows;

        let (g, k, n, t) = (2usize, 3usize, 3usize, 2usize);
        for eq in [2u8, 3, 4, 5, 6, 7, 8, 10] {
            assert_eq!(count_tag(rows, eq), g * t, "Eq{eq}");
        }
        // min_down = 1 for both units: one row each at t = 1
        assert_eq!(count_tag(rows, 9), 2);
        assert_eq!(count_tag(rows, 12), n * t);
        assert_eq!(count_tag(rows, 13), 2 * k * t);
        assert_eq!(count_tag(rows, 14), k * t);
        assert_eq!(count_tag(rows, 15), t);

        // 3 line contingencies with 2 surviving lines, 2 generator
        // contingencies with 3 surviving lines; one participating bus.
        let c_line = 3usize;
        let c_gen = 2usize;
        assert_eq!(
            count_tag(rows, 16),
            (c_line * g + c_gen * (g - 1)) * t
        );
        assert_eq!(count_tag(rows, 16), count_tag(rows, 17));
        assert_eq!(count_tag(rows, 16), count_tag(rows, 18));
        assert_eq!(count_tag(rows, 16), count_tag(rows, 19));
        assert_eq!(
            count_tag(rows, 20),
            (c_line * (k - 1) + c_gen * k) * t
        );
        assert_eq!(count_tag(rows, 21), 2 * count_tag(rows, 20));
        assert_eq!(count_tag(rows, 22), 0);
        assert_eq!(count_tag(rows, 23), n * (c_line + c_gen) * t);
        assert_eq!(count_tag(rows, 24), 1 * (c_line + c_gen) * t);

        let total_vars = 4 * g * t + k * t + n * t + (g + k + n + 1) * (c_line + c_gen) * t;
        assert_eq!(model.num_vars(), total_vars);
    }

    #[test]
    fn non_cdr_variant_emits_eq22_and_no_cdr_rows() {
        let case = triangle();
        let both = build_contingency_set(&case, true, true).unwrap();
        let model = assemble_model(&case, &both, ModelVariant::TgScuc).unwrap();
        assert!(count_tag(&model.rows, 22) > 0);
        assert_eq!(count_tag(&model.rows, 23), 0);
        assert_eq!(count_tag(&model.rows, 24), 0);
    }

    #[test]
    fn system_reserve_row_is_the_printed_transcription() {
        let case = triangle();
        let both = build_contingency_set(&case, true, true).unwrap();
        let model = assemble_model(&case, &both, ModelVariant::TgScuc).unwrap();
        let index = model.index.as_ref().unwrap();
        let row = model
            .rows
            .iter()
            .find(|r| r.tag == ConstraintTag::SystemReserve { gen: 1, t: 1 })
            .unwrap();
        // r1 + r2 >= P1 + r1 collapses to r2 - P1 >= 0: the own-reserve term
        // cancels when coefficients merge.
        assert_eq!(row.sense, Sense::Ge);
        assert_eq!(
            row.terms,
            vec![(index.p(0, 0), -1.0), (index.r(1, 0), 1.0)]
        );
        assert_eq!(row.rhs, 0.0);
    }

    #[test]
    fn flow_definition_row_carries_susceptance() {
        let case = triangle();
        let both = build_contingency_set(&case, true, true).unwrap();
        let model = assemble_model(&case, &both, ModelVariant::TgScuc).unwrap();
        let index = model.index.as_ref().unwrap();
        let row = model
            .rows
            .iter()
            .find(|r| r.tag == ConstraintTag::FlowDef { line: 1, t: 1 })
            .unwrap();
        assert_eq!(row.sense, Sense::Eq);
        assert_eq!(
            row.terms,
            vec![
                (index.flow(0, 0), 1.0),
                (index.theta(0, 0), -10.0),
                (index.theta(1, 0), 10.0),
            ]
        );
        assert_eq!(row.rhs, 0.0);
    }

    #[test]
    fn first_period_ramp_up_uses_startup_allowance() {
        let case = triangle();
        let both = build_contingency_set(&case, true, true).unwrap();
        let model = assemble_model(&case, &both, ModelVariant::TgScuc).unwrap();
        let index = model.index.as_ref().unwrap();
        let row = model
            .rows
            .iter()
            .find(|r| r.tag == ConstraintTag::RampUp { gen: 1, t: 1 })
            .unwrap();
        assert_eq!(
            row.terms,
            vec![(index.p(0, 0), 1.0), (index.v(0, 0), -50.0)]
        );
        assert_eq!(row.rhs, 0.0);

        // With the unit initially on, the hourly ramp moves to the rhs.
        let warm = parse_case(&triangle_doc(true)).unwrap();
        let both = build_contingency_set(&warm, true, true).unwrap();
        let model = assemble_model(&warm, &both, ModelVariant::TgScuc).unwrap();
        let row = model
            .rows
            .iter()
            .find(|r| r.tag == ConstraintTag::RampUp { gen: 1, t: 1 })
            .unwrap();
        assert_eq!(row.rhs, 60.0);
    }

    #[test]
    fn cdr_cap_rhs_is_fraction_of_demand() {
        let case = triangle();
        let both = build_contingency_set(&case, true, true).unwrap();
        let model = assemble_model(&case, &both, ModelVariant::TgScucCdr).unwrap();
        let ctg = CtgRef {
            kind: CtgKind::Line,
            element: 1,
        };
        let row = model
            .rows
            .iter()
            .find(|r| r.tag == ConstraintTag::CdrCap { bus: 3, ctg, t: 2 })
            .unwrap();
        assert_eq!(row.rhs, 30.0); // 0.3 of the 100 MW demand in period 2
    }

    #[test]
    fn cdr_objective_weight_is_probability_times_penalty() {
        let case = triangle();
        let both = build_contingency_set(&case, true, true).unwrap();
        let model = assemble_model(&case, &both, ModelVariant::TgScucCdr).unwrap();
        let index = model.index.as_ref().unwrap();
        // Line contingencies have probability 1/3; bus 3 penalty is 300.
        let var = index.cdr(2, 0, 0).unwrap();
        assert!((model.objective[var] - 100.0).abs() < 1e-12);
        // Generator contingencies have probability 1/2.
        let var = index.cdr(2, 3, 0).unwrap();
        assert!((model.objective[var] - 150.0).abs() < 1e-12);
    }

    #[test]
    fn outaged_elements_are_pinned_and_skipped() {
        let case = triangle();
        let both = build_contingency_set(&case, true, true).unwrap();
        let model = assemble_model(&case, &both, ModelVariant::TgScuc).unwrap();
        let index = model.index.as_ref().unwrap();

        // Contingency 0 is L1: its own flow variable is pinned to zero and
        // it has no Eq20/Eq21 rows, but other lines keep theirs.
        let fc = index.ctg_flow(0, 0, 0);
        assert_eq!((model.lower[fc], model.upper[fc]), (0.0, 0.0));
        let l1 = CtgRef { kind: CtgKind::Line, element: 1 };
        assert!(!model.rows.iter().any(|r| matches!(
            r.tag,
            ConstraintTag::CtgFlowDef { line: 1, ctg, .. } if ctg == l1
        )));
        assert!(model.rows.iter().any(|r| matches!(
            r.tag,
            ConstraintTag::CtgFlowDef { line: 2, ctg, .. } if ctg == l1
        )));

        // Contingency 3 is G1: its post-contingency output is pinned and it
        // has no redispatch rows.
        let pc = index.ctg_p(0, 3, 1);
        assert_eq!((model.lower[pc], model.upper[pc]), (0.0, 0.0));
        let g1 = CtgRef { kind: CtgKind::Generator, element: 1 };
        assert!(!model.rows.iter().any(|r| matches!(
            r.tag,
            ConstraintTag::CtgRampUp { gen: 1, ctg, .. } if ctg == g1
        )));
        assert!(model.rows.iter().any(|r| matches!(
            r.tag,
            ConstraintTag::CtgRampUp { gen: 2, ctg, .. } if ctg == g1
        )));
    }

    #[test]
    fn strict_min_up_emits_only_full_windows() {
        let case = triangle(); // unit 1 has min_up = 2, unit 2 has min_up = 1
        let both = build_contingency_set(&case, true, true).unwrap();
        let default_model = assemble_model(&case, &both, ModelVariant::TgScuc).unwrap();
        let strict_model = assemble_model_with(
            &case,
            &both,
            ModelVariant::TgScuc,
            FormulationOptions { strict_min_up: true },
        )
        .unwrap();
        assert_eq!(count_tag(&default_model.rows, 8), 4);
        // Unit 1 only gets t = 2 (window of two periods), unit 2 gets both.
        assert_eq!(count_tag(&strict_model.rows, 8), 3);
    }

    #[test]
    fn assembly_is_deterministic() {
        let case = triangle();
        let both = build_contingency_set(&case, true, true).unwrap();
        let a = assemble_model(&case, &both, ModelVariant::TgScucCdr).unwrap();
        let b = assemble_model(&case, &both, ModelVariant::TgScucCdr).unwrap();
        assert_eq!(a, b);
    }
}
