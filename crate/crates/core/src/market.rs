//! Post-solve market analytics: locational marginal prices from the
//! fixed-commitment pricing LP, settlement aggregates, and a commitment
//! status summary.

use crate::case::SystemCase;
use crate::model::{assemble_model, ConstraintTag, ModelError, ModelVariant};
use crate::mps::fmt_num;
use crate::schedule::ScheduleSolution;
use crate::solver::{solve_lp_with_bounds, LpStatus, SolverError};
use crate::topology::ContingencySet;
use crate::verify::{require_series, VerifyError};
use std::collections::BTreeMap;
use std::fmt;

/// How a generator was used across the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommitmentClass {
    AlwaysOn,
    AlwaysOff,
    Marginal,
}

impl CommitmentClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CommitmentClass::AlwaysOn => "always_on",
            CommitmentClass::AlwaysOff => "always_off",
            CommitmentClass::Marginal => "marginal",
        }
    }
}

impl fmt::Display for CommitmentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Settlement and commitment aggregates over one priced schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketReport {
    /// Price per (bus id, hour), from the pricing LP duals.
    pub lmp: BTreeMap<u32, Vec<f64>>,
    /// Unweighted mean of `lmp` over every (bus, hour) pair.
    pub average_lmp: f64,
    /// Sum of lmp times demand over every (bus, hour) pair.
    pub load_payment: f64,
    /// Sum of per-generator revenues.
    pub generator_revenue: f64,
    /// Revenue of each generator at its bus price.
    pub revenue_by_generator: BTreeMap<u32, f64>,
    pub commitment: BTreeMap<u32, CommitmentClass>,
    pub startups_first_period: u64,
    pub startups_later_periods: u64,
    pub committed_generator_hours: u64,
}

#[derive(Debug)]
pub enum MarketError {
    Model(ModelError),
    Solver(SolverError),
    /// The fixed-commitment pricing LP did not solve to optimality, which
    /// signals a schedule inconsistent with the case.
    PricingLp(LpStatus),
    Shape(VerifyError),
}

impl fmt::Display for MarketError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarketError::Model(e) => write!(f, "{e}"),
            MarketError::Solver(e) => write!(f, "{e}"),
            MarketError::PricingLp(status) => {
                write!(f, "pricing LP is {status:?} under the fixed commitment")
            }
            MarketError::Shape(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for MarketError {}

impl From<ModelError> for MarketError {
    fn from(e: ModelError) -> Self {
        MarketError::Model(e)
    }
}

impl From<SolverError> for MarketError {
    fn from(e: SolverError) -> Self {
        MarketError::Solver(e)
    }
}

impl From<VerifyError> for MarketError {
    fn from(e: VerifyError) -> Self {
        MarketError::Shape(e)
    }
}

/// Prices the schedule: rebuilds the variant model, pins every `u` and `v`
/// to the schedule's (rounded) values, solves the LP with integrality
/// relaxed, and returns the dual of each base-case balance row as
/// `lmp[bus][t]`. Positive price means positive marginal cost of serving
/// one extra MW at that bus and hour.
pub fn compute_lmp(
    case: &SystemCase,
    contingencies: &ContingencySet,
    variant: ModelVariant,
    sol: &ScheduleSolution,
) -> Result<BTreeMap<u32, Vec<f64>>, MarketError> {
    if sol.variant != variant {
        return Err(MarketError::Shape(VerifyError::ShapeMismatch {
            what: format!("solution was produced for {}, pricing {}", sol.variant, variant),
        }));
    }
    if sol.horizon != case.horizon {
        return Err(MarketError::Shape(VerifyError::ShapeMismatch {
            what: format!("horizon {} vs case {}", sol.horizon, case.horizon),
        }));
    }
    for gen in &case.generators {
        require_series(&sol.u, gen.id, case.horizon, "u")?;
        require_series(&sol.v, gen.id, case.horizon, "v")?;
    }

    let model = assemble_model(case, contingencies, variant)?;
    let index = model.index.as_ref().expect("assembled model has an index");
    let mut lower = model.lower.clone();
    let mut upper = model.upper.clone();
    for (g, gen) in case.generators.iter().enumerate() {
        for t in 0..case.horizon {
            let u = sol.u[&gen.id][t].round();
            let v = sol.v[&gen.id][t].round();
            lower[index.u(g, t)] = u;
            upper[index.u(g, t)] = u;
            lower[index.v(g, t)] = v;
            upper[index.v(g, t)] = v;
        }
    }

    let lp = solve_lp_with_bounds(&model, &lower, &upper)?;
    if lp.status != LpStatus::Optimal {
        return Err(MarketError::PricingLp(lp.status));
    }

    let mut lmp: BTreeMap<u32, Vec<f64>> = case
        .buses
        .iter()
        .map(|b| (b.id, vec![0.0; case.horizon]))
        .collect();
    for (i, row) in model.rows.iter().enumerate() {
        if let ConstraintTag::Balance { bus, t } = row.tag {
            lmp.get_mut(&bus).expect("balance row names a case bus")[(t - 1) as usize] =
                lp.duals[i];
        }
    }
    Ok(lmp)
}

/// Aggregates prices and the schedule into settlement totals and the
/// commitment classification.
pub fn market_summary(
    case: &SystemCase,
    lmp: &BTreeMap<u32, Vec<f64>>,
    sol: &ScheduleSolution,
) -> Result<MarketReport, MarketError> {
    let horizon = case.horizon;
    for bus in &case.buses {
        require_series(lmp, bus.id, horizon, "lmp")?;
    }
    for gen in &case.generators {
        require_series(&sol.u, gen.id, horizon, "u")?;
        require_series(&sol.v, gen.id, horizon, "v")?;
        require_series(&sol.p, gen.id, horizon, "p")?;
    }

    let mut price_sum = 0.0;
    let mut load_payment = 0.0;
    for (n, bus) in case.buses.iter().enumerate() {
        let prices = &lmp[&bus.id];
        for t in 0..horizon {
            price_sum += prices[t];
            load_payment += prices[t] * case.demand_at(n, t);
        }
    }
    let average_lmp = price_sum / (case.buses.len() * horizon) as f64;

    let mut revenue_by_generator = BTreeMap::new();
    let mut commitment = BTreeMap::new();
    let mut startups_first_period = 0u64;
    let mut startups_later_periods = 0u64;
    let mut committed_generator_hours = 0u64;
    for gen in &case.generators {
        let prices = &lmp[&gen.bus];
        let p = &sol.p[&gen.id];
        let revenue: f64 = (0..horizon).map(|t| prices[t] * p[t]).sum();
        revenue_by_generator.insert(gen.id, revenue);

        let u = &sol.u[&gen.id];
        let on_hours = u.iter().filter(|x| **x > 0.5).count();
        let class = if on_hours == horizon {
            CommitmentClass::AlwaysOn
        } else if on_hours == 0 {
            CommitmentClass::AlwaysOff
        } else {
            CommitmentClass::Marginal
        };
        commitment.insert(gen.id, class);
        committed_generator_hours += on_hours as u64;

        let v = &sol.v[&gen.id];
        startups_first_period += u64::from(v[0] > 0.5);
        startups_later_periods += v[1..].iter().filter(|x| **x > 0.5).count() as u64;
    }
    let generator_revenue = revenue_by_generator.values().sum();

    Ok(MarketReport {
        lmp: lmp.clone(),
        average_lmp,
        load_payment,
        generator_revenue,
        revenue_by_generator,
        commitment,
        startups_first_period,
        startups_later_periods,
        committed_generator_hours,
    })
}

/// Renders the price matrix as CSV, one row per bus, one column per hour.
pub fn lmp_csv(lmp: &BTreeMap<u32, Vec<f64>>, horizon: usize) -> String {
    let mut out = String::from("bus");
    for t in 1..=horizon {
        out.push_str(&format!(",t{t}"));
    }
    out.push('\n');
    for (bus, prices) in lmp {
        out.push_str(&bus.to_string());
        for x in prices {
            out.push(',');
            out.push_str(&fmt_num(*x));
        }
        out.push('\n');
    }
    out
}

/// Renders the report as key-value CSV: the aggregates first, then one
/// revenue and one commitment line per generator.
pub fn summary_csv(report: &MarketReport) -> String {
    let mut out = String::from("metric,value\n");
    out.push_str(&format!("average_lmp,{}\n", fmt_num(report.average_lmp)));
    out.push_str(&format!("load_payment,{}\n", fmt_num(report.load_payment)));
    out.push_str(&format!(
        "generator_revenue,{}\n",
        fmt_num(report.generator_revenue)
    ));
    out.push_str(&format!(
        "committed_generator_hours,{}\n",
        report.committed_generator_hours
    ));
    out.push_str(&format!(
        "startups_first_period,{}\n",
        report.startups_first_period
    ));
    out.push_str(&format!(
        "startups_later_periods,{}\n",
        report.startups_later_periods
    ));
    for (gen, revenue) in &report.revenue_by_generator {
        out.push_str(&format!("revenue_g{gen},{}\n", fmt_num(*revenue)));
    }
    for (gen, class) in &report.commitment {
        out.push_str(&format!("commitment_g{gen},{class}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::parse_case;
    use crate::schedule::extract_schedule;
    use crate::solver::solve_milp;
    use crate::topology::build_contingency_set;

    fn two_bus_doc(rate_normal: f64, rate_emergency: f64, loads: serde_json::Value) -> String {
        serde_json::json!({
            "name": "market",
            "reference_bus": 1,
            "horizon": 1,
            "buses": [{"id": 1, "name": "a"}, {"id": 2, "name": "b"}],
            "generators": [
                {"id": 1, "bus": 1, "energy_cost": 10.0, "no_load_cost": 0.0,
                 "startup_cost": 0.0, "p_min": 0.0, "p_max": 150.0,
                 "ramp_hourly": 150.0, "ramp_startup": 150.0, "ramp_shutdown": 150.0,
                 "ramp_10min": 150.0, "min_up": 1, "min_down": 1},
                {"id": 2, "bus": 2, "energy_cost": 50.0, "no_load_cost": 0.0,
                 "startup_cost": 0.0, "p_min": 0.0, "p_max": 120.0,
                 "ramp_hourly": 120.0, "ramp_startup": 120.0, "ramp_shutdown": 120.0,
                 "ramp_10min": 120.0, "min_up": 1, "min_down": 1}
            ],
            "lines": [
                {"id": 1, "from": 1, "to": 2, "susceptance": 10.0,
                 "rate_normal": rate_normal, "rate_emergency": rate_emergency},
                {"id": 2, "from": 1, "to": 2, "susceptance": 10.0,
                 "rate_normal": rate_normal, "rate_emergency": rate_emergency}
            ],
            "load": loads,
            "cdr": {"cap_fraction": 0.3, "default_penalty": 120.0}
        })
        .to_string()
    }

    fn solve_and_price(
        doc: &str,
    ) -> (SystemCase, ScheduleSolution, BTreeMap<u32, Vec<f64>>) {
        let case = parse_case(doc).unwrap();
        let ctgs = build_contingency_set(&case, true, false).unwrap();
        let model = assemble_model(&case, &ctgs, ModelVariant::TScuc).unwrap();
        let milp = solve_milp(&model, 0.0, None).unwrap();
        let sol = extract_schedule(&case, model.index.as_ref().unwrap(), &milp);
        let lmp = compute_lmp(&case, &ctgs, ModelVariant::TScuc, &sol).unwrap();
        (case, sol, lmp)
    }

    #[test]
    fn uncongested_network_prices_uniformly_at_marginal_cost() {
        let doc = two_bus_doc(100.0, 120.0, serde_json::json!({"2": [50.0]}));
        let (_, _, lmp) = solve_and_price(&doc);
        assert!((lmp[&1][0] - 10.0).abs() < 1e-7, "bus 1: {}", lmp[&1][0]);
        assert!((lmp[&2][0] - 10.0).abs() < 1e-7, "bus 2: {}", lmp[&2][0]);
    }

    #[test]
    fn congestion_separates_prices_by_local_marginal_unit() {
        let doc = two_bus_doc(30.0, 80.0, serde_json::json!({"2": [100.0]}));
        let (_, sol, lmp) = solve_and_price(&doc);
        assert_eq!(sol.flows[&1], vec![30.0]);
        assert_eq!(sol.flows[&2], vec![30.0]);
        assert!((lmp[&1][0] - 10.0).abs() < 1e-7, "bus 1: {}", lmp[&1][0]);
        assert!((lmp[&2][0] - 50.0).abs() < 1e-7, "bus 2: {}", lmp[&2][0]);
    }

    #[test]
    fn finite_difference_confirms_both_duals() {
        let base = two_bus_doc(30.0, 80.0, serde_json::json!({"2": [100.0]}));
        let (case, sol, lmp) = solve_and_price(&base);
        let eps = 1e-3;
        let bumps = [
            (serde_json::json!({"1": [eps], "2": [100.0]}), 1u32),
            (serde_json::json!({"2": [100.0 + eps]}), 2u32),
        ];
        let objective_at = |doc: &str, sol: &ScheduleSolution| -> f64 {
            let case = parse_case(doc).unwrap();
            let ctgs = build_contingency_set(&case, true, false).unwrap();
            let model = assemble_model(&case, &ctgs, ModelVariant::TScuc).unwrap();
            let index = model.index.as_ref().unwrap();
            let mut lower = model.lower.clone();
            let mut upper = model.upper.clone();
            for (g, gen) in case.generators.iter().enumerate() {
                for t in 0..case.horizon {
                    lower[index.u(g, t)] = sol.u[&gen.id][t];
                    upper[index.u(g, t)] = sol.u[&gen.id][t];
                    lower[index.v(g, t)] = sol.v[&gen.id][t];
                    upper[index.v(g, t)] = sol.v[&gen.id][t];
                }
            }
            let lp = solve_lp_with_bounds(&model, &lower, &upper).unwrap();
            assert_eq!(lp.status, LpStatus::Optimal);
            lp.objective
        };
        let base_obj = objective_at(&base, &sol);
        let _ = case;
        for (loads, bus) in bumps {
            let doc = two_bus_doc(30.0, 80.0, loads);
            let bumped = objective_at(&doc, &sol);
            let fd = (bumped - base_obj) / eps;
            let dual = lmp[&bus][0];
            assert!(
                (fd - dual).abs() <= 1e-4 * dual.abs().max(1.0),
                "bus {bus}: finite difference {fd} vs dual {dual}"
            );
        }
    }

    #[test]
    fn summary_identities_hold_on_a_hand_built_report() {
        let doc = serde_json::json!({
            "name": "threegen",
            "reference_bus": 1,
            "horizon": 2,
            "buses": [{"id": 1, "name": "a"}, {"id": 2, "name": "b"}],
            "generators": [
                {"id": 1, "bus": 1, "energy_cost": 10.0, "no_load_cost": 0.0,
                 "startup_cost": 0.0, "p_min": 0.0, "p_max": 100.0,
                 "ramp_hourly": 100.0, "ramp_startup": 100.0, "ramp_shutdown": 100.0,
                 "ramp_10min": 100.0, "min_up": 1, "min_down": 1},
                {"id": 2, "bus": 1, "energy_cost": 20.0, "no_load_cost": 0.0,
                 "startup_cost": 0.0, "p_min": 0.0, "p_max": 100.0,
                 "ramp_hourly": 100.0, "ramp_startup": 100.0, "ramp_shutdown": 100.0,
                 "ramp_10min": 100.0, "min_up": 1, "min_down": 1},
                {"id": 3, "bus": 2, "energy_cost": 30.0, "no_load_cost": 0.0,
                 "startup_cost": 0.0, "p_min": 0.0, "p_max": 100.0,
                 "ramp_hourly": 100.0, "ramp_startup": 100.0, "ramp_shutdown": 100.0,
                 "ramp_10min": 100.0, "min_up": 1, "min_down": 1}
            ],
            "lines": [
                {"id": 1, "from": 1, "to": 2, "susceptance": 10.0,
                 "rate_normal": 100.0, "rate_emergency": 120.0},
                {"id": 2, "from": 1, "to": 2, "susceptance": 10.0,
                 "rate_normal": 100.0, "rate_emergency": 120.0}
            ],
            "load": {"2": [60.0, 40.0]},
            "cdr": {"cap_fraction": 0.3, "default_penalty": 120.0}
        })
        .to_string();
        let case = parse_case(&doc).unwrap();
        let mk = |pairs: [(u32, [f64; 2]); 3]| {
            pairs
                .into_iter()
                .map(|(id, vals)| (id, vals.to_vec()))
                .collect::<BTreeMap<u32, Vec<f64>>>()
        };
        let sol = ScheduleSolution {
            variant: ModelVariant::TScuc,
            status: crate::solver::MilpStatus::Optimal,
            objective: 0.0,
            achieved_gap: None,
            horizon: 2,
            u: mk([(1, [1.0, 1.0]), (2, [1.0, 0.0]), (3, [0.0, 0.0])]),
            v: mk([(1, [1.0, 0.0]), (2, [1.0, 0.0]), (3, [0.0, 0.0])]),
            p: mk([(1, [50.0, 40.0]), (2, [10.0, 0.0]), (3, [0.0, 0.0])]),
            r: mk([(1, [0.0, 0.0]), (2, [0.0, 0.0]), (3, [0.0, 0.0])]),
            flows: [(1, vec![30.0, 20.0]), (2, vec![30.0, 20.0])]
                .into_iter()
                .collect(),
            angles: [(1, vec![0.0, 0.0]), (2, vec![-3.0, -2.0])]
                .into_iter()
                .collect(),
            contingencies: BTreeMap::new(),
        };
        let lmp: BTreeMap<u32, Vec<f64>> =
            [(1, vec![10.0, 20.0]), (2, vec![30.0, 40.0])].into_iter().collect();

        let report = market_summary(&case, &lmp, &sol).unwrap();
        assert_eq!(report.average_lmp, 25.0);
        assert_eq!(report.load_payment, 30.0 * 60.0 + 40.0 * 40.0);
        assert_eq!(report.revenue_by_generator[&1], 10.0 * 50.0 + 20.0 * 40.0);
        assert_eq!(report.revenue_by_generator[&2], 10.0 * 10.0);
        assert_eq!(report.revenue_by_generator[&3], 0.0);
        assert_eq!(report.generator_revenue, 1300.0 + 100.0);
        assert_eq!(report.commitment[&1], CommitmentClass::AlwaysOn);
        assert_eq!(report.commitment[&2], CommitmentClass::Marginal);
        assert_eq!(report.commitment[&3], CommitmentClass::AlwaysOff);
        assert_eq!(report.startups_first_period, 2);
        assert_eq!(report.startups_later_periods, 0);
        assert_eq!(report.committed_generator_hours, 3);

        let class_counts = report.commitment.values().fold([0usize; 3], |mut acc, c| {
            match c {
                CommitmentClass::AlwaysOn => acc[0] += 1,
                CommitmentClass::AlwaysOff => acc[1] += 1,
                CommitmentClass::Marginal => acc[2] += 1,
            }
            acc
        });
        assert_eq!(class_counts.iter().sum::<usize>(), case.generators.len());

        let csv = summary_csv(&report);
        assert!(csv.starts_with("metric,value\naverage_lmp,25\n"));
        assert!(csv.contains("\nload_payment,3400\n"));
        assert!(csv.contains("\ncommitment_g2,marginal\n"));
        assert!(csv.contains("\nrevenue_g1,1300\n"));

        let matrix = lmp_csv(&lmp, 2);
        assert_eq!(matrix, "bus,t1,t2\n1,10,20\n2,30,40\n");
    }

    #[test]
    fn uniform_price_settlement_balances_payment_and_revenue() {
        let doc = two_bus_doc(100.0, 120.0, serde_json::json!({"2": [50.0]}));
        let (case, sol, lmp) = solve_and_price(&doc);
        let report = market_summary(&case, &lmp, &sol).unwrap();
        assert!((report.load_payment - 500.0).abs() < 1e-6);
        assert!((report.generator_revenue - 500.0).abs() < 1e-6);
        assert!((report.average_lmp - 10.0).abs() < 1e-7);
    }

    #[test]
    fn all_off_schedule_summarizes_to_zero() {
        let doc = two_bus_doc(100.0, 120.0, serde_json::json!({"2": [0.0]}));
        let (case, sol, lmp) = solve_and_price(&doc);
        let report = market_summary(&case, &lmp, &sol).unwrap();
        assert_eq!(report.committed_generator_hours, 0);
        assert_eq!(report.load_payment, 0.0);
        assert_eq!(report.generator_revenue, 0.0);
        for class in report.commitment.values() {
            assert_eq!(*class, CommitmentClass::AlwaysOff);
        }
    }

    #[test]
    fn inconsistent_commitment_fails_as_pricing_infeasibility() {
        let doc = two_bus_doc(100.0, 120.0, serde_json::json!({"2": [50.0]}));
        let case = parse_case(&doc).unwrap();
        let ctgs = build_contingency_set(&case, true, false).unwrap();
        let model = assemble_model(&case, &ctgs, ModelVariant::TScuc).unwrap();
        let milp = solve_milp(&model, 0.0, None).unwrap();
        let mut sol = extract_schedule(&case, model.index.as_ref().unwrap(), &milp);
        for series in sol.u.values_mut().chain(sol.v.values_mut()) {
            series.fill(0.0);
        }
        let err = compute_lmp(&case, &ctgs, ModelVariant::TScuc, &sol).unwrap_err();
        assert!(matches!(err, MarketError::PricingLp(LpStatus::Infeasible)));
    }

    #[test]
    fn variant_mismatch_is_rejected() {
        let doc = two_bus_doc(100.0, 120.0, serde_json::json!({"2": [50.0]}));
        let (case, sol, _) = solve_and_price(&doc);
        let ctgs = build_contingency_set(&case, true, false).unwrap();
        let err = compute_lmp(&case, &ctgs, ModelVariant::TScucCdr, &sol).unwrap_err();
        assert!(matches!(err, MarketError::Shape(_)));
    }
}
