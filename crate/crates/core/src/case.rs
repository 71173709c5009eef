//! System case files: buses, generators, lines, hourly demand, and CDR
//! settings.
//!
//! A case file is a JSON document with lower_snake_case keys. [`parse_case`]
//! reads and fully validates one; every case that parses satisfies the data
//! invariants relied on by the rest of the crate (unique ids, resolvable bus
//! references, connected network, nonnegative demand of horizon length).
//! [`validate_case`] re-checks a built case and adds advisory warnings such
//! as a system-wide capacity shortfall.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// A network node.
#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: u32,
    pub name: String,
}

/// A dispatchable generating unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: u32,
    /// Bus the unit is connected to.
    pub bus: u32,
    /// Linear energy cost, currency per MWh.
    pub energy_cost: f64,
    /// No-load (commitment) cost, currency per hour on.
    pub no_load_cost: f64,
    /// Startup cost, currency per start.
    pub startup_cost: f64,
    pub p_min: f64, // MW
    pub p_max: f64, // MW
    /// Hour-to-hour ramp limit, MW per hour.
    pub ramp_hourly: f64,
    /// Output limit in the first hour after startup, MW.
    pub ramp_startup: f64,
    /// Output limit in the last hour before shutdown, MW.
    pub ramp_shutdown: f64,
    /// 10-minute corrective ramp capability, MW.
    pub ramp_10min: f64,
    /// Minimum up time, hours.
    pub min_up: u32,
    /// Minimum down time, hours.
    pub min_down: u32,
    /// Commitment state in the hour before the horizon starts.
    pub initial_on: bool,
}

/// A transmission line (or transformer branch).
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: u32,
    /// Sending bus.
    pub from: u32,
    /// Receiving bus.
    pub to: u32,
    /// Susceptance, MW per radian (already scaled by the MVA base).
    pub susceptance: f64,
    /// Normal (base-case) flow rating, MW.
    pub rate_normal: f64,
    /// Short-time emergency rating used post-contingency, MW.
    pub rate_emergency: f64,
}

/// Corrective demand response settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CdrConfig {
    /// Fraction of bus demand that may be curtailed post-contingency.
    pub cap_fraction: f64,
    /// Curtailment penalty per bus position, currency per MWh.
    pub penalty: Vec<f64>,
    /// Whether each bus position participates in CDR.
    pub participating: Vec<bool>,
}

/// A parsed and validated system case.
///
/// Buses, generators, and lines are sorted by id; "positions" throughout the
/// crate are indices into these sorted vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemCase {
    pub name: String,
    pub reference_bus: u32,
    /// Number of hourly periods in the horizon.
    pub horizon: usize,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub lines: Vec<Line>,
    /// Demand in MW, indexed `[bus position][period]`.
    pub demand: Vec<Vec<f64>>,
    pub cdr: CdrConfig,
    gens_at_bus: Vec<Vec<usize>>,
    lines_in: Vec<Vec<usize>>,
    lines_out: Vec<Vec<usize>>,
}

impl SystemCase {
    /// Position of a bus id in `buses`.
    pub fn bus_pos(&self, id: u32) -> Option<usize> {
        self.buses.binary_search_by_key(&id, |b| b.id).ok()
    }

    /// Position of a generator id in `generators`.
    pub fn gen_pos(&self, id: u32) -> Option<usize> {
        self.generators.binary_search_by_key(&id, |g| g.id).ok()
    }

    /// Position of a line id in `lines`.
    pub fn line_pos(&self, id: u32) -> Option<usize> {
        self.lines.binary_search_by_key(&id, |k| k.id).ok()
    }

    /// Positions of the generators connected to the bus at `bus_pos`.
    pub fn gens_at(&self, bus_pos: usize) -> &[usize] {
        &self.gens_at_bus[bus_pos]
    }

    /// Positions of the lines whose receiving bus is at `bus_pos`.
    pub fn lines_into(&self, bus_pos: usize) -> &[usize] {
        &self.lines_in[bus_pos]
    }

    /// Positions of the lines whose sending bus is at `bus_pos`.
    pub fn lines_out_of(&self, bus_pos: usize) -> &[usize] {
        &self.lines_out[bus_pos]
    }

    /// Demand at a bus position in period `t` (0-based).
    pub fn demand_at(&self, bus_pos: usize, t: usize) -> f64 {
        self.demand[bus_pos][t]
    }

    /// Largest single-period total system demand, MW.
    pub fn peak_load(&self) -> f64 {
        (0..self.horizon)
            .map(|t| self.demand.iter().map(|d| d[t]).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Sum of generator maximum outputs, MW.
    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.p_max).sum()
    }

    fn rebuild_adjacency(&mut self) {
        let n = self.buses.len();
        self.gens_at_bus = vec![Vec::new(); n];
        self.lines_in = vec![Vec::new(); n];
        self.lines_out = vec![Vec::new(); n];
        for (gi, g) in self.generators.iter().enumerate() {
            let bp = self.bus_pos(g.bus).expect("validated bus reference");
            self.gens_at_bus[bp].push(gi);
        }
        for (ki, k) in self.lines.iter().enumerate() {
            let fp = self.bus_pos(k.from).expect("validated bus reference");
            let tp = self.bus_pos(k.to).expect("validated bus reference");
            self.lines_out[fp].push(ki);
            self.lines_in[tp].push(ki);
        }
    }
}

/// Errors produced while parsing or validating a case document.
#[derive(Debug, Clone, PartialEq)]
pub enum CaseError {
    /// JSON syntax or shape error, with 1-based position.
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    /// An id appears more than once within its section.
    Duplicate { kind: &'static str, id: u32 },
    /// Something refers to a bus id that does not exist.
    UnknownBus { referrer: String, bus: u32 },
    /// A field value violates a data invariant.
    Invalid {
        entity: String,
        field: &'static str,
        message: String,
    },
    /// The line graph does not connect every bus.
    Disconnected { bus: u32 },
}

impl fmt::Display for CaseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseError::Syntax {
                line,
                column,
                message,
            } => write!(f, "syntax error at line {line}, column {column}: {message}"),
            CaseError::Duplicate { kind, id } => write!(f, "duplicate {kind} id {id}"),
            CaseError::UnknownBus { referrer, bus } => {
                write!(f, "{referrer} refers to unknown bus {bus}")
            }
            CaseError::Invalid {
                entity,
                field,
                message,
            } => write!(f, "{entity}: field \"{field}\" {message}"),
            CaseError::Disconnected { bus } => {
                write!(f, "bus {bus} is not connected to the rest of the network")
            }
        }
    }
}

impl std::error::Error for CaseError {}

/// Severity of a [`Diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A finding from [`validate_case`].
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

// Wire-format documents. These mirror the JSON schema exactly and are
// converted to the resolved types after validation.

#[derive(Debug, Deserialize, Serialize)]
struct CaseDoc {
    name: String,
    reference_bus: u32,
    horizon: usize,
    buses: Vec<BusDoc>,
    generators: Vec<GeneratorDoc>,
    lines: Vec<LineDoc>,
    #[serde(default)]
    load: BTreeMap<String, Vec<f64>>,
    cdr: CdrDoc,
}

#[derive(Debug, Deserialize, Serialize)]
struct BusDoc {
    id: u32,
    name: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct GeneratorDoc {
    id: u32,
    bus: u32,
    energy_cost: f64,
    no_load_cost: f64,
    startup_cost: f64,
    p_min: f64,
    p_max: f64,
    ramp_hourly: f64,
    ramp_startup: f64,
    ramp_shutdown: f64,
    ramp_10min: f64,
    min_up: u32,
    min_down: u32,
    #[serde(default)]
    initial_on: bool,
}

#[derive(Debug, Deserialize, Serialize)]
struct LineDoc {
    id: u32,
    from: u32,
    to: u32,
    susceptance: f64,
    rate_normal: f64,
    rate_emergency: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct CdrDoc {
    #[serde(default = "default_cap_fraction")]
    cap_fraction: f64,
    #[serde(default)]
    penalty: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default_penalty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    participating_buses: Option<Vec<u32>>,
}

fn default_cap_fraction() -> f64 {
    0.3
}

/// Parses and validates a JSON case document.
pub fn parse_case(text: &str) -> Result<SystemCase, CaseError> {
    let doc: CaseDoc = serde_json::from_str(text).map_err(|e| CaseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build_case(doc)
}

fn invalid(entity: impl Into<String>, field: &'static str, message: impl Into<String>) -> CaseError {
    CaseError::Invalid {
        entity: entity.into(),
        field,
        message: message.into(),
    }
}

fn require_nonneg(entity: &str, field: &'static str, value: f64) -> Result<(), CaseError> {
    if !value.is_finite() || value < 0.0 {
        return Err(invalid(
            entity,
            field,
            format!("must be finite and nonnegative, got {value}"),
        ));
    }
    Ok(())
}

fn build_case(doc: CaseDoc) -> Result<SystemCase, CaseError> {
    if doc.horizon == 0 {
        return Err(invalid("case", "horizon", "must be at least 1"));
    }
    if doc.buses.is_empty() {
        return Err(invalid("case", "buses", "must contain at least one bus"));
    }

    let mut buses: Vec<Bus> = doc
        .buses
        .into_iter()
        .map(|b| Bus {
            id: b.id,
            name: b.name,
        })
        .collect();
    buses.sort_by_key(|b| b.id);
    for pair in buses.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(CaseError::Duplicate {
                kind: "bus",
                id: pair[0].id,
            });
        }
    }
    let bus_pos = |id: u32| buses.binary_search_by_key(&id, |b| b.id).ok();

    if bus_pos(doc.reference_bus).is_none() {
        return Err(CaseError::UnknownBus {
            referrer: "reference_bus".into(),
            bus: doc.reference_bus,
        });
    }

    let mut generators: Vec<Generator> = doc
        .generators
        .into_iter()
        .map(|g| Generator {
            id: g.id,
            bus: g.bus,
            energy_cost: g.energy_cost,
            no_load_cost: g.no_load_cost,
            startup_cost: g.startup_cost,
            p_min: g.p_min,
            p_max: g.p_max,
            ramp_hourly: g.ramp_hourly,
            ramp_startup: g.ramp_startup,
            ramp_shutdown: g.ramp_shutdown,
            ramp_10min: g.ramp_10min,
            min_up: g.min_up,
            min_down: g.min_down,
            initial_on: g.initial_on,
        })
        .collect();
    generators.sort_by_key(|g| g.id);
    for pair in generators.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(CaseError::Duplicate {
                kind: "generator",
                id: pair[0].id,
            });
        }
    }
    for g in &generators {
        let entity = format!("generator {}", g.id);
        if bus_pos(g.bus).is_none() {
            return Err(CaseError::UnknownBus {
                referrer: entity,
                bus: g.bus,
            });
        }
        require_nonneg(&entity, "energy_cost", g.energy_cost)?;
        require_nonneg(&entity, "no_load_cost", g.no_load_cost)?;
        require_nonneg(&entity, "startup_cost", g.startup_cost)?;
        require_nonneg(&entity, "p_min", g.p_min)?;
        require_nonneg(&entity, "ramp_hourly", g.ramp_hourly)?;
        require_nonneg(&entity, "ramp_startup", g.ramp_startup)?;
        require_nonneg(&entity, "ramp_shutdown", g.ramp_shutdown)?;
        require_nonneg(&entity, "ramp_10min", g.ramp_10min)?;
        if !g.p_max.is_finite() || g.p_max < g.p_min {
            return Err(invalid(
                &entity,
                "p_max",
                format!("must be at least p_min ({}), got {}", g.p_min, g.p_max),
            ));
        }
        if g.min_up < 1 {
            return Err(invalid(&entity, "min_up", "must be at least 1"));
        }
        if g.min_down < 1 {
            return Err(invalid(&entity, "min_down", "must be at least 1"));
        }
    }

    let mut lines: Vec<Line> = doc
        .lines
        .into_iter()
        .map(|k| Line {
            id: k.id,
            from: k.from,
            to: k.to,
            susceptance: k.susceptance,
            rate_normal: k.rate_normal,
            rate_emergency: k.rate_emergency,
        })
        .collect();
    lines.sort_by_key(|k| k.id);
    for pair in lines.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(CaseError::Duplicate {
                kind: "line",
                id: pair[0].id,
            });
        }
    }
    for k in &lines {
        let entity = format!("line {}", k.id);
        for (field, bus) in [("from", k.from), ("to", k.to)] {
            if bus_pos(bus).is_none() {
                return Err(CaseError::UnknownBus {
                    referrer: format!("{entity} ({field})"),
                    bus,
                });
            }
        }
        if k.from == k.to {
            return Err(invalid(&entity, "to", "must differ from the sending bus"));
        }
        if !k.susceptance.is_finite() || k.susceptance <= 0.0 {
            return Err(invalid(
                &entity,
                "susceptance",
                format!("must be positive, got {}", k.susceptance),
            ));
        }
        if !k.rate_normal.is_finite() || k.rate_normal <= 0.0 {
            return Err(invalid(
                &entity,
                "rate_normal",
                format!("must be positive, got {}", k.rate_normal),
            ));
        }
        if !k.rate_emergency.is_finite() || k.rate_emergency < k.rate_normal {
            return Err(invalid(
                &entity,
                "rate_emergency",
                format!(
                    "must be at least rate_normal ({}), got {}",
                    k.rate_normal, k.rate_emergency
                ),
            ));
        }
    }

    // Demand matrix, zero for buses absent from the load map.
    let mut demand = vec![vec![0.0; doc.horizon]; buses.len()];
    for (key, values) in &doc.load {
        let id: u32 = key.parse().map_err(|_| {
            invalid("load", "load", format!("key \"{key}\" is not a bus id"))
        })?;
        let pos = bus_pos(id).ok_or(CaseError::UnknownBus {
            referrer: "load".into(),
            bus: id,
        })?;
        if values.len() != doc.horizon {
            return Err(invalid(
                format!("load for bus {id}"),
                "load",
                format!("expected {} periods, got {}", doc.horizon, values.len()),
            ));
        }
        for (t, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(invalid(
                    format!("load for bus {id}"),
                    "load",
                    format!("period {} must be finite and nonnegative, got {v}", t + 1),
                ));
            }
        }
        demand[pos] = values.clone();
    }

    // CDR settings, resolved to dense per-bus vectors.
    let cdr_doc = doc.cdr;
    if !cdr_doc.cap_fraction.is_finite()
        || !(0.0..=1.0).contains(&cdr_doc.cap_fraction)
    {
        return Err(invalid(
            "cdr",
            "cap_fraction",
            format!("must lie in [0, 1], got {}", cdr_doc.cap_fraction),
        ));
    }
    let mut penalty = vec![0.0; buses.len()];
    for (key, value) in &cdr_doc.penalty {
        let id: u32 = key.parse().map_err(|_| {
            invalid("cdr", "penalty", format!("key \"{key}\" is not a bus id"))
        })?;
        let pos = bus_pos(id).ok_or(CaseError::UnknownBus {
            referrer: "cdr.penalty".into(),
            bus: id,
        })?;
        require_nonneg(&format!("cdr penalty for bus {id}"), "penalty", *value)?;
        penalty[pos] = *value;
    }
    for (pos, bus) in buses.iter().enumerate() {
        if cdr_doc.penalty.contains_key(&bus.id.to_string()) {
            continue;
        }
        match cdr_doc.default_penalty {
            Some(d) => {
                require_nonneg("cdr", "default_penalty", d)?;
                penalty[pos] = d;
            }
            None => {
                return Err(invalid(
                    "cdr",
                    "penalty",
                    format!("bus {} has no penalty and no default_penalty is given", bus.id),
                ));
            }
        }
    }
    let participating = match &cdr_doc.participating_buses {
        Some(list) => {
            let mut flags = vec![false; buses.len()];
            for id in list {
                let pos = bus_pos(*id).ok_or(CaseError::UnknownBus {
                    referrer: "cdr.participating_buses".into(),
                    bus: *id,
                })?;
                flags[pos] = true;
            }
            flags
        }
        // By default every bus that carries load participates.
        None => demand
            .iter()
            .map(|d| d.iter().any(|v| *v > 0.0))
            .collect(),
    };

    let mut case = SystemCase {
        name: doc.name,
        reference_bus: doc.reference_bus,
        horizon: doc.horizon,
        buses,
        generators,
        lines,
        demand,
        cdr: CdrConfig {
            cap_fraction: cdr_doc.cap_fraction,
            penalty,
            participating,
        },
        gens_at_bus: Vec::new(),
        lines_in: Vec::new(),
        lines_out: Vec::new(),
    };
    case.rebuild_adjacency();

    // Connectivity over the undirected line graph.
    if let Some(bus) = first_unreachable(&case) {
        return Err(CaseError::Disconnected { bus });
    }
    Ok(case)
}

fn first_unreachable(case: &SystemCase) -> Option<u32> {
    let n = case.buses.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(b) = stack.pop() {
        for &k in case.lines_out_of(b).iter().chain(case.lines_into(b)) {
            let line = &case.lines[k];
            for end in [line.from, line.to] {
                let p = case.bus_pos(end).unwrap();
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
    }
    seen.iter()
        .position(|s| !s)
        .map(|p| case.buses[p].id)
}

/// Re-checks a built case and reports advisory findings.
///
/// Cases accepted by [`parse_case`] never produce errors here; warnings cover
/// conditions that are legal but usually unintended, such as total generation
/// capacity below the peak load.
pub fn validate_case(case: &SystemCase) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let peak = case.peak_load();
    let capacity = case.total_capacity();
    if capacity < peak {
        out.push(Diagnostic {
            severity: Severity::Warning,
            message: format!(
                "total generation capacity {capacity} MW is below the peak load {peak} MW"
            ),
        });
    }
    for g in &case.generators {
        if g.ramp_startup < g.p_min {
            out.push(Diagnostic {
                severity: Severity::Warning,
                message: format!(
                    "generator {}: ramp_startup {} MW is below p_min {} MW, the unit can never start",
                    g.id, g.ramp_startup, g.p_min
                ),
            });
        }
    }
    out
}

/// Returns a copy of the case with every demand value multiplied by `factor`.
pub fn scale_loads(case: &SystemCase, factor: f64) -> Result<SystemCase, CaseError> {
    if !factor.is_finite() || factor < 0.0 {
        return Err(invalid(
            "scale_loads",
            "factor",
            format!("must be finite and nonnegative, got {factor}"),
        ));
    }
    let mut scaled = case.clone();
    for row in &mut scaled.demand {
        for v in row {
            *v *= factor;
        }
    }
    Ok(scaled)
}

/// Serializes a case back to its JSON document form.
///
/// The output is fully resolved: every bus gets an explicit load vector,
/// penalty entry, and participation flag. Re-parsing the output yields a case
/// structurally equal to the input, and serialization is byte-deterministic.
pub fn serialize_case(case: &SystemCase) -> String {
    let doc = CaseDoc {
        name: case.name.clone(),
        reference_bus: case.reference_bus,
        horizon: case.horizon,
        buses: case
            .buses
            .iter()
            .map(|b| BusDoc {
                id: b.id,
                name: b.name.clone(),
            })
            .collect(),
        generators: case
            .generators
            .iter()
            .map(|g| GeneratorDoc {
                id: g.id,
                bus: g.bus,
                energy_cost: g.energy_cost,
                no_load_cost: g.no_load_cost,
                startup_cost: g.startup_cost,
                p_min: g.p_min,
                p_max: g.p_max,
                ramp_hourly: g.ramp_hourly,
                ramp_startup: g.ramp_startup,
                ramp_shutdown: g.ramp_shutdown,
                ramp_10min: g.ramp_10min,
                min_up: g.min_up,
                min_down: g.min_down,
                initial_on: g.initial_on,
            })
            .collect(),
        lines: case
            .lines
            .iter()
            .map(|k| LineDoc {
                id: k.id,
                from: k.from,
                to: k.to,
                susceptance: k.susceptance,
                rate_normal: k.rate_normal,
                rate_emergency: k.rate_emergency,
            })
            .collect(),
        load: case
            .buses
            .iter()
            .enumerate()
            .map(|(pos, b)| (b.id.to_string(), case.demand[pos].clone()))
            .collect(),
        cdr: CdrDoc {
            cap_fraction: case.cdr.cap_fraction,
            penalty: case
                .buses
                .iter()
                .enumerate()
                .map(|(pos, b)| (b.id.to_string(), case.cdr.penalty[pos]))
                .collect(),
            default_penalty: None,
            participating_buses: Some(
                case.buses
                    .iter()
                    .enumerate()
                    .filter(|(pos, _)| case.cdr.participating[*pos])
                    .map(|(_, b)| b.id)
                    .collect(),
            ),
        },
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serialization");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_doc() -> String {
        r#"{
            "name": "minimal",
            "reference_bus": 1,
            "horizon": 2,
            "buses": [{"id": 1, "name": "only"}],
            "generators": [{
                "id": 1, "bus": 1,
                "energy_cost": 10.0, "no_load_cost": 5.0, "startup_cost": 100.0,
                "p_min": 0.0, "p_max": 100.0,
                "ramp_hourly": 100.0, "ramp_startup": 100.0, "ramp_shutdown": 100.0,
                "ramp_10min": 50.0,
                "min_up": 1, "min_down": 1
            }],
            "lines": [],
            "load": {"1": [40.0, 50.0]},
            "cdr": {"cap_fraction": 0.3, "penalty": {"1": 200.0}}
        }"#
        .to_string()
    }

    #[test]
    fn parses_minimal_case() {
        let case = parse_case(&minimal_doc()).unwrap();
        assert_eq!(case.buses.len(), 1);
        assert_eq!(case.generators.len(), 1);
        assert_eq!(case.lines.len(), 0);
        assert_eq!(case.horizon, 2);
        assert_eq!(case.demand_at(0, 1), 50.0);
        assert_eq!(case.cdr.penalty, vec![200.0]);
        assert_eq!(case.cdr.participating, vec![true]);
        assert!(!case.generators[0].initial_on);
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_case("{\n  \"name\": }").unwrap_err();
        match err {
            CaseError::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn missing_cdr_section_is_a_shape_error() {
        let doc = minimal_doc().replace(
            r#""cdr": {"cap_fraction": 0.3, "penalty": {"1": 200.0}}"#,
            r#""cdr2": {}"#,
        );
        let err = parse_case(&doc).unwrap_err();
        assert!(matches!(err, CaseError::Syntax { .. }), "{err}");
        assert!(err.to_string().contains("cdr"));
    }

    #[test]
    fn unknown_generator_bus_is_rejected() {
        let doc = minimal_doc().replace(r#""id": 1, "bus": 1,"#, r#""id": 1, "bus": 9,"#);
        let err = parse_case(&doc).unwrap_err();
        assert_eq!(
            err,
            CaseError::UnknownBus {
                referrer: "generator 1".into(),
                bus: 9
            }
        );
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let doc = minimal_doc().replace(
            r#"[{"id": 1, "name": "only"}]"#,
            r#"[{"id": 1, "name": "a"}, {"id": 1, "name": "b"}]"#,
        );
        let err = parse_case(&doc).unwrap_err();
        assert_eq!(err, CaseError::Duplicate { kind: "bus", id: 1 });
    }

    #[test]
    fn wrong_load_length_is_rejected() {
        let doc = minimal_doc().replace(r#""load": {"1": [40.0, 50.0]}"#, r#""load": {"1": [40.0]}"#);
        let err = parse_case(&doc).unwrap_err();
        match err {
            CaseError::Invalid { entity, .. } => assert_eq!(entity, "load for bus 1"),
            other => panic!("expected invalid load, got {other:?}"),
        }
    }

    #[test]
    fn emergency_rating_below_normal_is_rejected() {
        let err = parse_case(&two_bus_doc(60.0, 45.0)).unwrap_err();
        match err {
            CaseError::Invalid { field, .. } => assert_eq!(field, "rate_emergency"),
            other => panic!("expected invalid rating, got {other:?}"),
        }
    }

    fn two_bus_doc(rate_normal: f64, rate_emergency: f64) -> String {
        format!(
            r#"{{
            "name": "two-bus",
            "reference_bus": 1,
            "horizon": 1,
            "buses": [{{"id": 1, "name": "gen"}}, {{"id": 2, "name": "load"}}],
            "generators": [{{
                "id": 1, "bus": 1,
                "energy_cost": 10.0, "no_load_cost": 0.0, "startup_cost": 0.0,
                "p_min": 0.0, "p_max": 100.0,
                "ramp_hourly": 100.0, "ramp_startup": 100.0, "ramp_shutdown": 100.0,
                "ramp_10min": 100.0,
                "min_up": 1, "min_down": 1
            }}],
            "lines": [{{
                "id": 1, "from": 1, "to": 2, "susceptance": 10.0,
                "rate_normal": {rate_normal}, "rate_emergency": {rate_emergency}
            }}],
            "load": {{"2": [60.0]}},
            "cdr": {{"cap_fraction": 0.3, "penalty": {{}}, "default_penalty": 100.0}}
        }}"#
        )
    }

    #[test]
    fn disconnected_network_is_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&two_bus_doc(60.0, 60.0)).unwrap();
        v["lines"] = serde_json::json!([]);
        let err = parse_case(&v.to_string()).unwrap_err();
        assert_eq!(err, CaseError::Disconnected { bus: 2 });
    }

    #[test]
    fn default_penalty_fills_omitted_buses() {
        let case = parse_case(&two_bus_doc(60.0, 60.0)).unwrap();
        assert_eq!(case.cdr.penalty, vec![100.0, 100.0]);
        // Only bus 2 carries load, so only bus 2 participates by default.
        assert_eq!(case.cdr.participating, vec![false, true]);
    }

    #[test]
    fn missing_penalty_without_default_is_rejected() {
        let doc = two_bus_doc(60.0, 60.0)
            .replace(r#""penalty": {}, "default_penalty": 100.0"#, r#""penalty": {}"#);
        let err = parse_case(&doc).unwrap_err();
        match err {
            CaseError::Invalid { entity, field, .. } => {
                assert_eq!(entity, "cdr");
                assert_eq!(field, "penalty");
            }
            other => panic!("expected missing penalty error, got {other:?}"),
        }
    }

    #[test]
    fn explicit_participation_list_overrides_default() {
        let doc = two_bus_doc(60.0, 60.0).replace(
            r#""default_penalty": 100.0"#,
            r#""default_penalty": 100.0, "participating_buses": [1]"#,
        );
        let case = parse_case(&doc).unwrap();
        assert_eq!(case.cdr.participating, vec![true, false]);
    }

    #[test]
    fn cap_fraction_defaults_to_standard_value() {
        let doc = two_bus_doc(60.0, 60.0).replace(r#""cap_fraction": 0.3, "#, "");
        let case = parse_case(&doc).unwrap();
        assert_eq!(case.cdr.cap_fraction, 0.3);
    }

    #[test]
    fn scale_loads_is_linear_and_composes() {
        let case = parse_case(&two_bus_doc(60.0, 60.0)).unwrap();
        let identity = scale_loads(&case, 1.0).unwrap();
        assert_eq!(identity, case);
        let double = scale_loads(&case, 2.0).unwrap();
        assert_eq!(double.demand_at(1, 0), 120.0);
        let composed = scale_loads(&scale_loads(&case, 0.5).unwrap(), 4.0).unwrap();
        assert_eq!(composed, double);
        assert!(scale_loads(&case, -1.0).is_err());
    }

    #[test]
    fn serialize_then_parse_is_idempotent() {
        let case = parse_case(&two_bus_doc(60.0, 60.0)).unwrap();
        let text1 = serialize_case(&case);
        let reparsed = parse_case(&text1).unwrap();
        assert_eq!(reparsed, case);
        let text2 = serialize_case(&reparsed);
        assert_eq!(text1, text2);
    }

    #[test]
    fn validate_flags_capacity_shortfall() {
        let case = parse_case(&two_bus_doc(60.0, 60.0)).unwrap();
        assert!(validate_case(&case).is_empty());
        let heavy = scale_loads(&case, 10.0).unwrap();
        let diags = validate_case(&heavy);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert!(diags[0].message.contains("capacity"));
    }

    #[test]
    fn validate_accepts_reference_capacity_margin() {
        // A system with 3393 MW of capacity against a 2281 MW peak is fine.
        let mut case = parse_case(&two_bus_doc(60.0, 60.0)).unwrap();
        case.generators[0].p_max = 3393.0;
        case.demand[1][0] = 2281.0;
        assert!(validate_case(&case).is_empty());
    }

    #[test]
    fn negative_demand_is_rejected() {
        let doc = two_bus_doc(60.0, 60.0).replace(r#""load": {"2": [60.0]}"#, r#""load": {"2": [-1.0]}"#);
        assert!(parse_case(&doc).is_err());
    }

    #[test]
    fn unstartable_unit_gets_a_warning() {
        let mut case = parse_case(&two_bus_doc(60.0, 60.0)).unwrap();
        case.generators[0].p_min = 20.0;
        case.generators[0].ramp_startup = 10.0;
        let diags = validate_case(&case);
        assert!(diags.iter().any(|d| d.message.contains("never start")));
    }
}
