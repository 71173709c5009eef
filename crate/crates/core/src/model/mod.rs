//! Mixed-integer model assembly for the four scheduling variants.
//!
//! The four variants share the base unit-commitment and network constraints
//! and differ in which contingencies they secure against and whether
//! post-contingency corrective demand response (CDR) is available:
//!
//! | variant      | contingencies      | post-contingency balance |
//! |--------------|--------------------|--------------------------|
//! | `t-scuc`     | lines              | firm demand              |
//! | `tg-scuc`    | lines + generators | firm demand              |
//! | `t-scuc-cdr` | lines              | demand less CDR, capped  |
//! | `tg-scuc-cdr`| lines + generators | demand less CDR, capped  |
//!
//! Every emitted row carries a [`ConstraintTag`] naming the equation family
//! and subscripts; the same tags name MPS rows and verifier findings.

mod build;
mod index;

pub use build::{
    assemble_model, assemble_model_with, build_base_constraints, build_contingency_constraints,
    build_objective,
};
pub use index::{index_variables, VarKey, VariableIndex};

use crate::topology::CtgKind;
use serde::{Deserialize, Serialize};
use std::fmt;

/// The four scheduling formulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    TScuc,
    TgScuc,
    TScucCdr,
    TgScucCdr,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [
        ModelVariant::TScuc,
        ModelVariant::TgScuc,
        ModelVariant::TScucCdr,
        ModelVariant::TgScucCdr,
    ];

    /// Whether post-contingency corrective demand response is modeled.
    pub fn uses_cdr(self) -> bool {
        matches!(self, ModelVariant::TScucCdr | ModelVariant::TgScucCdr)
    }

    /// Whether generator outages are part of the credible contingency set.
    pub fn includes_generator_contingencies(self) -> bool {
        matches!(self, ModelVariant::TgScuc | ModelVariant::TgScucCdr)
    }

    /// Canonical lower-case name.
    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::TScuc => "t-scuc",
            ModelVariant::TgScuc => "tg-scuc",
            ModelVariant::TScucCdr => "t-scuc-cdr",
            ModelVariant::TgScucCdr => "tg-scuc-cdr",
        }
    }

    /// Parses a variant name, ignoring case.
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "t-scuc" => Some(ModelVariant::TScuc),
            "tg-scuc" => Some(ModelVariant::TgScuc),
            "t-scuc-cdr" => Some(ModelVariant::TScucCdr),
            "tg-scuc-cdr" => Some(ModelVariant::TgScucCdr),
            _ => None,
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reference to a contingency in tags and names: kind plus element id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CtgRef {
    pub kind: CtgKind,
    pub element: u32,
}

impl fmt::Display for CtgRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.code(), self.element)
    }
}

/// Which side of a two-sided limit a row or finding refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Lower,
    Upper,
}

/// Provenance tag carried by every constraint row and verifier finding.
///
/// Tags use original element ids and 1-based periods. Their display form is
/// also the MPS row name, for example `Eq12_n3_t2` or `Eq21up_k7_cG12_t1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintTag {
    /// Eq2: minimum output when committed.
    GenMin { gen: u32, t: u32 },
    /// Eq3: maximum output plus reserve when committed.
    GenMaxReserve { gen: u32, t: u32 },
    /// Eq4: 10-minute reserve range.
    ReserveCap { gen: u32, t: u32 },
    /// Eq5: system reserve covers each unit's output plus own reserve.
    SystemReserve { gen: u32, t: u32 },
    /// Eq6: hourly ramp-up with startup allowance.
    RampUp { gen: u32, t: u32 },
    /// Eq7: hourly ramp-down with shutdown allowance.
    RampDown { gen: u32, t: u32 },
    /// Eq8: minimum up time.
    MinUp { gen: u32, t: u32 },
    /// Eq9: minimum down time.
    MinDown { gen: u32, t: u32 },
    /// Eq10: startup indicator linking.
    StartupLink { gen: u32, t: u32 },
    /// Eq11: integrality of a commitment variable (verifier findings only).
    Integrality { var: char, gen: u32, t: u32 },
    /// Eq12: base-case nodal balance.
    Balance { bus: u32, t: u32 },
    /// Eq13: base-case flow limit.
    FlowBound { line: u32, t: u32, side: Side },
    /// Eq14: base-case DC flow definition.
    FlowDef { line: u32, t: u32 },
    /// Eq15: reference angle.
    RefAngle { t: u32 },
    /// Eq16: post-contingency upward redispatch limit.
    CtgRampUp { gen: u32, ctg: CtgRef, t: u32 },
    /// Eq17: post-contingency downward redispatch limit.
    CtgRampDown { gen: u32, ctg: CtgRef, t: u32 },
    /// Eq18: post-contingency minimum output.
    CtgGenMin { gen: u32, ctg: CtgRef, t: u32 },
    /// Eq19: post-contingency maximum output.
    CtgGenMax { gen: u32, ctg: CtgRef, t: u32 },
    /// Eq20: post-contingency DC flow definition.
    CtgFlowDef { line: u32, ctg: CtgRef, t: u32 },
    /// Eq21: post-contingency emergency flow limit.
    CtgFlowBound {
        line: u32,
        ctg: CtgRef,
        t: u32,
        side: Side,
    },
    /// Eq22 (`cdr: false`) or Eq23 (`cdr: true`): post-contingency balance.
    CtgBalance {
        bus: u32,
        ctg: CtgRef,
        t: u32,
        cdr: bool,
    },
    /// Eq24: CDR cap as a fraction of bus demand.
    CdrCap { bus: u32, ctg: CtgRef, t: u32 },
    /// Outaged element pinned to zero (verifier findings only).
    OutagePin { ctg: CtgRef, t: u32 },
    /// Claimed objective does not match Eq1 (verifier findings only).
    Objective,
    /// Free-form tag for hand-built models.
    Custom(&'static str),
}

impl ConstraintTag {
    /// Equation number in the formulation, when the tag maps to one.
    pub fn equation(&self) -> Option<u8> {
        use ConstraintTag::*;
        Some(match self {
            GenMin { .. } => 2,
            GenMaxReserve { .. } => 3,
            ReserveCap { .. } => 4,
            SystemReserve { .. } => 5,
            RampUp { .. } => 6,
            RampDown { .. } => 7,
            MinUp { .. } => 8,
            MinDown { .. } => 9,
            StartupLink { .. } => 10,
            Integrality { .. } => 11,
            Balance { .. } => 12,
            FlowBound { .. } => 13,
            FlowDef { .. } => 14,
            RefAngle { .. } => 15,
            CtgRampUp { .. } => 16,
            CtgRampDown { .. } => 17,
            CtgGenMin { .. } => 18,
            CtgGenMax { .. } => 19,
            CtgFlowDef { .. } => 20,
            CtgFlowBound { .. } => 21,
            CtgBalance { cdr, .. } => {
                if *cdr {
                    23
                } else {
                    22
                }
            }
            CdrCap { .. } => 24,
            OutagePin { .. } | Objective | Custom(_) => return None,
        })
    }
}

impl fmt::Display for ConstraintTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConstraintTag::*;
        match self {
            GenMin { gen, t } => write!(f, "Eq2_g{gen}_t{t}"),
            GenMaxReserve { gen, t } => write!(f, "Eq3_g{gen}_t{t}"),
            ReserveCap { gen, t } => write!(f, "Eq4_g{gen}_t{t}"),
            SystemReserve { gen, t } => write!(f, "Eq5_g{gen}_t{t}"),
            RampUp { gen, t } => write!(f, "Eq6_g{gen}_t{t}"),
            RampDown { gen, t } => write!(f, "Eq7_g{gen}_t{t}"),
            MinUp { gen, t } => write!(f, "Eq8_g{gen}_t{t}"),
            MinDown { gen, t } => write!(f, "Eq9_g{gen}_t{t}"),
            StartupLink { gen, t } => write!(f, "Eq10_g{gen}_t{t}"),
            Integrality { var, gen, t } => write!(f, "Eq11_{var}_g{gen}_t{t}"),
            Balance { bus, t } => write!(f, "Eq12_n{bus}_t{t}"),
            FlowBound { line, t, side } => match side {
                Side::Lower => write!(f, "Eq13lo_k{line}_t{t}"),
                Side::Upper => write!(f, "Eq13up_k{line}_t{t}"),
            },
            FlowDef { line, t } => write!(f, "Eq14_k{line}_t{t}"),
            RefAngle { t } => write!(f, "Eq15_t{t}"),
            CtgRampUp { gen, ctg, t } => write!(f, "Eq16_g{gen}_c{ctg}_t{t}"),
            CtgRampDown { gen, ctg, t } => write!(f, "Eq17_g{gen}_c{ctg}_t{t}"),
            CtgGenMin { gen, ctg, t } => write!(f, "Eq18_g{gen}_c{ctg}_t{t}"),
            CtgGenMax { gen, ctg, t } => write!(f, "Eq19_g{gen}_c{ctg}_t{t}"),
            CtgFlowDef { line, ctg, t } => write!(f, "Eq20_k{line}_c{ctg}_t{t}"),
            CtgFlowBound { line, ctg, t, side } => match side {
                Side::Lower => write!(f, "Eq21lo_k{line}_c{ctg}_t{t}"),
                Side::Upper => write!(f, "Eq21up_k{line}_c{ctg}_t{t}"),
            },
            CtgBalance { bus, ctg, t, cdr } => {
                let eq = if *cdr { 23 } else { 22 };
                write!(f, "Eq{eq}_n{bus}_c{ctg}_t{t}")
            }
            CdrCap { bus, ctg, t } => write!(f, "Eq24_n{bus}_c{ctg}_t{t}"),
            OutagePin { ctg, t } => write!(f, "Pin_c{ctg}_t{t}"),
            Objective => write!(f, "Eq1"),
            Custom(name) => f.write_str(name),
        }
    }
}

/// Row sense relative to the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// A sparse constraint row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// `(variable index, coefficient)` pairs, sorted by index, no zeros.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: ConstraintTag,
}

impl Row {
    /// Evaluates the left-hand side at a point.
    pub fn lhs_at(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(j, a)| a * x[*j]).sum()
    }
}

/// A sparse mixed-integer linear program in minimization form.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Integrality flag per variable.
    pub integer: Vec<bool>,
    /// Linear objective, minimized.
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    /// Present on models assembled from a case; names variables in exports.
    pub index: Option<VariableIndex>,
}

impl MilpModel {
    /// Number of variables.
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Number of constraint rows.
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Creates an unnamed model with the given bounds and empty rows.
    pub fn with_bounds(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let n = lower.len();
        assert_eq!(n, upper.len());
        MilpModel {
            lower,
            upper,
            integer: vec![false; n],
            objective: vec![0.0; n],
            rows: Vec::new(),
            index: None,
        }
    }

    /// Fixes a variable to a value by pinching its bounds.
    pub fn pin(&mut self, var: usize, value: f64) {
        self.lower[var] = value;
        self.upper[var] = value;
    }

    /// Objective value of a point.
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// MPS-style name of a variable.
    pub fn var_name(&self, j: usize) -> String {
        match &self.index {
            Some(index) => index.name_of(j),
            None => format!("x{j}"),
        }
    }
}

/// Options controlling details of constraint emission.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FormulationOptions {
    /// Emit minimum-up rows only for periods where the full lookback window
    /// fits inside the horizon, mirroring the printed index range, instead of
    /// the default truncated windows that start at the first period.
    pub strict_min_up: bool,
}

/// Errors from model assembly.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// The contingency set does not match what the variant secures against.
    VariantContingencyMismatch {
        variant: ModelVariant,
        includes_lines: bool,
        includes_generators: bool,
    },
    /// A contingency references an element missing from the case.
    UnknownContingencyElement { key: String },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::VariantContingencyMismatch {
                variant,
                includes_lines,
                includes_generators,
            } => write!(
                f,
                "variant {variant} expects lines{} but the contingency set has lines={includes_lines}, generators={includes_generators}",
                if variant.includes_generator_contingencies() {
                    " and generators"
                } else {
                    " only"
                }
            ),
            ModelError::UnknownContingencyElement { key } => {
                write!(f, "contingency {key} references an element missing from the case")
            }
        }
    }
}

impl std::error::Error for ModelError {}
