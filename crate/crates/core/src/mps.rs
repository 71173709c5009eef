//! Free-format MPS export and external solution import.
//!
//! Export is byte-deterministic: identical models produce identical text.
//! Variable names follow the scheme documented on
//! [`crate::model::VariableIndex::name_of`]; row names are the constraint
//! tags' display form, so external solver logs read like the formulation.
//! Solution files are plain `<name> <value>` lines with `#` comments.

use crate::model::MilpModel;
use crate::solver::{MilpSolution, MilpStatus};
use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

/// Bijection between exported names and model positions.
#[derive(Debug, Clone)]
pub struct NameMap {
    var_names: Vec<String>,
    row_names: Vec<String>,
    var_lookup: HashMap<String, usize>,
    row_lookup: HashMap<String, usize>,
}

impl NameMap {
    /// Derives the name map from a model. Panics on a name collision or an
    /// invalid name, which would indicate a malformed tag set.
    pub fn from_model(model: &MilpModel) -> NameMap {
        let var_names: Vec<String> = (0..model.num_vars())
            .map(|j| model.var_name(j))
            .collect();
        let row_names: Vec<String> =
            model.rows.iter().map(|r| r.tag.to_string()).collect();

        let mut var_lookup = HashMap::with_capacity(var_names.len());
        for (j, name) in var_names.iter().enumerate() {
            assert!(valid_name(name), "invalid variable name {name:?}");
            let prev = var_lookup.insert(name.clone(), j);
            assert!(prev.is_none(), "duplicate variable name {name:?}");
        }
        let mut row_lookup = HashMap::with_capacity(row_names.len());
        for (i, name) in row_names.iter().enumerate() {
            assert!(valid_name(name), "invalid row name {name:?}");
            let prev = row_lookup.insert(name.clone(), i);
            assert!(prev.is_none(), "duplicate row name {name:?}");
        }
        NameMap {
            var_names,
            row_names,
            var_lookup,
            row_lookup,
        }
    }

    pub fn var_name(&self, j: usize) -> &str {
        &self.var_names[j]
    }

    pub fn row_name(&self, i: usize) -> &str {
        &self.row_names[i]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_lookup.get(name).copied()
    }

    pub fn row_index(&self, name: &str) -> Option<usize> {
        self.row_lookup.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_names.len()
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= 255
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'(' || b == b')')
}

/// Shortest round-trip decimal form, with negative zero normalized.
pub(crate) fn fmt_num(x: f64) -> String {
    format!("{}", x + 0.0)
}

/// The objective row's MPS name.
pub const OBJECTIVE_ROW: &str = "COST";

/// Renders `model` as free-format MPS. The returned [`NameMap`] resolves
/// every exported name back to its position.
pub fn export_mps(model: &MilpModel, name: &str) -> (String, NameMap) {
    let names = NameMap::from_model(model);
    let mut out = String::new();

    writeln!(out, "NAME {name}").unwrap();

    out.push_str("ROWS\n");
    writeln!(out, " N {OBJECTIVE_ROW}").unwrap();
    for (i, row) in model.rows.iter().enumerate() {
        let kind = match row.sense {
            crate::model::Sense::Le => 'L',
            crate::model::Sense::Ge => 'G',
            crate::model::Sense::Eq => 'E',
        };
        writeln!(out, " {kind} {}", names.row_name(i)).unwrap();
    }

    // Column-major coefficient lists.
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (i, row) in model.rows.iter().enumerate() {
        for &(var, coef) in &row.terms {
            columns[var].push((i, coef));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_integer_block = false;
    let mut marker = 0u32;
    for j in 0..model.num_vars() {
        if model.integer[j] != in_integer_block {
            let kind = if model.integer[j] { "INTORG" } else { "INTEND" };
            writeln!(out, " MARK{marker:04} 'MARKER' '{kind}'").unwrap();
            marker += 1;
            in_integer_block = model.integer[j];
        }
        let var = names.var_name(j);
        if model.objective[j] != 0.0 {
            writeln!(out, " {var} {OBJECTIVE_ROW} {}", fmt_num(model.objective[j])).unwrap();
        }
        for &(i, coef) in &columns[j] {
            writeln!(out, " {var} {} {}", names.row_name(i), fmt_num(coef)).unwrap();
        }
    }
    if in_integer_block {
        writeln!(out, " MARK{marker:04} 'MARKER' 'INTEND'").unwrap();
    }

    out.push_str("RHS\n");
    for (i, row) in model.rows.iter().enumerate() {
        if row.rhs != 0.0 {
            writeln!(out, " RHS {} {}", names.row_name(i), fmt_num(row.rhs)).unwrap();
        }
    }

    out.push_str("BOUNDS\n");
    for j in 0..model.num_vars() {
        let var = names.var_name(j);
        let (lo, hi) = (model.lower[j], model.upper[j]);
        if model.integer[j] && lo == 0.0 && hi == 1.0 {
            writeln!(out, " BV BND {var}").unwrap();
        } else if lo == hi {
            writeln!(out, " FX BND {var} {}", fmt_num(lo)).unwrap();
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            writeln!(out, " FR BND {var}").unwrap();
        } else {
            if lo == f64::NEG_INFINITY {
                writeln!(out, " MI BND {var}").unwrap();
            } else if lo != 0.0 {
                writeln!(out, " LO BND {var} {}", fmt_num(lo)).unwrap();
            }
            if hi != f64::INFINITY {
                writeln!(out, " UP BND {var} {}", fmt_num(hi)).unwrap();
            }
        }
    }
    out.push_str("ENDATA\n");

    (out, names)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImportError {
    UnknownName { line: usize, name: String },
    BadLine { line: usize, message: String },
}

impl fmt::Display for ImportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImportError::UnknownName { line, name } => {
                write!(f, "line {line}: unknown variable name {name:?}")
            }
            ImportError::BadLine { line, message } => {
                write!(f, "line {line}: {message}")
            }
        }
    }
}

impl std::error::Error for ImportError {}

/// A solution imported from an external solver.
#[derive(Debug, Clone)]
pub struct ImportedSolution {
    pub solution: MilpSolution,
    /// Variables the file did not assign (defaulted to zero).
    pub missing_variables: usize,
}

/// Parses a `<name> <value>` solution file against the exported names and
/// recomputes the objective from the model's coefficients. External
/// optimality claims are not trusted: the status is always `feasible` and
/// the gap is left unset (NaN) for the verifier to judge.
pub fn import_solution(
    text: &str,
    names: &NameMap,
    model: &MilpModel,
) -> Result<ImportedSolution, ImportError> {
    let mut values = vec![0.0; model.num_vars()];
    let mut assigned = vec![false; model.num_vars()];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let name = tokens.next().expect("nonempty line");
        let value_token = tokens.next().ok_or_else(|| ImportError::BadLine {
            line: line_no,
            message: "expected `<name> <value>`".into(),
        })?;
        if tokens.next().is_some() {
            return Err(ImportError::BadLine {
                line: line_no,
                message: "expected exactly two fields".into(),
            });
        }
        let value: f64 = value_token.parse().map_err(|_| ImportError::BadLine {
            line: line_no,
            message: format!("unparsable value {value_token:?}"),
        })?;
        if !value.is_finite() {
            return Err(ImportError::BadLine {
                line: line_no,
                message: format!("non-finite value {value_token:?}"),
            });
        }
        let j = names
            .var_index(name)
            .ok_or_else(|| ImportError::UnknownName {
                line: line_no,
                name: name.to_string(),
            })?;
        values[j] = value;
        assigned[j] = true;
    }

    let missing = assigned.iter().filter(|&&a| !a).count();
    let objective = model
        .objective
        .iter()
        .zip(values.iter())
        .map(|(c, x)| c * x)
        .sum();
    Ok(ImportedSolution {
        solution: MilpSolution {
            status: MilpStatus::Feasible,
            primal: values,
            objective,
            best_bound: f64::NEG_INFINITY,
            achieved_gap: f64::NAN,
            node_count: 0,
        },
        missing_variables: missing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConstraintTag, Row, Sense};

    fn one_var_lp() -> MilpModel {
        MilpModel {
            lower: vec![f64::NEG_INFINITY],
            upper: vec![f64::INFINITY],
            integer: vec![false],
            objective: vec![1.0],
            rows: vec![Row {
                terms: vec![(0, 1.0)],
                sense: Sense::Ge,
                rhs: 3.0,
                tag: ConstraintTag::Custom("floor"),
            }],
            index: None,
        }
    }

    #[test]
    fn one_variable_export_matches_golden() {
        let model = one_var_lp();
        let (text, _) = export_mps(&model, "lp1");
        let golden = "NAME lp1\n\
                      ROWS\n \
                      N COST\n \
                      G floor\n\
                      COLUMNS\n \
                      x0 COST 1\n \
                      x0 floor 1\n\
                      RHS\n \
                      RHS floor 3\n\
                      BOUNDS\n \
                      FR BND x0\n\
                      ENDATA\n";
        assert_eq!(text, golden);
    }

    #[test]
    fn export_is_deterministic() {
        let model = one_var_lp();
        let (a, _) = export_mps(&model, "lp1");
        let (b, _) = export_mps(&model, "lp1");
        assert_eq!(a, b);
    }

    #[test]
    fn import_recovers_values_and_objective() {
        let model = one_var_lp();
        let (_, names) = export_mps(&model, "lp1");
        let imported =
            import_solution("# solution\nx0 3.5\n", &names, &model).unwrap();
        assert_eq!(imported.solution.primal, vec![3.5]);
        assert!((imported.solution.objective - 3.5).abs() < 1e-12);
        assert_eq!(imported.missing_variables, 0);
        assert_eq!(imported.solution.status, MilpStatus::Feasible);
        assert!(imported.solution.achieved_gap.is_nan());
    }

    #[test]
    fn empty_file_defaults_to_zero_with_warnings() {
        let model = one_var_lp();
        let (_, names) = export_mps(&model, "lp1");
        let imported = import_solution("", &names, &model).unwrap();
        assert_eq!(imported.solution.primal, vec![0.0]);
        assert_eq!(imported.missing_variables, 1);
    }

    #[test]
    fn unknown_name_is_an_error() {
        let model = one_var_lp();
        let (_, names) = export_mps(&model, "lp1");
        let err = import_solution("bogus 1\n", &names, &model).unwrap_err();
        assert_eq!(
            err,
            ImportError::UnknownName {
                line: 1,
                name: "bogus".into()
            }
        );
    }

    /// A deliberately separate MPS reader used only to validate exports.
    /// It shares no code with the writer.
    mod reread {
        use std::collections::HashMap;

        #[derive(Debug, Default, PartialEq)]
        pub struct ReadModel {
            pub rows: Vec<(char, String)>,
            pub entries: HashMap<(String, String), f64>,
            pub objective: HashMap<String, f64>,
            pub rhs: HashMap<String, f64>,
            pub bounds: HashMap<String, (f64, f64)>,
            pub integers: Vec<String>,
        }

        pub fn parse(text: &str) -> ReadModel {
            let mut model = ReadModel::default();
            let mut section = String::new();
            let mut integer_mode = false;
            for line in text.lines() {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if tokens.is_empty() {
                    continue;
                }
                if !line.starts_with(' ') {
                    section = tokens[0].to_string();
                    if tokens.len() > 1 && section == "NAME" {
                        continue;
                    }
                    continue;
                }
                match section.as_str() {
                    "ROWS" => {
                        let kind = tokens[0].chars().next().unwrap();
                        if kind != 'N' {
                            model.rows.push((kind, tokens[1].to_string()));
                        }
                    }
                    "COLUMNS" => {
                        if tokens.len() >= 3 && tokens[1] == "'MARKER'" {
                            integer_mode = tokens[2] == "'INTORG'";
                            continue;
                        }
                        let var = tokens[0].to_string();
                        let row = tokens[1].to_string();
                        let value: f64 = tokens[2].parse().unwrap();
                        if integer_mode && !model.integers.contains(&var) {
                            model.integers.push(var.clone());
                        }
                        if row == "COST" {
                            model.objective.insert(var, value);
                        } else {
                            model.entries.insert((var, row), value);
                        }
                    }
                    "RHS" => {
                        model
                            .rhs
                            .insert(tokens[1].to_string(), tokens[2].parse().unwrap());
                    }
                    "BOUNDS" => {
                        let var = tokens[2].to_string();
                        let entry = model
                            .bounds
                            .entry(var)
                            .or_insert((0.0, f64::INFINITY));
                        match tokens[0] {
                            "BV" => *entry = (0.0, 1.0),
                            "FR" => *entry = (f64::NEG_INFINITY, f64::INFINITY),
                            "MI" => entry.0 = f64::NEG_INFINITY,
                            "LO" => entry.0 = tokens[3].parse().unwrap(),
                            "UP" => entry.1 = tokens[3].parse().unwrap(),
                            "FX" => {
                                let v: f64 = tokens[3].parse().unwrap();
                                *entry = (v, v);
                            }
                            other => panic!("unexpected bound type {other}"),
                        }
                    }
                    _ => {}
                }
            }
            model
        }
    }

    fn tiny_t_scuc_model() -> (MilpModel, crate::case::SystemCase) {
        let doc = serde_json::json!({
            "name": "pair",
            "reference_bus": 1,
            "horizon": 1,
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
            "load": {"2": [60.0]},
            "cdr": {"cap_fraction": 0.3, "default_penalty": 120.0}
        })
        .to_string();
        let case = crate::case::parse_case(&doc).unwrap();
        let ctgs = crate::topology::build_contingency_set(&case, true, false).unwrap();
        let model =
            crate::model::assemble_model(&case, &ctgs, crate::model::ModelVariant::TScuc)
                .unwrap();
        (model, case)
    }

    #[test]
    fn assembled_model_round_trips_through_independent_reader() {
        let (model, _case) = tiny_t_scuc_model();
        let (text, names) = export_mps(&model, "pair_t_scuc");
        let parsed = reread::parse(&text);

        assert_eq!(parsed.rows.len(), model.num_rows());
        for (i, row) in model.rows.iter().enumerate() {
            let (kind, name) = &parsed.rows[i];
            let want_kind = match row.sense {
                Sense::Le => 'L',
                Sense::Ge => 'G',
                Sense::Eq => 'E',
            };
            assert_eq!(*kind, want_kind);
            assert_eq!(name, names.row_name(i));
            let rhs = parsed.rhs.get(name).copied().unwrap_or(0.0);
            assert_eq!(rhs, row.rhs, "rhs of {name}");
            for &(var, coef) in &row.terms {
                let key = (names.var_name(var).to_string(), name.clone());
                assert_eq!(parsed.entries.get(&key).copied(), Some(coef));
            }
        }
        let total_terms: usize = model.rows.iter().map(|r| r.terms.len()).sum();
        assert_eq!(parsed.entries.len(), total_terms);

        for j in 0..model.num_vars() {
            let name = names.var_name(j);
            let obj = parsed.objective.get(name).copied().unwrap_or(0.0);
            assert_eq!(obj, model.objective[j], "objective of {name}");
            let (lo, hi) = parsed
                .bounds
                .get(name)
                .copied()
                .unwrap_or((0.0, f64::INFINITY));
            assert_eq!(lo, model.lower[j], "lower bound of {name}");
            assert_eq!(hi, model.upper[j], "upper bound of {name}");
            assert_eq!(
                parsed.integers.contains(&name.to_string()),
                model.integer[j],
                "integrality of {name}"
            );
        }
    }

    #[test]
    fn binaries_sit_inside_marker_blocks_with_bv_bounds() {
        let (model, _case) = tiny_t_scuc_model();
        let (text, names) = export_mps(&model, "pair_t_scuc");
        let index = model.index.as_ref().unwrap();
        let u_name = names.var_name(index.u(0, 0));
        assert_eq!(u_name, "u_g1_t1");

        let intorg = text.find("'INTORG'").unwrap();
        let intend = text.find("'INTEND'").unwrap();
        let u_pos = text.find(&format!(" {u_name} ")).unwrap();
        assert!(intorg < u_pos && u_pos < intend);
        assert!(text.contains(&format!(" BV BND {u_name}\n")));
    }

    #[test]
    fn export_then_import_reproduces_solver_objective() {
        let (model, _case) = tiny_t_scuc_model();
        let milp = crate::solver::solve_milp(&model, 0.0, None).unwrap();
        assert!(milp.status.has_solution());
        let (_, names) = export_mps(&model, "pair_t_scuc");
        let mut file = String::new();
        for j in 0..model.num_vars() {
            file.push_str(&format!("{} {}\n", names.var_name(j), milp.primal[j]));
        }
        let imported = import_solution(&file, &names, &model).unwrap();
        assert_eq!(imported.missing_variables, 0);
        assert!(
            (imported.solution.objective - milp.objective).abs()
                <= 1e-9 * (1.0 + milp.objective.abs())
        );
    }

    #[test]
    fn malformed_lines_are_errors() {
        let model = one_var_lp();
        let (_, names) = export_mps(&model, "lp1");
        assert!(matches!(
            import_solution("x0\n", &names, &model),
            Err(ImportError::BadLine { line: 1, .. })
        ));
        assert!(matches!(
            import_solution("x0 1 2\n", &names, &model),
            Err(ImportError::BadLine { line: 1, .. })
        ));
        assert!(matches!(
            import_solution("x0 abc\n", &names, &model),
            Err(ImportError::BadLine { line: 1, .. })
        ));
        assert!(matches!(
            import_solution("x0 nan\n", &names, &model),
            Err(ImportError::BadLine { line: 1, .. })
        ));
    }
}
