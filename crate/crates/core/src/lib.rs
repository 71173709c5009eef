//! Day-ahead security-constrained unit commitment with corrective demand
//! response (CDR) under N-1 line and generator contingencies.
//!
//! The crate is organized as a pipeline:
//!
//! * [`case`] loads and validates system case files (buses, generators,
//!   lines, hourly loads, CDR settings).
//! * [`topology`] finds radial (bridge) lines and builds the credible
//!   contingency set with outage probabilities.
//! * [`model`] turns a case, a contingency set, and a model variant into a
//!   sparse mixed-integer linear program.
//! * [`solver`] is a self-contained LP/MILP solver (revised simplex with
//!   duals, plus best-bound branch and bound).
//! * [`mps`] exports models as free-format MPS and imports solution files
//!   produced by external solvers.
//! * [`schedule`] maps raw solver vectors back to named schedule quantities
//!   and (de)serializes them as JSON.
//! * [`verify`] re-checks a schedule against every constraint through an
//!   independent code path and provides a brute-force optimum oracle.
//! * [`market`] computes locational marginal prices and market summaries
//!   from a fixed-commitment LP.
//! * [`experiments`] runs the variant comparison and the penalty and load
//!   sensitivity sweeps, with CSV writers.

pub mod case;
pub mod experiments;
pub mod market;
pub mod model;
pub mod mps;
pub mod schedule;
pub mod solver;
pub mod topology;
pub mod verify;

pub use case::{parse_case, scale_loads, serialize_case, validate_case, SystemCase};
pub use experiments::{load_scenario_sweep, penalty_sweep, run_variant_comparison};
pub use market::{compute_lmp, market_summary, MarketReport};
pub use model::{assemble_model, MilpModel, ModelVariant};
pub use mps::{export_mps, import_solution};
pub use schedule::{extract_schedule, schedule_from_json, schedule_to_json, ScheduleSolution};
pub use solver::{solve_lp, solve_milp};
pub use topology::build_contingency_set;
pub use verify::{brute_force_optimum, check_solution};
