//! Command-line entry point: solve, export, import, check, market
//! analytics, and the study sweeps, with deterministic output files.

use clap::{Args, Parser, Subcommand};
use gridsched_core::case::{parse_case, scale_loads, SystemCase};
use gridsched_core::experiments::{
    comparison_csv, load_csv, load_scenario_sweep, penalty_csv, penalty_sweep,
    run_variant_comparison, ExperimentError,
};
use gridsched_core::market::{
    compute_lmp, lmp_csv, market_summary, summary_csv, MarketError,
};
use gridsched_core::model::{assemble_model, MilpModel, ModelVariant};
use gridsched_core::mps::{export_mps, import_solution, NameMap};
use gridsched_core::schedule::{
    extract_schedule, schedule_from_json, schedule_to_json, ScheduleSolution,
};
use gridsched_core::solver::{solve_milp, MilpSolution};
use gridsched_core::topology::{build_contingency_set, ContingencySet, CtgKind};
use gridsched_core::verify::check_solution;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

struct Failure {
    code: u8,
    message: String,
}

fn usage(err: impl Display) -> Failure {
    Failure { code: EXIT_USAGE, message: err.to_string() }
}

fn internal(err: impl Display) -> Failure {
    Failure { code: EXIT_INTERNAL, message: err.to_string() }
}

/// Shortest round-trip decimal form, with negative zero normalized.
fn num(x: f64) -> String {
    format!("{}", x + 0.0)
}

/// Prints a line to stdout, exiting quietly if the consumer closed the pipe.
fn emit(line: impl Display) {
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{line}").is_err() {
        std::process::exit(0);
    }
}

#[derive(Parser)]
#[command(
    name = "gridsched",
    version,
    about = "Security-constrained unit commitment with corrective demand response"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CaseArgs {
    /// Case file (JSON).
    case: PathBuf,
    /// Override every bus's CDR penalty with one value ($/MWh).
    #[arg(long)]
    penalty: Option<f64>,
    /// Multiply every demand value by this factor before anything else.
    #[arg(long)]
    load_factor: Option<f64>,
}

#[derive(Args)]
struct LimitArgs {
    /// Relative MIP gap to solve to.
    #[arg(long, default_value_t = 0.01)]
    gap: f64,
    /// Wall-clock limit in seconds. Limited runs are not bit-reproducible.
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Args)]
struct OutDirArg {
    /// Directory for output files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn variant_parser(name: &str) -> Result<ModelVariant, String> {
    ModelVariant::parse(name).ok_or_else(|| {
        format!("unknown variant '{name}' (expected t-scuc, tg-scuc, t-scuc-cdr, or tg-scuc-cdr)")
    })
}

#[derive(Subcommand)]
enum Command {
    /// Solve one variant; writes solution.json and report.txt.
    Solve {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, value_parser = variant_parser)]
        variant: ModelVariant,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        out: OutDirArg,
    },
    /// Write the variant model as free-format MPS (stdout by default).
    ExportMps {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, value_parser = variant_parser)]
        variant: ModelVariant,
        /// Output file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Import an external solver's `<variable> <value>` solution file;
    /// writes solution.json and report.txt.
    ImportSol {
        #[command(flatten)]
        case: CaseArgs,
        /// Solution file in the solution-file format.
        solution: PathBuf,
        #[arg(long, value_parser = variant_parser)]
        variant: ModelVariant,
        #[command(flatten)]
        out: OutDirArg,
    },
    /// Re-check a solution.json against every constraint; prints a
    /// violation CSV and exits 1 when any violation remains.
    Check {
        #[command(flatten)]
        case: CaseArgs,
        /// solution.json produced by solve or import-sol.
        solution: PathBuf,
        /// Absolute tolerance for MW-scale rows.
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Price a solved schedule; writes lmp.csv and summary.csv.
    Market {
        #[command(flatten)]
        case: CaseArgs,
        /// solution.json produced by solve or import-sol.
        solution: PathBuf,
        #[command(flatten)]
        out: OutDirArg,
    },
    /// List the credible contingency set as CSV.
    Contingencies {
        #[command(flatten)]
        case: CaseArgs,
        /// Include generator outages alongside line outages.
        #[arg(long)]
        generators: bool,
    },
    /// Solve all four variants; writes comparison.csv.
    Compare {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        out: OutDirArg,
    },
    /// Sweep a uniform CDR penalty; writes penalty_sweep.csv.
    SweepPenalty {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, value_parser = variant_parser)]
        variant: ModelVariant,
        /// Comma-separated penalty values ($/MWh).
        #[arg(long, value_delimiter = ',', required = true)]
        penalties: Vec<f64>,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        out: OutDirArg,
    },
    /// Sweep load scaling factors; writes load_sweep.csv.
    SweepLoad {
        #[command(flatten)]
        case: CaseArgs,
        /// Comma-separated load factors.
        #[arg(long, value_delimiter = ',', required = true)]
        factors: Vec<f64>,
        /// Comma-separated variants (all four when omitted).
        #[arg(long, value_delimiter = ',', value_parser = variant_parser)]
        variants: Option<Vec<ModelVariant>>,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        out: OutDirArg,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("GRIDSCHED_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: GRIDSCHED_THREADS must be a positive integer, got '{threads}'");
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn load_case(args: &CaseArgs) -> Result<SystemCase, Failure> {
    let text = fs::read_to_string(&args.case)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.case.display())))?;
    let mut case = parse_case(&text).map_err(usage)?;
    if let Some(factor) = args.load_factor {
        case = scale_loads(&case, factor).map_err(usage)?;
    }
    if let Some(penalty) = args.penalty {
        if !penalty.is_finite() || penalty < 0.0 {
            return Err(usage(format!(
                "penalty must be finite and nonnegative, got {penalty}"
            )));
        }
        case.cdr.penalty = vec![penalty; case.buses.len()];
    }
    Ok(case)
}

fn contingency_set_for(
    case: &SystemCase,
    variant: ModelVariant,
) -> Result<ContingencySet, Failure> {
    build_contingency_set(case, true, variant.includes_generator_contingencies())
        .map_err(usage)
}

fn check_limits(limits: &LimitArgs) -> Result<(), Failure> {
    if !limits.gap.is_finite() || limits.gap < 0.0 {
        return Err(usage(format!(
            "gap must be finite and nonnegative, got {}",
            limits.gap
        )));
    }
    if let Some(t) = limits.time_limit {
        if !t.is_finite() || t <= 0.0 {
            return Err(usage(format!("time limit must be positive, got {t}")));
        }
    }
    Ok(())
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content)
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))
}

fn report_text(
    case: &SystemCase,
    variant: ModelVariant,
    model: &MilpModel,
    contingencies: &ContingencySet,
    milp: &MilpSolution,
    schedule: Option<&ScheduleSolution>,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("case: {}\n", case.name));
    out.push_str(&format!("variant: {variant}\n"));
    out.push_str(&format!("status: {}\n", milp.status));
    out.push_str(&format!("horizon: {}\n", case.horizon));
    out.push_str(&format!("variables: {}\n", model.num_vars()));
    out.push_str(&format!("rows: {}\n", model.num_rows()));
    out.push_str(&format!("contingencies: {}\n", contingencies.len()));
    out.push_str(&format!("nodes: {}\n", milp.node_count));
    if let Some(schedule) = schedule {
        out.push_str(&format!("objective: {}\n", num(milp.objective)));
        if milp.best_bound.is_finite() {
            out.push_str(&format!("best_bound: {}\n", num(milp.best_bound)));
        }
        if let Some(gap) = schedule.achieved_gap {
            out.push_str(&format!("achieved_gap: {}\n", num(gap)));
        }
        if variant.uses_cdr() {
            let (line_mw, gen_mw) = schedule.cdr_totals();
            out.push_str(&format!("cdr_line_mw: {}\n", num(line_mw)));
            if variant.includes_generator_contingencies() {
                out.push_str(&format!("cdr_gen_mw: {}\n", num(gen_mw)));
            }
        }
        let committed: f64 = schedule.u.values().flatten().sum();
        let first_startups: f64 = schedule.v.values().map(|v| v[0]).sum();
        let later_startups: f64 =
            schedule.v.values().map(|v| v[1..].iter().sum::<f64>()).sum();
        out.push_str(&format!("committed_generator_hours: {}\n", num(committed)));
        out.push_str(&format!("startups_first_period: {}\n", num(first_startups)));
        out.push_str(&format!("startups_later_periods: {}\n", num(later_startups)));
    }
    out
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Solve { case, variant, limits, out } => {
            run_solve(&case, variant, &limits, &out)
        }
        Command::ExportMps { case, variant, out } => run_export(&case, variant, out),
        Command::ImportSol { case, solution, variant, out } => {
            run_import(&case, &solution, variant, &out)
        }
        Command::Check { case, solution, tolerance } => {
            run_check(&case, &solution, tolerance)
        }
        Command::Market { case, solution, out } => run_market(&case, &solution, &out),
        Command::Contingencies { case, generators } => {
            run_contingencies(&case, generators)
        }
        Command::Compare { case, limits, out } => run_compare(&case, &limits, &out),
        Command::SweepPenalty { case, variant, penalties, limits, out } => {
            run_sweep_penalty(&case, variant, &penalties, &limits, &out)
        }
        Command::SweepLoad { case, factors, variants, limits, out } => {
            let variants = variants.unwrap_or_else(|| ModelVariant::ALL.to_vec());
            run_sweep_load(&case, &factors, &variants, &limits, &out)
        }
    }
}

fn run_solve(
    case_args: &CaseArgs,
    variant: ModelVariant,
    limits: &LimitArgs,
    out: &OutDirArg,
) -> Result<u8, Failure> {
    check_limits(limits)?;
    let case = load_case(case_args)?;
    let contingencies = contingency_set_for(&case, variant)?;
    let model = assemble_model(&case, &contingencies, variant).map_err(usage)?;
    let milp = solve_milp(&model, limits.gap, limits.time_limit).map_err(internal)?;
    ensure_dir(&out.out_dir)?;

    let schedule = if milp.status.has_solution() {
        Some(extract_schedule(
            &case,
            model.index.as_ref().expect("assembled model has an index"),
            &milp,
        ))
    } else {
        None
    };
    let report = report_text(&case, variant, &model, &contingencies, &milp, schedule.as_ref());
    write_file(&out.out_dir.join("report.txt"), &report)?;

    match schedule {
        Some(schedule) => {
            write_file(
                &out.out_dir.join("solution.json"),
                &schedule_to_json(&schedule),
            )?;
            emit(format_args!("status: {}", milp.status));
            emit(format_args!("objective: {}", num(milp.objective)));
            Ok(0)
        }
        None => {
            eprintln!("no schedule: solve ended {}", milp.status);
            Ok(EXIT_INFEASIBLE)
        }
    }
}

fn run_export(
    case_args: &CaseArgs,
    variant: ModelVariant,
    out: Option<PathBuf>,
) -> Result<u8, Failure> {
    let case = load_case(case_args)?;
    let contingencies = contingency_set_for(&case, variant)?;
    let model = assemble_model(&case, &contingencies, variant).map_err(usage)?;
    let (mps, _) = export_mps(&model, &format!("{}_{}", case.name, variant));
    match out {
        Some(path) => write_file(&path, &mps)?,
        None => {
            use std::io::Write as _;
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(mps.as_bytes());
        }
    }
    Ok(0)
}

fn run_import(
    case_args: &CaseArgs,
    solution_path: &Path,
    variant: ModelVariant,
    out: &OutDirArg,
) -> Result<u8, Failure> {
    let case = load_case(case_args)?;
    let contingencies = contingency_set_for(&case, variant)?;
    let model = assemble_model(&case, &contingencies, variant).map_err(usage)?;
    let names = NameMap::from_model(&model);
    let text = fs::read_to_string(solution_path)
        .map_err(|e| usage(format!("cannot read {}: {e}", solution_path.display())))?;
    let imported = import_solution(&text, &names, &model).map_err(usage)?;

    let schedule = extract_schedule(
        &case,
        model.index.as_ref().expect("assembled model has an index"),
        &imported.solution,
    );
    ensure_dir(&out.out_dir)?;
    let mut report = report_text(
        &case,
        variant,
        &model,
        &contingencies,
        &imported.solution,
        Some(&schedule),
    );
    report.push_str(&format!("missing_variables: {}\n", imported.missing_variables));
    write_file(&out.out_dir.join("report.txt"), &report)?;
    write_file(&out.out_dir.join("solution.json"), &schedule_to_json(&schedule))?;
    emit(format_args!("objective: {}", num(imported.solution.objective)));
    if imported.missing_variables > 0 {
        eprintln!(
            "note: {} variables were absent from the file and default to 0",
            imported.missing_variables
        );
    }
    Ok(0)
}

fn run_check(
    case_args: &CaseArgs,
    solution_path: &Path,
    tolerance: f64,
) -> Result<u8, Failure> {
    if !tolerance.is_finite() || tolerance < 0.0 {
        return Err(usage(format!(
            "tolerance must be finite and nonnegative, got {tolerance}"
        )));
    }
    let case = load_case(case_args)?;
    let text = fs::read_to_string(solution_path)
        .map_err(|e| usage(format!("cannot read {}: {e}", solution_path.display())))?;
    let schedule = schedule_from_json(&text).map_err(usage)?;
    let variant = schedule.variant;
    let contingencies = contingency_set_for(&case, variant)?;
    let report =
        check_solution(&case, &contingencies, variant, &schedule, tolerance)
            .map_err(usage)?;

    emit("constraint,equation,lhs,rhs,violation");
    for violation in &report.violations {
        let equation = violation
            .tag
            .equation()
            .map(|e| e.to_string())
            .unwrap_or_default();
        emit(format_args!(
            "{},{},{},{},{}",
            violation.tag,
            equation,
            num(violation.lhs),
            num(violation.rhs),
            num(-violation.slack),
        ));
    }
    if report.pass {
        eprintln!("ok: every constraint holds within {tolerance}");
        Ok(0)
    } else {
        eprintln!(
            "failed: {} violations, largest {}",
            report.violations.len(),
            num(report.max_violation)
        );
        Ok(EXIT_INFEASIBLE)
    }
}

fn run_market(
    case_args: &CaseArgs,
    solution_path: &Path,
    out: &OutDirArg,
) -> Result<u8, Failure> {
    let case = load_case(case_args)?;
    let text = fs::read_to_string(solution_path)
        .map_err(|e| usage(format!("cannot read {}: {e}", solution_path.display())))?;
    let schedule = schedule_from_json(&text).map_err(usage)?;
    let variant = schedule.variant;
    let contingencies = contingency_set_for(&case, variant)?;
    let lmp = compute_lmp(&case, &contingencies, variant, &schedule).map_err(|e| match e {
        MarketError::Solver(err) => internal(err),
        MarketError::PricingLp(status) => Failure {
            code: EXIT_INFEASIBLE,
            message: format!("pricing LP is {status:?}; solution inconsistent with case"),
        },
        other => usage(other),
    })?;
    let report = market_summary(&case, &lmp, &schedule).map_err(usage)?;

    ensure_dir(&out.out_dir)?;
    write_file(&out.out_dir.join("lmp.csv"), &lmp_csv(&lmp, case.horizon))?;
    write_file(&out.out_dir.join("summary.csv"), &summary_csv(&report))?;
    emit(format_args!("average_lmp: {}", num(report.average_lmp)));
    Ok(0)
}

fn run_contingencies(case_args: &CaseArgs, generators: bool) -> Result<u8, Failure> {
    let case = load_case(case_args)?;
    let set = build_contingency_set(&case, true, generators).map_err(usage)?;
    emit("key,kind,element,probability");
    for ctg in set.iter() {
        let kind = match ctg.kind {
            CtgKind::Line => "line",
            CtgKind::Generator => "generator",
        };
        emit(format_args!(
            "{},{},{},{}",
            ctg.key(),
            kind,
            ctg.element,
            num(ctg.probability)
        ));
    }
    Ok(0)
}

fn experiment_failure(err: ExperimentError) -> Failure {
    match err {
        ExperimentError::Model(e) => usage(e),
        ExperimentError::Topology(e) => usage(e),
        ExperimentError::Case(e) => usage(e),
        other => usage(other),
    }
}

fn run_compare(
    case_args: &CaseArgs,
    limits: &LimitArgs,
    out: &OutDirArg,
) -> Result<u8, Failure> {
    check_limits(limits)?;
    let case = load_case(case_args)?;
    let rows = run_variant_comparison(&case, limits.gap, limits.time_limit)
        .map_err(experiment_failure)?;
    let csv = comparison_csv(&rows);
    ensure_dir(&out.out_dir)?;
    write_file(&out.out_dir.join("comparison.csv"), &csv)?;
    {
        use std::io::Write as _;
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(csv.as_bytes());
    }
    Ok(0)
}

fn run_sweep_penalty(
    case_args: &CaseArgs,
    variant: ModelVariant,
    penalties: &[f64],
    limits: &LimitArgs,
    out: &OutDirArg,
) -> Result<u8, Failure> {
    check_limits(limits)?;
    let case = load_case(case_args)?;
    let rows = penalty_sweep(&case, penalties, variant, limits.gap, limits.time_limit)
        .map_err(experiment_failure)?;
    let csv = penalty_csv(&rows);
    ensure_dir(&out.out_dir)?;
    write_file(&out.out_dir.join("penalty_sweep.csv"), &csv)?;
    {
        use std::io::Write as _;
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(csv.as_bytes());
    }
    Ok(0)
}

fn run_sweep_load(
    case_args: &CaseArgs,
    factors: &[f64],
    variants: &[ModelVariant],
    limits: &LimitArgs,
    out: &OutDirArg,
) -> Result<u8, Failure> {
    check_limits(limits)?;
    let case = load_case(case_args)?;
    let rows = load_scenario_sweep(&case, factors, variants, limits.gap, limits.time_limit)
        .map_err(experiment_failure)?;
    let csv = load_csv(&rows);
    ensure_dir(&out.out_dir)?;
    write_file(&out.out_dir.join("load_sweep.csv"), &csv)?;
    {
        use std::io::Write as _;
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(csv.as_bytes());
    }
    Ok(0)
}
