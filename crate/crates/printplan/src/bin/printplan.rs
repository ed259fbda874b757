use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use printplan::datasets::{self, RandomSpec};
use printplan::experiments::{
    self, provenance, resolve_solver, run_scenario, run_sweep, scenario_csv, sweep_csv, ExperimentError, RunConfig,
    ScenarioSelection, SolverChoice, SweepParameter, SweepSpec, SOLVER_ENV,
};
use printplan::instance::{load_instance, validate, InstanceError, ProblemInstance};
use printplan::model::{build_model, write_lp, BuildOptions, Objective};
use printplan::pareto::{front_csv, front_gnuplot, pareto_front, ParetoConfig, ParetoError};
use printplan::schedule::{evaluation_csv, schedule_csv};
use printplan::solver::{parse_external_solution, MilpStatus, SolveParams};

const EXIT_INVALID: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_NO_INCUMBENT: u8 = 4;
const EXIT_DOMINANCE: u8 = 5;

#[derive(Parser)]
#[command(name = "printplan", version, about = "Build planning for powder-bed printer farms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one model and write schedule.csv and evaluation.csv.
    Solve(SolveArgs),
    /// Epsilon-constraint front between z and zz.
    Pareto(ParetoArgs),
    /// Free against fixed orientation per part-count prefix and machine count.
    Scenario(ScenarioArgs),
    /// One-parameter sensitivity sweep.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Z,
    Zz,
    Pareto,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Builtin,
    External,
    Auto,
}

#[derive(Args, Clone)]
struct Common {
    /// Instance file (.json, or parts .csv beside machines.csv), or one of
    /// table2, table3, table4, random.
    #[arg(value_name = "INSTANCE")]
    positional: Option<String>,
    #[arg(long)]
    instance: Option<String>,
    /// Seed for `random`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Jobs per machine.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value_t = SolverArg::Builtin)]
    solver: SolverArg,
    #[arg(long = "time-limit", default_value_t = 600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 1e-9)]
    gap: f64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Serial, reproducible search.
    #[arg(long)]
    deterministic: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Z)]
    objective: ObjectiveArg,
    /// Machine count; copies of the first machine are added or machines dropped.
    #[arg(long)]
    machines: Option<usize>,
    #[arg(long = "fixed-orientation")]
    fixed_orientation: bool,
    /// Bound zz from above.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Grid size when the objective is `pareto`.
    #[arg(long = "epsilon-count", default_value_t = 10)]
    epsilon_count: usize,
    /// Also write the model in LP format.
    #[arg(long = "lp-out")]
    lp_out: Option<PathBuf>,
    /// Evaluate this solver solution file instead of solving.
    #[arg(long = "solution-in")]
    solution_in: Option<PathBuf>,
}

#[derive(Args)]
struct ParetoArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "epsilon-count", default_value_t = 10)]
    epsilon_count: usize,
    /// Explicit epsilon values, comma separated; replaces the grid.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    #[arg(long)]
    machines: Option<usize>,
    #[arg(long = "fixed-orientation")]
    fixed_orientation: bool,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    common: Common,
    /// Part-count prefixes: `3,5,8` or `3..6`. Defaults to every prefix.
    #[arg(long = "parts-prefix")]
    parts_prefix: Option<String>,
    /// Machine counts, same syntax.
    #[arg(long, default_value = "1")]
    machines: String,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// layer_time, volumetric_time, machine_area or part_count_prefix.
    #[arg(long)]
    parameter: String,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// free_orientation, fixed_orientation or both.
    #[arg(long, default_value = "both")]
    scenario: String,
    #[arg(long)]
    machines: Option<usize>,
    /// Keep only the first N parts before sweeping.
    #[arg(long = "parts-prefix")]
    parts_prefix: Option<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Self {
        Failure::new(EXIT_INVALID, e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = match e {
            ExperimentError::Instance(_)
            | ExperimentError::Invalid(_)
            | ExperimentError::Build(_)
            | ExperimentError::BadSpec(_)
            | ExperimentError::UnknownSolver(_) => EXIT_INVALID,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(1, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Pareto(a) => cmd_pareto(a),
        Command::Scenario(a) => cmd_scenario(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("printplan: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(common: &Common) -> Result<ProblemInstance, Failure> {
    let name = common
        .instance
        .as_deref()
        .or(common.positional.as_deref())
        .ok_or_else(|| Failure::new(EXIT_INVALID, "no instance given"))?;
    let path = Path::new(name);
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(name);
    let inst = if path.exists() {
        load_instance(path)?
    } else {
        match stem {
            "table2" => datasets::table2(),
            "table3" => datasets::table3(),
            "table4" => datasets::table4(),
            "random" => datasets::random_instance(common.seed, &RandomSpec::default()),
            _ => return Err(InstanceError::Io(format!("{name}: no such file or built-in dataset")).into()),
        }
    };
    let inst = match common.jobs {
        Some(j) => inst.with_jobs_per_machine(j)?,
        None => inst,
    };
    let report = validate(&inst);
    if !report.is_ok() {
        return Err(Failure::new(EXIT_INVALID, format!("invalid instance:\n{report}")));
    }
    for w in &report.warnings {
        eprintln!("warning: {} ({}): {}", w.code, w.subject, w.message);
    }
    Ok(inst)
}

fn with_machines(inst: ProblemInstance, machines: Option<usize>) -> Result<ProblemInstance, Failure> {
    match machines {
        Some(m) => Ok(inst.with_machine_count(m)?),
        None => Ok(inst),
    }
}

fn run_config(common: &Common) -> Result<RunConfig, Failure> {
    let flag = match common.solver {
        SolverArg::Builtin => SolverChoice::Builtin,
        SolverArg::External => SolverChoice::External,
        SolverArg::Auto => SolverChoice::Auto,
    };
    let env = std::env::var(SOLVER_ENV).ok();
    let solver = resolve_solver(flag, env.as_deref())?;
    if common.threads == 0 {
        return Err(Failure::new(EXIT_INVALID, "--threads must be at least 1"));
    }
    let params = SolveParams {
        time_limit_s: common.time_limit,
        gap_tolerance: common.gap,
        worker_count: common.threads,
        deterministic: common.deterministic,
        ..SolveParams::default()
    };
    Ok(RunConfig { solver, params, ..RunConfig::default() })
}

fn params_text(common: &Common, extra: &str) -> String {
    let mut s = format!("jobs={:?};gap={};time_limit={}", common.jobs, common.gap, common.time_limit);
    if !extra.is_empty() {
        s.push(';');
        s.push_str(extra);
    }
    s
}

fn write_out(dir: &Path, file: &str, head: &str, body: &str) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(file);
    fs::write(&path, format!("{head}{body}"))?;
    Ok(path)
}

fn cmd_solve(a: SolveArgs) -> Outcome {
    if let ObjectiveArg::Pareto = a.objective {
        return cmd_pareto(ParetoArgs {
            common: a.common,
            epsilon_count: a.epsilon_count,
            epsilons: a.epsilon.map(|e| vec![e]),
            machines: a.machines,
            fixed_orientation: a.fixed_orientation,
        });
    }
    let inst = with_machines(load(&a.common)?, a.machines)?;
    let config = run_config(&a.common)?;
    let objective = if let ObjectiveArg::Zz = a.objective { Objective::Zz } else { Objective::Z };
    let mut model = build_model(&inst, BuildOptions { fixed_orientation: a.fixed_orientation, objective })
        .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    if let Some(e) = a.epsilon {
        model = model.inject_epsilon(e);
    }
    if let Some(p) = &a.lp_out {
        fs::write(p, write_lp(&model))?;
    }
    let (solution, backend) = match &a.solution_in {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            let sol = parse_external_solution(&text, &model).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
            (sol, "file")
        }
        None => {
            let b = config.backend_for(&model);
            let sol = b.solve(&model, None).map_err(|e| Failure::new(1, e.to_string()))?;
            (sol, b.name())
        }
    };
    println!("status = {}", solution.status);
    println!("backend = {backend}");
    if !solution.has_incumbent() {
        return Err(match solution.status {
            MilpStatus::Infeasible => Failure::new(EXIT_INFEASIBLE, "model is infeasible"),
            _ => Failure::new(EXIT_NO_INCUMBENT, "stopped without an incumbent"),
        });
    }
    let (schedule, evaluation) = experiments::realize(&inst, &model, &solution)?;
    let extra = format!(
        "objective={};fixed_orientation={};epsilon={:?}",
        if objective == Objective::Z { "z" } else { "zz" },
        a.fixed_orientation,
        a.epsilon
    );
    let head = provenance(&inst, &params_text(&a.common, &extra));
    write_out(&a.common.out, "schedule.csv", &head, &schedule_csv(&schedule, &evaluation, &inst))?;
    write_out(&a.common.out, "evaluation.csv", &head, &evaluation_csv(&evaluation, &inst))?;
    println!("z = {:.6}", evaluation.z);
    println!("zz = {:.6}", evaluation.zz);
    println!("gap = {:.3e}", solution.gap);
    println!("nodes = {}", solution.nodes);
    println!("wall_time_s = {:.3}", solution.wall_time.as_secs_f64());
    if solution.status == MilpStatus::TimeLimit {
        eprintln!("warning: time limit reached; incumbent not proven optimal");
    }
    Ok(())
}

fn cmd_pareto(a: ParetoArgs) -> Outcome {
    let inst = with_machines(load(&a.common)?, a.machines)?;
    let config = run_config(&a.common)?;
    let model = build_model(&inst, BuildOptions { fixed_orientation: a.fixed_orientation, objective: Objective::Zz })
        .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    let pc = ParetoConfig {
        grid_count: a.epsilon_count,
        backend: config.backend_for(&model),
        fixed_orientation: a.fixed_orientation,
        epsilons: a.epsilons.clone(),
    };
    let front = pareto_front(&inst, &pc).map_err(|e| match e {
        ParetoError::Infeasible(_) => Failure::new(EXIT_INFEASIBLE, e.to_string()),
        ParetoError::NoIncumbent(_) => Failure::new(EXIT_NO_INCUMBENT, e.to_string()),
        ParetoError::Build(_) => Failure::new(EXIT_INVALID, e.to_string()),
        _ => Failure::new(1, e.to_string()),
    })?;
    let extra = format!(
        "epsilon_count={};epsilons={:?};fixed_orientation={}",
        a.epsilon_count, a.epsilons, a.fixed_orientation
    );
    let head = provenance(&inst, &params_text(&a.common, &extra));
    let mut files = Vec::with_capacity(front.solves.len());
    for (k, s) in front.solves.iter().enumerate() {
        files.push(match &s.point {
            Some(p) => {
                let name = format!("point_{}.csv", k + 1);
                write_out(&a.common.out, &name, &head, &schedule_csv(&p.schedule, &p.evaluation, &inst))?;
                Some(name)
            }
            None => None,
        });
    }
    write_out(&a.common.out, "front.csv", &head, &front_csv(&front, &files))?;
    write_out(&a.common.out, "front.dat", &head, &front_gnuplot(&front))?;
    println!("payoff: z in [{:.6}, {:.6}], zz in [{:.6}, {:.6}]", front.payoff.z_ideal, front.payoff.z_nadir, front.payoff.zz_ideal, front.payoff.zz_nadir);
    for p in &front.points {
        println!("point zz = {:.6} z = {:.6}", p.zz, p.z);
    }
    for s in front.flagged() {
        eprintln!("flagged: epsilon {:.6} ended {}", s.epsilon, s.status);
    }
    if !front.monotonicity_violations.is_empty() {
        return Err(Failure::new(
            EXIT_DOMINANCE,
            format!("z rose with a looser epsilon at {:?}", front.monotonicity_violations),
        ));
    }
    Ok(())
}

/// `3,5,8` or `3..6` (inclusive).
fn parse_counts(text: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::new(EXIT_INVALID, format!("bad count list `{text}`"));
    let mut out = Vec::new();
    for piece in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match piece.split_once("..") {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            }
            None => out.push(piece.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn report_violations(violations: &[experiments::DominanceViolation]) -> Outcome {
    if violations.is_empty() {
        return Ok(());
    }
    for v in violations {
        eprintln!("dominance violation: {v}");
    }
    Err(Failure::new(EXIT_DOMINANCE, format!("{} dominance violation(s)", violations.len())))
}

fn cmd_scenario(a: ScenarioArgs) -> Outcome {
    let inst = load(&a.common)?;
    let config = run_config(&a.common)?;
    let prefixes = match &a.parts_prefix {
        Some(t) => parse_counts(t)?,
        None => (1..=inst.part_count()).collect(),
    };
    let machines = parse_counts(&a.machines)?;
    let report = run_scenario(&inst, &prefixes, &machines, &config)?;
    let extra = format!("parts_prefix={prefixes:?};machines={machines:?}");
    let body = scenario_csv(&report);
    write_out(&a.common.out, "scenario.csv", &provenance(&inst, &params_text(&a.common, &extra)), &body)?;
    print!("{body}");
    report_violations(&report.violations)
}

fn cmd_sweep(a: SweepArgs) -> Outcome {
    let mut inst = load(&a.common)?;
    if let Some(n) = a.parts_prefix {
        inst = inst.with_part_prefix(n)?;
    }
    let config = run_config(&a.common)?;
    let parameter: SweepParameter = a.parameter.parse()?;
    let scenario: ScenarioSelection = a.scenario.parse()?;
    let spec = SweepSpec { parameter, values: a.values.clone(), scenario, machines_override: a.machines };
    let report = run_sweep(&inst, &spec, &config)?;
    let extra = format!(
        "parameter={};values={:?};scenario={};machines={:?};parts_prefix={:?}",
        parameter.as_str(),
        a.values,
        a.scenario,
        a.machines,
        a.parts_prefix
    );
    let body = sweep_csv(&report);
    write_out(&a.common.out, "sweep.csv", &provenance(&inst, &params_text(&a.common, &extra)), &body)?;
    print!("{body}");
    report_violations(&report.violations)
}
