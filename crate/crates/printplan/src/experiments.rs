//! Experiment drivers behind the command line: single solves, scenario
//! comparisons (free against fixed orientation, one against two machines)
//! and one-parameter sensitivity sweeps, plus the dominance checks every
//! comparison is held to.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::instance::{validate, InstanceError, ProblemInstance};
use crate::model::{build_model, BuildError, BuildOptions, MilpModel, Objective};
use crate::oracle::retime;
use crate::schedule::{canonicalize, check_feasible, decode_values, evaluate, Evaluation, Schedule};
use crate::solver::{Backend, ExternalSolver, MilpSolution, MilpStatus, SolveError, SolveParams};

/// Environment variable that overrides `--solver`.
pub const SOLVER_ENV: &str = "PRINTPLAN_SOLVER";

/// Above this many binaries `auto` hands the model to the external solver.
pub const AUTO_EXTERNAL_BINARIES: usize = 120;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("invalid instance:\n{0}")]
    Invalid(String),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("solver solution does not decode to a valid schedule: {0}")]
    BadSolution(String),
    #[error("bad sweep spec: {0}")]
    BadSpec(String),
    #[error("unknown solver `{0}` (expected builtin, external or auto)")]
    UnknownSolver(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverChoice {
    Builtin,
    External,
    #[default]
    Auto,
}

impl FromStr for SolverChoice {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "builtin" => Ok(SolverChoice::Builtin),
            "external" => Ok(SolverChoice::External),
            "auto" => Ok(SolverChoice::Auto),
            _ => Err(ExperimentError::UnknownSolver(s.to_string())),
        }
    }
}

/// The flag value unless `PRINTPLAN_SOLVER` is set.
pub fn resolve_solver(flag: SolverChoice, env: Option<&str>) -> Result<SolverChoice, ExperimentError> {
    match env {
        Some(v) if !v.trim().is_empty() => v.parse(),
        _ => Ok(flag),
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub solver: SolverChoice,
    pub params: SolveParams,
    pub external: ExternalSolver,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { solver: SolverChoice::Builtin, params: SolveParams::default(), external: ExternalSolver::from_env() }
    }
}

impl RunConfig {
    pub fn backend_for(&self, model: &MilpModel) -> Backend {
        let external = match self.solver {
            SolverChoice::Builtin => false,
            SolverChoice::External => true,
            SolverChoice::Auto => model.stats().binaries > AUTO_EXTERNAL_BINARIES,
        };
        if external {
            let mut ext = self.external.clone();
            ext.time_limit_s = self.params.time_limit_s;
            ext.gap = self.params.gap_tolerance;
            ext.threads = self.params.worker_count;
            Backend::External(ext)
        } else {
            Backend::Builtin(self.params.clone())
        }
    }

    /// The same run with a serial branch-and-bound, for use inside a pool
    /// that already parallelizes over cells.
    fn serial(&self) -> Self {
        let mut c = self.clone();
        c.params.worker_count = 1;
        c.external.threads = 1;
        c
    }

    fn threads(&self) -> usize {
        self.params.worker_count.max(1)
    }
}

/// Rejects instances `validate` finds errors in.
pub fn ensure_valid(instance: &ProblemInstance) -> Result<(), ExperimentError> {
    let report = validate(instance);
    if report.is_ok() {
        Ok(())
    } else {
        Err(ExperimentError::Invalid(report.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub backend: &'static str,
    pub solution: MilpSolution,
    /// Present when the solver returned an incumbent.
    pub schedule: Option<Schedule>,
    pub evaluation: Option<Evaluation>,
}

/// Canonicalizes, decodes, checks and evaluates a solver incumbent.
pub fn realize(
    instance: &ProblemInstance,
    model: &MilpModel,
    solution: &MilpSolution,
) -> Result<(Schedule, Evaluation), ExperimentError> {
    let mut values = solution.values.clone();
    canonicalize(&mut values, model, instance);
    let schedule = decode_values(&values, model, instance).map_err(|e| ExperimentError::BadSolution(e.to_string()))?;
    if let Some(v) = check_feasible(&schedule, instance).first() {
        return Err(ExperimentError::BadSolution(v.to_string()));
    }
    let evaluation = evaluate(&schedule, instance).map_err(|e| ExperimentError::BadSolution(e.to_string()))?;
    let retimed = retime(&schedule, instance);
    match evaluate(&retimed, instance) {
        Ok(e) if e.z < evaluation.z => Ok((retimed, e)),
        _ => Ok((schedule, evaluation)),
    }
}

/// Builds and solves one model. `epsilon` bounds zz when given.
pub fn solve_instance(
    instance: &ProblemInstance,
    objective: Objective,
    fixed_orientation: bool,
    epsilon: Option<f64>,
    config: &RunConfig,
) -> Result<SolveReport, ExperimentError> {
    ensure_valid(instance)?;
    let mut model = build_model(instance, BuildOptions { fixed_orientation, objective })?;
    if let Some(e) = epsilon {
        model = model.inject_epsilon(e);
    }
    let backend = config.backend_for(&model);
    let solution = backend.solve(&model, None)?;
    let (schedule, evaluation) = if solution.has_incumbent() {
        let (s, e) = realize(instance, &model, &solution)?;
        (Some(s), Some(e))
    } else {
        (None, None)
    };
    Ok(SolveReport { backend: backend.name(), solution, schedule, evaluation })
}

/// Outcome of one z-only solve inside a comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Solved { z: f64, status: MilpStatus, nodes: u64, wall_time: Duration },
    Infeasible,
    /// Budget ran out before any incumbent.
    NoIncumbent,
    /// The modified instance fails validation.
    Invalid(String),
    Error(String),
}

impl Cell {
    pub fn z(&self) -> Option<f64> {
        match self {
            Cell::Solved { z, .. } => Some(*z),
            _ => None,
        }
    }

    /// A z value that was proven optimal.
    pub fn proven(&self) -> Option<f64> {
        match self {
            Cell::Solved { z, status: MilpStatus::Optimal, .. } => Some(*z),
            _ => None,
        }
    }

    pub fn marker(&self) -> &'static str {
        match self {
            Cell::Solved { status, .. } => status.as_str(),
            Cell::Infeasible => "INFEASIBLE",
            Cell::NoIncumbent => "TIMELIMIT",
            Cell::Invalid(_) => "INVALID",
            Cell::Error(_) => "ERROR",
        }
    }

    fn z_text(&self) -> String {
        self.z().map(|z| format!("{z:.6}")).unwrap_or_default()
    }
}

/// Minimizes z alone: no epsilon row, zz left free.
pub fn solve_z_cell(instance: &ProblemInstance, fixed_orientation: bool, config: &RunConfig) -> Cell {
    if let Err(e) = ensure_valid(instance) {
        return Cell::Invalid(e.to_string());
    }
    match solve_instance(instance, Objective::Z, fixed_orientation, None, config) {
        Ok(r) => match (&r.evaluation, r.solution.status) {
            (Some(e), status) => {
                Cell::Solved { z: e.z, status, nodes: r.solution.nodes, wall_time: r.solution.wall_time }
            }
            (None, MilpStatus::Infeasible) => Cell::Infeasible,
            (None, _) => Cell::NoIncumbent,
        },
        Err(e) => Cell::Error(e.to_string()),
    }
}

/// A comparison that should never go the wrong way and did.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceViolation {
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for DominanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

/// `better` must not exceed `worse`; only proven optima are compared, and
/// the relaxed side may not be infeasible while the restricted side is not.
fn check_le(rule: &'static str, better: &Cell, worse: &Cell, what: String, out: &mut Vec<DominanceViolation>) {
    if *better == Cell::Infeasible && worse.z().is_some() {
        out.push(DominanceViolation { rule, detail: format!("{what}: relaxed infeasible, restricted solved") });
    }
    if let (Some(a), Some(b)) = (better.proven(), worse.proven()) {
        if a > b + 1e-6 * b.abs().max(1.0) {
            out.push(DominanceViolation { rule, detail: format!("{what}: {a:.6} > {b:.6}") });
        }
    }
}

fn run_cells<T: Send>(config: &RunConfig, jobs: Vec<T>, f: impl Fn(&T, &RunConfig) -> Cell + Sync) -> Vec<Cell>
where
    T: Sync,
{
    let serial = config.serial();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.threads()).build().expect("thread pool");
    pool.install(|| jobs.par_iter().map(|j| f(j, &serial)).collect())
}

/// Caps the job budget at the part count; more jobs could only stay empty.
fn trim_jobs(instance: &ProblemInstance) -> Result<ProblemInstance, InstanceError> {
    let jobs = instance.jobs_per_machine().min(instance.part_count().max(1));
    instance.with_jobs_per_machine(jobs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRow {
    pub parts: usize,
    pub machines: usize,
    /// Scenario 1: orientation chosen by the model.
    pub free: Cell,
    /// Scenario 2: parts keep their given height.
    pub fixed: Cell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub rows: Vec<ScenarioRow>,
    pub violations: Vec<DominanceViolation>,
}

/// Solves the z-only model for every (machine count, part prefix) pair
/// under both scenarios.
pub fn run_scenario(
    instance: &ProblemInstance,
    prefixes: &[usize],
    machine_counts: &[usize],
    config: &RunConfig,
) -> Result<ScenarioReport, ExperimentError> {
    let mut variants = Vec::new();
    for &m in machine_counts {
        for &n in prefixes {
            if n == 0 || n > instance.part_count() {
                return Err(ExperimentError::BadSpec(format!(
                    "prefix {n} outside 1..={} parts",
                    instance.part_count()
                )));
            }
            let inst = trim_jobs(&instance.with_part_prefix(n)?.with_machine_count(m)?)?;
            variants.push((n, m, inst));
        }
    }
    let jobs: Vec<(usize, bool)> = (0..variants.len()).flat_map(|k| [(k, false), (k, true)]).collect();
    let cells = run_cells(config, jobs, |&(k, fixed), c| solve_z_cell(&variants[k].2, fixed, c));
    let rows: Vec<ScenarioRow> = variants
        .iter()
        .enumerate()
        .map(|(k, (n, m, _))| ScenarioRow {
            parts: *n,
            machines: *m,
            free: cells[2 * k].clone(),
            fixed: cells[2 * k + 1].clone(),
        })
        .collect();

    let mut violations = Vec::new();
    for r in &rows {
        let what = format!("n={} m={}", r.parts, r.machines);
        check_le("free orientation never worse than fixed", &r.free, &r.fixed, what, &mut violations);
    }
    for a in &rows {
        for b in &rows {
            if a.parts == b.parts && a.machines > b.machines {
                let what = format!("n={} m={} vs m={}", a.parts, a.machines, b.machines);
                check_le("more machines never worse (free)", &a.free, &b.free, what.clone(), &mut violations);
                check_le("more machines never worse (fixed)", &a.fixed, &b.fixed, what, &mut violations);
            }
        }
    }
    Ok(ScenarioReport { rows, violations })
}

pub const SCENARIO_HEADER: [&str; 6] = ["parts", "machines", "scenario1_z", "scenario1_status", "scenario2_z", "scenario2_status"];

pub fn scenario_csv(report: &ScenarioReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SCENARIO_HEADER).expect("in-memory write");
    for r in &report.rows {
        w.write_record([
            r.parts.to_string(),
            r.machines.to_string(),
            r.free.z_text(),
            r.free.marker().to_string(),
            r.fixed.z_text(),
            r.fixed.marker().to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Ht, hours per mm of job height.
    LayerTime,
    /// Vt, hours per mm³.
    VolumetricTime,
    /// A_m in mm²; both plate sides scale by the same factor.
    MachineArea,
    /// Number of leading parts kept.
    PartCountPrefix,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::LayerTime => "layer_time",
            SweepParameter::VolumetricTime => "volumetric_time",
            SweepParameter::MachineArea => "machine_area",
            SweepParameter::PartCountPrefix => "part_count_prefix",
        }
    }
}

impl FromStr for SweepParameter {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "layer_time" => Ok(SweepParameter::LayerTime),
            "volumetric_time" => Ok(SweepParameter::VolumetricTime),
            "machine_area" => Ok(SweepParameter::MachineArea),
            "part_count_prefix" => Ok(SweepParameter::PartCountPrefix),
            _ => Err(ExperimentError::BadSpec(format!("unknown parameter `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioSelection {
    FreeOrientation,
    FixedOrientation,
    Both,
}

impl ScenarioSelection {
    fn fixed_flags(self) -> &'static [bool] {
        match self {
            ScenarioSelection::FreeOrientation => &[false],
            ScenarioSelection::FixedOrientation => &[true],
            ScenarioSelection::Both => &[false, true],
        }
    }
}

impl FromStr for ScenarioSelection {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "free_orientation" => Ok(ScenarioSelection::FreeOrientation),
            "fixed_orientation" => Ok(ScenarioSelection::FixedOrientation),
            "both" => Ok(ScenarioSelection::Both),
            _ => Err(ExperimentError::BadSpec(format!("unknown scenario `{s}`"))),
        }
    }
}

fn scenario_name(fixed: bool) -> &'static str {
    if fixed {
        "fixed_orientation"
    } else {
        "free_orientation"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub scenario: ScenarioSelection,
    pub machines_override: Option<usize>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.values.is_empty() {
            return Err(ExperimentError::BadSpec("empty value list".into()));
        }
        for &v in &self.values {
            if !v.is_finite() || v <= 0.0 {
                return Err(ExperimentError::BadSpec(format!("{} value {v} must be positive", self.parameter.as_str())));
            }
            if self.parameter == SweepParameter::PartCountPrefix && v.fract() != 0.0 {
                return Err(ExperimentError::BadSpec(format!("part count {v} is not an integer")));
            }
        }
        if self.machines_override == Some(0) {
            return Err(ExperimentError::BadSpec("machine count must be at least 1".into()));
        }
        Ok(())
    }

    /// The instance with the parameter set to `value`.
    pub fn apply(&self, instance: &ProblemInstance, value: f64) -> Result<ProblemInstance, InstanceError> {
        let base = match self.machines_override {
            Some(m) => instance.with_machine_count(m)?,
            None => instance.clone(),
        };
        let mut machines = base.machines().to_vec();
        let out = match self.parameter {
            SweepParameter::LayerTime => {
                machines.iter_mut().for_each(|m| m.layer_time_h_per_mm = value);
                base.with_machines(machines)?
            }
            SweepParameter::VolumetricTime => {
                machines.iter_mut().for_each(|m| m.volumetric_time_h_per_mm3 = value);
                base.with_machines(machines)?
            }
            SweepParameter::MachineArea => {
                for m in &mut machines {
                    let k = (value / m.area_mm2()).sqrt();
                    m.width_mm *= k;
                    m.length_mm *= k;
                }
                base.with_machines(machines)?
            }
            SweepParameter::PartCountPrefix => base.with_part_prefix(value as usize)?,
        };
        trim_jobs(&out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub scenario: &'static str,
    pub cell: Cell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
    pub violations: Vec<DominanceViolation>,
}

impl SweepReport {
    pub fn cell(&self, value: f64, scenario: &str) -> Option<&Cell> {
        self.rows.iter().find(|r| r.value == value && r.scenario == scenario).map(|r| &r.cell)
    }
}

/// One row per (value, scenario) in spec order.
pub fn run_sweep(instance: &ProblemInstance, spec: &SweepSpec, config: &RunConfig) -> Result<SweepReport, ExperimentError> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for &v in &spec.values {
        let inst = spec.apply(instance, v).map_err(|e| e.to_string());
        for &fixed in spec.scenario.fixed_flags() {
            jobs.push((v, fixed, inst.clone()));
        }
    }
    let cells = run_cells(config, jobs.iter().collect(), |job, c| match &job.2 {
        Ok(inst) => solve_z_cell(inst, job.1, c),
        Err(e) => Cell::Invalid(e.clone()),
    });
    let rows: Vec<SweepRow> = jobs
        .iter()
        .zip(cells)
        .map(|((v, fixed, _), cell)| SweepRow { value: *v, scenario: scenario_name(*fixed), cell })
        .collect();

    let mut violations = Vec::new();
    for &v in &spec.values {
        let (free, fixed) = (
            rows.iter().find(|r| r.value == v && r.scenario == "free_orientation"),
            rows.iter().find(|r| r.value == v && r.scenario == "fixed_orientation"),
        );
        if let (Some(a), Some(b)) = (free, fixed) {
            let what = format!("{}={v}", spec.parameter.as_str());
            check_le("free orientation never worse than fixed", &a.cell, &b.cell, what, &mut violations);
        }
    }
    if spec.parameter == SweepParameter::MachineArea {
        for a in &rows {
            for b in &rows {
                if a.scenario == b.scenario && a.value > b.value {
                    let what = format!("{} area {} vs {}", a.scenario, a.value, b.value);
                    check_le("larger plate never worse", &a.cell, &b.cell, what, &mut violations);
                }
            }
        }
    }
    Ok(SweepReport { parameter: spec.parameter, rows, violations })
}

pub const SWEEP_HEADER: [&str; 5] = ["parameter", "value", "scenario", "z_hours", "status"];

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).expect("in-memory write");
    for r in &report.rows {
        w.write_record([
            report.parameter.as_str().to_string(),
            format!("{}", r.value),
            r.scenario.to_string(),
            r.cell.z_text(),
            r.cell.marker().to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// `git describe` of the source tree, or the crate version outside a checkout.
pub fn source_revision() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

/// The `#` line every CSV starts with.
pub fn provenance(instance: &ProblemInstance, params: &str) -> String {
    format!("# printplan instance={} git={} params={}\n", instance.content_hash(), source_revision(), params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;

    fn builtin() -> RunConfig {
        RunConfig::default()
    }

    #[test]
    fn solver_env_overrides_flag() {
        assert_eq!(resolve_solver(SolverChoice::Builtin, Some("external")).unwrap(), SolverChoice::External);
        assert_eq!(resolve_solver(SolverChoice::External, None).unwrap(), SolverChoice::External);
        assert_eq!(resolve_solver(SolverChoice::External, Some(" ")).unwrap(), SolverChoice::External);
        assert!(resolve_solver(SolverChoice::Auto, Some("gurobi")).is_err());
    }

    #[test]
    fn auto_picks_external_above_threshold() {
        let cfg = RunConfig { solver: SolverChoice::Auto, ..builtin() };
        let small = build_model(&datasets::table2(), BuildOptions::default()).unwrap();
        assert_eq!(cfg.backend_for(&small).name(), "builtin");
        let big = build_model(&datasets::table3().with_part_prefix(10).unwrap(), BuildOptions::default()).unwrap();
        assert!(big.stats().binaries > AUTO_EXTERNAL_BINARIES);
        assert_eq!(cfg.backend_for(&big).name(), "external");
    }

    #[test]
    fn scenario_rows_and_dominance() {
        let inst = datasets::table3();
        let r = run_scenario(&inst, &[3, 4], &[1, 2], &builtin()).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        for row in &r.rows {
            assert!(row.free.proven().unwrap() <= row.fixed.proven().unwrap() + 1e-6);
        }
        let csv = scenario_csv(&r);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("parts,machines,scenario1_z"));
    }

    #[test]
    fn prefix_out_of_range() {
        assert!(matches!(
            run_scenario(&datasets::table2(), &[10], &[1], &builtin()),
            Err(ExperimentError::BadSpec(_))
        ));
    }

    #[test]
    fn sweep_spec_checks() {
        let mut spec = SweepSpec {
            parameter: SweepParameter::LayerTime,
            values: vec![],
            scenario: ScenarioSelection::Both,
            machines_override: None,
        };
        assert!(spec.validate().is_err());
        spec.values = vec![0.1, -1.0];
        assert!(spec.validate().is_err());
        spec.values = vec![0.1];
        assert!(spec.validate().is_ok());
        spec.parameter = SweepParameter::PartCountPrefix;
        spec.values = vec![2.5];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn area_sweep_rebuilds_plates() {
        let spec = SweepSpec {
            parameter: SweepParameter::MachineArea,
            values: vec![9000.0],
            scenario: ScenarioSelection::FreeOrientation,
            machines_override: Some(1),
        };
        let inst = spec.apply(&datasets::table4(), 9000.0).unwrap();
        assert_eq!(inst.machine_count(), 1);
        assert!((inst.machines()[0].area_mm2() - 9000.0).abs() < 1e-6);
        assert_eq!(inst.machines()[0].width_mm, inst.machines()[0].length_mm);
    }

    #[test]
    fn single_value_sweep_matches_solve() {
        let inst = datasets::table4().with_part_prefix(3).unwrap();
        let spec = SweepSpec {
            parameter: SweepParameter::LayerTime,
            values: vec![inst.machines()[0].layer_time_h_per_mm],
            scenario: ScenarioSelection::FreeOrientation,
            machines_override: None,
        };
        let r = run_sweep(&inst, &spec, &builtin()).unwrap();
        assert_eq!(r.rows.len(), 1);
        let direct = solve_instance(&trim_jobs(&inst).unwrap(), Objective::Z, false, None, &builtin()).unwrap();
        assert!((r.rows[0].cell.z().unwrap() - direct.evaluation.unwrap().z).abs() < 1e-9);
    }

    #[test]
    fn invalid_cells_are_marked() {
        // a 100 mm² plate cannot hold any table 4 part
        let spec = SweepSpec {
            parameter: SweepParameter::MachineArea,
            values: vec![100.0],
            scenario: ScenarioSelection::Both,
            machines_override: None,
        };
        let r = run_sweep(&datasets::table4().with_part_prefix(2).unwrap(), &spec, &builtin()).unwrap();
        assert!(r.rows.iter().all(|row| row.cell.marker() == "INVALID"));
        assert!(sweep_csv(&r).lines().nth(1).unwrap().ends_with(",,INVALID"));
    }

    #[test]
    fn provenance_line() {
        let line = provenance(&datasets::table2(), "k=1");
        assert!(line.starts_with("# printplan instance="));
        assert!(line.ends_with("params=k=1\n"));
    }
}
