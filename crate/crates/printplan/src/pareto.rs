//! Epsilon-constraint sweep between the due-date objective z and the
//! unused-area objective zz.
//!
//! The payoff table comes from two lexicographic solve pairs: least z, then
//! least zz among z-optimal layouts, and the same the other way round. The
//! grid then runs from the least zz to the zz of the z-optimal layout, and at
//! each grid value z is minimized under `zz ≤ ε`.

use std::time::Duration;

use thiserror::Error;

use crate::instance::ProblemInstance;
use crate::model::{build_model, BuildError, BuildOptions, MilpModel, Objective};
use crate::oracle::retime;
use crate::schedule::{canonicalize, check_feasible, decode_values, evaluate, Evaluation, Schedule};
use crate::solver::{Backend, MilpSolution, MilpStatus, SolveError, SolveParams};

/// Objective values closer than this count as equal.
pub const SAME_TOL: f64 = 1e-6;

/// Slack on the first objective bound of a lexicographic refinement,
/// relative to `max(1, |optimum|)`.
const LEX_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ParetoError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("{0}: no feasible schedule")]
    Infeasible(&'static str),
    #[error("{0}: solver stopped without an incumbent")]
    NoIncumbent(&'static str),
    #[error("{stage}: solver solution does not decode to a valid schedule: {detail}")]
    BadSolution { stage: &'static str, detail: String },
}

/// Anything with a (z, zz) pair.
pub trait Objectives {
    fn z(&self) -> f64;
    fn zz(&self) -> f64;
}

impl Objectives for (f64, f64) {
    fn z(&self) -> f64 {
        self.0
    }
    fn zz(&self) -> f64 {
        self.1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint {
    pub epsilon: f64,
    /// Evaluator z, hours.
    pub z: f64,
    /// Evaluator zz, mm².
    pub zz: f64,
    pub status: MilpStatus,
    /// The solver's own objective value for the solve that produced this point.
    pub solver_objective: f64,
    pub schedule: Schedule,
    pub evaluation: Evaluation,
    /// Canonicalized column values; reused as warm starts. The schedule's
    /// completion times may be re-solved and so differ from these.
    pub values: Vec<f64>,
}

impl Objectives for ParetoPoint {
    fn z(&self) -> f64 {
        self.z
    }
    fn zz(&self) -> f64 {
        self.zz
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffTable {
    pub z_ideal: f64,
    pub zz_ideal: f64,
    /// z of the zz-optimal layout.
    pub z_nadir: f64,
    /// zz of the z-optimal layout.
    pub zz_nadir: f64,
    /// Lexicographic (z, then zz) optimum.
    pub z_anchor: ParetoPoint,
    /// Lexicographic (zz, then z) optimum.
    pub zz_anchor: ParetoPoint,
    /// False when any of the four solves stopped short of optimality.
    pub exact: bool,
}

impl PayoffTable {
    /// The ideal point shifted down by `shift` in both objectives.
    pub fn utopian(&self, shift: f64) -> (f64, f64) {
        (self.z_ideal - shift, self.zz_ideal - shift)
    }
}

#[derive(Debug, Clone)]
pub struct ParetoConfig {
    pub grid_count: usize,
    pub backend: Backend,
    pub fixed_orientation: bool,
    /// Replaces the grid with these epsilon values.
    pub epsilons: Option<Vec<f64>>,
}

impl Default for ParetoConfig {
    fn default() -> Self {
        Self { grid_count: 10, backend: Backend::Builtin(SolveParams::default()), fixed_orientation: false, epsilons: None }
    }
}

/// One epsilon solve, kept whether or not it produced a point.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSolve {
    pub epsilon: f64,
    pub status: MilpStatus,
    pub point: Option<ParetoPoint>,
    /// The point survived dominance filtering and deduplication.
    pub kept: bool,
    pub nodes: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    pub payoff: PayoffTable,
    /// In epsilon order.
    pub solves: Vec<EpsilonSolve>,
    /// Nondominated points, ascending in zz.
    pub points: Vec<ParetoPoint>,
    /// Consecutive optimal solves `(ε_a, ε_b)`, `ε_a < ε_b`, where z went up.
    pub monotonicity_violations: Vec<(f64, f64)>,
}

impl ParetoFront {
    /// Solves that did not prove optimality.
    pub fn flagged(&self) -> impl Iterator<Item = &EpsilonSolve> {
        self.solves.iter().filter(|s| s.status != MilpStatus::Optimal)
    }
}

fn dominates<P: Objectives>(q: &P, p: &P) -> bool {
    q.z() <= p.z() + SAME_TOL
        && q.zz() <= p.zz() + SAME_TOL
        && (q.z() < p.z() - SAME_TOL || q.zz() < p.zz() - SAME_TOL)
}

/// Keeps the points no other point dominates, drops repeats of the same
/// (z, zz) pair, and sorts by zz ascending.
pub fn filter_dominated<P: Objectives + Clone>(points: &[P]) -> Vec<P> {
    let mut kept: Vec<P> = Vec::new();
    for p in points {
        if points.iter().any(|q| dominates(q, p)) {
            continue;
        }
        let dup = kept.iter().any(|k| (k.z() - p.z()).abs() <= SAME_TOL && (k.zz() - p.zz()).abs() <= SAME_TOL);
        if !dup {
            kept.push(p.clone());
        }
    }
    kept.sort_by(|a, b| a.zz().total_cmp(&b.zz()).then(a.z().total_cmp(&b.z())));
    kept
}

fn realize(
    stage: &'static str,
    instance: &ProblemInstance,
    model: &MilpModel,
    sol: &MilpSolution,
    epsilon: f64,
) -> Result<ParetoPoint, ParetoError> {
    let bad = |detail: String| ParetoError::BadSolution { stage, detail };
    let mut values = sol.values.clone();
    canonicalize(&mut values, model, instance);
    let schedule = decode_values(&values, model, instance).map_err(|e| bad(e.to_string()))?;
    let violations = check_feasible(&schedule, instance);
    if let Some(v) = violations.first() {
        return Err(bad(v.to_string()));
    }
    let mut evaluation = evaluate(&schedule, instance).map_err(|e| bad(e.to_string()))?;
    let mut schedule = schedule;
    let retimed = retime(&schedule, instance);
    if let Ok(e) = evaluate(&retimed, instance) {
        if e.z < evaluation.z {
            schedule = retimed;
            evaluation = e;
        }
    }
    Ok(ParetoPoint {
        epsilon,
        z: evaluation.z,
        zz: evaluation.zz,
        status: sol.status,
        solver_objective: sol.objective,
        schedule,
        evaluation,
        values,
    })
}

fn solve_point(
    stage: &'static str,
    instance: &ProblemInstance,
    model: &MilpModel,
    backend: &Backend,
    warm: Option<Vec<f64>>,
    epsilon: f64,
) -> Result<ParetoPoint, ParetoError> {
    let sol = backend.solve(model, warm)?;
    match sol.status {
        MilpStatus::Infeasible => Err(ParetoError::Infeasible(stage)),
        _ if !sol.has_incumbent() => Err(ParetoError::NoIncumbent(stage)),
        _ => realize(stage, instance, model, &sol, epsilon),
    }
}

fn base_model(instance: &ProblemInstance, config: &ParetoConfig) -> Result<MilpModel, ParetoError> {
    Ok(build_model(instance, BuildOptions { fixed_orientation: config.fixed_orientation, objective: Objective::Z })?)
}

fn bound_for(v: f64) -> f64 {
    v + LEX_TOL * v.abs().max(1.0)
}

/// Ideal and nadir estimates from the two lexicographic optima.
pub fn payoff_table(instance: &ProblemInstance, config: &ParetoConfig) -> Result<PayoffTable, ParetoError> {
    let model = base_model(instance, config)?;
    payoff_with(instance, &model, config)
}

fn payoff_with(instance: &ProblemInstance, model: &MilpModel, config: &ParetoConfig) -> Result<PayoffTable, ParetoError> {
    let backend = &config.backend;
    let inf = f64::INFINITY;

    let z_first = solve_point("min z", instance, model, backend, None, inf)?;
    let refine_model = model.clone().with_objective(Objective::Zz).bound_z(bound_for(z_first.z));
    let z_anchor = solve_point("min zz at least z", instance, &refine_model, backend, Some(z_first.values.clone()), inf)?;

    let zz_model = model.clone().with_objective(Objective::Zz);
    let zz_first = solve_point("min zz", instance, &zz_model, backend, None, inf)?;
    let refine_model = model.clone().inject_epsilon(bound_for(zz_first.zz));
    let zz_anchor = solve_point("min z at least zz", instance, &refine_model, backend, Some(zz_first.values.clone()), inf)?;

    let exact = [&z_first, &z_anchor, &zz_first, &zz_anchor].iter().all(|p| p.status == MilpStatus::Optimal);
    Ok(PayoffTable {
        z_ideal: z_first.z,
        zz_ideal: zz_first.zz,
        z_nadir: zz_anchor.z,
        zz_nadir: z_anchor.zz,
        z_anchor,
        zz_anchor,
        exact,
    })
}

/// Grid `ε_k = zz_ideal + k·(zz_nadir − zz_ideal)/(K − 1)`, `k = 0..K`.
pub fn epsilon_grid(payoff: &PayoffTable, grid_count: usize) -> Vec<f64> {
    match grid_count {
        0 => Vec::new(),
        1 => vec![payoff.zz_ideal],
        k => {
            let step = (payoff.zz_nadir - payoff.zz_ideal) / (k - 1) as f64;
            (0..k).map(|i| if i + 1 == k { payoff.zz_nadir } else { payoff.zz_ideal + i as f64 * step }).collect()
        }
    }
}

pub fn pareto_front(instance: &ProblemInstance, config: &ParetoConfig) -> Result<ParetoFront, ParetoError> {
    let model = base_model(instance, config)?;
    let payoff = payoff_with(instance, &model, config)?;
    let mut epsilons = match &config.epsilons {
        Some(list) => list.clone(),
        None => epsilon_grid(&payoff, config.grid_count),
    };
    epsilons.sort_by(f64::total_cmp);

    let mut known: Vec<ParetoPoint> = vec![payoff.zz_anchor.clone(), payoff.z_anchor.clone()];
    let mut solves = Vec::with_capacity(epsilons.len());
    for &eps in &epsilons {
        let m = model.clone().inject_epsilon(eps);
        // least-z known layout that fits under this epsilon
        let warm = known
            .iter()
            .filter(|p| p.zz <= eps)
            .min_by(|a, b| a.z.total_cmp(&b.z))
            .map(|p| p.values.clone());
        let sol = config.backend.solve(&m, warm)?;
        let point = if sol.has_incumbent() { Some(realize("epsilon point", instance, &m, &sol, eps)?) } else { None };
        if let Some(p) = &point {
            known.push(p.clone());
        }
        solves.push(EpsilonSolve {
            epsilon: eps,
            status: sol.status,
            point,
            kept: false,
            nodes: sol.nodes,
            wall_time: sol.wall_time,
        });
    }

    let candidates: Vec<ParetoPoint> = solves.iter().filter_map(|s| s.point.clone()).collect();
    let points = filter_dominated(&candidates);
    let same = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs() <= SAME_TOL && (a.1 - b.1).abs() <= SAME_TOL;
    // the first solve reaching a front pair owns it
    let mut seen: Vec<(f64, f64)> = Vec::new();
    for s in &mut solves {
        if let Some(p) = &s.point {
            let pair = (p.z, p.zz);
            if points.iter().any(|q| same((q.z, q.zz), pair)) && !seen.iter().any(|&q| same(q, pair)) {
                seen.push(pair);
                s.kept = true;
            }
        }
    }

    let mut monotonicity_violations = Vec::new();
    let optimal: Vec<&EpsilonSolve> =
        solves.iter().filter(|s| s.status == MilpStatus::Optimal && s.point.is_some()).collect();
    for w in optimal.windows(2) {
        let (a, b) = (w[0].point.as_ref().unwrap(), w[1].point.as_ref().unwrap());
        if b.z > a.z + SAME_TOL * a.z.abs().max(1.0) {
            monotonicity_violations.push((w[0].epsilon, w[1].epsilon));
        }
    }
    Ok(ParetoFront { payoff, solves, points, monotonicity_violations })
}

pub const FRONT_HEADER: [&str; 5] = ["epsilon", "z_hours", "zz_mm2", "status", "schedule_file"];

/// One row per epsilon solve. `schedule_files[k]` names the schedule written
/// for solve `k`, if any.
pub fn front_csv(front: &ParetoFront, schedule_files: &[Option<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FRONT_HEADER).expect("in-memory write");
    for (k, s) in front.solves.iter().enumerate() {
        let (z, zz) = match &s.point {
            Some(p) => (format!("{:.6}", p.z), format!("{:.6}", p.zz)),
            None => (String::new(), String::new()),
        };
        let file = schedule_files.get(k).cloned().flatten().unwrap_or_default();
        w.write_record([format!("{:.6}", s.epsilon), z, zz, s.status.to_string(), file]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Two whitespace-separated columns `zz z`, one line per nondominated point.
pub fn front_gnuplot(front: &ParetoFront) -> String {
    let mut out = String::from("# zz_mm2 z_hours\n");
    for p in &front.points {
        out.push_str(&format!("{:.6} {:.6}\n", p.zz, p.z));
    }
    out
}
