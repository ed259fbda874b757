//! Brute-force ground truth for small instances.
//!
//! [`brute_force`] enumerates part-to-machine distributions, ordered
//! partitions of each machine's parts into jobs, and orientations; each
//! candidate's completion times come from [`optimal_timing`]. Per job only
//! orientation choices that are Pareto-minimal in (processing time,
//! occupied area) are kept: the earliness/tardiness cost cannot decrease when
//! a processing time grows, and unused area falls as occupied area grows, so
//! this reduction is exact for both objectives and every epsilon bound. While
//! a job is still being filled, a larger partial layout only prunes a smaller
//! one when it can never overflow the plate.
//!
//! [`single_batch_oracle`] handles the all-in-one-job case without any LP.

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{feasible_orientations, volume, Orientation, OrientationKind};
use crate::instance::ProblemInstance;
use crate::schedule::{evaluate, Assignment, Evaluation, Schedule};
use crate::solver::simplex::{solve_lp, LpProblem, LpStatus, Sense};

/// One machine's fixed job sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingMachine {
    pub processing_h: Vec<f64>,
    /// Due dates of the parts in each job.
    pub due_h: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingProblem {
    pub machines: Vec<TimingMachine>,
    pub earliness_penalty: f64,
    pub tardiness_penalty: f64,
}

/// Completion times (per machine, per job) minimizing earliness plus
/// tardiness subject to `C_j ≥ C_{j−1} + P_j`, `C_0 = 0`.
pub fn optimal_timing(problem: &TimingProblem) -> (Vec<Vec<f64>>, f64) {
    let mut lp = LpProblem::default();
    let mut cols = Vec::new();
    for mach in &problem.machines {
        let mut prev: Option<usize> = None;
        let mut row = Vec::new();
        for (k, &p) in mach.processing_h.iter().enumerate() {
            let c = lp.add_column(0.0, f64::INFINITY, 0.0);
            row.push(c);
            match prev {
                None => lp.add_row(vec![(c, 1.0)], Sense::Ge, p),
                Some(q) => lp.add_row(vec![(c, 1.0), (q, -1.0)], Sense::Ge, p),
            };
            for &d in &mach.due_h[k] {
                let t = lp.add_column(0.0, f64::INFINITY, problem.tardiness_penalty);
                let e = lp.add_column(0.0, f64::INFINITY, problem.earliness_penalty);
                lp.add_row(vec![(c, 1.0), (t, -1.0)], Sense::Le, d);
                lp.add_row(vec![(c, -1.0), (e, -1.0)], Sense::Le, -d);
            }
            prev = Some(c);
        }
        cols.push(row);
    }
    if lp.num_cols() == 0 {
        return (cols.iter().map(|_| Vec::new()).collect(), 0.0);
    }
    let (status, cost, x) = solve_lp(&lp).expect("timing LP is small and well posed");
    assert_eq!(status, LpStatus::Optimal, "timing LP is always feasible and bounded");
    let times = cols.iter().map(|row| row.iter().map(|&c| x[c]).collect()).collect();
    (times, cost)
}

/// The same layout with its completion times re-solved exactly. A solver
/// incumbent can carry timing slack (a tolerance on a bounded objective);
/// the layout fixes everything else, so this is the least z it admits.
pub fn retime(schedule: &Schedule, instance: &ProblemInstance) -> Schedule {
    let machines = instance
        .machines()
        .iter()
        .enumerate()
        .map(|(m, mach)| {
            let jobs = schedule.completion.get(m).map_or(0, Vec::len);
            let mut processing_h = Vec::with_capacity(jobs);
            let mut due_h = Vec::with_capacity(jobs);
            for j in 0..jobs {
                let (mut tallest, mut vol, mut due) = (0.0f64, 0.0, Vec::new());
                for i in schedule.parts_in(m, j) {
                    let p = &instance.parts()[i];
                    tallest = tallest.max(Orientation::of(p, schedule.assignments[i].orientation).height_mm);
                    vol += volume(p);
                    due.push(p.due_h);
                }
                processing_h.push(mach.layer_time_h_per_mm * tallest + mach.volumetric_time_h_per_mm3 * vol);
                due_h.push(due);
            }
            TimingMachine { processing_h, due_h }
        })
        .collect();
    let pen = instance.penalties();
    let problem = TimingProblem { machines, earliness_penalty: pen.earliness, tardiness_penalty: pen.tardiness };
    let (completion, _) = optimal_timing(&problem);
    Schedule { assignments: schedule.assignments.clone(), completion, active: schedule.active.clone() }
}

#[derive(Debug, Clone)]
pub struct OracleLimits {
    pub max_parts: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_parts: 6 }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{parts} parts exceed the oracle limit of {limit} (about {estimate:.2e} candidates)")]
    TooLarge { parts: usize, limit: usize, estimate: f64 },
    #[error("no feasible schedule exists")]
    Infeasible,
    #[error("single-batch layout infeasible: {0}")]
    BatchInfeasible(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub schedule: Schedule,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    /// Least z; ties to least zz.
    pub min_z: OracleSolution,
    /// Least zz; ties to least z.
    pub min_zz: OracleSolution,
    /// For each requested epsilon: least z with zz ≤ epsilon, if any.
    pub constrained: Vec<(f64, Option<OracleSolution>)>,
    /// Every nondominated (z, zz) pair, ascending in zz.
    pub front: Vec<(f64, f64)>,
    pub candidates: u64,
}

/// One job's orientation choice reduced to what the objectives see.
#[derive(Debug, Clone)]
struct JobOption {
    processing_h: f64,
    occupied: f64,
    kinds: Vec<OrientationKind>,
}

fn job_options(instance: &ProblemInstance, machine: usize, members: &[usize]) -> Vec<JobOption> {
    let mach = &instance.machines()[machine];
    let cap = mach.area_mm2() + 1e-9;
    let vol: f64 = members.iter().map(|&i| volume(&instance.parts()[i])).sum();
    let opts: Vec<_> = members.iter().map(|&i| feasible_orientations(&instance.parts()[i], mach)).collect();
    // largest footprint the parts after position k could still add
    let mut rest = vec![0.0; members.len() + 1];
    for k in (0..members.len()).rev() {
        rest[k] = rest[k + 1] + opts[k].iter().map(|o| o.base_area_mm2).fold(0.0, f64::max);
    }
    // states: (max height, area, kinds)
    let mut states: Vec<(f64, f64, Vec<OrientationKind>)> = vec![(0.0, 0.0, Vec::new())];
    for (k, o_k) in opts.iter().enumerate() {
        let mut next = Vec::with_capacity(states.len() * o_k.len());
        for (h, a, kinds) in &states {
            for o in o_k {
                let area = a + o.base_area_mm2;
                if area > cap {
                    continue;
                }
                let mut kk = kinds.clone();
                kk.push(o.kind);
                next.push((h.max(o.height_mm), area, kk));
            }
        }
        states = pareto_reduce(next, cap - rest[k + 1]);
    }
    states
        .into_iter()
        .map(|(h, a, kinds)| JobOption {
            processing_h: mach.layer_time_h_per_mm * h + mach.volumetric_time_h_per_mm3 * vol,
            occupied: a,
            kinds,
        })
        .collect()
}

/// Drops states beaten by one at most as tall and at least as large. A
/// larger state only dominates when its area is at most `safe`, so that no
/// completion the smaller state allows can overflow the plate for it.
fn pareto_reduce(mut states: Vec<(f64, f64, Vec<OrientationKind>)>, safe: f64) -> Vec<(f64, f64, Vec<OrientationKind>)> {
    states.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.total_cmp(&x.1)));
    let mut kept: Vec<(f64, f64, Vec<OrientationKind>)> = Vec::new();
    for s in states {
        let beaten = kept.iter().any(|k| k.1 >= s.1 && (k.1 <= safe || k.1 == s.1));
        if !beaten {
            kept.push(s);
        }
    }
    kept
}

/// Assignments of parts to machines. With identical machines only the
/// canonical representative of each relabeling is produced.
fn distributions(parts: usize, machines: usize, identical: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; parts];
    fn rec(i: usize, cur: &mut Vec<usize>, machines: usize, identical: bool, used: usize, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        let top = if identical { (used + 1).min(machines) } else { machines };
        for m in 0..top {
            cur[i] = m;
            rec(i + 1, cur, machines, identical, used.max(m + 1), out);
        }
    }
    rec(0, &mut cur, machines, identical, 0, &mut out);
    out
}

/// Ordered partitions of `items` into between 1 and `max_blocks` nonempty blocks.
fn ordered_partitions(items: &[usize], max_blocks: usize) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut labels = vec![0usize; items.len()];
    fn rec(i: usize, labels: &mut Vec<usize>, k: usize, items: &[usize], out: &mut Vec<Vec<Vec<usize>>>) {
        if i == items.len() {
            let mut blocks = vec![Vec::new(); k];
            for (idx, &l) in labels.iter().enumerate() {
                blocks[l].push(items[idx]);
            }
            if blocks.iter().all(|b| !b.is_empty()) {
                out.push(blocks);
            }
            return;
        }
        for l in 0..k {
            labels[i] = l;
            rec(i + 1, labels, k, items, out);
        }
    }
    for k in 1..=max_blocks.min(items.len()) {
        rec(0, &mut labels, k, items, &mut out);
    }
    out
}

fn fubini_estimate(n: usize) -> f64 {
    // ordered Bell numbers grow like n! / (2 ln2^(n+1))
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    fact / (2.0 * std::f64::consts::LN_2.powi(n as i32 + 1))
}

#[derive(Debug, Clone)]
struct Candidate {
    z: f64,
    zz: f64,
    key: (usize, u64),
    layout: Layout,
}

#[derive(Debug, Clone)]
struct Layout {
    /// Per machine: jobs as (members, orientation kinds).
    machines: Vec<Vec<(Vec<usize>, Vec<OrientationKind>)>>,
    completion: Vec<Vec<f64>>,
}

fn lex_better(a: (f64, f64, (usize, u64)), b: (f64, f64, (usize, u64))) -> bool {
    let tol = |x: f64| 1e-9 * x.abs().max(1.0);
    if a.0 < b.0 - tol(b.0) {
        return true;
    }
    if a.0 > b.0 + tol(b.0) {
        return false;
    }
    if a.1 < b.1 - tol(b.1) {
        return true;
    }
    if a.1 > b.1 + tol(b.1) {
        return false;
    }
    a.2 < b.2
}

#[derive(Debug, Clone, Default)]
struct Tracker {
    min_z: Option<Candidate>,
    min_zz: Option<Candidate>,
    constrained: Vec<Option<Candidate>>,
    front: Vec<(f64, f64)>,
    count: u64,
}

impl Tracker {
    fn new(eps: usize) -> Self {
        Self { constrained: vec![None; eps], ..Default::default() }
    }

    fn offer(&mut self, c: &Candidate, epsilons: &[f64]) {
        self.count += 1;
        let zkey = |c: &Candidate| (c.z, c.zz, c.key);
        let zzkey = |c: &Candidate| (c.zz, c.z, c.key);
        if self.min_z.as_ref().map_or(true, |b| lex_better(zkey(c), zkey(b))) {
            self.min_z = Some(c.clone());
        }
        if self.min_zz.as_ref().map_or(true, |b| lex_better(zzkey(c), zzkey(b))) {
            self.min_zz = Some(c.clone());
        }
        for (slot, &eps) in self.constrained.iter_mut().zip(epsilons) {
            if c.zz <= eps + 1e-9 * eps.abs().max(1.0) && slot.as_ref().map_or(true, |b| lex_better(zkey(c), zkey(b))) {
                *slot = Some(c.clone());
            }
        }
        insert_front(&mut self.front, (c.z, c.zz));
    }

    fn merge(mut self, other: Tracker, epsilons: &[f64]) -> Tracker {
        let count = self.count + other.count;
        for c in other.min_z.iter().chain(other.min_zz.iter()).chain(other.constrained.iter().flatten()) {
            self.offer(c, epsilons);
        }
        for p in other.front {
            insert_front(&mut self.front, p);
        }
        self.count = count;
        self
    }
}

fn insert_front(front: &mut Vec<(f64, f64)>, p: (f64, f64)) {
    let tol = 1e-9;
    if front.iter().any(|q| q.0 <= p.0 + tol && q.1 <= p.1 + tol) {
        return;
    }
    front.retain(|q| !(p.0 <= q.0 + tol && p.1 <= q.1 + tol));
    front.push(p);
}

fn materialize(instance: &ProblemInstance, c: &Candidate) -> OracleSolution {
    let mut assignments = vec![None; instance.part_count()];
    for (m, jobs) in c.layout.machines.iter().enumerate() {
        for (j, (members, kinds)) in jobs.iter().enumerate() {
            for (&i, &kind) in members.iter().zip(kinds) {
                assignments[i] = Some(Assignment { machine: m, job: j, orientation: kind });
            }
        }
    }
    let assignments = assignments.into_iter().map(|a| a.expect("every part placed")).collect();
    let schedule = Schedule::new(assignments, c.layout.completion.clone());
    let evaluation = evaluate(&schedule, instance).expect("oracle layouts are feasible");
    OracleSolution { schedule, evaluation }
}

/// Exhaustive search over every feasible schedule shape.
pub fn brute_force(instance: &ProblemInstance, limits: &OracleLimits, epsilons: &[f64]) -> Result<BruteForce, OracleError> {
    let n = instance.part_count();
    let nm = instance.machine_count();
    let nj = instance.jobs_per_machine();
    if n > limits.max_parts {
        let estimate = 3f64.powi(n as i32) * (nm as f64).powi(n as i32) * fubini_estimate(n);
        return Err(OracleError::TooLarge { parts: n, limit: limits.max_parts, estimate });
    }
    let identical = nm > 1 && instance.machines_identical();
    let dists = distributions(n, nm, identical);
    let pen = instance.penalties();

    let tracker = dists
        .par_iter()
        .enumerate()
        .map(|(di, dist)| {
            let mut t = Tracker::new(epsilons.len());
            let per_machine: Vec<Vec<usize>> = (0..nm).map(|m| (0..n).filter(|&i| dist[i] == m).collect()).collect();
            // every machine's (partition, per-job options)
            let mut machine_choices: Vec<Vec<Vec<(Vec<usize>, Vec<JobOption>)>>> = Vec::with_capacity(nm);
            for (m, parts) in per_machine.iter().enumerate() {
                let mut choices = Vec::new();
                for blocks in ordered_partitions(parts, nj) {
                    let jobs: Vec<(Vec<usize>, Vec<JobOption>)> =
                        blocks.into_iter().map(|b| {
                            let opts = job_options(instance, m, &b);
                            (b, opts)
                        }).collect();
                    if jobs.iter().all(|(_, o)| !o.is_empty()) {
                        choices.push(jobs);
                    }
                }
                if choices.is_empty() {
                    return t;
                }
                machine_choices.push(choices);
            }
            // flatten (machine, job) slots for the option product
            let mut seq = 0u64;
            let mut pick = vec![0usize; nm];
            loop {
                let jobs: Vec<&(Vec<usize>, Vec<JobOption>)> =
                    (0..nm).flat_map(|m| machine_choices[m][pick[m]].iter()).collect();
                let mut opt = vec![0usize; jobs.len()];
                loop {
                    let mut timing = TimingProblem {
                        machines: Vec::with_capacity(nm),
                        earliness_penalty: pen.earliness,
                        tardiness_penalty: pen.tardiness,
                    };
                    let mut layout = Layout { machines: Vec::with_capacity(nm), completion: Vec::new() };
                    let mut occupied = 0.0;
                    let mut plate = 0.0;
                    let mut slot = 0;
                    for m in 0..nm {
                        let mjobs = &machine_choices[m][pick[m]];
                        let mut tm = TimingMachine { processing_h: Vec::new(), due_h: Vec::new() };
                        let mut lm = Vec::new();
                        for (members, opts) in mjobs {
                            let o = &opts[opt[slot]];
                            slot += 1;
                            tm.processing_h.push(o.processing_h);
                            tm.due_h.push(members.iter().map(|&i| instance.parts()[i].due_h).collect());
                            occupied += o.occupied;
                            plate += instance.machines()[m].area_mm2();
                            lm.push((members.clone(), o.kinds.clone()));
                        }
                        timing.machines.push(tm);
                        layout.machines.push(lm);
                    }
                    let (times, cost) = optimal_timing(&timing);
                    let mut completion = vec![vec![0.0; nj]; nm];
                    for (m, ts) in times.iter().enumerate() {
                        let mut last = 0.0;
                        for j in 0..nj {
                            // trailing empty jobs sit at the last completion
                            last = ts.get(j).copied().unwrap_or(last);
                            completion[m][j] = last;
                        }
                    }
                    layout.completion = completion;
                    seq += 1;
                    let cand = Candidate { z: cost, zz: plate - occupied, key: (di, seq), layout };
                    t.offer(&cand, epsilons);
                    // next option tuple
                    let mut k = 0;
                    while k < jobs.len() {
                        opt[k] += 1;
                        if opt[k] < jobs[k].1.len() {
                            break;
                        }
                        opt[k] = 0;
                        k += 1;
                    }
                    if k == jobs.len() {
                        break;
                    }
                }
                // next partition tuple
                let mut m = 0;
                while m < nm {
                    pick[m] += 1;
                    if pick[m] < machine_choices[m].len() {
                        break;
                    }
                    pick[m] = 0;
                    m += 1;
                }
                if m == nm {
                    break;
                }
            }
            t
        })
        .reduce(|| Tracker::new(epsilons.len()), |a, b| a.merge(b, epsilons));

    let min_z = tracker.min_z.as_ref().ok_or(OracleError::Infeasible)?;
    let min_zz = tracker.min_zz.as_ref().ok_or(OracleError::Infeasible)?;
    let mut front = tracker.front.clone();
    front.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(BruteForce {
        min_z: materialize(instance, min_z),
        min_zz: materialize(instance, min_zz),
        constrained: epsilons
            .iter()
            .zip(&tracker.constrained)
            .map(|(&e, c)| (e, c.as_ref().map(|c| materialize(instance, c))))
            .collect(),
        front,
        candidates: tracker.count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BatchMode {
    /// Largest total footprint, then lowest processing time.
    #[default]
    MinZz,
    /// Lowest processing time, then largest total footprint.
    MinZ,
}

/// Cost of one shared completion time against the given due dates.
pub fn shared_completion_cost(c: f64, due: &[f64], earliness: f64, tardiness: f64) -> f64 {
    due.iter().map(|&d| earliness * (d - c).max(0.0) + tardiness * (c - d).max(0.0)).sum()
}

/// Best shared completion time `C ≥ p`: the cost is convex piecewise linear
/// with breakpoints at the due dates, so a breakpoint (or `p`) is optimal.
pub fn best_shared_completion(p: f64, due: &[f64], earliness: f64, tardiness: f64) -> (f64, f64) {
    let mut best = (p, shared_completion_cost(p, due, earliness, tardiness));
    for &d in due {
        if d >= p {
            let cost = shared_completion_cost(d, due, earliness, tardiness);
            if cost < best.1 - 1e-12 || (cost <= best.1 + 1e-12 && d < best.0) {
                best = (d, cost);
            }
        }
    }
    best
}

/// All parts in the first job of the first machine.
pub fn single_batch_oracle(instance: &ProblemInstance, mode: BatchMode) -> Result<OracleSolution, OracleError> {
    let mach = &instance.machines()[0];
    let members: Vec<usize> = (0..instance.part_count()).collect();
    for &i in &members {
        if feasible_orientations(&instance.parts()[i], mach).is_empty() {
            return Err(OracleError::BatchInfeasible(format!("part {} fits no orientation", instance.parts()[i].id)));
        }
    }
    let options = job_options(instance, 0, &members);
    let pick = match mode {
        BatchMode::MinZz => options
            .iter()
            .max_by(|a, b| a.occupied.total_cmp(&b.occupied).then(b.processing_h.total_cmp(&a.processing_h))),
        BatchMode::MinZ => options
            .iter()
            .min_by(|a, b| a.processing_h.total_cmp(&b.processing_h).then(b.occupied.total_cmp(&a.occupied))),
    };
    let Some(choice) = pick else {
        return Err(OracleError::BatchInfeasible(format!(
            "combined footprints exceed the {} mm² plate",
            mach.area_mm2()
        )));
    };
    let pen = instance.penalties();
    let due: Vec<f64> = instance.parts().iter().map(|p| p.due_h).collect();
    let (c, _) = best_shared_completion(choice.processing_h, &due, pen.earliness, pen.tardiness);
    let assignments =
        choice.kinds.iter().map(|&kind| Assignment { machine: 0, job: 0, orientation: kind }).collect();
    // later jobs stay empty and share the completion time
    let mut completion = vec![vec![0.0; instance.jobs_per_machine()]; instance.machine_count()];
    completion[0].iter_mut().for_each(|x| *x = c);
    let schedule = Schedule::new(assignments, completion);
    let evaluation = evaluate(&schedule, instance).map_err(|e| OracleError::BatchInfeasible(e.to_string()))?;
    Ok(OracleSolution { schedule, evaluation })
}
