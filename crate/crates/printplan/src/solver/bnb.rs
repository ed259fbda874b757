//! Best-bound branch-and-bound over the binary columns of a [`MilpModel`].
//!
//! Each worker owns one tableau and moves between nodes by re-applying the
//! node's fixings and re-running the dual simplex. Since every column is
//! boxed, an optimal basis stays dual feasible under any bound change, so no
//! basis needs to be stored per node. A worker keeps diving into the up
//! child while no incumbent exists, and afterwards as long as that child is
//! no worse than the best open node.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use thiserror::Error;

use super::simplex::{self, LpError, LpProblem, LpStatus, StandardForm, Tableau};
use crate::model::MilpModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchingRule {
    #[default]
    MostFractional,
    PseudoCost,
}

#[derive(Debug, Clone)]
pub struct SolveParams {
    pub time_limit_s: f64,
    pub node_limit: Option<u64>,
    /// Relative gap `(incumbent − bound) / max(1, |incumbent|)` at which a node is pruned.
    pub gap_tolerance: f64,
    pub integrality_tolerance: f64,
    pub worker_count: usize,
    /// Forces a serial search, which makes the node sequence reproducible.
    pub deterministic: bool,
    pub branching: BranchingRule,
    /// A known solution; used as the first incumbent if it is feasible.
    pub initial_solution: Option<Vec<f64>>,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            time_limit_s: 600.0,
            node_limit: None,
            gap_tolerance: 1e-9,
            integrality_tolerance: 1e-6,
            worker_count: 1,
            deterministic: true,
            branching: BranchingRule::MostFractional,
            initial_solution: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    /// Incumbent found but the search stopped on its node limit.
    Feasible,
    Infeasible,
    /// Stopped on the time limit (or any budget) before proving optimality.
    TimeLimit,
}

impl MilpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MilpStatus::Optimal => "OPTIMAL",
            MilpStatus::Feasible => "FEASIBLE",
            MilpStatus::Infeasible => "INFEASIBLE",
            MilpStatus::TimeLimit => "TIMELIMIT",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token.to_ascii_uppercase().as_str() {
            "OPTIMAL" => Some(MilpStatus::Optimal),
            "FEASIBLE" => Some(MilpStatus::Feasible),
            "INFEASIBLE" => Some(MilpStatus::Infeasible),
            "TIMELIMIT" => Some(MilpStatus::TimeLimit),
            _ => None,
        }
    }

    pub fn has_solution(self) -> bool {
        matches!(self, MilpStatus::Optimal | MilpStatus::Feasible | MilpStatus::TimeLimit)
    }
}

impl std::fmt::Display for MilpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// NaN when no incumbent exists.
    pub objective: f64,
    /// Incumbent column values; empty when no incumbent exists.
    pub values: Vec<f64>,
    pub bound: f64,
    pub gap: f64,
    pub nodes: u64,
    pub wall_time: Duration,
}

impl MilpSolution {
    pub fn has_incumbent(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn value(&self, model: &MilpModel, name: &str) -> Option<f64> {
        let k = model.registry.lookup(name)?;
        self.values.get(k).copied()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("relaxation unbounded; model columns must be boxed")]
    Unbounded,
    #[error(transparent)]
    External(#[from] super::external::ExternalError),
}

#[derive(Debug, Clone)]
struct Origin {
    col: usize,
    up: bool,
    dist: f64,
    parent_obj: f64,
}

#[derive(Debug, Clone)]
struct Node {
    bound: f64,
    depth: u32,
    seq: u64,
    fixings: Vec<(usize, f64)>,
    origin: Option<Origin>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: smaller bound first, then deeper, then older
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone, Default)]
struct PseudoCosts {
    up: Vec<(f64, u32)>,
    down: Vec<(f64, u32)>,
}

impl PseudoCosts {
    fn new(n: usize) -> Self {
        Self { up: vec![(0.0, 0); n], down: vec![(0.0, 0); n] }
    }

    fn record(&mut self, o: &Origin, child_obj: f64) {
        if o.dist <= 0.0 {
            return;
        }
        let gain = ((child_obj - o.parent_obj) / o.dist).max(0.0);
        let slot = if o.up { &mut self.up[o.col] } else { &mut self.down[o.col] };
        slot.0 += gain;
        slot.1 += 1;
    }

    fn mean(table: &[(f64, u32)]) -> f64 {
        let (s, c) = table.iter().fold((0.0, 0u32), |(s, c), &(a, k)| if k > 0 { (s + a / k as f64, c + 1) } else { (s, c) });
        if c > 0 {
            s / c as f64
        } else {
            1.0
        }
    }

    fn estimate(table: &[(f64, u32)], j: usize, fallback: f64) -> f64 {
        let (s, k) = table[j];
        if k > 0 {
            s / k as f64
        } else {
            fallback
        }
    }
}

#[derive(Debug, Clone)]
struct Incumbent {
    objective: f64,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    Time,
    Nodes,
}

struct Shared {
    heap: BinaryHeap<Node>,
    incumbent: Option<Incumbent>,
    working: Vec<Option<f64>>,
    nodes: u64,
    seq: u64,
    stop: Option<Stop>,
    error: Option<SolveError>,
    pseudo: PseudoCosts,
}

struct Search<'a> {
    sf: &'a StandardForm,
    lp: &'a LpProblem,
    params: &'a SolveParams,
    /// Binary columns with their priority class, in index order.
    candidates: Vec<(usize, u8)>,
    start: Instant,
    state: Mutex<Shared>,
    wake: Condvar,
}

enum Outcome {
    Pruned,
    Integral(Incumbent),
    Branch { obj: f64, col: usize, frac: f64 },
}

fn cutoff(inc: &Option<Incumbent>, gap: f64) -> f64 {
    match inc {
        Some(i) => i.objective - gap * i.objective.abs().max(1.0),
        None => f64::INFINITY,
    }
}

impl<'a> Search<'a> {
    fn out_of_budget(&self, st: &Shared) -> Option<Stop> {
        if self.start.elapsed().as_secs_f64() >= self.params.time_limit_s {
            return Some(Stop::Time);
        }
        match self.params.node_limit {
            Some(limit) if st.nodes >= limit => Some(Stop::Nodes),
            _ => None,
        }
    }

    fn apply(&self, tab: &mut Tableau<'a>, applied: &mut Vec<usize>, fixings: &[(usize, f64)]) -> Result<(), LpError> {
        for &c in applied.iter() {
            if !fixings.iter().any(|&(k, _)| k == c) {
                tab.set_bounds(c, self.sf.lower[c], self.sf.upper[c])?;
            }
        }
        for &(c, v) in fixings {
            if tab.lower(c) != v || tab.upper(c) != v {
                tab.set_bounds(c, v, v)?;
            }
        }
        applied.clear();
        applied.extend(fixings.iter().map(|&(c, _)| c));
        Ok(())
    }

    fn solve_node(
        &self,
        tab: &mut Tableau<'a>,
        applied: &mut Vec<usize>,
        node: &Node,
    ) -> Result<Option<f64>, SolveError> {
        self.apply(tab, applied, &node.fixings)?;
        let status = match tab.reoptimize() {
            // A warm tableau can pick up enough error to misreport
            // infeasibility, so that verdict is confirmed from scratch.
            Ok(LpStatus::Infeasible) | Err(LpError::Numerical(_)) | Err(LpError::IterationLimit(_)) => {
                let mut fresh = Tableau::slack_basis(self.sf);
                let mut none = Vec::new();
                self.apply(&mut fresh, &mut none, &node.fixings)?;
                match fresh.reoptimize() {
                    Ok(s) => {
                        *tab = fresh;
                        *applied = none;
                        s
                    }
                    Err(LpError::Numerical(_) | LpError::IterationLimit(_)) => {
                        match simplex::solve_primal_fixed(self.sf, &node.fixings)? {
                            (LpStatus::Optimal, Some(t)) => {
                                *tab = t;
                                applied.clear();
                                applied.extend(node.fixings.iter().map(|&(c, _)| c));
                                LpStatus::Optimal
                            }
                            (s, _) => s,
                        }
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(s) => s,
            Err(e) => return Err(e.into()),
        };
        match status {
            LpStatus::Optimal => Ok(Some(tab.objective())),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(SolveError::Unbounded),
        }
    }

    fn choose(&self, values: &[f64], pseudo: Option<&PseudoCosts>) -> Option<(usize, f64)> {
        let tol = self.params.integrality_tolerance;
        let mut class = u8::MAX;
        for &(j, p) in &self.candidates {
            let v = values[j];
            if (v - v.round()).abs() > tol {
                class = class.min(p);
            }
        }
        if class == u8::MAX {
            return None;
        }
        let (mean_up, mean_down) = match pseudo {
            Some(pc) => (PseudoCosts::mean(&pc.up), PseudoCosts::mean(&pc.down)),
            None => (1.0, 1.0),
        };
        let mut best: Option<(usize, f64, f64)> = None;
        for &(j, p) in &self.candidates {
            if p != class {
                continue;
            }
            let v = values[j];
            let f = v - v.floor();
            if f.min(1.0 - f) <= tol {
                continue;
            }
            let score = match pseudo {
                None => f.min(1.0 - f),
                Some(pc) => {
                    let down = PseudoCosts::estimate(&pc.down, j, mean_down) * f;
                    let up = PseudoCosts::estimate(&pc.up, j, mean_up) * (1.0 - f);
                    down.max(1e-6) * up.max(1e-6)
                }
            };
            if best.map_or(true, |(_, s, _)| score > s + 1e-12) {
                best = Some((j, score, f));
            }
        }
        best.map(|(j, _, f)| (j, f))
    }

    /// Rounds the binaries and re-solves the continuous part with them
    /// fixed, so that big-M rows see exact 0/1 values rather than values
    /// within the integrality tolerance.
    fn snap(&self, values: &[f64]) -> Incumbent {
        let mut v = values[..self.sf.n].to_vec();
        let mut lp = self.lp.clone();
        for &(j, _) in &self.candidates {
            v[j] = v[j].round();
            lp.lower[j] = v[j];
            lp.upper[j] = v[j];
        }
        if let Ok((LpStatus::Optimal, obj, polished)) = simplex::solve_lp(&lp) {
            if lp.max_violation(&polished) <= 1e-7 {
                let mut w = polished;
                for &(j, _) in &self.candidates {
                    w[j] = v[j];
                }
                return Incumbent { objective: obj, values: w };
            }
        }
        for (j, x) in v.iter_mut().enumerate() {
            *x = x.clamp(self.lp.lower[j], self.lp.upper[j]);
        }
        Incumbent { objective: self.lp.objective_value(&v), values: v }
    }

    fn evaluate(
        &self,
        tab: &mut Tableau<'a>,
        applied: &mut Vec<usize>,
        node: &Node,
        cut: f64,
        pseudo: Option<&PseudoCosts>,
    ) -> Result<(Outcome, Option<f64>), SolveError> {
        let Some(obj) = self.solve_node(tab, applied, node)? else {
            return Ok((Outcome::Pruned, None));
        };
        if obj >= cut {
            return Ok((Outcome::Pruned, Some(obj)));
        }
        let values = tab.values();
        match self.choose(&values, pseudo) {
            None => Ok((Outcome::Integral(self.snap(&values)), Some(obj))),
            Some((col, frac)) => Ok((Outcome::Branch { obj, col, frac }, Some(obj))),
        }
    }

    fn worker(&self, id: usize, mut tab: Tableau<'a>) {
        let mut applied: Vec<usize> = Vec::new();
        let mut local: Option<Node> = None;
        let use_pseudo = self.params.branching == BranchingRule::PseudoCost;
        loop {
            let (node, cut, pseudo) = {
                let mut st = self.state.lock().unwrap();
                let node = loop {
                    if st.stop.is_some() || st.error.is_some() {
                        if let Some(n) = local.take() {
                            st.heap.push(n);
                        }
                        st.working[id] = None;
                        self.wake.notify_all();
                        return;
                    }
                    if let Some(n) = local.take() {
                        break n;
                    }
                    let cut = cutoff(&st.incumbent, self.params.gap_tolerance);
                    match st.heap.pop() {
                        Some(n) if n.bound >= cut => {
                            // the rest of the heap is no better
                            st.heap.clear();
                        }
                        Some(n) => {
                            st.working[id] = Some(n.bound);
                            break n;
                        }
                        None => {
                            st.working[id] = None;
                            if st.working.iter().all(Option::is_none) {
                                self.wake.notify_all();
                                return;
                            }
                            st = self.wake.wait(st).unwrap();
                        }
                    }
                };
                if let Some(stop) = self.out_of_budget(&st) {
                    st.stop = Some(stop);
                    st.heap.push(node);
                    st.working[id] = None;
                    self.wake.notify_all();
                    return;
                }
                let cut = cutoff(&st.incumbent, self.params.gap_tolerance);
                let pseudo = if use_pseudo { Some(st.pseudo.clone()) } else { None };
                (node, cut, pseudo)
            };

            let result = self.evaluate(&mut tab, &mut applied, &node, cut, pseudo.as_ref());

            let mut st = self.state.lock().unwrap();
            st.nodes += 1;
            let (outcome, obj) = match result {
                Ok(r) => r,
                Err(SolveError::Lp(LpError::Deadline)) => {
                    st.stop.get_or_insert(Stop::Time);
                    st.heap.push(node);
                    st.working[id] = None;
                    self.wake.notify_all();
                    return;
                }
                Err(e) => {
                    st.error.get_or_insert(e);
                    st.working[id] = None;
                    self.wake.notify_all();
                    return;
                }
            };
            if let (Some(o), Some(obj)) = (&node.origin, obj) {
                if use_pseudo {
                    st.pseudo.record(o, obj);
                }
            }
            match outcome {
                Outcome::Pruned => {}
                Outcome::Integral(inc) => {
                    if st.incumbent.as_ref().map_or(true, |cur| inc.objective < cur.objective) {
                        st.incumbent = Some(inc);
                    }
                }
                Outcome::Branch { obj, col, frac } => {
                    let child = |up: bool, st: &mut Shared| {
                        let mut fixings = node.fixings.clone();
                        fixings.push((col, if up { 1.0 } else { 0.0 }));
                        st.seq += 1;
                        Node {
                            bound: obj,
                            depth: node.depth + 1,
                            seq: st.seq,
                            fixings,
                            origin: Some(Origin {
                                col,
                                up,
                                dist: if up { 1.0 - frac } else { frac },
                                parent_obj: obj,
                            }),
                        }
                    };
                    let up = child(true, &mut st);
                    let down = child(false, &mut st);
                    let best_open = st.heap.peek().map_or(f64::INFINITY, |n| n.bound);
                    let tol = self.params.gap_tolerance * obj.abs().max(1.0);
                    if st.incumbent.is_none() || obj <= best_open + tol {
                        st.heap.push(down);
                        local = Some(up);
                    } else {
                        st.heap.push(up);
                        st.heap.push(down);
                    }
                }
            }
            st.working[id] = local.as_ref().map(|n| n.bound);
            self.wake.notify_all();
        }
    }
}

fn accept_initial(lp: &LpProblem, candidates: &[(usize, u8)], values: &[f64], tol: f64) -> Option<Incumbent> {
    if values.len() != lp.num_cols() {
        return None;
    }
    if candidates.iter().any(|&(j, _)| (values[j] - values[j].round()).abs() > tol) {
        return None;
    }
    let in_box = values.iter().enumerate().all(|(j, &v)| v >= lp.lower[j] - 1e-9 && v <= lp.upper[j] + 1e-9);
    if !in_box || lp.max_violation(values) > 1e-6 {
        return None;
    }
    Some(Incumbent { objective: lp.objective_value(values), values: values.to_vec() })
}

/// Solves the model's active objective to the configured gap.
pub fn solve_milp(model: &MilpModel, params: &SolveParams) -> Result<MilpSolution, SolveError> {
    let start = Instant::now();
    let lp = model.to_lp();
    let mut sf = StandardForm::new(&lp);
    sf.deadline = start.checked_add(Duration::from_secs_f64(params.time_limit_s.clamp(0.0, 1e9)));
    let mut candidates: Vec<(usize, u8)> = model.branch_priorities();
    candidates.sort_by_key(|&(j, _)| j);
    let workers = if params.deterministic { 1 } else { params.worker_count.max(1) };

    let mut root_tab = Tableau::slack_basis(&sf);
    let initial = params
        .initial_solution
        .as_deref()
        .and_then(|v| accept_initial(&lp, &candidates, v, params.integrality_tolerance));
    let search = Search {
        sf: &sf,
        lp: &lp,
        params,
        candidates,
        start,
        state: Mutex::new(Shared {
            heap: BinaryHeap::new(),
            incumbent: initial,
            working: vec![None; workers],
            nodes: 0,
            seq: 0,
            stop: None,
            error: None,
            pseudo: PseudoCosts::new(sf.n),
        }),
        wake: Condvar::new(),
    };

    // Solve the root here so the workers start from an optimal basis.
    let root = Node { bound: f64::NEG_INFINITY, depth: 0, seq: 0, fixings: Vec::new(), origin: None };
    let mut applied = Vec::new();
    let root_obj = match search.solve_node(&mut root_tab, &mut applied, &root) {
        Err(SolveError::Lp(LpError::Deadline)) => {
            let mut st = search.state.lock().unwrap();
            st.stop = Some(Stop::Time);
            st.nodes = 1;
            st.heap.push(root);
            drop(st);
            return Ok(finish(search, start, false, f64::NEG_INFINITY));
        }
        r => r?,
    };
    {
        let mut st = search.state.lock().unwrap();
        st.nodes = 1;
        match root_obj {
            None => {
                drop(st);
                return Ok(finish(search, start, true, f64::INFINITY));
            }
            Some(obj) => {
                let cut = cutoff(&st.incumbent, params.gap_tolerance);
                if obj < cut {
                    match search.choose(&root_tab.values(), None) {
                        None => {
                            let inc = search.snap(&root_tab.values());
                            if st.incumbent.as_ref().map_or(true, |c| inc.objective < c.objective) {
                                st.incumbent = Some(inc);
                            }
                        }
                        Some(_) => st.heap.push(Node { bound: obj, ..root }),
                    }
                }
            }
        }
    }
    let root_bound = root_obj.unwrap_or(f64::INFINITY);

    let needs_search = !search.state.lock().unwrap().heap.is_empty();
    if needs_search {
        // the root node is re-solved by whoever pops it; cheap from an optimal basis
        if workers == 1 {
            search.worker(0, root_tab);
        } else {
            std::thread::scope(|s| {
                for id in 0..workers {
                    let tab = root_tab.clone();
                    let search = &search;
                    s.spawn(move || search.worker(id, tab));
                }
            });
        }
    }
    if let Some(e) = search.state.lock().unwrap().error.take() {
        return Err(e);
    }
    Ok(finish(search, start, false, root_bound))
}

fn finish(search: Search<'_>, start: Instant, root_infeasible: bool, root_bound: f64) -> MilpSolution {
    let st = search.state.into_inner().unwrap();
    let wall_time = start.elapsed();
    let (objective, values) = match st.incumbent {
        Some(inc) => (inc.objective, inc.values),
        None => (f64::NAN, Vec::new()),
    };
    let has_inc = !values.is_empty();
    let open_bound = st.heap.iter().map(|n| n.bound).chain(st.working.iter().flatten().copied()).fold(f64::INFINITY, f64::min);
    let status = if root_infeasible {
        MilpStatus::Infeasible
    } else {
        match st.stop {
            None if has_inc => MilpStatus::Optimal,
            None => MilpStatus::Infeasible,
            Some(Stop::Nodes) if has_inc => MilpStatus::Feasible,
            Some(_) => MilpStatus::TimeLimit,
        }
    };
    let bound = match status {
        MilpStatus::Optimal => open_bound.min(objective).max(root_bound.min(objective)),
        MilpStatus::Infeasible => f64::INFINITY,
        _ => {
            let b = open_bound.max(root_bound);
            if has_inc {
                b.min(objective)
            } else {
                b
            }
        }
    };
    let gap = if has_inc && bound.is_finite() { ((objective - bound) / objective.abs().max(1.0)).max(0.0) } else if has_inc { 0.0 } else { f64::INFINITY };
    MilpSolution { status, objective, values, bound, gap, nodes: st.nodes, wall_time }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::instance::{MachineSpec, Part, PenaltyCoefficients, ProblemInstance};
    use crate::model::{build_model, BuildOptions, Objective};

    fn machine() -> MachineSpec {
        MachineSpec::new("1", 250.0, 250.0, 200.0, 0.00006, 0.000003)
    }

    fn inst(parts: Vec<Part>, jobs: usize) -> ProblemInstance {
        ProblemInstance::new(parts, vec![machine()], PenaltyCoefficients::default(), jobs).unwrap()
    }

    fn solve(inst: &ProblemInstance, objective: Objective) -> (MilpModel, MilpSolution) {
        let model = build_model(inst, BuildOptions { objective, ..Default::default() }).unwrap();
        let sol = solve_milp(&model, &SolveParams::default()).unwrap();
        (model, sol)
    }

    #[test]
    fn one_part_optimum_zero() {
        let (model, sol) = solve(&inst(vec![Part::new("1", 10.0, 10.0, 10.0, 1.0)], 1), Objective::Z);
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert!(sol.objective.abs() < 1e-9);
        assert_eq!(sol.value(&model, "x_i1_j1_m1"), Some(1.0));
    }

    #[test]
    fn zero_time_limit_stops_cleanly() {
        let model = build_model(&crate::datasets::table3(), BuildOptions::default()).unwrap();
        let params = SolveParams { time_limit_s: 0.0, ..SolveParams::default() };
        let sol = solve_milp(&model, &params).unwrap();
        assert_eq!(sol.status, MilpStatus::TimeLimit);
        assert!(!sol.has_incumbent());
        assert!(sol.wall_time.as_secs_f64() < 5.0);
    }

    #[test]
    fn two_cubes_share_a_job() {
        let parts = vec![Part::new("1", 10.0, 10.0, 10.0, 1.0), Part::new("2", 10.0, 10.0, 10.0, 2.0)];
        let (_, sol) = solve(&inst(parts, 1), Objective::Z);
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-6, "{}", sol.objective);
    }

    #[test]
    fn empty_part_set_is_vacuous() {
        let empty = inst(Vec::new(), 2);
        for objective in [Objective::Z, Objective::Zz] {
            let (model, sol) = solve(&empty, objective);
            assert_eq!(sol.status, MilpStatus::Optimal);
            assert!(sol.objective.abs() < 1e-9);
            assert!(model.registry.columns().iter().zip(&sol.values).all(|(c, &v)| !c.name.starts_with("y_") || v == 0.0));
        }
    }

    #[test]
    fn infeasible_epsilon() {
        let model = build_model(&datasets::table2(), BuildOptions::default()).unwrap().inject_epsilon(-1.0);
        let sol = solve_milp(&model, &SolveParams::default()).unwrap();
        assert_eq!(sol.status, MilpStatus::Infeasible);
        assert!(!sol.has_incumbent());
    }

    #[test]
    fn incumbent_is_integral_and_feasible() {
        for seed in 0..6 {
            let inst = datasets::random_instance(seed, &Default::default());
            let (model, sol) = solve(&inst, Objective::Z);
            assert_eq!(sol.status, MilpStatus::Optimal, "seed {seed}");
            for k in model.registry.binary_columns() {
                assert_eq!(sol.values[k], sol.values[k].round());
            }
            assert!(model.to_lp().max_violation(&sol.values) < 1e-6, "seed {seed}");
            assert!(sol.bound <= sol.objective + 1e-9 && sol.gap <= 1e-6);
        }
    }

    #[test]
    fn deterministic_runs_repeat() {
        let inst = datasets::random_instance(3, &Default::default());
        let model = build_model(&inst, BuildOptions::default()).unwrap();
        let a = solve_milp(&model, &SolveParams::default()).unwrap();
        let b = solve_milp(&model, &SolveParams::default()).unwrap();
        assert_eq!((a.nodes, &a.values, a.objective), (b.nodes, &b.values, b.objective));
    }

    #[test]
    fn parallel_and_pseudo_cost_agree() {
        for seed in 10..14 {
            let inst = datasets::random_instance(seed, &Default::default());
            let model = build_model(&inst, BuildOptions::default()).unwrap();
            let serial = solve_milp(&model, &SolveParams::default()).unwrap();
            let par = solve_milp(&model, &SolveParams { worker_count: 3, deterministic: false, ..Default::default() })
                .unwrap();
            let pc = solve_milp(&model, &SolveParams { branching: BranchingRule::PseudoCost, ..Default::default() })
                .unwrap();
            let tol = 1e-6 * serial.objective.abs().max(1.0);
            assert!((serial.objective - par.objective).abs() <= tol, "seed {seed}");
            assert!((serial.objective - pc.objective).abs() <= tol, "seed {seed}");
        }
    }

    #[test]
    fn node_limit_reports_feasible_or_timelimit() {
        let model = build_model(&datasets::table2(), BuildOptions::default()).unwrap();
        let sol = solve_milp(&model, &SolveParams { node_limit: Some(3), ..Default::default() }).unwrap();
        assert!(matches!(sol.status, MilpStatus::Feasible | MilpStatus::TimeLimit));
        assert!(sol.nodes <= 4);
    }

    #[test]
    fn initial_solution_is_checked() {
        let inst = datasets::random_instance(5, &Default::default());
        let model = build_model(&inst, BuildOptions::default()).unwrap();
        let first = solve_milp(&model, &SolveParams::default()).unwrap();
        let warm =
            solve_milp(&model, &SolveParams { initial_solution: Some(first.values.clone()), ..Default::default() })
                .unwrap();
        assert!((warm.objective - first.objective).abs() <= 1e-6 * first.objective.abs().max(1.0));
        assert!(warm.nodes <= first.nodes);
        let junk = vec![0.5; model.registry.len()];
        let cold = solve_milp(&model, &SolveParams { initial_solution: Some(junk), ..Default::default() }).unwrap();
        assert_eq!(cold.status, MilpStatus::Optimal);
    }
}
