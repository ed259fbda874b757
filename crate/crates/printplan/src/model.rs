//! The linearized batch-planning MILP as a solver-agnostic sparse model.
//!
//! For `I` parts, `J` jobs per machine and `M` machines the model has
//!
//! * `3·I·J·M + 4·J·M + 7·I` columns, of which `I·J·M + J·M + 2·I` are binary
//!   (`x`, `y`, `b`, `f`);
//! * `7·I·J·M + 7·I + I·M + 3·J·M + 2·(J−1)·M + M` rows.
//!
//! Row families, in emission order: assignment, job linking, orientation
//! exclusivity, height and area definitions, per-machine height cap, plate
//! capacity, the three `lp` envelopes, max-height, processing time, chain,
//! initial job, part completion, the three `lp′` envelopes, tardiness,
//! earliness, and job activation order. An optional epsilon row bounds the
//! unused-area expression and an optional objective-bound row bounds the
//! earliness/tardiness cost (used for lexicographic refinement).
//!
//! Every column is boxed. Upper bounds come from [`BigMBundle`] and are valid
//! for every optimal solution, which also lets the dual simplex start from
//! the slack basis.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{self, volume};
use crate::instance::{validate, ProblemInstance, ValidationReport};
use crate::solver::simplex::{LpProblem, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    X,
    Y,
    B,
    F,
    HeightChosen,
    AreaChosen,
    JobMaxHeight,
    Processing,
    JobCompletion,
    PartCompletion,
    Earliness,
    Tardiness,
    Lp,
    LpPrime,
}

impl Family {
    pub fn prefix(self) -> &'static str {
        match self {
            Family::X => "x",
            Family::Y => "y",
            Family::B => "b",
            Family::F => "f",
            Family::HeightChosen => "Hp",
            Family::AreaChosen => "Ap",
            Family::JobMaxHeight => "Hpp",
            Family::Processing => "P",
            Family::JobCompletion => "C",
            Family::PartCompletion => "Cp",
            Family::Earliness => "E",
            Family::Tardiness => "T",
            Family::Lp => "lp",
            Family::LpPrime => "lpp",
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(self, Family::X | Family::Y | Family::B | Family::F)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub family: Family,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowFamily {
    Assign,
    Link,
    OrientExclusive,
    HeightDef,
    AreaDef,
    HeightCap,
    AreaCap,
    LpUpperX,
    LpUpperArea,
    LpLower,
    MaxHeight,
    ProcTime,
    Chain,
    InitialJob,
    PartCompletionDef,
    LppUpperX,
    LppUpperC,
    LppLower,
    TardinessDef,
    EarlinessDef,
    ActivationOrder,
    EpsilonZz,
    BoundZ,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub family: RowFamily,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Maps columns back to their model symbols. Indices are 0-based; names
/// are 1-based (`x_i3_j1_m2`).
#[derive(Debug, Clone)]
pub struct VariableRegistry {
    pub parts: usize,
    pub jobs: usize,
    pub machines: usize,
    columns: Vec<Column>,
    by_name: HashMap<String, usize>,
    x0: usize,
    y0: usize,
    b0: usize,
    f0: usize,
    hp0: usize,
    ap0: usize,
    hpp0: usize,
    p0: usize,
    c0: usize,
    cp0: usize,
    e0: usize,
    t0: usize,
    lp0: usize,
    lpp0: usize,
}

impl VariableRegistry {
    fn new(parts: usize, jobs: usize, machines: usize) -> Self {
        let (i, j, m) = (parts, jobs, machines);
        let ijm = i * j * m;
        let jm = j * m;
        let x0 = 0;
        let y0 = x0 + ijm;
        let b0 = y0 + jm;
        let f0 = b0 + i;
        let hp0 = f0 + i;
        let ap0 = hp0 + i;
        let hpp0 = ap0 + i;
        let p0 = hpp0 + jm;
        let c0 = p0 + jm;
        let cp0 = c0 + jm;
        let e0 = cp0 + i;
        let t0 = e0 + i;
        let lp0 = t0 + i;
        let lpp0 = lp0 + ijm;
        Self {
            parts,
            jobs,
            machines,
            columns: Vec::with_capacity(lpp0 + ijm),
            by_name: HashMap::new(),
            x0,
            y0,
            b0,
            f0,
            hp0,
            ap0,
            hpp0,
            p0,
            c0,
            cp0,
            e0,
            t0,
            lp0,
            lpp0,
        }
    }

    fn ijm(&self, i: usize, j: usize, m: usize) -> usize {
        debug_assert!(i < self.parts && j < self.jobs && m < self.machines);
        (i * self.jobs + j) * self.machines + m
    }

    fn jm(&self, j: usize, m: usize) -> usize {
        debug_assert!(j < self.jobs && m < self.machines);
        j * self.machines + m
    }

    pub fn x(&self, i: usize, j: usize, m: usize) -> usize {
        self.x0 + self.ijm(i, j, m)
    }
    pub fn y(&self, j: usize, m: usize) -> usize {
        self.y0 + self.jm(j, m)
    }
    pub fn b(&self, i: usize) -> usize {
        self.b0 + i
    }
    pub fn f(&self, i: usize) -> usize {
        self.f0 + i
    }
    pub fn height(&self, i: usize) -> usize {
        self.hp0 + i
    }
    pub fn area(&self, i: usize) -> usize {
        self.ap0 + i
    }
    pub fn job_height(&self, j: usize, m: usize) -> usize {
        self.hpp0 + self.jm(j, m)
    }
    pub fn processing(&self, j: usize, m: usize) -> usize {
        self.p0 + self.jm(j, m)
    }
    pub fn completion(&self, j: usize, m: usize) -> usize {
        self.c0 + self.jm(j, m)
    }
    pub fn part_completion(&self, i: usize) -> usize {
        self.cp0 + i
    }
    pub fn earliness(&self, i: usize) -> usize {
        self.e0 + i
    }
    pub fn tardiness(&self, i: usize) -> usize {
        self.t0 + i
    }
    pub fn lp(&self, i: usize, j: usize, m: usize) -> usize {
        self.lp0 + self.ijm(i, j, m)
    }
    pub fn lpp(&self, i: usize, j: usize, m: usize) -> usize {
        self.lpp0 + self.ijm(i, j, m)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, idx: usize) -> &Column {
        &self.columns[idx]
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn binary_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.columns.iter().enumerate().filter(|(_, c)| c.kind == VarKind::Binary).map(|(k, _)| k)
    }

    fn push(&mut self, family: Family, name: String, lower: f64, upper: f64) {
        let kind = if family.is_binary() { VarKind::Binary } else { VarKind::Continuous };
        let idx = self.columns.len();
        self.by_name.insert(name.clone(), idx);
        self.columns.push(Column { name, family, kind, lower, upper });
    }
}

fn name_ijm(prefix: &str, i: usize, j: usize, m: usize) -> String {
    format!("{prefix}_i{}_j{}_m{}", i + 1, j + 1, m + 1)
}

fn name_jm(prefix: &str, j: usize, m: usize) -> String {
    format!("{prefix}_j{}_m{}", j + 1, m + 1)
}

fn name_i(prefix: &str, i: usize) -> String {
    format!("{prefix}_i{}", i + 1)
}

/// Per-family constants replacing a single global big-M.
#[derive(Debug, Clone, PartialEq)]
pub struct BigMBundle {
    /// Part count; bounds how many parts one job may hold.
    pub m_count: f64,
    /// Tallest machine; bounds any chosen part height.
    pub m_height: f64,
    /// Largest footprint of each part over its orientations.
    pub m_area: Vec<f64>,
    /// Latest completion time any optimal schedule needs.
    pub m_horizon: f64,
}

pub fn compute_big_m(instance: &ProblemInstance) -> BigMBundle {
    let parts = instance.parts();
    let m_height = instance.machines().iter().map(|m| m.height_mm).fold(0.0, f64::max);
    let m_area = parts.iter().map(|p| geometry::max_footprint(p).base_area_mm2).collect();
    let max_due = parts.iter().map(|p| p.due_h).fold(0.0, f64::max);
    let total_volume: f64 = parts.iter().map(volume).sum();
    let jobs = instance.jobs_per_machine() as f64;
    let busiest = instance
        .machines()
        .iter()
        .map(|m| m.volumetric_time_h_per_mm3 * total_volume + jobs * m.layer_time_h_per_mm * m_height)
        .fold(0.0, f64::max);
    BigMBundle { m_count: parts.len() as f64, m_height, m_area, m_horizon: max_due + busiest }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Weighted earliness plus tardiness.
    #[default]
    Z,
    /// Unused plate area over activated jobs.
    Zz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildOptions {
    /// Pin every part flat (`b = f = 0`): the fixed-height scenario.
    pub fixed_orientation: bool,
    pub objective: Objective,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("instance failed validation:\n{0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub registry: VariableRegistry,
    pub rows: Vec<Row>,
    pub objective_z: Vec<(usize, f64)>,
    pub objective_zz: Vec<(usize, f64)>,
    pub active_objective: Objective,
    pub epsilon_row: Option<usize>,
    pub z_bound_row: Option<usize>,
    pub big_m: BigMBundle,
    pub options: BuildOptions,
}

/// Row and column counts; a closed-form function of the index-set sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelStats {
    pub columns: usize,
    pub binaries: usize,
    pub rows: usize,
}

impl ModelStats {
    pub fn expected(parts: usize, jobs: usize, machines: usize) -> Self {
        let (i, j, m) = (parts, jobs, machines);
        Self {
            columns: 3 * i * j * m + 4 * j * m + 7 * i,
            binaries: i * j * m + j * m + 2 * i,
            rows: 7 * i * j * m + 7 * i + i * m + 3 * j * m + 2 * (j - 1) * m + m,
        }
    }
}

struct RowSink {
    rows: Vec<Row>,
}

impl RowSink {
    fn add(&mut self, family: RowFamily, name: String, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(Row { name, family, coeffs, sense, rhs });
    }
}

pub fn build_model(instance: &ProblemInstance, options: BuildOptions) -> Result<MilpModel, BuildError> {
    let report = validate(instance);
    if !report.is_ok() {
        return Err(BuildError::Invalid(report));
    }
    let parts = instance.parts();
    let machines = instance.machines();
    let (ni, nj, nm) = (parts.len(), instance.jobs_per_machine(), machines.len());
    let big = compute_big_m(instance);
    let mut reg = VariableRegistry::new(ni, nj, nm);

    let max_proc = machines
        .iter()
        .map(|m| m.layer_time_h_per_mm * big.m_height + m.volumetric_time_h_per_mm3 * parts.iter().map(volume).sum::<f64>())
        .fold(0.0, f64::max);

    for i in 0..ni {
        for j in 0..nj {
            for m in 0..nm {
                reg.push(Family::X, name_ijm("x", i, j, m), 0.0, 1.0);
            }
        }
    }
    for j in 0..nj {
        for m in 0..nm {
            reg.push(Family::Y, name_jm("y", j, m), 0.0, 1.0);
        }
    }
    let orient_hi = if options.fixed_orientation { 0.0 } else { 1.0 };
    for i in 0..ni {
        reg.push(Family::B, name_i("b", i), 0.0, orient_hi);
    }
    for i in 0..ni {
        reg.push(Family::F, name_i("f", i), 0.0, orient_hi);
    }
    for (i, p) in parts.iter().enumerate() {
        let tallest = p.width_mm.max(p.length_mm).max(p.height_mm);
        reg.push(Family::HeightChosen, name_i("Hp", i), 0.0, tallest);
    }
    for i in 0..ni {
        reg.push(Family::AreaChosen, name_i("Ap", i), 0.0, big.m_area[i]);
    }
    for j in 0..nj {
        for m in 0..nm {
            reg.push(Family::JobMaxHeight, name_jm("Hpp", j, m), 0.0, big.m_height);
        }
    }
    for j in 0..nj {
        for m in 0..nm {
            reg.push(Family::Processing, name_jm("P", j, m), 0.0, max_proc);
        }
    }
    for j in 0..nj {
        for m in 0..nm {
            reg.push(Family::JobCompletion, name_jm("C", j, m), 0.0, big.m_horizon);
        }
    }
    for i in 0..ni {
        reg.push(Family::PartCompletion, name_i("Cp", i), 0.0, big.m_horizon);
    }
    for (i, p) in parts.iter().enumerate() {
        reg.push(Family::Earliness, name_i("E", i), 0.0, p.due_h);
    }
    for i in 0..ni {
        reg.push(Family::Tardiness, name_i("T", i), 0.0, big.m_horizon);
    }
    for i in 0..ni {
        for j in 0..nj {
            for m in 0..nm {
                reg.push(Family::Lp, name_ijm("lp", i, j, m), 0.0, big.m_area[i]);
            }
        }
    }
    for i in 0..ni {
        for j in 0..nj {
            for m in 0..nm {
                reg.push(Family::LpPrime, name_ijm("lpp", i, j, m), 0.0, big.m_horizon);
            }
        }
    }
    debug_assert_eq!(reg.len(), ModelStats::expected(ni, nj, nm).columns);

    let mut sink = RowSink { rows: Vec::new() };
    let r = &reg;
    use Sense::*;

    for i in 0..ni {
        let coeffs = (0..nj).flat_map(|j| (0..nm).map(move |m| (r.x(i, j, m), 1.0))).collect();
        sink.add(RowFamily::Assign, name_i("assign", i), coeffs, Eq, 1.0);
    }
    for j in 0..nj {
        for m in 0..nm {
            let mut coeffs: Vec<_> = (0..ni).map(|i| (r.x(i, j, m), 1.0)).collect();
            coeffs.push((r.y(j, m), -big.m_count));
            sink.add(RowFamily::Link, name_jm("link", j, m), coeffs, Le, 0.0);
        }
    }
    for i in 0..ni {
        sink.add(RowFamily::OrientExclusive, name_i("orient", i), vec![(r.b(i), 1.0), (r.f(i), 1.0)], Le, 1.0);
    }
    for (i, p) in parts.iter().enumerate() {
        // H' = h + b(l − h) + f(w − h)
        let coeffs = vec![
            (r.height(i), 1.0),
            (r.b(i), -(p.length_mm - p.height_mm)),
            (r.f(i), -(p.width_mm - p.height_mm)),
        ];
        sink.add(RowFamily::HeightDef, name_i("height", i), coeffs, Eq, p.height_mm);
    }
    for (i, p) in parts.iter().enumerate() {
        // A' = lw + b(wh − lw) + f(hl − lw)
        let lw = p.length_mm * p.width_mm;
        let coeffs = vec![
            (r.area(i), 1.0),
            (r.b(i), -(p.width_mm * p.height_mm - lw)),
            (r.f(i), -(p.height_mm * p.length_mm - lw)),
        ];
        sink.add(RowFamily::AreaDef, name_i("area", i), coeffs, Eq, lw);
    }
    for i in 0..ni {
        for (m, mach) in machines.iter().enumerate() {
            // H' ≤ H^m when the part sits on machine m, ≤ the tallest machine otherwise
            let slack = big.m_height - mach.height_mm;
            let mut coeffs = vec![(r.height(i), 1.0)];
            if slack > 0.0 {
                coeffs.extend((0..nj).map(|j| (r.x(i, j, m), slack)));
            }
            sink.add(RowFamily::HeightCap, format!("hcap_i{}_m{}", i + 1, m + 1), coeffs, Le, big.m_height);
        }
    }
    for j in 0..nj {
        for (m, mach) in machines.iter().enumerate() {
            let coeffs = (0..ni).map(|i| (r.lp(i, j, m), 1.0)).collect();
            sink.add(RowFamily::AreaCap, name_jm("acap", j, m), coeffs, Le, mach.area_mm2());
        }
    }
    for i in 0..ni {
        let ma = big.m_area[i];
        for j in 0..nj {
            for m in 0..nm {
                let (lp, x) = (r.lp(i, j, m), r.x(i, j, m));
                sink.add(RowFamily::LpUpperX, name_ijm("lpx", i, j, m), vec![(lp, 1.0), (x, -ma)], Le, 0.0);
                sink.add(RowFamily::LpUpperArea, name_ijm("lpa", i, j, m), vec![(lp, 1.0), (r.area(i), -1.0)], Le, 0.0);
                sink.add(
                    RowFamily::LpLower,
                    name_ijm("lplo", i, j, m),
                    vec![(r.area(i), 1.0), (lp, -1.0), (x, ma)],
                    Le,
                    ma,
                );
            }
        }
    }
    for i in 0..ni {
        for j in 0..nj {
            for m in 0..nm {
                let coeffs = vec![(r.height(i), 1.0), (r.job_height(j, m), -1.0), (r.x(i, j, m), big.m_height)];
                sink.add(RowFamily::MaxHeight, name_ijm("hmax", i, j, m), coeffs, Le, big.m_height);
            }
        }
    }
    for j in 0..nj {
        for (m, mach) in machines.iter().enumerate() {
            let mut coeffs = vec![(r.processing(j, m), 1.0), (r.job_height(j, m), -mach.layer_time_h_per_mm)];
            coeffs.extend(
                parts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (r.x(i, j, m), -mach.volumetric_time_h_per_mm3 * volume(p))),
            );
            sink.add(RowFamily::ProcTime, name_jm("proc", j, m), coeffs, Eq, 0.0);
        }
    }
    for j in 0..nj.saturating_sub(1) {
        for m in 0..nm {
            let coeffs = vec![
                (r.completion(j, m), 1.0),
                (r.processing(j + 1, m), 1.0),
                (r.completion(j + 1, m), -1.0),
            ];
            sink.add(RowFamily::Chain, name_jm("chain", j, m), coeffs, Le, 0.0);
        }
    }
    for m in 0..nm {
        let coeffs = vec![(r.processing(0, m), 1.0), (r.completion(0, m), -1.0)];
        sink.add(RowFamily::InitialJob, format!("init_m{}", m + 1), coeffs, Le, 0.0);
    }
    for i in 0..ni {
        let mut coeffs = vec![(r.part_completion(i), 1.0)];
        coeffs.extend((0..nj).flat_map(|j| (0..nm).map(move |m| (r.lpp(i, j, m), -1.0))));
        sink.add(RowFamily::PartCompletionDef, name_i("cdef", i), coeffs, Eq, 0.0);
    }
    let mh = big.m_horizon;
    for i in 0..ni {
        for j in 0..nj {
            for m in 0..nm {
                let (lpp, x, c) = (r.lpp(i, j, m), r.x(i, j, m), r.completion(j, m));
                sink.add(RowFamily::LppUpperX, name_ijm("lppx", i, j, m), vec![(lpp, 1.0), (x, -mh)], Le, 0.0);
                sink.add(RowFamily::LppUpperC, name_ijm("lppc", i, j, m), vec![(lpp, 1.0), (c, -1.0)], Le, 0.0);
                sink.add(
                    RowFamily::LppLower,
                    name_ijm("lpplo", i, j, m),
                    vec![(c, 1.0), (lpp, -1.0), (x, mh)],
                    Le,
                    mh,
                );
            }
        }
    }
    for (i, p) in parts.iter().enumerate() {
        sink.add(
            RowFamily::TardinessDef,
            name_i("tard", i),
            vec![(r.part_completion(i), 1.0), (r.tardiness(i), -1.0)],
            Le,
            p.due_h,
        );
    }
    for (i, p) in parts.iter().enumerate() {
        sink.add(
            RowFamily::EarlinessDef,
            name_i("earl", i),
            vec![(r.part_completion(i), -1.0), (r.earliness(i), -1.0)],
            Le,
            -p.due_h,
        );
    }
    for j in 0..nj.saturating_sub(1) {
        for m in 0..nm {
            let mut coeffs: Vec<_> = (0..ni).map(|i| (r.x(i, j + 1, m), 1.0)).collect();
            coeffs.extend((0..ni).map(|i| (r.x(i, j, m), -big.m_count)));
            sink.add(RowFamily::ActivationOrder, name_jm("order", j, m), coeffs, Le, 0.0);
        }
    }
    debug_assert_eq!(sink.rows.len(), ModelStats::expected(ni, nj, nm).rows);

    let pen = instance.penalties();
    let mut objective_z = Vec::with_capacity(2 * ni);
    for i in 0..ni {
        objective_z.push((r.tardiness(i), pen.tardiness));
        objective_z.push((r.earliness(i), pen.earliness));
    }
    let mut objective_zz = Vec::new();
    for j in 0..nj {
        for (m, mach) in machines.iter().enumerate() {
            objective_zz.push((r.y(j, m), mach.area_mm2()));
        }
    }
    for i in 0..ni {
        for j in 0..nj {
            for m in 0..nm {
                objective_zz.push((r.lp(i, j, m), -1.0));
            }
        }
    }

    Ok(MilpModel {
        registry: reg,
        rows: sink.rows,
        objective_z,
        objective_zz,
        active_objective: options.objective,
        epsilon_row: None,
        z_bound_row: None,
        big_m: big,
        options,
    })
}

impl MilpModel {
    pub fn stats(&self) -> ModelStats {
        let objective_rows = self.epsilon_row.is_some() as usize + self.z_bound_row.is_some() as usize;
        ModelStats {
            columns: self.registry.len(),
            binaries: self.registry.binary_columns().count(),
            rows: self.rows.len() - objective_rows,
        }
    }

    pub fn active_cost(&self) -> &[(usize, f64)] {
        match self.active_objective {
            Objective::Z => &self.objective_z,
            Objective::Zz => &self.objective_zz,
        }
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.active_objective = objective;
        self
    }

    fn set_objective_row(&mut self, slot: Option<usize>, row: Row) -> usize {
        match slot {
            Some(k) => {
                self.rows[k] = row;
                k
            }
            None => {
                self.rows.push(row);
                self.rows.len() - 1
            }
        }
    }

    /// Adds (or overwrites) the row `zz ≤ epsilon`. An epsilon below the
    /// reachable minimum simply makes the model infeasible.
    pub fn inject_epsilon(mut self, epsilon: f64) -> Self {
        let row = Row {
            name: "eps_zz".into(),
            family: RowFamily::EpsilonZz,
            coeffs: self.objective_zz.clone(),
            sense: Sense::Le,
            rhs: epsilon,
        };
        if epsilon.is_infinite() && epsilon > 0.0 {
            if let Some(k) = self.epsilon_row.take() {
                self.remove_row(k);
            }
            return self;
        }
        self.epsilon_row = Some(self.set_objective_row(self.epsilon_row, row));
        self
    }

    /// Adds (or overwrites) the row `z ≤ bound`.
    pub fn bound_z(mut self, bound: f64) -> Self {
        let row = Row {
            name: "eps_z".into(),
            family: RowFamily::BoundZ,
            coeffs: self.objective_z.clone(),
            sense: Sense::Le,
            rhs: bound,
        };
        self.z_bound_row = Some(self.set_objective_row(self.z_bound_row, row));
        self
    }

    fn remove_row(&mut self, k: usize) {
        self.rows.remove(k);
        for slot in [&mut self.epsilon_row, &mut self.z_bound_row] {
            if let Some(s) = slot {
                if *s > k {
                    *s -= 1;
                }
            }
        }
    }

    /// The LP relaxation (binaries relaxed to their boxes) of the active objective.
    pub fn to_lp(&self) -> LpProblem {
        let cols = self.registry.columns();
        let mut lp = LpProblem {
            lower: cols.iter().map(|c| c.lower).collect(),
            upper: cols.iter().map(|c| c.upper).collect(),
            cost: vec![0.0; cols.len()],
            rows: Vec::with_capacity(self.rows.len()),
        };
        for &(j, c) in self.active_cost() {
            lp.cost[j] += c;
        }
        for row in &self.rows {
            lp.add_row(row.coeffs.clone(), row.sense, row.rhs);
        }
        lp
    }

    pub fn evaluate_expression(coeffs: &[(usize, f64)], values: &[f64]) -> f64 {
        coeffs.iter().map(|&(j, a)| a * values[j]).sum()
    }

    pub fn z_value(&self, values: &[f64]) -> f64 {
        Self::evaluate_expression(&self.objective_z, values)
    }

    pub fn zz_value(&self, values: &[f64]) -> f64 {
        Self::evaluate_expression(&self.objective_zz, values)
    }

    /// Largest deviation from `lp = x·A′` and `lp′ = x·C` over all
    /// (part, job, machine) triples.
    pub fn envelope_residual(&self, values: &[f64]) -> f64 {
        let r = &self.registry;
        let mut worst: f64 = 0.0;
        for i in 0..r.parts {
            for m in 0..r.machines {
                for j in 0..r.jobs {
                    let x = values[r.x(i, j, m)];
                    worst = worst.max((values[r.lp(i, j, m)] - x * values[r.area(i)]).abs());
                    worst = worst.max((values[r.lpp(i, j, m)] - x * values[r.completion(j, m)]).abs());
                }
            }
        }
        worst
    }

    /// Branching priority class: activations, then assignments, then
    /// orientations. Opening a job first lets the assignment and epsilon rows
    /// propagate, which matters most when the area budget allows few plates.
    pub fn branch_priorities(&self) -> Vec<(usize, u8)> {
        self.registry
            .binary_columns()
            .map(|k| {
                let prio = match self.registry.column(k).family {
                    Family::Y => 0,
                    Family::X => 1,
                    _ => 2,
                };
                (k, prio)
            })
            .collect()
    }
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn write_terms(out: &mut String, coeffs: &[(usize, f64)], reg: &VariableRegistry) {
    let mut first = true;
    for &(j, a) in coeffs {
        if a == 0.0 {
            continue;
        }
        let name = &reg.column(j).name;
        if first {
            if a < 0.0 {
                let _ = write!(out, " - {} {name}", fmt_num(-a));
            } else {
                let _ = write!(out, " {} {name}", fmt_num(a));
            }
            first = false;
        } else if a < 0.0 {
            let _ = write!(out, " - {} {name}", fmt_num(-a));
        } else {
            let _ = write!(out, " + {} {name}", fmt_num(a));
        }
    }
    if first {
        // keep the line parseable when every coefficient vanished
        let _ = write!(out, " 0 {}", reg.column(0).name);
    }
}

/// Renders the model in CPLEX LP format, one constraint per line.
pub fn write_lp(model: &MilpModel) -> String {
    let reg = &model.registry;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ printplan batch model: {} parts, {} jobs per machine, {} machines, objective {}",
        reg.parts,
        reg.jobs,
        reg.machines,
        match model.active_objective {
            Objective::Z => "z",
            Objective::Zz => "zz",
        }
    );
    out.push_str("Minimize\n obj:");
    if reg.is_empty() {
        out.push_str(" 0\n");
    } else {
        write_terms(&mut out, model.active_cost(), reg);
        out.push('\n');
    }
    out.push_str("Subject To\n");
    for row in &model.rows {
        let _ = write!(out, " {}:", row.name);
        write_terms(&mut out, &row.coeffs, reg);
        let _ = writeln!(out, " {} {}", row.sense.symbol(), fmt_num(row.rhs));
    }
    out.push_str("Bounds\n");
    for c in reg.columns() {
        if c.lower == c.upper {
            let _ = writeln!(out, " {} = {}", c.name, fmt_num(c.lower));
        } else if c.kind == VarKind::Continuous {
            let hi = if c.upper.is_finite() { fmt_num(c.upper) } else { "+inf".into() };
            let _ = writeln!(out, " {} <= {} <= {}", fmt_num(c.lower), c.name, hi);
        }
    }
    out.push_str("Binaries\n");
    for k in reg.binary_columns() {
        let _ = writeln!(out, " {}", reg.column(k).name);
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::instance::{MachineSpec, Part, PenaltyCoefficients};

    fn one_part() -> ProblemInstance {
        ProblemInstance::new(
            vec![Part::new("1", 10.0, 10.0, 10.0, 1.0)],
            vec![MachineSpec::new("1", 250.0, 250.0, 200.0, 0.00006, 0.000003)],
            PenaltyCoefficients::default(),
            1,
        )
        .unwrap()
    }

    #[test]
    fn big_m_table2() {
        let big = compute_big_m(&datasets::table2());
        assert_eq!(big.m_count, 9.0);
        assert_eq!(big.m_height, 200.0);
        assert_eq!(big.m_area[0], 1400.0);
        let vol: f64 = datasets::table2().parts().iter().map(volume).sum();
        assert!((big.m_horizon - (28.0 + 0.000003 * vol + 2.0 * 0.00006 * 200.0)).abs() < 1e-12);
    }

    #[test]
    fn table2_binary_count() {
        let model = build_model(&datasets::table2(), BuildOptions::default()).unwrap();
        let stats = model.stats();
        assert_eq!(stats.binaries, 58);
        let count = |f: Family| model.registry.columns().iter().filter(|c| c.family == f).count();
        assert_eq!((count(Family::X), count(Family::Y), count(Family::B), count(Family::F)), (36, 4, 9, 9));
        assert_eq!(stats, ModelStats::expected(9, 2, 2));
        assert!(model.registry.columns().iter().all(|c| c.lower == 0.0 && c.upper.is_finite()));
    }

    #[test]
    fn stats_follow_closed_form() {
        for seed in 0..20 {
            let inst = datasets::random_instance(seed, &Default::default());
            let model = build_model(&inst, BuildOptions::default()).unwrap();
            let expected = ModelStats::expected(inst.part_count(), inst.jobs_per_machine(), inst.machine_count());
            assert_eq!(model.stats(), expected);
        }
    }

    #[test]
    fn fixed_orientation_pins_flags() {
        let inst = datasets::table2();
        let model = build_model(&inst, BuildOptions { fixed_orientation: true, ..Default::default() }).unwrap();
        for i in 0..inst.part_count() {
            assert_eq!(model.registry.column(model.registry.b(i)).upper, 0.0);
            assert_eq!(model.registry.column(model.registry.f(i)).upper, 0.0);
            // height row: with b = f = 0 it reads H' = h
            let row = model.rows.iter().find(|r| r.name == format!("height_i{}", i + 1)).unwrap();
            assert_eq!(row.rhs, inst.parts()[i].height_mm);
        }
    }

    #[test]
    fn single_assignment_row() {
        let model = build_model(&one_part(), BuildOptions::default()).unwrap();
        let assign: Vec<_> = model.rows.iter().filter(|r| r.family == RowFamily::Assign).collect();
        assert_eq!(assign.len(), 1);
        assert_eq!(assign[0].coeffs, vec![(model.registry.x(0, 0, 0), 1.0)]);
        assert_eq!(assign[0].sense, Sense::Eq);
        assert_eq!(assign[0].rhs, 1.0);
    }

    #[test]
    fn rejects_invalid_instance() {
        let inst = ProblemInstance::new(
            vec![Part::new("big", 190.0, 190.0, 180.0, 1.0)],
            vec![MachineSpec::new("small", 40.0, 100.0, 500.0, 0.0, 0.0)],
            PenaltyCoefficients::default(),
            1,
        )
        .unwrap();
        assert!(matches!(build_model(&inst, BuildOptions::default()), Err(BuildError::Invalid(_))));
    }

    #[test]
    fn lp_file_one_part() {
        let model = build_model(&one_part(), BuildOptions::default()).unwrap();
        let text = write_lp(&model);
        let binaries = text.split("Binaries\n").nth(1).unwrap();
        let names: Vec<&str> = binaries.lines().map(str::trim).take_while(|l| *l != "End").collect();
        assert_eq!(names, vec!["x_i1_j1_m1", "y_j1_m1", "b_i1", "f_i1"]);
        assert!(text.lines().all(|l| l.is_ascii() || l.starts_with('\\')));
        assert!(!text.contains("eps_zz"));
        let with_eps = write_lp(&model.clone().inject_epsilon(1000.0));
        assert_eq!(with_eps.lines().filter(|l| l.trim_start().starts_with("eps_zz:")).count(), 1);
        assert_eq!(
            with_eps.lines().count(),
            text.lines().count() + 1,
            "exactly one extra line for the epsilon row"
        );
    }

    #[test]
    fn zz_objective_support() {
        let model = build_model(&datasets::table2(), BuildOptions { objective: Objective::Zz, ..Default::default() })
            .unwrap();
        for &(j, _) in model.active_cost() {
            let fam = model.registry.column(j).family;
            assert!(matches!(fam, Family::Y | Family::Lp), "{fam:?}");
        }
        let text = write_lp(&model);
        let obj = text.lines().find(|l| l.starts_with(" obj:")).unwrap();
        assert!(obj.split_whitespace().filter(|t| t.contains('_')).all(|t| t.starts_with("y_") || t.starts_with("lp_")));
    }

    #[test]
    fn epsilon_overwrites_and_infinity_removes() {
        let model = build_model(&one_part(), BuildOptions::default()).unwrap();
        let base_rows = model.rows.len();
        let m = model.inject_epsilon(10.0).inject_epsilon(20.0);
        assert_eq!(m.rows.len(), base_rows + 1);
        assert_eq!(m.rows[m.epsilon_row.unwrap()].rhs, 20.0);
        let m = m.inject_epsilon(f64::INFINITY);
        assert_eq!(m.rows.len(), base_rows);
        assert!(m.epsilon_row.is_none());
    }

    #[test]
    fn names_resolve() {
        let model = build_model(&datasets::table2(), BuildOptions::default()).unwrap();
        let reg = &model.registry;
        assert_eq!(reg.lookup("x_i3_j1_m2"), Some(reg.x(2, 0, 1)));
        assert_eq!(reg.lookup("lpp_i9_j2_m2"), Some(reg.lpp(8, 1, 1)));
        assert_eq!(reg.lookup("Cp_i4"), Some(reg.part_completion(3)));
        assert_eq!(reg.lookup("q_1"), None);
        for (k, c) in reg.columns().iter().enumerate() {
            assert_eq!(reg.lookup(&c.name), Some(k));
        }
    }
}
