//! Schedules decoded from solver output, and an evaluator that recomputes
//! every derived quantity from the instance alone.

use std::fmt;

use thiserror::Error;

use crate::geometry::{volume, Orientation, OrientationKind};
use crate::instance::ProblemInstance;
use crate::model::MilpModel;
use crate::solver::MilpSolution;

/// Absolute tolerance for schedule checks, in hours and mm.
pub const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub machine: usize,
    /// 0-based job index on the machine.
    pub job: usize,
    pub orientation: OrientationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// One entry per part, in instance order.
    pub assignments: Vec<Assignment>,
    /// `completion[m][j]`, hours.
    pub completion: Vec<Vec<f64>>,
    /// `active[m][j]`: the job's plate is counted as used.
    pub active: Vec<Vec<bool>>,
}

impl Schedule {
    /// Marks exactly the nonempty jobs active.
    pub fn new(assignments: Vec<Assignment>, completion: Vec<Vec<f64>>) -> Self {
        let mut active: Vec<Vec<bool>> = completion.iter().map(|c| vec![false; c.len()]).collect();
        for a in &assignments {
            if let Some(slot) = active.get_mut(a.machine).and_then(|row| row.get_mut(a.job)) {
                *slot = true;
            }
        }
        Self { assignments, completion, active }
    }

    pub fn parts_in(&self, machine: usize, job: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignments.iter().enumerate().filter(move |(_, a)| a.machine == machine && a.job == job).map(|(i, _)| i)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("solution has no incumbent values")]
    NoValues,
    #[error("part unassigned: {0}")]
    PartUnassigned(String),
    #[error("part {0} assigned to {1} jobs")]
    MultipleAssignments(String, usize),
    #[error("orientation conflict on part {0}")]
    OrientationConflict(String),
}

/// Reads assignments, orientations, completion times and activation flags
/// from an integral solution of `model`.
pub fn decode(solution: &MilpSolution, model: &MilpModel, instance: &ProblemInstance) -> Result<Schedule, DecodeError> {
    decode_values(&solution.values, model, instance)
}

pub fn decode_values(values: &[f64], model: &MilpModel, instance: &ProblemInstance) -> Result<Schedule, DecodeError> {
    let reg = &model.registry;
    if values.len() != reg.len() {
        return Err(DecodeError::NoValues);
    }
    let on = |k: usize| values[k] >= 1.0 - TOL;
    let mut assignments = Vec::with_capacity(reg.parts);
    for (i, part) in instance.parts().iter().enumerate() {
        let mut hits = Vec::new();
        for j in 0..reg.jobs {
            for m in 0..reg.machines {
                if on(reg.x(i, j, m)) {
                    hits.push((m, j));
                }
            }
        }
        let (machine, job) = match hits.len() {
            0 => return Err(DecodeError::PartUnassigned(part.id.clone())),
            1 => hits[0],
            n => return Err(DecodeError::MultipleAssignments(part.id.clone(), n)),
        };
        let orientation = OrientationKind::from_flags(on(reg.b(i)), on(reg.f(i)))
            .ok_or_else(|| DecodeError::OrientationConflict(part.id.clone()))?;
        assignments.push(Assignment { machine, job, orientation });
    }
    let completion = (0..reg.machines).map(|m| (0..reg.jobs).map(|j| values[reg.completion(j, m)]).collect()).collect();
    let active = (0..reg.machines).map(|m| (0..reg.jobs).map(|j| on(reg.y(j, m))).collect()).collect();
    Ok(Schedule { assignments, completion, active })
}

/// Rewrites the costless components of an integral solution to their
/// canonical values: `y` marks exactly the nonempty jobs, `H″` is the true
/// tallest part and `P` follows from it. The result stays feasible (these
/// changes only loosen rows) and keeps the same earliness/tardiness cost.
pub fn canonicalize(values: &mut [f64], model: &MilpModel, instance: &ProblemInstance) {
    let reg = &model.registry;
    for (m, mach) in instance.machines().iter().enumerate() {
        for j in 0..reg.jobs {
            let mut nonempty = false;
            let mut tallest: f64 = 0.0;
            let mut vol = 0.0;
            for (i, p) in instance.parts().iter().enumerate() {
                if values[reg.x(i, j, m)] >= 0.5 {
                    nonempty = true;
                    tallest = tallest.max(values[reg.height(i)]);
                    vol += volume(p);
                }
            }
            values[reg.y(j, m)] = if nonempty { 1.0 } else { 0.0 };
            values[reg.job_height(j, m)] = tallest;
            values[reg.processing(j, m)] = mach.layer_time_h_per_mm * tallest + mach.volumetric_time_h_per_mm3 * vol;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobEvaluation {
    pub machine: usize,
    pub job: usize,
    pub active: bool,
    pub parts: Vec<usize>,
    pub max_height_mm: f64,
    pub processing_h: f64,
    pub completion_h: f64,
    pub occupied_mm2: f64,
    pub utilization: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartEvaluation {
    pub orientation: Orientation,
    pub completion_h: f64,
    pub earliness_h: f64,
    pub tardiness_h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub jobs: Vec<JobEvaluation>,
    pub parts: Vec<PartEvaluation>,
    pub z: f64,
    pub zz: f64,
}

impl Evaluation {
    pub fn job(&self, machine: usize, job: usize) -> Option<&JobEvaluation> {
        self.jobs.iter().find(|e| e.machine == machine && e.job == job)
    }

    pub fn occupied_total(&self) -> f64 {
        self.jobs.iter().map(|j| j.occupied_mm2).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// A part is missing, duplicated or placed on a nonexistent job.
    Assignment,
    /// The chosen orientation is taller than the machine.
    Height,
    /// Footprints exceed the plate area.
    Capacity,
    /// A part sits in an inactive job, or a job is used while its predecessor is empty.
    Activation,
    /// A job completes before its processing could finish.
    Sequencing,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Assignment => "assignment",
            ViolationKind::Height => "height",
            ViolationKind::Capacity => "capacity",
            ViolationKind::Activation => "activation",
            ViolationKind::Sequencing => "sequencing",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violation at {}: {}", self.kind, self.subject, self.detail)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("infeasible schedule: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct EvalError(pub Vec<Violation>);

fn job_label(instance: &ProblemInstance, m: usize, j: usize) -> String {
    format!("machine {} job {}", instance.machines()[m].id, j + 1)
}

fn processing(instance: &ProblemInstance, schedule: &Schedule, m: usize, j: usize) -> (f64, f64, f64, Vec<usize>) {
    let mach = &instance.machines()[m];
    let mut tallest: f64 = 0.0;
    let mut vol = 0.0;
    let mut area = 0.0;
    let members: Vec<usize> = schedule.parts_in(m, j).collect();
    for &i in &members {
        let p = &instance.parts()[i];
        let o = Orientation::of(p, schedule.assignments[i].orientation);
        tallest = tallest.max(o.height_mm);
        vol += volume(p);
        area += o.base_area_mm2;
    }
    (tallest, mach.layer_time_h_per_mm * tallest + mach.volumetric_time_h_per_mm3 * vol, area, members)
}

/// Every violated constraint family, with its subject. Empty iff feasible.
pub fn check_feasible(schedule: &Schedule, instance: &ProblemInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, subject: String, detail: String| out.push(Violation { kind, subject, detail });
    let nm = instance.machine_count();
    let nj = instance.jobs_per_machine();
    if schedule.assignments.len() != instance.part_count() {
        push(
            ViolationKind::Assignment,
            "schedule".into(),
            format!("{} assignments for {} parts", schedule.assignments.len(), instance.part_count()),
        );
        return out;
    }
    let shape_ok = schedule.completion.len() == nm
        && schedule.active.len() == nm
        && schedule.completion.iter().all(|c| c.len() == nj)
        && schedule.active.iter().all(|a| a.len() == nj);
    if !shape_ok {
        push(ViolationKind::Assignment, "schedule".into(), format!("expected {nm} machines × {nj} jobs"));
        return out;
    }
    let mut out_of_range = false;
    for (i, a) in schedule.assignments.iter().enumerate() {
        let part = &instance.parts()[i];
        if a.machine >= nm || a.job >= nj {
            push(ViolationKind::Assignment, format!("part {}", part.id), "job index out of range".into());
            out_of_range = true;
            continue;
        }
        let o = Orientation::of(part, a.orientation);
        let mach = &instance.machines()[a.machine];
        if o.height_mm > mach.height_mm + TOL {
            push(
                ViolationKind::Height,
                format!("part {}", part.id),
                format!("{} height {} mm exceeds {} mm", a.orientation, o.height_mm, mach.height_mm),
            );
        }
        if !schedule.active[a.machine][a.job] {
            push(
                ViolationKind::Activation,
                format!("part {}", part.id),
                format!("assigned to inactive {}", job_label(instance, a.machine, a.job)),
            );
        }
    }
    if out_of_range {
        return out;
    }
    for (m, mach) in instance.machines().iter().enumerate() {
        let mut prev_c = 0.0;
        let mut prev_nonempty = true;
        for j in 0..nj {
            let (_, p, area, members) = processing(instance, schedule, m, j);
            if area > mach.area_mm2() + TOL {
                push(
                    ViolationKind::Capacity,
                    job_label(instance, m, j),
                    format!("occupied {area} mm² exceeds {} mm²", mach.area_mm2()),
                );
            }
            if !members.is_empty() && !prev_nonempty {
                push(ViolationKind::Activation, job_label(instance, m, j), "used while the previous job is empty".into());
            }
            prev_nonempty = !members.is_empty();
            let c = schedule.completion[m][j];
            if c + TOL < prev_c + p {
                push(
                    ViolationKind::Sequencing,
                    job_label(instance, m, j),
                    format!("completes at {c} h, earliest possible {} h", prev_c + p),
                );
            }
            prev_c = c;
        }
    }
    out
}

/// Recomputes heights, processing times, completion, earliness, tardiness
/// and both objectives. Capacity and sequencing violations are errors.
pub fn evaluate(schedule: &Schedule, instance: &ProblemInstance) -> Result<Evaluation, EvalError> {
    let violations = check_feasible(schedule, instance);
    if !violations.is_empty() {
        return Err(EvalError(violations));
    }
    let pen = instance.penalties();
    let mut jobs = Vec::new();
    let mut zz = 0.0;
    for (m, mach) in instance.machines().iter().enumerate() {
        for j in 0..instance.jobs_per_machine() {
            let (tallest, p, area, members) = processing(instance, schedule, m, j);
            let active = schedule.active[m][j];
            if active {
                zz += mach.area_mm2();
            }
            zz -= area;
            jobs.push(JobEvaluation {
                machine: m,
                job: j,
                active,
                parts: members,
                max_height_mm: tallest,
                processing_h: p,
                completion_h: schedule.completion[m][j],
                occupied_mm2: area,
                utilization: area / mach.area_mm2(),
            });
        }
    }
    let mut z = 0.0;
    let parts = instance
        .parts()
        .iter()
        .zip(&schedule.assignments)
        .map(|(part, a)| {
            let c = schedule.completion[a.machine][a.job];
            let earliness_h = (part.due_h - c).max(0.0);
            let tardiness_h = (c - part.due_h).max(0.0);
            z += pen.tardiness * tardiness_h + pen.earliness * earliness_h;
            PartEvaluation { orientation: Orientation::of(part, a.orientation), completion_h: c, earliness_h, tardiness_h }
        })
        .collect();
    Ok(Evaluation { jobs, parts, z, zz })
}

pub const SCHEDULE_HEADER: [&str; 10] = [
    "part_id",
    "machine_id",
    "job_index",
    "orientation",
    "height_mm",
    "base_area_mm2",
    "completion_h",
    "due_h",
    "earliness_h",
    "tardiness_h",
];

/// Schedule rows in part order; times to 1e-6 h.
pub fn schedule_csv(schedule: &Schedule, evaluation: &Evaluation, instance: &ProblemInstance) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SCHEDULE_HEADER).expect("in-memory write");
    for ((part, a), e) in instance.parts().iter().zip(&schedule.assignments).zip(&evaluation.parts) {
        w.write_record([
            part.id.clone(),
            instance.machines()[a.machine].id.clone(),
            (a.job + 1).to_string(),
            a.orientation.to_string(),
            format!("{}", e.orientation.height_mm),
            format!("{}", e.orientation.base_area_mm2),
            format!("{:.6}", e.completion_h),
            format!("{}", part.due_h),
            format!("{:.6}", e.earliness_h),
            format!("{:.6}", e.tardiness_h),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub const EVALUATION_HEADER: [&str; 9] = [
    "machine_id",
    "job_index",
    "active",
    "parts",
    "max_height_mm",
    "processing_h",
    "completion_h",
    "occupied_mm2",
    "utilization",
];

/// One row per job slot, then `z` and `zz` as trailing comment lines.
pub fn evaluation_csv(evaluation: &Evaluation, instance: &ProblemInstance) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(EVALUATION_HEADER).expect("in-memory write");
    for j in &evaluation.jobs {
        let parts: Vec<&str> = j.parts.iter().map(|&i| instance.parts()[i].id.as_str()).collect();
        w.write_record([
            instance.machines()[j.machine].id.clone(),
            (j.job + 1).to_string(),
            j.active.to_string(),
            parts.join(" "),
            format!("{}", j.max_height_mm),
            format!("{:.6}", j.processing_h),
            format!("{:.6}", j.completion_h),
            format!("{:.6}", j.occupied_mm2),
            format!("{:.6}", j.utilization),
        ])
        .expect("in-memory write");
    }
    let mut out = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8");
    out.push_str(&format!("# z_hours {:.6}\n# zz_mm2 {:.6}\n", evaluation.z, evaluation.zz));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::geometry::max_footprint;
    use crate::instance::{MachineSpec, Part, PenaltyCoefficients};
    use crate::model::{build_model, BuildOptions};
    use crate::solver::{solve_milp, SolveParams};

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }

    fn machine() -> MachineSpec {
        MachineSpec::new("1", 250.0, 250.0, 200.0, 0.00006, 0.000003)
    }

    fn one_part() -> ProblemInstance {
        ProblemInstance::new(vec![Part::new("1", 10.0, 10.0, 10.0, 1.0)], vec![machine()], PenaltyCoefficients::default(), 1)
            .unwrap()
    }

    #[test]
    fn decode_one_part_solution() {
        let inst = one_part();
        let model = build_model(&inst, BuildOptions::default()).unwrap();
        let sol = solve_milp(&model, &SolveParams::default()).unwrap();
        let s = decode(&sol, &model, &inst).unwrap();
        assert_eq!((s.assignments[0].machine, s.assignments[0].job), (0, 0));
        assert!((s.completion[0][0] - 1.0).abs() < 1e-6);
        let e = evaluate(&s, &inst).unwrap();
        assert!(e.z.abs() < 1e-6);
    }

    #[test]
    fn decode_errors() {
        let inst = one_part();
        let model = build_model(&inst, BuildOptions::default()).unwrap();
        let zeros = vec![0.0; model.registry.len()];
        let err = decode_values(&zeros, &model, &inst).unwrap_err();
        assert!(err.to_string().contains("part unassigned"));
        let mut v = zeros.clone();
        v[model.registry.x(0, 0, 0)] = 1.0;
        v[model.registry.b(0)] = 1.0;
        v[model.registry.f(0)] = 1.0;
        assert!(decode_values(&v, &model, &inst).unwrap_err().to_string().contains("orientation conflict"));
    }

    #[test]
    fn single_part_job_processing_time() {
        let t2 = datasets::table2();
        let part2 = t2.parts()[1].clone();
        let o = max_footprint(&part2);
        assert_eq!((o.height_mm, o.base_area_mm2), (8.0, 361.0));
        let inst = ProblemInstance::new(vec![part2], vec![machine()], PenaltyCoefficients::default(), 1).unwrap();
        let s = Schedule::new(vec![Assignment { machine: 0, job: 0, orientation: o.kind }], vec![vec![30.0]]);
        let e = evaluate(&s, &inst).unwrap();
        assert!(approx(e.jobs[0].processing_h, 0.009144), "{}", e.jobs[0].processing_h);
    }

    #[test]
    fn all_of_table2_in_one_job() {
        let inst = datasets::table2().with_jobs_per_machine(1).unwrap().with_machine_count(1).unwrap();
        let assignments = inst
            .parts()
            .iter()
            .map(|p| Assignment { machine: 0, job: 0, orientation: max_footprint(p).kind })
            .collect();
        let s = Schedule::new(assignments, vec![vec![26.0]]);
        let e = evaluate(&s, &inst).unwrap();
        assert!((e.zz - 59987.46).abs() < 1e-6, "{}", e.zz);
        assert!((e.zz + e.occupied_total() - 62500.0).abs() < 1e-9);
        // one shared completion at the median due date
        assert!((e.z - 16.0).abs() < 1e-9, "{}", e.z);
    }

    #[test]
    fn empty_schedule() {
        let inst = ProblemInstance::new(Vec::new(), vec![machine()], PenaltyCoefficients::default(), 1).unwrap();
        let e = evaluate(&Schedule::new(Vec::new(), vec![vec![0.0]]), &inst).unwrap();
        assert_eq!((e.z, e.zz), (0.0, 0.0));
    }

    #[test]
    fn capacity_violation_reported() {
        let small = MachineSpec::new("s", 250.0, 250.0, 200.0, 0.0, 0.0);
        let parts = vec![Part::new("a", 250.0, 200.0, 1.0, 1.0), Part::new("b", 200.0, 100.0, 1.0, 1.0)];
        let inst = ProblemInstance::new(parts, vec![small], PenaltyCoefficients::default(), 1).unwrap();
        let flat = |_| Assignment { machine: 0, job: 0, orientation: OrientationKind::Flat };
        let s = Schedule::new((0..2).map(flat).collect(), vec![vec![1.0]]);
        let v = check_feasible(&s, &inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::Capacity);
        assert!(v[0].detail.contains("70000"), "{}", v[0].detail);
        assert!(evaluate(&s, &inst).is_err());
    }

    #[test]
    fn sequencing_violation_reported() {
        let parts = vec![Part::new("a", 10.0, 10.0, 10.0, 1.0), Part::new("b", 10.0, 10.0, 10.0, 1.0)];
        let inst = ProblemInstance::new(parts, vec![machine()], PenaltyCoefficients::default(), 2).unwrap();
        let s = Schedule::new(
            vec![
                Assignment { machine: 0, job: 0, orientation: OrientationKind::Flat },
                Assignment { machine: 0, job: 1, orientation: OrientationKind::Flat },
            ],
            vec![vec![5.0, 5.0]],
        );
        let v = check_feasible(&s, &inst);
        assert_eq!(v.iter().map(|v| v.kind).collect::<Vec<_>>(), vec![ViolationKind::Sequencing]);
    }

    #[test]
    fn activation_gap_reported() {
        let inst = ProblemInstance::new(vec![Part::new("a", 10.0, 10.0, 10.0, 1.0)], vec![machine()], PenaltyCoefficients::default(), 2)
            .unwrap();
        let s = Schedule::new(vec![Assignment { machine: 0, job: 1, orientation: OrientationKind::Flat }], vec![vec![0.0, 5.0]]);
        assert_eq!(check_feasible(&s, &inst)[0].kind, ViolationKind::Activation);
    }

    #[test]
    fn solver_output_passes_and_agrees() {
        for seed in 0..5 {
            let inst = datasets::random_instance(seed, &Default::default());
            let model = build_model(&inst, BuildOptions::default()).unwrap();
            let mut sol = solve_milp(&model, &SolveParams::default()).unwrap();
            let before_hpp: Vec<f64> = (0..inst.machine_count())
                .flat_map(|m| (0..inst.jobs_per_machine()).map(move |j| (j, m)))
                .map(|(j, m)| sol.values[model.registry.job_height(j, m)])
                .collect();
            canonicalize(&mut sol.values, &model, &inst);
            assert!(model.to_lp().max_violation(&sol.values) < 1e-6);
            let s = decode(&sol, &model, &inst).unwrap();
            assert!(check_feasible(&s, &inst).is_empty(), "seed {seed}");
            let e = evaluate(&s, &inst).unwrap();
            assert!((e.z - sol.objective).abs() <= 1e-6 * sol.objective.abs().max(1.0));
            assert!((e.zz - model.zz_value(&sol.values)).abs() <= 1e-6);
            for (k, jobeval) in e.jobs.iter().enumerate() {
                let idx = jobeval.machine * inst.jobs_per_machine() + jobeval.job;
                assert!(jobeval.max_height_mm <= before_hpp[idx] + 1e-9, "{k}");
            }
            for p in &e.parts {
                assert_eq!(p.earliness_h * p.tardiness_h, 0.0);
            }
        }
    }

    #[test]
    fn csv_has_documented_header() {
        let inst = one_part();
        let s = Schedule::new(vec![Assignment { machine: 0, job: 0, orientation: OrientationKind::Flat }], vec![vec![1.5]]);
        let e = evaluate(&s, &inst).unwrap();
        let text = schedule_csv(&s, &e, &inst);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SCHEDULE_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "1,1,1,flat,10,100,1.500000,1,0.000000,0.500000");
    }
}
