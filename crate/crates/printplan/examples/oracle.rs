//! The brute-force oracle next to the MILP on a seeded random instance,
//! plus the timing subproblem and the single-batch shortcut.
//!
//! cargo run --release --example oracle [seed]

use printplan::datasets::{self, random_instance, RandomSpec};
use printplan::model::{build_model, BuildOptions, Objective};
use printplan::oracle::{brute_force, optimal_timing, single_batch_oracle, BatchMode, OracleLimits, TimingMachine, TimingProblem};
use printplan::solver::{solve_milp, SolveParams};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let inst = random_instance(seed, &RandomSpec::default());
    println!("seed {seed}: {} parts, {} machines, J = {}", inst.part_count(), inst.machine_count(), inst.jobs_per_machine());
    match brute_force(&inst, &OracleLimits::default(), &[]) {
        Ok(bf) => {
            println!("oracle: min z {:.6}, min zz {:.4}, {} candidates", bf.min_z.evaluation.z, bf.min_zz.evaluation.zz, bf.candidates);
            println!("oracle front: {:?}", bf.front);
            for objective in [Objective::Z, Objective::Zz] {
                let model = build_model(&inst, BuildOptions { fixed_orientation: false, objective }).unwrap();
                let sol = solve_milp(&model, &SolveParams::default()).unwrap();
                println!("milp {objective:?}: {:.6}", sol.objective);
            }
        }
        Err(e) => println!("oracle: {e}"),
    }

    let two_jobs = TimingProblem {
        machines: vec![TimingMachine { processing_h: vec![1.0, 1.0], due_h: vec![vec![0.5], vec![10.0]] }],
        earliness_penalty: 1.0,
        tardiness_penalty: 1.0,
    };
    let (times, cost) = optimal_timing(&two_jobs);
    println!("timing: C = {:?}, cost {cost}", times[0]);

    let one = single_batch_oracle(&datasets::table2(), BatchMode::MinZz).unwrap();
    println!("table 2 in one job: z = {:.4}, zz = {:.2}", one.evaluation.z, one.evaluation.zz);
}
