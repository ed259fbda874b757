//! Solve both single-objective models of the Table 2 instance with the
//! built-in branch-and-bound.

use printplan::datasets;
use printplan::model::{build_model, BuildOptions, Objective};
use printplan::schedule::{canonicalize, decode_values, evaluate};
use printplan::solver::{solve_milp, SolveParams};

fn main() {
    let inst = datasets::table2();
    for objective in [Objective::Zz, Objective::Z] {
        let model = build_model(&inst, BuildOptions { fixed_orientation: false, objective }).unwrap();
        let sol = solve_milp(&model, &SolveParams::default()).unwrap();
        let mut values = sol.values.clone();
        canonicalize(&mut values, &model, &inst);
        let schedule = decode_values(&values, &model, &inst).unwrap();
        let eval = evaluate(&schedule, &inst).unwrap();
        println!(
            "{objective:?}: {} objective {:.4} after {} nodes in {:.2?}; evaluator z = {:.4}, zz = {:.2}",
            sol.status, sol.objective, sol.nodes, sol.wall_time, eval.z, eval.zz
        );
        for (p, a) in inst.parts().iter().zip(&schedule.assignments) {
            println!("  part {} -> machine {} job {} {}", p.id, inst.machines()[a.machine].id, a.job + 1, a.orientation);
        }
    }
}
