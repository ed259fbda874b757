//! Hand a model to an external MILP solver through LP and solution files.
//!
//! The command comes from PRINTPLAN_EXTERNAL_CMD, falling back to the
//! bundled HiGHS script (needs `python3 -m pip install highspy`).

use printplan::datasets;
use printplan::model::{build_model, BuildOptions, Objective};
use printplan::schedule::{decode, evaluate};
use printplan::solver::{parse_external_solution, ExternalSolver};

fn main() {
    let inst = datasets::table2();
    let model = build_model(&inst, BuildOptions { fixed_orientation: false, objective: Objective::Z }).unwrap();

    // a solution file written by any tool in the same format
    let text = "INFEASIBLE\n";
    println!("parsed status: {}", parse_external_solution(text, &model).unwrap().status);

    let solver = ExternalSolver::from_env();
    println!("running {:?}", solver.command);
    let bounded = model.clone().inject_epsilon(122_487.46);
    match solver.solve(&bounded) {
        Ok(sol) => {
            println!("{} objective {:.6} in {:.2?}", sol.status, sol.objective, sol.wall_time);
            let schedule = decode(&sol, &bounded, &inst).unwrap();
            let eval = evaluate(&schedule, &inst).unwrap();
            println!("evaluator: z {:.6}, zz {:.2}", eval.z, eval.zz);
        }
        Err(e) => println!("external solver unavailable: {e}"),
    }
}
