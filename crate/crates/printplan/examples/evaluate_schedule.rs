//! Score a hand-made schedule, then break it and list what the checker finds.

use printplan::datasets;
use printplan::geometry::OrientationKind;
use printplan::schedule::{check_feasible, evaluate, evaluation_csv, Assignment, Schedule};

fn main() {
    let inst = datasets::table2();
    // everything flat in job 1 of machine 1, completing at 24 h
    let assignments =
        vec![Assignment { machine: 0, job: 0, orientation: OrientationKind::Flat }; inst.part_count()];
    let schedule = Schedule::new(assignments, vec![vec![24.0, 24.0], vec![0.0, 0.0]]);
    let eval = evaluate(&schedule, &inst).unwrap();
    println!("z = {:.4} h, zz = {:.2} mm²", eval.z, eval.zz);
    print!("{}", evaluation_csv(&eval, &inst));

    let mut broken = schedule.clone();
    broken.assignments[0].job = 1;
    broken.active[0][1] = true;
    broken.completion[0][1] = 0.5;
    for v in check_feasible(&broken, &inst) {
        println!("{v}");
    }
}
