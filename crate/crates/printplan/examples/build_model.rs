//! Build the linearized model, print its size, and export it as an LP file.
//!
//! cargo run --example build_model > table2.lp

use printplan::datasets;
use printplan::model::{build_model, compute_big_m, write_lp, BuildOptions, ModelStats, Objective};

fn main() {
    let inst = datasets::table2();
    let model = build_model(&inst, BuildOptions { fixed_orientation: false, objective: Objective::Z }).unwrap();
    let stats = model.stats();
    let expected = ModelStats::expected(inst.part_count(), inst.jobs_per_machine(), inst.machine_count());
    eprintln!("columns {} binaries {} rows {}", stats.columns, stats.binaries, stats.rows);
    assert_eq!(stats, expected);
    let big_m = compute_big_m(&inst);
    eprintln!("big-M: count {} height {} area {:?} horizon {:.4}", big_m.m_count, big_m.m_height, big_m.m_area, big_m.m_horizon);

    // an epsilon row bounds unused area while z is minimized
    let bounded = model.inject_epsilon(122_487.46);
    print!("{}", write_lp(&bounded));
}
