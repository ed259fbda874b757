//! Layer-time sensitivity on a five-part slice of Table 4: the gap between
//! free and fixed orientation closes as layer time shrinks.
//!
//! cargo run --release --example sweep

use printplan::datasets;
use printplan::experiments::{run_sweep, sweep_csv, RunConfig, ScenarioSelection, SweepParameter, SweepSpec};

fn main() {
    let inst = datasets::table4().with_part_prefix(5).unwrap();
    let spec = SweepSpec {
        parameter: SweepParameter::LayerTime,
        values: vec![0.1, 0.01, 0.001, 1e-4, 1e-5],
        scenario: ScenarioSelection::Both,
        machines_override: None,
    };
    let report = run_sweep(&inst, &spec, &RunConfig::default()).unwrap();
    print!("{}", sweep_csv(&report));
    for &v in &spec.values {
        let z1 = report.cell(v, "free_orientation").and_then(|c| c.z()).unwrap();
        let z2 = report.cell(v, "fixed_orientation").and_then(|c| c.z()).unwrap();
        println!("Ht {v:>7}: fixed - free = {:.4} h", z2 - z1);
    }
}
