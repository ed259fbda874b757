//! Free against fixed orientation, one against two machines, on the first
//! few Table 3 parts.

use printplan::datasets;
use printplan::experiments::{run_scenario, scenario_csv, RunConfig};

fn main() {
    let report = run_scenario(&datasets::table3(), &[2, 3, 4], &[1, 2], &RunConfig::default()).unwrap();
    print!("{}", scenario_csv(&report));
    for v in &report.violations {
        println!("violation: {v}");
    }
}
