//! Load an instance, validate it, and round-trip it through the CSV pair.
//!
//! cargo run --example parse_validate [path/to/instance.json]

use printplan::datasets;
use printplan::instance::{load_instance, parse_instance, to_csv_pair, validate, Format};

fn main() {
    let inst = match std::env::args().nth(1) {
        Some(p) => load_instance(p.as_ref()).unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(2)
        }),
        None => datasets::table2(),
    };
    println!(
        "{} parts, {} machines, {} jobs per machine, hash {}",
        inst.part_count(),
        inst.machine_count(),
        inst.jobs_per_machine(),
        inst.content_hash()
    );
    let report = validate(&inst);
    if report.is_ok() && report.warnings.is_empty() {
        println!("valid, no warnings");
    } else {
        print!("{report}");
    }

    let (machines_csv, parts_csv) = to_csv_pair(&inst);
    let back = parse_instance(&parts_csv, Format::CsvPair { machines_csv: &machines_csv }).unwrap();
    let back = back.with_jobs_per_machine(inst.jobs_per_machine()).unwrap();
    println!("csv round trip keeps the hash: {}", back.content_hash() == inst.content_hash());

    // the parser reports the first bad field
    let broken = r#"{"machines":[{"id":"1","width_mm":250,"length_mm":250,"height_mm":200,
        "layer_time_h_per_mm":6e-5,"volumetric_time_h_per_mm3":3e-6}],"parts":[]}"#;
    println!("empty part list: {}", parse_instance(broken, Format::Json).unwrap_err());
}
