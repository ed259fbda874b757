//! The three orientations of every part and which of them fit each machine.

use printplan::datasets;
use printplan::geometry::{feasible_orientations, max_footprint, min_height, orientations, volume};

fn main() {
    let inst = datasets::table2();
    let mach = &inst.machines()[0];
    println!("machine {}: {} mm² plate, {} mm tall", mach.id, mach.area_mm2(), mach.height_mm);
    println!("{:>4} {:>9} {:>22} {:>22} {:>22}", "part", "volume", "flat", "b-stand", "f-stand");
    for p in inst.parts() {
        let [f, b, s] = orientations(p);
        let cell = |o: printplan::geometry::Orientation| format!("h={:.1} A={:.2}", o.height_mm, o.base_area_mm2);
        println!("{:>4} {:>9} {:>22} {:>22} {:>22}", p.id, format!("{:.2}", volume(p)), cell(f), cell(b), cell(s));
    }
    for p in inst.parts() {
        let fits: Vec<&str> = feasible_orientations(p, mach).iter().map(|o| o.kind.as_str()).collect();
        println!(
            "part {}: fits {:?}; largest footprint {}, lowest {}",
            p.id,
            fits,
            max_footprint(p).kind,
            min_height(p).kind
        );
    }
}
