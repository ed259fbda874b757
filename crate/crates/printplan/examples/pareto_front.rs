//! Epsilon-constraint front of the Table 2 instance.
//!
//! cargo run --release --example pareto_front [grid points]

use printplan::datasets;
use printplan::pareto::{front_gnuplot, pareto_front, ParetoConfig};

fn main() {
    let k = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let inst = datasets::table2();
    let front = pareto_front(&inst, &ParetoConfig { grid_count: k, ..ParetoConfig::default() }).unwrap();
    let p = &front.payoff;
    println!("ideal (z {:.3}, zz {:.2}), nadir (z {:.3}, zz {:.2})", p.z_ideal, p.zz_ideal, p.z_nadir, p.zz_nadir);
    for s in &front.solves {
        match &s.point {
            Some(pt) => println!(
                "eps {:>11.2}: {} z {:>7.3} zz {:>11.2}{}",
                s.epsilon,
                s.status,
                pt.z,
                pt.zz,
                if s.kept { "" } else { " (dropped)" }
            ),
            None => println!("eps {:>11.2}: {}", s.epsilon, s.status),
        }
    }
    print!("{}", front_gnuplot(&front));
}
