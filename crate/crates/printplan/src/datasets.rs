//! Bundled experiment instances and a seeded generator for small random
//! instances used by the property suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{parse_json, MachineSpec, Part, PenaltyCoefficients, ProblemInstance};

pub const TABLE2_JSON: &str = include_str!("../data/table2.json");
pub const TABLE3_JSON: &str = include_str!("../data/table3.json");
pub const TABLE4_JSON: &str = include_str!("../data/table4.json");

/// Two identical 250 × 250 × 200 machines and the nine-part Pareto example, two jobs per machine.
pub fn table2() -> ProblemInstance {
    parse_json(TABLE2_JSON).expect("bundled table2.json is valid")
}

/// Twenty-part scenario set on the same two machines.
pub fn table3() -> ProblemInstance {
    parse_json(TABLE3_JSON).expect("bundled table3.json is valid")
}

/// Fifteen-part sensitivity set on a single machine.
pub fn table4() -> ProblemInstance {
    parse_json(TABLE4_JSON).expect("bundled table4.json is valid")
}

/// Bounds for [`random_instance`].
#[derive(Debug, Clone)]
pub struct RandomSpec {
    pub max_parts: usize,
    pub max_machines: usize,
    pub max_jobs: usize,
    pub dim_range: (f64, f64),
    pub due_range: (f64, f64),
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self { max_parts: 5, max_machines: 2, max_jobs: 3, dim_range: (1.0, 50.0), due_range: (0.0, 48.0) }
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Draws a small instance whose machine plates are tight enough that the
/// area capacity actually binds. Machines are redrawn (and grown) until the
/// instance validates.
pub fn random_instance(seed: u64, spec: &RandomSpec) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_parts = rng.gen_range(1..=spec.max_parts);
    let n_machines = rng.gen_range(1..=spec.max_machines);
    let jobs = rng.gen_range(1..=spec.max_jobs);
    let (dlo, dhi) = spec.dim_range;
    let parts: Vec<Part> = (0..n_parts)
        .map(|i| {
            Part::new(
                format!("p{}", i + 1),
                round2(rng.gen_range(dlo..=dhi)),
                round2(rng.gen_range(dlo..=dhi)),
                round2(rng.gen_range(dlo..=dhi)),
                round2(rng.gen_range(spec.due_range.0..=spec.due_range.1)),
            )
        })
        .collect();
    let min_dim = |p: &Part| p.width_mm.min(p.length_mm).min(p.height_mm);
    let tallest_min = parts.iter().map(min_dim).fold(0.0, f64::max);
    let largest_min_footprint = parts
        .iter()
        .map(|p| crate::geometry::orientations(p).iter().map(|o| o.base_area_mm2).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let identical = rng.gen_bool(0.5);
    let mut attempt = 0;
    loop {
        let grow = 1.0 + 0.1 * attempt as f64;
        let mut machines = Vec::with_capacity(n_machines);
        let mut template: Option<MachineSpec> = None;
        for k in 0..n_machines {
            if let (true, Some(t)) = (identical, template.as_ref()) {
                let mut m = t.clone();
                m.id = format!("m{}", k + 1);
                machines.push(m);
                continue;
            }
            let side = rng.gen_range(30.0..=90.0_f64) * grow;
            let side = round2(side.max(largest_min_footprint.sqrt() + 1.0));
            let length = round2(rng.gen_range(side..=side * 1.6));
            let height = round2(rng.gen_range(tallest_min.max(dlo)..=dhi.max(tallest_min) + 5.0) * grow);
            let m = MachineSpec::new(
                format!("m{}", k + 1),
                side,
                length,
                height,
                round2(rng.gen_range(0.005..=0.05) * 1000.0) / 1000.0,
                round2(rng.gen_range(1e-5..=1e-4) * 1e7) / 1e7,
            );
            template.get_or_insert_with(|| m.clone());
            machines.push(m);
        }
        let inst = ProblemInstance::new(parts.clone(), machines, PenaltyCoefficients::default(), jobs)
            .expect("generator keeps invariants");
        if crate::instance::validate(&inst).is_ok() {
            return inst;
        }
        attempt += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate;

    #[test]
    fn bundled_tables_load() {
        assert_eq!(table2().part_count(), 9);
        assert_eq!(table2().jobs_per_machine(), 2);
        assert_eq!(table3().part_count(), 20);
        assert_eq!(table4().part_count(), 15);
        assert_eq!(table4().machine_count(), 1);
        for inst in [table2(), table3(), table4()] {
            assert!(validate(&inst).is_ok());
        }
    }

    #[test]
    fn random_instances_are_valid_and_reproducible() {
        let spec = RandomSpec::default();
        for seed in 0..50 {
            let a = random_instance(seed, &spec);
            assert_eq!(a, random_instance(seed, &spec));
            assert!(validate(&a).is_ok(), "seed {seed}");
            assert!(a.part_count() <= 5 && a.machine_count() <= 2 && a.jobs_per_machine() <= 3);
        }
    }
}
