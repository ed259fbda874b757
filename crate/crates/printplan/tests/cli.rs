//! End-to-end runs of the `printplan` binary.

use std::path::Path;
use std::process::{Command, Output};

fn printplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_printplan")).args(args).env_remove("PRINTPLAN_SOLVER").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// `name = value` from the solve summary.
fn field(o: &Output, name: &str) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{name} = ")).map(|v| v.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("no {name} in {}", stdout(o)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const MACHINE: &str = r#"{"id":"1","width_mm":250,"length_mm":250,"height_mm":200,
    "layer_time_h_per_mm":6e-5,"volumetric_time_h_per_mm3":3e-6}"#;

#[test]
fn empty_part_set_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "empty.json", &format!(r#"{{"machines":[{MACHINE}],"parts":[]}}"#));
    let out = printplan(&["solve", &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty part set"));
}

#[test]
fn malformed_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(printplan(&["solve", &path]).status.code(), Some(2));
    assert_eq!(printplan(&["solve", "no-such-file.json"]).status.code(), Some(2));
}

#[test]
fn infeasible_exits_3() {
    // two 200 × 200 plates' worth of parts on a single 250 × 250 plate
    let dir = tempfile::tempdir().unwrap();
    let part = |id: u32| format!(r#"{{"id":"{id}","width_mm":200,"length_mm":200,"height_mm":200,"due_h":5}}"#);
    let doc = format!(r#"{{"machines":[{MACHINE}],"parts":[{},{}],"jobs_per_machine":1}}"#, part(1), part(2));
    let path = write(dir.path(), "tight.json", &doc);
    let out = printplan(&["solve", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
}

#[test]
fn solve_table2_min_z_and_fixed_orientation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let free = printplan(&["solve", "table2.json", "--objective", "z", "--jobs", "2", "--out", d]);
    assert!(free.status.success());
    assert_eq!(field(&free, "z"), 0.0);
    let schedule = std::fs::read_to_string(dir.path().join("schedule.csv")).unwrap();
    let mut lines = schedule.lines();
    assert!(lines.next().unwrap().starts_with("# printplan instance="));
    assert!(lines.next().unwrap().starts_with("part_id,machine_id,job_index,orientation"));
    assert_eq!(lines.count(), 9);
    let eval = std::fs::read_to_string(dir.path().join("evaluation.csv")).unwrap();
    assert!(eval.contains("# z_hours 0.000000"));

    let fixed = printplan(&["solve", "--instance", "table2", "--fixed-orientation", "--out", d]);
    assert!(fixed.status.success());
    assert!(field(&fixed, "z") >= field(&free, "z"));
}

#[test]
fn lp_export_and_solution_import() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let lp = dir.path().join("model.lp");
    let out = printplan(&["solve", "table2", "--objective", "zz", "--lp-out", lp.to_str().unwrap(), "--out", d]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.contains("Binaries") && text.contains("x_i9_j2_m2"));

    // a solution file in the external format, written from an in-process solve
    let inst = printplan::datasets::table2();
    let opts = printplan::model::BuildOptions { fixed_orientation: false, objective: printplan::model::Objective::Zz };
    let model = printplan::model::build_model(&inst, opts).unwrap();
    let sol = printplan::solver::solve_milp(&model, &Default::default()).unwrap();
    let mut file = format!("OPTIMAL {}\n", sol.objective);
    for (c, v) in model.registry.columns().iter().zip(&sol.values) {
        file.push_str(&format!("{} {v}\n", c.name));
    }
    let sol_path = write(dir.path(), "zz.sol", &file);
    let back = printplan(&["solve", "table2", "--objective", "zz", "--solution-in", &sol_path, "--out", d]);
    assert!(back.status.success(), "{}", String::from_utf8_lossy(&back.stderr));
    assert!(stdout(&back).contains("backend = file"));
    assert!((field(&back, "zz") - 59_987.46).abs() < 1e-6);

    let none = write(dir.path(), "none.sol", "INFEASIBLE\n");
    assert_eq!(printplan(&["solve", "table2", "--solution-in", &none, "--out", d]).status.code(), Some(3));
}

#[test]
fn deterministic_csvs_are_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = printplan(&[
            "pareto",
            "table2",
            "--epsilons",
            "59987.46,122487.46",
            "--deterministic",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["front.csv", "front.dat", "point_1.csv", "point_2.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let front = std::fs::read_to_string(a.path().join("front.csv")).unwrap();
    assert!(front.lines().nth(1).unwrap().starts_with("epsilon,z_hours,zz_mm2,status,schedule_file"));
    assert!(front.contains("122487.460000,6.000000,122487.460000,OPTIMAL,point_2.csv"));
}

#[test]
fn pareto_single_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = printplan(&["pareto", "table2", "--epsilon-count", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let front = std::fs::read_to_string(dir.path().join("front.csv")).unwrap();
    assert_eq!(front.lines().count(), 3);
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("point ")).count(), 1);
}

#[test]
fn sweep_single_value_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let sweep = printplan(&[
        "sweep", "table4", "--parts-prefix", "3", "--parameter", "layer_time", "--values", "0.00006",
        "--scenario", "free_orientation", "--out", d,
    ]);
    assert!(sweep.status.success(), "{}", String::from_utf8_lossy(&sweep.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(csv.lines().count(), 3);

    // the same instance through solve
    let inst = printplan::datasets::table4().with_part_prefix(3).unwrap().with_jobs_per_machine(3).unwrap();
    let path = write(dir.path(), "t4.json", &inst.to_json());
    let solve = printplan(&["solve", &path, "--out", d]);
    assert!(solve.status.success());
    assert_eq!(row[3].parse::<f64>().unwrap(), field(&solve, "z"));
}

#[test]
fn scenario_csv_and_bad_lists() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = printplan(&["scenario", "table3", "--parts-prefix", "2..3", "--machines", "1,2", "--out", d]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("scenario.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert_eq!(printplan(&["scenario", "table3", "--parts-prefix", "5..2", "--out", d]).status.code(), Some(2));
    assert_eq!(printplan(&["scenario", "table3", "--parts-prefix", "99", "--out", d]).status.code(), Some(2));
    let bad = printplan(&["sweep", "table4", "--parameter", "layer_time", "--values", "-1", "--out", d]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn solver_env_override_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_printplan"))
        .args(["solve", "table2"])
        .env("PRINTPLAN_SOLVER", "nonsense")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn time_limit_without_incumbent_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = printplan(&["solve", "table3", "--time-limit", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).contains("status = TIMELIMIT"));
}
