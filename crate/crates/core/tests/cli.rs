use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nomdd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nomdd")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = nomdd(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn gen_writes_named_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&["gen", "--n", "6", "--count", "3", "--seed", "9", "--out", d]);
    let names: Vec<String> = (0..3).map(|k| format!("jit_n6_s9_{k}.txt")).collect();
    for name in &names {
        assert!(dir.path().join(name).exists());
    }
    let first = fs::read_to_string(dir.path().join(&names[0])).unwrap();
    assert_ne!(first, fs::read_to_string(dir.path().join(&names[1])).unwrap());
    let other = tempfile::tempdir().unwrap();
    ok(&["gen", "--n", "6", "--count", "1", "--seed", "9", "--out", other.path().to_str().unwrap()]);
    assert_eq!(first, fs::read_to_string(other.path().join(&names[0])).unwrap());
}

fn write_example(dir: &Path) -> String {
    let path = dir.join("four.txt");
    fs::write(&path, "4\n4 2 6\n0 3 10\n0 2 9\n7 6 19\n").unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn oracle_and_solve_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path());
    let report = ok(&["oracle", &path]);
    assert!(report.contains("min_start 4 0 0 8"));
    assert!(report.contains("max_end 6 10 9 19"));
    let optimum = report.lines().find_map(|l| l.strip_prefix("optimum ")).unwrap().to_string();

    let log = dir.path().join("tree.log");
    let solved = ok(&["solve", &path, "--variant", "relaxed-bc", "--width", "3", "--out", log.to_str().unwrap()]);
    assert!(solved.contains(&format!("best_cost {optimum}")));
    assert!(solved.contains("complete true"));
    assert!(fs::read_to_string(log).unwrap().starts_with("nomdd-replay 1\n"));
}

#[test]
fn experiment_is_repeatable_in_deterministic_mode() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "experiment", "--n", "8", "--count", "2", "--seed", "4", "--node-limit", "60",
            "--deterministic", "--width", "2,4", "--out", out.to_str().unwrap(),
        ]);
        fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("instance,variant,width,nodes,failures,time_ms,best_cost,gap_vs_bc"));
    // baseline, two widths each of relaxed-bc and pe, exact-bc
    assert_eq!(lines.count(), 2 * 6);
    assert!(a.contains("jit_n8_s4_1.txt,relaxed-bc,4,"));

    let reports = dir.path().join("reports");
    ok(&["report", dir.path().join("a.csv").to_str().unwrap(), "--out", reports.to_str().unwrap()]);
    let profile = fs::read_to_string(reports.join("profile_nodes.csv")).unwrap();
    assert!(profile.starts_with("method,ratio,fraction\n"));
    assert!(fs::read_to_string(reports.join("cactus_gap.csv")).unwrap().starts_with("method,gap,fraction\n"));
    assert!(!reports.join("profile_time.csv").exists());
}

#[test]
fn baseline_only_experiment_has_one_row_without_gap() {
    let out = ok(&["experiment", "--n", "5", "--variant", "baseline", "--node-limit", "50", "--deterministic"]);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].ends_with(','));
}

#[test]
fn hard_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path());
    assert!(!nomdd(&["solve", &path, "--variant", "nope"]).status.success());
    assert!(!nomdd(&["solve", &path, "--variant", "pe"]).status.success());
    assert!(!nomdd(&["solve", &path, "--variant", "pe", "--width", "0"]).status.success());
    assert!(!nomdd(&["experiment", "--n", "5", "--deterministic"]).status.success());
    assert!(!nomdd(&["experiment", "--n", "5", "--width", "0", "--node-limit", "5"]).status.success());
    assert!(!nomdd(&["oracle", dir.path().join("missing.txt").to_str().unwrap()]).status.success());
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "2\n0 3 1\n").unwrap();
    let out = nomdd(&["oracle", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    let big = dir.path().join("big.txt");
    ok(&["gen", "--n", "12", "--out", dir.path().to_str().unwrap()]);
    fs::rename(dir.path().join("jit_n12_s0_0.txt"), &big).unwrap();
    assert!(!nomdd(&["oracle", big.to_str().unwrap()]).status.success());
}
