use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sparsepca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsepca"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sparsepca(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn golden_lines(name: &str) -> Vec<String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect()
}

fn keys(v: &Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

fn write_k5(dir: &Path) -> String {
    let mut text = String::from("%%MatrixMarket matrix coordinate pattern symmetric\n5 5 10\n");
    for i in 1..=5 {
        for j in 1..i {
            text.push_str(&format!("{i} {j}\n"));
        }
    }
    let path = dir.join("k5.mtx");
    std::fs::write(&path, text).unwrap();
    format!("mtx:{}", path.display())
}

#[test]
fn solve_pit_props_writes_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("pit");
    ok(&["solve", "--dataset", "pitprops", "--method", "gpbb", "--kappa", "6", "--out", prefix.to_str().unwrap()]);

    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("pit.json")).unwrap()).unwrap();
    assert_eq!(keys(&report), golden_lines("report_keys.txt"));
    assert_eq!(keys(&report["trace"][0]), golden_lines("trace_entry_keys.txt"));
    let ev = report["explained_variance"].as_f64().unwrap();
    assert!((ev - 0.8939).abs() <= 1e-3, "{ev}");
    assert_eq!(report["method"], "gpbb");
    assert_eq!(report["kappa"], 6);

    let trace = std::fs::read_to_string(dir.path().join("pit.trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], golden_lines("trace_header.csv")[0]);
    assert_eq!(lines.len() - 1, report["iterations"].as_u64().unwrap() as usize + 1);
}

#[test]
fn solve_multiple_methods_suffixes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    ok(&[
        "solve", "--dataset", "pitprops", "--method", "gpu", "--method", "mnewton", "--kappa", "7", "--out",
        prefix.to_str().unwrap(),
    ]);
    for m in ["gpu", "mnewton"] {
        assert!(dir.path().join(format!("run-{m}.json")).exists());
        assert!(dir.path().join(format!("run-{m}.trace.csv")).exists());
    }
}

#[test]
fn solve_identity_is_optimal_at_once() {
    let out = ok(&["solve", "--dataset", "identity", "--n", "10", "--kappa", "3"]);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["trace"][0]["f"], -1.0);
    assert!(report["trace"].as_array().unwrap().iter().all(|t| t["f"] == -1.0));
}

#[test]
fn solve_random_gpu_trace_is_monotone() {
    let out = ok(&[
        "solve", "--dataset", "random", "--m", "250", "--n", "500", "--seed", "1", "--method", "gpu", "--kappa",
        "500",
    ]);
    let report: Value = serde_json::from_str(&out).unwrap();
    let f: Vec<f64> = report["trace"].as_array().unwrap().iter().map(|t| t["f"].as_f64().unwrap()).collect();
    assert!(f.windows(2).all(|w| w[1] <= w[0] + 1e-10));
    assert!(["stagnation", "max_iter"].contains(&report["termination"].as_str().unwrap()));
}

#[test]
fn solve_is_deterministic() {
    let args = ["solve", "--dataset", "random", "--m", "30", "--n", "40", "--seed", "9", "--kappa", "5"];
    assert_eq!(ok(&args), ok(&args));
}

#[test]
fn errors_exit_nonzero_with_message() {
    for args in [
        vec!["solve", "--dataset", "pitprops", "--kappa", "14"],
        vec!["solve", "--dataset", "csv:/definitely/missing.csv", "--kappa", "1"],
        vec!["solve", "--dataset", "pitprops", "--kappa", "3", "--sigma", "2"],
        vec!["solve", "--dataset", "nonsense", "--kappa", "3"],
        vec!["dks", "--dataset", "pitprops", "--k", "3"],
    ] {
        let out = sparsepca(&args);
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn sweep_schema_and_determinism() {
    let args = ["sweep", "--m", "20,30", "--n", "30", "--kappa", "5,30", "--seeds", "1..=3"];
    let out = ok(&args);
    assert_eq!(out, ok(&args));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], golden_lines("sweep_header.csv")[0]);
    // 3 methods × 2 m × 2 κ
    assert_eq!(lines.len(), 1 + 12);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        let ev: f64 = fields[4].parse().unwrap();
        assert!(ev > 0.0 && ev <= 1.0 + 1e-9);
        if fields[3] == "30" {
            assert!(ev >= 1.0 - 1e-6, "full cardinality cell {line}");
        }
        assert_eq!(fields[7], "0");
    }
}

#[test]
fn eigstudy_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eig.csv");
    let summary = ok(&[
        "eigstudy", "--m", "30", "--n", "40", "--seeds", "1", "--method", "gpbb", "--method", "gpu", "--out",
        path.to_str().unwrap(),
    ]);
    let trace = std::fs::read_to_string(&path).unwrap();
    assert_eq!(trace.lines().next().unwrap(), golden_lines("eigstudy_header.csv")[0]);
    assert_eq!(summary.lines().next().unwrap(), golden_lines("eigstudy_summary_header.csv")[0]);
    assert_eq!(summary.lines().count(), 3);
    for line in trace.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let rel: f64 = fields[5].parse().unwrap();
        let log: f64 = fields[6].parse().unwrap();
        assert!(rel >= 0.0);
        assert!(rel == 0.0 || (log - rel.log10()).abs() < 1e-12);
    }
}

#[test]
fn dks_complete_graph() {
    let dir = tempfile::tempdir().unwrap();
    let k5 = write_k5(dir.path());
    let report: Value = serde_json::from_str(&ok(&["dks", "--dataset", &k5, "--k", "3"])).unwrap();
    assert_eq!(keys(&report), golden_lines("dks_keys.txt"));
    assert_eq!(report["density"], 2.0);
    assert_eq!(report["shift"], 5.0);
    assert!((report["lambda1"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    assert_eq!(report["support"].as_array().unwrap().len(), 3);
}

#[test]
fn dks_path_graph_finds_an_edge() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p3.mtx");
    std::fs::write(&path, "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 2\n").unwrap();
    let ds = format!("mtx:{}", path.display());
    let report: Value = serde_json::from_str(&ok(&["dks", "--dataset", &ds, "--k", "2"])).unwrap();
    assert_eq!(report["density"], 1.0);
    assert!((report["relaxed_value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn self_loops_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loop.mtx");
    std::fs::write(&path, "%%MatrixMarket matrix coordinate pattern general\n3 3 3\n1 1\n2 1\n3 2\n").unwrap();
    let ds = format!("mtx:{}", path.display());
    let out = sparsepca(&["dks", "--dataset", &ds, "--k", "2"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("self-loop"));
}

#[test]
fn sweep_ignores_thread_count() {
    let args = ["sweep", "--m", "25", "--n", "30", "--kappa", "4,10", "--seeds", "1..=6"];
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_sparsepca"))
            .args(args)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
}
