use std::process::{Command, Output};

use vegasplus::bench::{rows_from_csv, RunReport, SweepReport, CSV_HEADER};

fn vegasplus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vegasplus"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_linear_json_round_trips() {
    let o = vegasplus(&[
        "run", "--integrand", "linear", "--config", "def", "--n-eval", "1e5", "--seed", "1",
        "--iterations", "6", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rep = RunReport::from_json(&text).unwrap();
    assert_eq!(rep.schema, 1);
    assert_eq!(rep.iterations.len(), 6);
    assert_eq!(rep.row.n_eval, 100_000);
    assert!((rep.row.mean - 5.0).abs() <= 5.0 * rep.row.sigma);
    assert!((rep.phase_percent.total() - 100.0).abs() < 0.1);
    let again: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    let orig: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(again, orig);
}

#[test]
fn tq_config_sets_intervals_from_budget() {
    let run = |n: &str| {
        let o = vegasplus(&[
            "run", "--integrand", "gaussian", "--config", "tq", "--n-eval", n, "--iterations", "2",
            "--format", "json",
        ]);
        assert_eq!(o.status.code(), Some(0));
        RunReport::from_json(&stdout(&o)).unwrap()
    };
    assert_eq!(run("1e4").n_intervals, 31);
    assert_eq!(run("1e6").n_intervals, 56);
    let o = vegasplus(&[
        "run", "--integrand", "gaussian", "--config", "tq", "--n-eval", "1e4", "--iterations", "2",
        "--n-intervals", "12", "--format", "json",
    ]);
    assert_eq!(RunReport::from_json(&stdout(&o)).unwrap().n_intervals, 12);
}

#[test]
fn text_and_csv_outputs() {
    let o = vegasplus(&["run", "--integrand", "sinexp", "--n-eval", "2e4", "--iterations", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let t = stdout(&o);
    for needle in ["result", "reference", "fill", "init", "update", "clear"] {
        assert!(t.contains(needle), "missing {needle} in\n{t}");
    }
    let o = vegasplus(&[
        "run", "--integrand", "sinexp", "--n-eval", "2e4", "--iterations", "3", "--format", "csv",
    ]);
    let rows = rows_from_csv(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].integrand, "sinexp");
}

#[test]
fn sweep_encodings_and_scaling_table() {
    let dir = std::env::temp_dir().join(format!("vp_cli_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("s.csv");
    let json = dir.join("s.json");
    let base = [
        "sweep", "--integrand", "roos_arnold", "--doubling", "5000:20000", "--workers", "1,2",
        "--iterations", "2", "--seeds", "2",
    ];
    let mut a: Vec<&str> = base.to_vec();
    a.extend(["--format", "csv", "--out", csv.to_str().unwrap()]);
    assert_eq!(vegasplus(&a).status.code(), Some(0));
    let mut b: Vec<&str> = base.to_vec();
    b.extend(["--format", "json", "--out", json.to_str().unwrap()]);
    assert_eq!(vegasplus(&b).status.code(), Some(0));

    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with(CSV_HEADER));
    let from_csv = rows_from_csv(&csv_text).unwrap();
    let rep = SweepReport::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(from_csv.len(), 3 * 2 * 2);
    // timing columns differ between invocations; the numbers must not
    for (x, y) in from_csv.iter().zip(&rep.rows) {
        assert_eq!((x.n_eval, x.workers, x.seed), (y.n_eval, y.workers, y.seed));
        assert_eq!(x.mean.to_bits(), y.mean.to_bits());
        assert_eq!(x.sigma.to_bits(), y.sigma.to_bits());
    }
    assert_eq!(rep.scaling.len(), 6);
    assert!(rep.scaling.iter().filter(|s| s.workers == 1).all(|s| s.speedup == 1.0));

    let o = vegasplus(&base);
    assert!(stdout(&o).contains("speedup"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["run"],
        vec!["run", "--integrand", "nope"],
        vec!["run", "--integrand", "linear", "--n-eval", "1.5"],
        vec!["run", "--integrand", "linear", "--config", "xx"],
        vec!["run", "--integrand", "linear", "--iterations", "3", "--skip", "3"],
        vec!["run", "--integrand", "sinexp", "--dim", "3"],
        vec!["run", "--integrand", "linear", "--format", "xml"],
        vec!["run", "--integrand", "linear", "--repeats", "0"],
        vec!["sweep", "--integrand", "linear"],
        vec!["sweep", "--integrand", "linear", "--n-eval", "1e4", "--doubling", "1:4"],
        vec!["bogus"],
    ] {
        let o = vegasplus(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    let o = vegasplus(&["run", "--integrand", "nope"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("path_integral"));
}

#[test]
fn runtime_failure_exits_1() {
    let o = vegasplus(&[
        "run", "--integrand", "linear", "--n-eval", "1e4", "--iterations", "2", "--out",
        "/nonexistent-dir/x.txt",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dim_override_and_help() {
    let o = vegasplus(&[
        "run", "--integrand", "cosine", "--dim", "3", "--n-eval", "1e4", "--iterations", "4",
        "--format", "json",
    ]);
    let rep = RunReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(rep.dims, 3);
    assert!((rep.reference.unwrap() - 1f64.sin().powi(3)).abs() < 1e-15);
    let o = vegasplus(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
}
