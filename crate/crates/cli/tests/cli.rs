//! End-to-end tests for the `qratio` binary: exit codes, JSON/CSV output,
//! and the generate → solve round trip through the text file format.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qratio(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qratio"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {text}"))
}

fn write_vector_file(path: &Path, entries: &[f64]) {
    let cells: Vec<String> = entries.iter().map(|e| e.to_string()).collect();
    fs::write(path, format!("{}\n{}\n", entries.len(), cells.join(" "))).unwrap();
}

fn write_matrix_file(path: &Path, rows: &[&[f64]]) {
    let mut text = format!("{} {}\n", rows.len(), rows[0].len());
    for row in rows {
        let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
        text.push_str(&cells.join(" "));
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

#[test]
fn version_flag_succeeds() {
    let out = qratio(&["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("qratio"), "got: {text}");
}

#[test]
fn unknown_flag_exits_2_with_stderr_diagnostic() {
    let out = qratio(&["solve", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn negative_eta_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let y = dir.path().join("y.txt");
    write_matrix_file(&a, &[&[1.0, 0.0], &[0.0, 1.0]]);
    write_vector_file(&y, &[1.0, 2.0]);
    let out = qratio(&[
        "solve",
        "--method",
        "ccp",
        "--q",
        "2",
        "--eta",
        "-1",
        "--matrix",
        a.to_str().unwrap(),
        "--y",
        y.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));
}

#[test]
fn infeasible_instance_exits_1_and_reports_termination() {
    // y = (1, -1) is orthogonal to the range of A = [1; 1], so no z satisfies
    // ||Az - y|| <= 0.
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let y = dir.path().join("y.txt");
    write_matrix_file(&a, &[&[1.0], &[1.0]]);
    write_vector_file(&y, &[1.0, -1.0]);
    let out = qratio(&[
        "solve",
        "--method",
        "pm",
        "--q",
        "2",
        "--eta",
        "0",
        "--matrix",
        a.to_str().unwrap(),
        "--y",
        y.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["termination"], "infeasible");
}

#[test]
fn sparsity_command_counts_a_two_spike_vector() {
    let dir = tempfile::tempdir().unwrap();
    let v = dir.path().join("v.txt");
    write_vector_file(&v, &[1.0, 1.0, 0.0, 0.0]);
    let out = qratio(&["sparsity", "--q", "2", "--vector", v.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert!((report["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(report["support_count"], 2);
}

#[test]
fn sparsity_accepts_inf_and_zero_orders() {
    let dir = tempfile::tempdir().unwrap();
    let v = dir.path().join("v.txt");
    write_vector_file(&v, &[3.0, 1.0, 0.0]);
    let out = qratio(&["sparsity", "--q", "inf", "--vector", v.to_str().unwrap()]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["q"], "inf");
    assert!((report["value"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);

    let out = qratio(&["sparsity", "--q", "0", "--vector", v.to_str().unwrap()]);
    assert!(out.status.success());
    assert!((stdout_json(&out)["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn gen_then_solve_recovers_the_planted_signal() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("inst");
    let out = qratio(&[
        "gen",
        "--ensemble",
        "gaussian",
        "--m",
        "8",
        "--n",
        "16",
        "--k",
        "1",
        "--seed",
        "7",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["matrix.txt", "signal.txt", "y.txt", "instance.json"] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    let meta = stdout_json(&out);
    assert_eq!(meta["eta"].as_f64().unwrap(), 0.0);

    let solve = qratio(&[
        "solve",
        "--method",
        "ccp",
        "--q",
        "2",
        "--eta",
        "0",
        "--matrix",
        out_dir.join("matrix.txt").to_str().unwrap(),
        "--y",
        out_dir.join("y.txt").to_str().unwrap(),
    ]);
    assert!(
        solve.status.success(),
        "{}",
        String::from_utf8_lossy(&solve.stderr)
    );
    let report = stdout_json(&solve);
    let found: Vec<f64> = report["solution"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();

    let signal_text = fs::read_to_string(out_dir.join("signal.txt")).unwrap();
    let truth: Vec<f64> = signal_text
        .lines()
        .nth(1)
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(found.len(), truth.len());
    let err: f64 = found
        .iter()
        .zip(&truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = truth.iter().map(|e| e * e).sum::<f64>().sqrt();
    assert!(err / scale < 1e-3, "relative error {}", err / scale);
}

#[test]
fn gen_files_round_trip_byte_for_byte() {
    // Writing, reading, and re-writing the instance must reproduce the files
    // exactly: the text format stores every value losslessly.
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    for target in [&first, &second] {
        let out = qratio(&[
            "gen",
            "--ensemble",
            "dct",
            "--m",
            "6",
            "--n",
            "12",
            "--k",
            "2",
            "--sigma",
            "0.05",
            "--seed",
            "11",
            "--out-dir",
            target.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    for name in ["matrix.txt", "signal.txt", "y.txt", "instance.json"] {
        let a = fs::read(first.join(name)).unwrap();
        let b = fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    // kernel-ratio must accept the generated matrix file unchanged.
    let kr = qratio(&[
        "kernel-ratio",
        "--q",
        "inf",
        "--matrix",
        first.join("matrix.txt").to_str().unwrap(),
    ]);
    assert!(kr.status.success(), "{}", String::from_utf8_lossy(&kr.stderr));
    let report = stdout_json(&kr);
    assert!(report["kernel_ratio_inf"].as_f64().unwrap() >= 1.0);
}

#[test]
fn kernel_ratio_exact_value_on_a_one_row_matrix() {
    // ker [1 -1] is spanned by (1, 1): the ratio ||h||_1 / ||h||_inf is 2.
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    write_matrix_file(&a, &[&[1.0, -1.0]]);
    let out = qratio(&["kernel-ratio", "--q", "inf", "--matrix", a.to_str().unwrap()]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert!((report["kernel_ratio_inf"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    let notes = report["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n == "kernel_ratio_exact"));
}

#[test]
fn cmsv_of_the_identity_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    write_matrix_file(&a, &[&[1.0, 0.0], &[0.0, 1.0]]);
    let out = qratio(&[
        "cmsv",
        "--q",
        "2",
        "--s",
        "1",
        "--matrix",
        a.to_str().unwrap(),
        "--starts",
        "10",
    ]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert!((report["cmsv_estimate"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(report["cmsv_level"].as_f64().unwrap(), 1.0);
}

#[test]
fn fvalue_reports_a_finite_gap_on_a_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let y = dir.path().join("y.txt");
    write_matrix_file(&a, &[&[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0]]);
    write_vector_file(&y, &[1.0, 1.0]);
    let out = qratio(&[
        "fvalue",
        "--lambda",
        "1",
        "--q",
        "2",
        "--eta",
        "0",
        "--matrix",
        a.to_str().unwrap(),
        "--y",
        y.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    // lambda = 1 >= the optimal ratio's reciprocal here, so F(1) is finite
    // and nonnegative.
    let f = report["f_value"].as_f64().unwrap();
    assert!(f.is_finite());
    assert!(f >= -1e-9, "F(1) = {f}");
}

#[test]
fn toy_command_writes_the_scan_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = qratio(&["toy", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let meta = stdout_json(&out);
    assert!((meta["lambda_bar"].as_f64().unwrap() - 0.6180497842663565).abs() < 1e-12);

    let profile = fs::read_to_string(dir.path().join("sq_profile.csv")).unwrap();
    let mut lines = profile.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,s_q=0.5,s_q=1.5,s_q=2,s_q=inf",
        "profile header changed"
    );
    assert_eq!(profile.lines().count(), 2002);

    let penalty = fs::read_to_string(dir.path().join("penalty_scan.csv")).unwrap();
    assert!(penalty.lines().next().unwrap().starts_with("t,penalty_lambda=0.5,"));
}

#[test]
fn bench_runs_a_tiny_spec_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("tiny.exp");
    fs::write(
        &spec,
        "name = tiny\nensemble = gaussian\nm = 8\nn = 16\nk = 1,2\nq = 2\n\
         methods = bpdn\nreplications = 2\nseed = 5\n",
    )
    .unwrap();
    let run = |out: &Path| {
        let res = qratio(&[
            "bench",
            "--spec",
            spec.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    };
    let first = dir.path().join("r1");
    let second = dir.path().join("r2");
    run(&first);
    run(&second);
    for name in ["rows.csv", "summary.csv", "meta.json"] {
        assert!(first.join(name).exists(), "missing {name}");
    }
    // 2 k-values x 1 q x 1 method x 2 replications + header.
    let rows = fs::read_to_string(first.join("rows.csv")).unwrap();
    assert_eq!(rows.lines().count(), 5);
    assert_eq!(
        fs::read(first.join("rows.csv")).unwrap(),
        fs::read(second.join("rows.csv")).unwrap(),
        "identical runs must produce identical rows.csv"
    );
}

#[test]
fn bench_rejects_a_malformed_spec_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.exp");
    fs::write(&spec, "name = bad\nwat = 1\n").unwrap();
    let out = qratio(&[
        "bench",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn threads_flag_does_not_change_bench_output() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("tiny.exp");
    fs::write(
        &spec,
        "name = tiny\nensemble = gaussian\nm = 8\nn = 16\nk = 1\nq = 2\n\
         methods = bpdn\nreplications = 2\nseed = 9\n",
    )
    .unwrap();
    let first = dir.path().join("t1");
    let second = dir.path().join("t4");
    for (threads, out_dir) in [("1", &first), ("4", &second)] {
        let res = qratio(&[
            "--threads",
            threads,
            "bench",
            "--spec",
            spec.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(res.status.success());
    }
    assert_eq!(
        fs::read(first.join("rows.csv")).unwrap(),
        fs::read(second.join("rows.csv")).unwrap(),
        "thread count must not change the result rows"
    );
}
