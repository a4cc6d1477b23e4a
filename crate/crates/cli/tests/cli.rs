use std::path::Path;
use std::process::{Command, Output};

use ranksubset_cli::{BENCHMARK_HEADER, SIMULATE_HEADER};

fn ranksubset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ranksubset"))
        .args(args)
        .env_remove("RANKSUBSET_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

/// y = x1³ (noiseless, monotone in x1) and a column x2 orthogonal to the
/// constant, to x1 and to the centered ranks of y, so adding x2 to the
/// {x1} fit cannot lower the loss at all.
fn monotone_csv(with_constant: bool) -> String {
    let n = 200;
    let x1: Vec<f64> = (0..n).map(|i| (i as f64 * 1.7).sin() * (1.0 + (i % 13) as f64 / 5.0)).collect();
    let y: Vec<f64> = x1.iter().map(|v| v * v * v).collect();
    let z: Vec<f64> = y
        .iter()
        .map(|yi| y.iter().filter(|yj| *yj <= yi).count() as f64 / n as f64 - 0.5)
        .collect();

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut orthogonalize = |mut v: Vec<f64>| {
        for b in &basis {
            let coef = dot(&v, b) / dot(b, b);
            v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= coef * bi);
        }
        basis.push(v.clone());
        v
    };
    orthogonalize(vec![1.0; n]);
    orthogonalize(x1.clone());
    orthogonalize(z);
    let x2 = orthogonalize((0..n).map(|i| (i as f64 * 2.3).cos() + (i % 7) as f64 / 7.0).collect());

    let mut body = String::from(if with_constant { "x1,c,y,x2\n" } else { "x1,y,x2\n" });
    for i in 0..n {
        if with_constant {
            body.push_str(&format!("{:?},4.5,{:?},{:?}\n", x1[i], y[i], x2[i]));
        } else {
            body.push_str(&format!("{:?},{:?},{:?}\n", x1[i], y[i], x2[i]));
        }
    }
    body
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn simulate_header_is_pinned() {
    assert_eq!(
        SIMULATE_HEADER.join(","),
        "n,p,sparsity,signal,cov,rho,link,error,method,reps,active_cover,inactive_cover,exact,mean_time_s,q05_time_s,q95_time_s,failures"
    );
    let out = ranksubset(&["simulate", "--n", "60", "--p", "20", "--sparsity", "2", "--reps", "2", "--seed", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().next().unwrap(), SIMULATE_HEADER.join(","));
}

#[test]
fn benchmark_header_is_pinned() {
    assert_eq!(BENCHMARK_HEADER.join(","), "sweep_var,value,method,mean_time_s,q05,q95");
    let out = ranksubset(&["benchmark", "--n", "80", "--p", "40,80", "--sparsity", "3", "--reps", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], BENCHMARK_HEADER.join(","));
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("p,40,rankabess,"));
    assert!(lines[2].starts_with("p,80,rankabess,"));
}

#[test]
fn simulate_emits_one_row_per_design_and_method() {
    let out = ranksubset(&[
        "simulate", "--n", "80", "--p", "30", "--sparsity", "2", "--reps", "2", "--method", "rankabess", "--method",
        "ranklasso",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(",rankabess,"));
    assert!(rows[1].contains(",ranklasso,"));

    let grid = ranksubset(&["simulate", "--n", "60,70,80", "--p", "20", "--sparsity", "2", "--reps", "1", "--no-timing"]);
    assert_eq!(stdout(&grid).lines().count(), 4);
    for row in stdout(&grid).lines().skip(1) {
        assert!(row.contains(",NA,NA,NA,"), "{row}");
    }
}

#[test]
fn config_file_sets_the_run_and_a_sidecar_echoes_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "run.toml",
        "n = [70]\np = [25]\nsparsity = 2\nreps = 3\nmethods = [\"rankabess\", \"t-ranklasso\"]\ncovariance = [\"exponential:0.5\"]\n",
    );
    let out_path = dir.path().join("results.csv");
    let out = ranksubset(&["simulate", "--config", &config, "--reps", "2", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("70,25,2,2,exponential,0.5,linear,gaussian,rankabess,2,"));
    let sidecar = std::fs::read_to_string(dir.path().join("results.config.toml")).unwrap();
    assert!(sidecar.contains("reps = 2"));
    assert!(sidecar.contains("exponential:0.5"));
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "bad.toml", "reps = 2\nreplications = 5\n");
    assert_eq!(ranksubset(&["simulate", "--config", &unknown]).status.code(), Some(2));
    let empty = write(dir.path(), "empty.toml", "methods = []\nn = [60]\np = [20]\nsparsity = 2\nreps = 1\n");
    assert_eq!(ranksubset(&["benchmark", "--config", &empty]).status.code(), Some(2));
    assert_eq!(ranksubset(&["simulate", "--cov", "banded", "--n", "50", "--p", "10"]).status.code(), Some(2));
    assert_eq!(ranksubset(&["benchmark", "--sweep", "q"]).status.code(), Some(2));
    assert_eq!(ranksubset(&["simulate", "--frobnicate"]).status.code(), Some(2));
}

#[test]
fn fit_finds_the_single_driving_column() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "data.csv", &monotone_csv(false));
    let out_path = dir.path().join("coef.csv");
    let out = ranksubset(&["fit", &input, "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("selected support (1): x1\n"), "{text}");
    let coef = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = coef.lines().collect();
    assert_eq!(lines[0], "variable,coefficient");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("x1,"));
    assert!(dir.path().join("coef.config.toml").exists());
}

#[test]
fn fit_warns_about_constant_columns() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "data.csv", &monotone_csv(true));
    let out = ranksubset(&["fit", &input]);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("column `c` is constant"), "{stderr}");
    assert!(!stdout(&out).contains("selected support (1): c"));
}

#[test]
fn fit_with_smax_one_has_a_single_path_row() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "data.csv", &monotone_csv(false));
    let out = ranksubset(&["fit", &input, "--smax", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let path_rows: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("  size")).skip(1).collect();
    assert_eq!(path_rows.len(), 1, "{text}");
}

#[test]
fn fit_reports_bad_input_with_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ragged = write(dir.path(), "ragged.csv", "x1,x2,y\n1,2,3\n4,5\n");
    let out = ranksubset(&["fit", &ragged]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    let text = write(dir.path(), "text.csv", "x1,x2,y\n1,2,3\n4,oops,6\n7,8,9\n");
    let out = ranksubset(&["fit", &text]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("data row 2") && stderr.contains("`x2`"), "{stderr}");

    let missing = write(dir.path(), "noy.csv", "a,b\n1,2\n3,4\n");
    assert_eq!(ranksubset(&["fit", &missing]).status.code(), Some(2));
    assert_eq!(ranksubset(&["fit", "/nonexistent/data.csv"]).status.code(), Some(2));
    let named = write(dir.path(), "named.csv", "resp,x\n1,2\n3,4\n5,7\n6,1\n");
    assert!(ranksubset(&["fit", &named, "--response", "resp"]).status.success());
}

#[test]
fn threads_fall_back_to_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_ranksubset"))
        .args(["simulate", "--n", "60", "--p", "20", "--sparsity", "2", "--reps", "3", "--no-timing"])
        .env("RANKSUBSET_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let single = ranksubset(&["simulate", "--n", "60", "--p", "20", "--sparsity", "2", "--reps", "3", "--no-timing", "--threads", "1"]);
    assert_eq!(out.stdout, single.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_ranksubset"))
        .args(["simulate", "--n", "60", "--p", "20", "--sparsity", "2", "--reps", "1"])
        .env("RANKSUBSET_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
