use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vrcoint::dgp::{generate_sample, DgpConfig, ShortRunDynamics};
use vrcoint::{DeterministicCase, RngStream};

fn vrcoint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vrcoint")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Three independent random walks with a date column.
fn write_data(dir: &Path) -> PathBuf {
    let cols: Vec<Vec<f64>> = (0..3)
        .map(|k| {
            let cfg = DgpConfig::null(150, DeterministicCase::D1, ShortRunDynamics::Iid, 0.0);
            generate_sample(&cfg, &mut RngStream::new(99, k)).unwrap().y
        })
        .collect();
    let mut text = String::from("date,a,b,c\n");
    for i in 0..150 {
        text.push_str(&format!("day{i},{},{},{}\n", cols[0][i], cols[1][i], cols[2][i]));
    }
    let path = dir.join("data.csv");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn json_and_text_agree_and_settings_reproduce() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let data = data.to_str().unwrap();
    let base = ["test", data, "--lhs", "a", "--rhs", "b,c", "--case", "d2", "--test", "all"];
    let json = vrcoint(&[&base[..], &["--format", "json"]].concat());
    assert!(json.status.success(), "{}", String::from_utf8_lossy(&json.stderr));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 4);
    for key in ["test", "case", "detrend", "m", "T", "statistic", "critical_values", "decision", "settings", "seed"] {
        assert!(reports[0].get(key).is_some(), "missing {key}");
    }
    assert_eq!(reports[0]["T"], 150);
    assert_eq!(reports[0]["m"], 2);
    assert_eq!(reports[0]["data"]["label_column"], "date");

    let text = stdout(&vrcoint(&base));
    for r in reports {
        let stat = r["statistic"].as_f64().unwrap();
        let line = text
            .lines()
            .filter(|l| l.trim_start().starts_with("statistic"))
            .map(|l| l.split_whitespace().nth(1).unwrap().parse::<f64>().unwrap())
            .find(|v| *v == stat);
        assert!(line.is_some(), "statistic {stat} not in text output");
    }

    let adf = reports.iter().find(|r| r["test"] == "Adf").unwrap();
    let lag = adf["settings"]["lag"].as_u64().unwrap().to_string();
    let again = vrcoint(&["test", data, "--lhs", "a", "--rhs", "b,c", "--case", "d2", "--test", "adf", "--lag", &lag, "--format", "json"]);
    let again: serde_json::Value = serde_json::from_str(&stdout(&again)).unwrap();
    assert_eq!(again[0]["statistic"], adf["statistic"]);
}

#[test]
fn gls_vr_uses_the_tabulated_cbar() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let out = vrcoint(&["test", data.to_str().unwrap(), "--lhs", "a", "--rhs", "b", "--case", "d1", "--detrend", "gls", "--format", "json"]);
    assert!(out.status.success());
    let r: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r[0]["detrend"]["Gls"]["c_bar"], -40.25);
    assert!(r[0]["critical_values"]["0.05"].is_number());
    let adf = vrcoint(&["test", data.to_str().unwrap(), "--lhs", "a", "--rhs", "b", "--case", "d1", "--detrend", "gls", "--test", "adf"]);
    assert_eq!(adf.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let data = data.to_str().unwrap();
    let collinear = vrcoint(&["test", data, "--lhs", "b", "--rhs", "c,b"]);
    assert_eq!(collinear.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&collinear.stderr).contains("'b'"));
    assert_eq!(vrcoint(&["test", "/nonexistent.csv", "--lhs", "a", "--rhs", "b"]).status.code(), Some(2));
    assert_eq!(vrcoint(&["test", data, "--lhs", "a", "--rhs", "zz"]).status.code(), Some(2));
    assert_eq!(vrcoint(&["test", data, "--lhs", "a", "--rhs", "b", "--last", "1000"]).status.code(), Some(2));
    assert_eq!(vrcoint(&["test", data, "--lhs", "a"]).status.code(), Some(1));
    assert_eq!(vrcoint(&["test", data, "--lhs", "a", "--rhs", "b", "--case", "d7"]).status.code(), Some(1));
    assert_eq!(vrcoint(&["calibrate-cbar", "--case", "d0"]).status.code(), Some(1));
}

#[test]
fn tabulate_is_deterministic_and_monotone_in_m() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &Path, workers: &str| {
        vrcoint(&[
            "--workers", workers, "tabulate", "--test", "vr", "--case", "d1", "--m-range", "1-5", "--levels", "0.05",
            "--reps", "1000", "--grid", "500", "--seed", "3", "--out", out.to_str().unwrap(),
        ])
    };
    assert!(args(&a, "1").status.success());
    assert!(args(&b, "8").status.success());
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let text = String::from_utf8(ta).unwrap();
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(5).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 5);
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn simulate_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let lap = dir.path().join("lap.csv");
    let o = vrcoint(&[
        "simulate", "--experiment", "lap", "--case", "d0", "--tests", "vr", "--reps", "1000", "--grid", "200",
        "--c-grid", "0,-10", "--out", lap.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&lap).unwrap();
    let zero = text.lines().find(|l| l.starts_with("lap,VR,D0,ols,,limit,0,200,0,")).unwrap();
    assert_eq!(zero.split(',').nth(10), Some("0.05"));
    assert!(dir.path().join("lap.csv.pivot.csv").exists());

    let u0 = dir.path().join("u0.csv");
    let o = vrcoint(&[
        "simulate", "--experiment", "u0", "--case", "d2", "--r2", "0.4", "--dynamics", "iid,ma(0.9)", "--tests", "vr,adf*",
        "--reps", "100", "--lambda", "0,2", "--out", u0.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<String> = std::fs::read_to_string(&u0).unwrap().lines().skip(1).map(String::from).collect();
    assert_eq!(rows.len(), 2 * 2 * 2);
    let mut keys: Vec<(String, String, String)> = rows
        .iter()
        .map(|r| {
            let f: Vec<&str> = r.split(',').collect();
            (f[1].to_string() + f[4], f[5].to_string(), f[9].to_string())
        })
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 8);
    let pivot = std::fs::read_to_string(dir.path().join("u0.csv.pivot.csv")).unwrap();
    assert!(pivot.starts_with("case,T,r2,dynamics,c,lambda_u,VR,ADF*"));
}

#[test]
fn size_cell_uses_bundled_critical_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("size.csv");
    let o = vrcoint(&[
        "simulate", "--experiment", "size", "--case", "d1", "--tests", "vr", "--reps", "5000", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let v: f64 = text.lines().nth(1).unwrap().split(',').nth(10).unwrap().parse().unwrap();
    assert!((v - 0.05).abs() <= 0.015, "{v}");
}
