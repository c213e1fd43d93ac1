use std::process::{Command, Output};

use serde_json::Value;

fn fibred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibred")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect()
}

#[test]
fn verify_exit_codes() {
    let ok = fibred(&["verify", "thm1-cs1"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(fibred(&["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn verify_json_is_a_report() {
    let o = fibred(&["--json", "verify", "ex1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["verdict"] != "fail"));
}

#[test]
fn conditions_report_vanishing_surfaces() {
    let o = fibred(&["conditions", "3/4", "36/7", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["conditions"]["CT"], "0");
    assert_eq!(v["conditions"]["CS1"], "0");
    assert_ne!(v["conditions"]["CS2"], "0");
    assert_eq!(v["families"][0]["natural_dual"], "unique");

    let o = fibred(&["conditions", "2", "6", "6"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["conditions"]["CS123"], "0");

    assert_eq!(fibred(&["conditions", "0", "1", "1"]).status.code(), Some(2));
}

#[test]
fn density_csv_matches_the_closed_form() {
    let o = fibred(&["density", "ex1-Z"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "x,g_truncated,certified_bound,kuzmin_residual");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 25);
    // Compare shapes only: the density is defined up to a constant.
    let g = |x: f64| (x * x + 2.0 * x + 5.0) / -(x * x * x - 7.0 * x - 6.0);
    let k = rows[0][1] / g(rows[0][0]);
    for r in &rows {
        assert!((r[1] - k * g(r[0])).abs() < 1e-12, "{r:?}");
        assert!(r[3].abs() < 1e-12);
    }
}

#[test]
fn density_without_a_known_form_is_a_check_failure() {
    assert_eq!(fibred(&["density", "gauss"]).status.code(), Some(1));
}

#[test]
fn ulam_on_the_linear_map_is_uniform() {
    let o = fibred(&["simulate", "linear", "--method", "ulam", "--cells", "300"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 300);
    for r in &rows {
        assert!((r[2] / (r[1] - r[0]) - 1.0).abs() < 1e-6, "{r:?}");
        assert!((r[2] - r[3]).abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn orbit_histogram_of_example_six_is_flat() {
    let o = fibred(&["simulate", "ex6-Z", "--method", "orbit"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    let l1: f64 = rows.iter().map(|r| (r[2] - (r[1] - r[0])).abs()).sum();
    assert!(l1 < 0.02, "{l1}");
    assert_eq!(stdout(&fibred(&["simulate", "ex6-Z", "--method", "orbit"])), stdout(&o));
}

#[test]
fn catalog_export_is_deterministic_json() {
    let a = fibred(&["--json", "catalog", "export"]);
    assert_eq!(a.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    let text = v.to_string();
    for name in ["thm1-cs1", "ex1", "ex6", "intro-1step"] {
        assert!(text.contains(&format!("\"{name}\"")), "{name}");
    }
    assert_eq!(stdout(&fibred(&["--json", "catalog", "export"])), stdout(&a));
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ex1.csv");
    let o = fibred(&["--out", path.to_str().unwrap(), "density", "ex1-Z"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x,g_truncated"));
}

#[test]
fn invalid_map_json_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"branches\": [1, 2").unwrap();
    assert_eq!(fibred(&["density", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(fibred(&["simulate", "no-such-map"]).status.code(), Some(2));
}
