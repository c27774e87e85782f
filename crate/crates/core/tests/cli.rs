//! End-to-end checks of the command-line binary: output formats, header
//! contents, unit conversion at the CLI boundary, determinism of seeded runs,
//! and exit codes of the error classes.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdc-fuzzy"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Parse a CSV body (after the header comment) into named columns.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.is_empty());
    let config = lines.next().unwrap();
    assert!(config.starts_with("# config: "), "missing config header: {config}");
    let columns: Vec<String> = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (columns, rows)
}

fn column(columns: &[String], name: &str) -> usize {
    columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn fringe_csv_has_expected_values() {
    let text = stdout(&["fringe", "--n", "1", "--grid", "181"]);
    let (columns, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 181);
    let theta = column(&columns, "theta_rad");
    let p_pm = column(&columns, "p_pm");
    assert_eq!(rows[0][theta], 0.0);
    assert!((rows[0][p_pm] - 0.5).abs() < 1e-12);
    // a half-step-count grid contains pi/2, the fringe zero of the single pair
    let (columns, rows) = parse_csv(&stdout(&["fringe", "--n", "1", "--grid", "180"]));
    let (theta, p_pm) = (column(&columns, "theta_rad"), column(&columns, "p_pm"));
    let j = rows
        .iter()
        .position(|r| (r[theta] - std::f64::consts::FRAC_PI_2).abs() < 1e-9)
        .expect("grid should contain pi/2");
    assert!(rows[j][p_pm].abs() < 1e-12);
}

#[test]
fn chsh_reports_two_qubit_optimum() {
    let text = stdout(&["chsh", "--n", "1"]);
    let (columns, rows) = parse_csv(&text);
    let s = rows[0][column(&columns, "s")];
    assert!((s - 8.0f64.sqrt()).abs() < 1e-6, "S = {s}");
}

#[test]
fn explicit_angles_cross_boundary_in_degrees() {
    let text = stdout(&["fringe", "--n", "1", "--thetas-deg", "0,45,90"]);
    let (columns, rows) = parse_csv(&text);
    let theta = column(&columns, "theta_rad");
    let got: Vec<f64> = rows.iter().map(|r| r[theta]).collect();
    let want = [0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2];
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-12, "theta {g} vs {w}");
    }
}

#[test]
fn seeded_sampling_runs_are_byte_identical() {
    let args = [
        "fringe", "--n", "3", "--grid", "12", "--mc", "--shots", "2000", "--seed", "7",
    ];
    let first = stdout(&args);
    let second = stdout(&args);
    assert_eq!(first, second);
    let (columns, _) = parse_csv(&first);
    assert!(columns.iter().any(|c| c.starts_with("se_")), "sampled runs carry standard errors");
    assert!(first.lines().next().unwrap().contains("\"seed\":7"));
}

#[test]
fn exact_runs_omit_standard_errors() {
    let text = stdout(&["fringe", "--n", "2", "--grid", "7"]);
    let (columns, _) = parse_csv(&text);
    assert!(columns.iter().all(|c| !c.starts_with("se_")));
}

#[test]
fn invalid_configuration_exits_with_code_2() {
    for args in [
        vec!["fringe", "--n", "1", "--eta", "1.5"],
        vec!["chsh", "--n", "1", "--gain", "1.0"],
        vec!["chsh"],
        vec!["fringe", "--n", "1", "--scheme", "of"],
        vec!["fringe", "--n", "1", "--scheme", "td", "--k", "2"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("error[config]:"), "args {args:?}, stderr: {err}");
    }
}

#[test]
fn oversized_state_exits_with_code_3() {
    let out = run(&["fringe", "--n", "401"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error[size-cap]:"), "stderr: {err}");
}

#[test]
fn json_output_is_self_describing() {
    let text = stdout(&["fringe", "--n", "1", "--grid", "5", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["config"]["command"], "fringe");
    assert_eq!(doc["config"]["state"]["n"], 1);
    assert_eq!(doc["config"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 5);
    assert_eq!(
        doc["columns"].as_array().unwrap().len(),
        doc["rows"][0].as_array().unwrap().len()
    );
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fringe.csv");
    let text = stdout(&["fringe", "--n", "1", "--grid", "5", "--output", path.to_str().unwrap()]);
    assert!(text.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    parse_csv(&written);
}

#[test]
fn visibility_sweep_lists_requested_thresholds() {
    let text = stdout(&[
        "visibility", "--n", "4", "--eta", "0.5", "--scheme", "td", "--thresholds", "0,1,2",
        "--grid", "12",
    ]);
    let (columns, rows) = parse_csv(&text);
    let threshold = column(&columns, "threshold");
    let visibility = column(&columns, "visibility");
    assert_eq!(rows.iter().map(|r| r[threshold] as u32).collect::<Vec<_>>(), vec![0, 1, 2]);
    assert!(rows.iter().all(|r| (0.0..=1.0 + 1e-12).contains(&r[visibility])));
}
