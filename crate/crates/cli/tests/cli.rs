use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use grover_optics::compiler::unitary_equiv;
use grover_optics::format::parse_circuit;
use serde_json::Value;

fn gropt(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gropt"))
        .args(args)
        .current_dir(dir)
        .env_remove("GROPT_OUT_DIR")
        .output()
        .expect("gropt runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = gropt(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str], dir: &Path) -> i32 {
    gropt(args, dir).status.code().unwrap()
}

/// Data rows of a CSV table, header comment and column names dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# gropt "));
    lines.next().unwrap();
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn simulate_reports_the_marked_detector() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["simulate", "--circuit", "grover2-compiled", "--oracle", "ideal:01"], dir.path());
    assert!(out.lines().any(|l| l == "2,V,1.0"), "{out}");
    assert!(out.starts_with("# gropt detector-distribution schema v1\ndetector,pol,probability\n"));

    let out = ok(&["simulate", "--circuit", "grover3", "--oracle", "ideal:101"], dir.path());
    let r = rows(&out);
    assert_eq!(r.len(), 8);
    assert_eq!(r[5][2], "0.78125");
    let total: f64 = r.iter().map(|x| x[2].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn compile_writes_circuit_and_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["build", "--circuit", "grover2-uncompiled", "--out", "grover2-uncompiled.circ"], dir.path());
    let report = ok(&["compile", "--in", "grover2-uncompiled.circ", "--out", "compiled.circ"], dir.path());
    let j: Value = serde_json::from_str(&report).unwrap();
    assert_eq!(j["schema_version"], 1);
    assert_eq!(j["equivalence_verified"], true);
    assert!(j["output_count"].as_u64().unwrap() <= 12);
    assert!(j["rule_applications"].as_array().is_some_and(|a| !a.is_empty()));

    let compiled = parse_circuit(&fs::read_to_string(dir.path().join("compiled.circ")).unwrap()).unwrap();
    let input = parse_circuit(&fs::read_to_string(dir.path().join("grover2-uncompiled.circ")).unwrap()).unwrap();
    assert_eq!(compiled.name(), "grover2-compiled");
    assert!(unitary_equiv(&input, &compiled, 1e-9).unwrap().0);

    let out = ok(&["simulate", "--circuit", "compiled.circ"], dir.path());
    assert!(out.lines().any(|l| l == "1,H,1.0"), "{out}");
}

#[test]
fn builtins_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("grover2-uncompiled", "ideal:01"),
        ("grover2-compiled", "eo:3.9kV,2.2V"),
        ("grover2", "ideal:10"),
        ("grover3", "ideal:011"),
        ("grover3-compiled", "ideal:110"),
    ];
    for (name, oracle) in cases {
        let file = format!("{name}.circ");
        ok(&["build", "--circuit", name, "--oracle", oracle, "--out", &file], dir.path());
        let text = fs::read_to_string(dir.path().join(&file)).unwrap();
        let parsed = parse_circuit(&text).unwrap();
        let rebuilt = ok(&["build", "--circuit", name, "--oracle", oracle], dir.path());
        assert_eq!(text, rebuilt);
        let again = parse_circuit(&grover_optics::format::write_circuit(&parsed)).unwrap();
        let (equal, dev) = unitary_equiv(&parsed, &again, 1e-12).unwrap();
        assert!(equal && dev < 1e-12, "{name}");
        let from_file = ok(&["simulate", "--circuit", &file], dir.path());
        let from_builtin = ok(&["simulate", "--circuit", name, "--oracle", oracle], dir.path());
        assert_eq!(from_file, from_builtin, "{name}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&["--help"], d), 0);
    assert_eq!(code(&["frobnicate"], d), 1);
    assert_eq!(code(&["simulate", "--bogus"], d), 1);
    assert_eq!(code(&["simulate", "--circuit", "grover2-compiled", "--oracle", "ideal:012"], d), 1);
    assert_eq!(code(&["simulate", "--circuit", "grover2-compiled", "--sigma", "0.1"], d), 1);
    assert_eq!(code(&["simulate", "--circuit", "missing.circ"], d), 1);
    assert_eq!(code(&["noise-sweep", "--samples", "10"], d), 1);
    assert_eq!(code(&["oracle-check", "--format", "csv"], d), 1);
    fs::write(d.join("bad.circ"), "CIRCUIT paths=a,b\nHWP theta=x path=a\n").unwrap();
    let out = gropt(&["simulate", "--circuit", "bad.circ"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    // an unattainable tolerance makes the probability-sum self-check fail
    assert_eq!(code(&["simulate", "--circuit", "grover3", "--tol", "1e-300"], d), 2);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["noise-sweep", "--seed", "9", "--samples", "50", "--sigmas", "0,0.1,0.2"],
        &["fig3", "--sigma", "0.12", "--seed", "3", "--samples", "50"],
        &["simulate", "--circuit", "grover2-compiled", "--oracle", "eo:0kV,5.6V", "--sigma", "0.2", "--seed", "1", "--samples", "50"],
    ];
    for args in runs {
        let a = ok(args, dir.path());
        let b = ok(args, dir.path());
        assert_eq!(a, b, "{args:?}");
    }
    let a = ok(&["fig3", "--sigma", "0.12", "--seed", "3", "--samples", "50"], dir.path());
    let b = ok(&["fig3", "--sigma", "0.12", "--seed", "4", "--samples", "50"], dir.path());
    assert_ne!(a, b);
}

#[test]
fn readout_table_rows_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["fig3", "--sigma", "0.1", "--seed", "5", "--samples", "100"], dir.path());
    let r = rows(&out);
    assert_eq!(r.len(), 8);
    // setting column is quoted and contains a comma
    for row in &r {
        let probs: f64 = row[row.len() - 5..row.len() - 1].iter().map(|x| x.parse::<f64>().unwrap()).sum();
        assert!((probs - 1.0).abs() < 1e-9, "{row:?}");
    }
    for (i, row) in r[..4].iter().enumerate() {
        let p: Vec<&str> = row[row.len() - 5..row.len() - 1].iter().map(String::as_str).collect();
        for (j, x) in p.iter().enumerate() {
            assert_eq!(*x, if i == j { "1.0" } else { "0.0" });
        }
    }
}

#[test]
fn analysis_tables() {
    let dir = tempfile::tempdir().unwrap();
    let ifm = rows(&ok(&["ifm"], dir.path()));
    let port2: f64 = ifm.iter().filter(|r| r[0] == "01" && r[1] == "port2").map(|r| r[3].parse::<f64>().unwrap()).sum();
    assert!((port2 - 0.5).abs() < 1e-9);

    let g = rows(&ok(&["grover-abstract", "--sizes", "8"], dir.path()));
    let rules: Vec<&str> = g.iter().map(|r| r[3].as_str()).collect();
    assert_eq!(rules, ["floor", "round", "ceil"]);
    assert_eq!(g[1][2], "0.78125");

    let d = rows(&ok(&["decohere-sweep", "--ratios", "0,1"], dir.path()));
    assert_eq!(d[0], ["0.0", "1.0", "1.0"]);

    let j: Value = serde_json::from_str(&ok(&["oracle-check"], dir.path())).unwrap();
    assert_eq!(j["bijection"], true);
    assert_eq!(j["orthogonal"], true);
    assert_eq!(j["settings"][0]["net_unitary"][3][2], serde_json::json!([-1.0, 0.0]));

    let j: Value = serde_json::from_str(&ok(&["ifm", "--format", "json"], dir.path())).unwrap();
    assert_eq!(j["schema_version"], 1);
    assert_eq!(j["rows"].as_array().unwrap().len(), 24);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.toml"), "circuit = \"grover2-compiled\"\noracle = \"ideal:10\"\nformat = \"json\"\n").unwrap();
    let j: Value = serde_json::from_str(&ok(&["simulate", "--config", "run.toml"], d)).unwrap();
    assert_eq!(j["rows"][2]["probability"], 1.0);
    let out = ok(&["simulate", "--config", "run.toml", "--oracle", "ideal:11", "--format", "csv"], d);
    assert!(out.lines().any(|l| l == "4,V,1.0"));
    fs::write(d.join("bad.toml"), "colour = \"blue\"\n").unwrap();
    assert_eq!(code(&["simulate", "--config", "bad.toml"], d), 1);
}

#[test]
fn out_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let target = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_gropt"))
        .args(["ifm", "--out", "ifm.csv"])
        .current_dir(dir.path())
        .env("GROPT_OUT_DIR", target.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(target.path().join("ifm.csv").is_file());
    assert!(!dir.path().join("ifm.csv").exists());
}
