use std::path::Path;
use std::process::Command;

use twrc::harness::{parse_sweep_csv, SweepReport};

fn twrc(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_twrc")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bounds_at_equal_powers() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let (code, out, _) = twrc(&[
        "bounds", "--p1-db", "11.76", "--p2-db", "11.76", "--p3-db", "11.76", "--csv", path_str(&csv),
    ]);
    assert_eq!(code, 0);
    let line = out.lines().find(|l| l.starts_with("upper_bound")).unwrap();
    let v: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-3);
    let t1: f64 = out.lines().find(|l| l.starts_with("t1")).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((t1 - 0.5).abs() < 1e-12);
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("p1,p2,p3,uplink_rate,downlink_rate,t1_opt,upper_bound,degenerate\n"));
}

#[test]
fn rates_prints_both_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let (code, out, _) =
        twrc(&["rates", "--p1-db", "-20", "--p2-db", "-20", "--p3-db", "0", "--json", path_str(&json)]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("SIC exchange rate") && out.contains("PNC exchange rate"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["rates"]["sic"]["regime"], "Intermediate");
}

#[test]
fn netfn_builtins() {
    let (code, out, _) = twrc(&["netfn", "--q", "2", "--builtin", "xor"]);
    assert_eq!(code, 0);
    assert!(out.contains("valid=true"));
    let (code, out, _) = twrc(&["netfn", "--q", "2", "--builtin", "int-sum"]);
    assert_eq!(code, 0);
    assert!(out.contains("valid=false"));
    let (code, _, err) = twrc(&["netfn", "--q", "2", "--builtin", "nand"]);
    assert_eq!(code, 1, "{err}");
    let (code, _, _) = twrc(&["netfn", "--q", "3", "--builtin", "xor"]);
    assert_eq!(code, 2);
}

#[test]
fn netfn_table_file() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("f.txt");
    std::fs::write(&table, "3 3\n0 1 2\n1 2 0\n2 0 1\n").unwrap();
    let (code, out, _) = twrc(&["netfn", "--table", path_str(&table)]);
    assert_eq!(code, 0);
    assert!(out.contains("valid=true"));
    std::fs::write(&table, "3 3\n0 1 2\n1 2 0\n").unwrap();
    let (code, _, err) = twrc(&["netfn", "--table", path_str(&table)]);
    assert_eq!(code, 2);
    assert!(err.contains("parse error"));
}

#[test]
fn ser_sum_reference_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let json = dir.path().join("s.json");
    let (code, _, _) = twrc(&[
        "ser", "--mode", "sum", "--q", "2", "--snr-db", "0", "--trials", "1000000", "--seed", "7",
        "--csv", path_str(&csv), "--json", path_str(&json),
    ]);
    assert_eq!(code, 0);
    let rows = parse_sweep_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].empirical - 0.23798).abs() <= 4.0 * rows[0].stderr);
    let report = SweepReport::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report.rows, rows);
    assert_eq!(report.config.seed, 7);
}

#[test]
fn csv_is_byte_identical_across_runs_and_thread_caps() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let p = dir.path().join(name);
        let st = Command::new(env!("CARGO_BIN_EXE_twrc"))
            .env("TWRC_MAX_THREADS", threads)
            .args(["chain", "--q", "2", "--code", "spc:3", "--snr-db", "-2,0,2", "--trials", "70000"])
            .args(["--seed", "4", "--csv", path_str(&p)])
            .status()
            .unwrap();
        assert!(st.success());
        std::fs::read(p).unwrap()
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "1"));
    assert_eq!(a, run("c.csv", "3"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(twrc(&["bounds", "--p1-db", "1"]).0, 1);
    assert_eq!(twrc(&["ser", "--mode", "sum", "--snr-db", "0", "--bogus"]).0, 1);
    assert_eq!(twrc(&["frobnicate"]).0, 1);
    assert_eq!(twrc(&["chain", "--code", "ldpc:3", "--snr-db", "0"]).0, 1);
    let (code, out, _) = twrc(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("bounds") && out.contains("netfn"));
}

#[test]
fn domain_errors_exit_two() {
    assert_eq!(twrc(&["ser", "--mode", "p2p", "--q", "1", "--snr-db", "0"]).0, 2);
    assert_eq!(twrc(&["ser", "--mode", "p2p", "--snr-db", "0", "--trials", "0"]).0, 2);
    assert_eq!(twrc(&["chain", "--q", "4", "--code", "spc:11", "--snr-db", "0"]).0, 2);
    let (code, _, err) = twrc(&["ser", "--mode", "p2p", "--snr-db", "0", "--trials", "10"]);
    assert_eq!(code, 0, "{err}");
    let st = Command::new(env!("CARGO_BIN_EXE_twrc"))
        .env("TWRC_MAX_THREADS", "zero")
        .args(["ser", "--mode", "p2p", "--snr-db", "0", "--trials", "10"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn negative_snr_grid_parses() {
    let (code, out, err) = twrc(&["ser", "--mode", "pnc", "--q", "4", "--snr-db", "-3,0", "--trials", "1000"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("-3.000"));
}
