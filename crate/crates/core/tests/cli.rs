use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pseudoset(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudoset"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn construct_derive_stats_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "spec.json",
        r#"{"kind": "quadratic_residues", "params": {"p": 11}}"#,
    );

    let set: Value = serde_json::from_str(&stdout(&pseudoset(
        &["construct", "--config", "spec.json"],
        d,
    )))
    .unwrap();
    assert_eq!(
        set,
        serde_json::json!({"q": 11, "elements": [1, 3, 4, 5, 9]})
    );
    let csv = stdout(&pseudoset(
        &["construct", "--config", "spec.json", "--format", "csv"],
        d,
    ));
    assert_eq!(csv, "element\n1\n3\n4\n5\n9\n");

    stdout(&pseudoset(
        &[
            "derive",
            "--config",
            "spec.json",
            "--kind",
            "gap-mod",
            "--param",
            "2",
            "--out",
            "seq.json",
        ],
        d,
    ));
    let seq: Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("seq.json")).unwrap()).unwrap();
    assert_eq!(seq["symbols"], serde_json::json!([2, 1, 1, 2]));
    assert_eq!(seq["params"]["M"], 2);
    let text = stdout(&pseudoset(
        &[
            "derive",
            "--config",
            "spec.json",
            "--kind",
            "characteristic",
            "--format",
            "text",
        ],
        d,
    ));
    assert_eq!(text, "0 1 0 1 1 1 0 0 0 1 0\n");

    let stats = stdout(&pseudoset(
        &[
            "stats", "--config", "seq.json", "--length", "2", "--format", "csv",
        ],
        d,
    ));
    assert_eq!(stats, "pattern,count\n1 1,1\n1 2,1\n2 1,1\n2 2,0\n");
    let stats: Value =
        serde_json::from_str(&stdout(&pseudoset(&["stats", "--config", "seq.json"], d))).unwrap();
    assert_eq!(
        stats["symbol_counts"],
        serde_json::json!([{"symbol": 1, "count": 2}, {"symbol": 2, "count": 2}])
    );
}

#[test]
fn corr_outputs_and_budget_guard() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "set.json", r#"{"q": 4, "elements": [0]}"#);
    let r: Value = serde_json::from_str(&stdout(&pseudoset(
        &["corr", "--config", "set.json", "--k", "1"],
        d,
    )))
    .unwrap();
    assert_eq!(
        r,
        serde_json::json!({"k": 1, "value": {"num": 3, "den": 4}, "window": 1, "lags": [0], "mode": "exact", "tuples": 4})
    );
    let csv = stdout(&pseudoset(
        &[
            "corr", "--config", "set.json", "--k", "1", "--format", "csv",
        ],
        d,
    ));
    assert_eq!(
        csv,
        "k,num,den,window,lags,mode,tuples\n1,3,4,1,0,exact,4\n"
    );

    write(
        d,
        "big.json",
        r#"{"kind": "quadratic_residues", "params": {"p": 1009}}"#,
    );
    let out = pseudoset(
        &[
            "corr", "--config", "big.json", "--k", "3", "--budget", "1000",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds the budget"));
    let sampled: Value = serde_json::from_str(&stdout(&pseudoset(
        &[
            "corr",
            "--config",
            "big.json",
            "--k",
            "3",
            "--samples",
            "50",
            "--seed",
            "3",
        ],
        d,
    )))
    .unwrap();
    assert_eq!(sampled["mode"], "sampled");
    assert_eq!(sampled["tuples"], 50);
}

#[test]
fn verify_exit_status_follows_asserted_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "pass.json",
        r#"{"construction": {"kind": "fermat_quotient_power_residues", "params": {"p": 7, "d": 1}},
            "analyses": [{"type": "cardinality"}]}"#,
    );
    let report: Value =
        serde_json::from_str(&stdout(&pseudoset(&["verify", "--config", "pass.json"], d))).unwrap();
    assert_eq!(report["status"], "PASS");
    assert_eq!(report["rows"][0]["empirical"], "36");
    assert_eq!(
        report["config"]["construction"]["kind"],
        "fermat_quotient_power_residues"
    );

    write(
        d,
        "fail.json",
        r#"{"construction": {"kind": "quadratic_residues", "params": {"p": 101}},
            "derivations": [{"kind": "gap_threshold", "params": {"m": 2}}],
            "analyses": [{"type": "balance", "budget": {"constant": 0, "shape": "absolute"}}],
            "output": {"path": "report.csv", "format": "csv"}}"#,
    );
    let out = pseudoset(&["verify", "--config", "fail.json"], d);
    assert_eq!(out.status.code(), Some(1));
    let csv = std::fs::read_to_string(d.join("report.csv")).unwrap();
    assert!(csv.starts_with("analysis,sequence,item,empirical,predicted,predicted_decimal,deviation,budget,budget_formula,status\n"));
    assert!(csv.contains(",FAIL\n"));

    // report-only analyses never fail the run
    write(
        d,
        "report_only.json",
        r#"{"construction": {"kind": "index_range", "params": {"p": 101, "r": 0, "s": 30}},
            "analyses": [{"type": "cardinality"}, {"type": "gamma", "s": 2}]}"#,
    );
    let report: Value = serde_json::from_str(&stdout(&pseudoset(
        &["verify", "--config", "report_only.json"],
        d,
    )))
    .unwrap();
    assert_eq!(report["rows"][0]["status"], "REPORT_ONLY");
    assert_eq!(report["status"], "PASS");

    write(
        d,
        "bad.json",
        r#"{"construction": {"kind": "quadratic_residues", "params": {"p": "x"}}}"#,
    );
    let out = pseudoset(&["verify", "--config", "bad.json"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("construction"));
}

#[test]
fn sweep_writes_aggregate_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "base.json",
        r#"{"construction": {"kind": "quadratic_residues", "params": {"p": 101}},
            "derivations": [{"kind": "gap_threshold", "params": {"m": 2}}],
            "analyses": [{"type": "balance", "budget": {"constant": 4, "shape": "sqrt_log"}}]}"#,
    );
    write(
        d,
        "grid.json",
        r#"{"axes": {"/construction/params/p": {"primes": [100, 500]}}}"#,
    );
    let csv = stdout(&pseudoset(
        &[
            "sweep",
            "--config",
            "base.json",
            "--grid",
            "grid.json",
            "--workers",
            "2",
        ],
        d,
    ));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("/construction/params/p,analysis,sequence,item,empirical,predicted,deviation,budget,status,seconds")
    );
    let rows: Vec<&str> = lines.collect();
    // 70 primes in [100, 500], two symbols each
    assert_eq!(rows.len(), 140);
    assert!(rows.iter().all(|r| r.contains(",PASS,")));
    assert!(rows[0].starts_with("101,") && rows[139].starts_with("499,"));

    write(d, "empty.json", r#"{"axes": {}}"#);
    let out = pseudoset(
        &["sweep", "--config", "base.json", "--grid", "empty.json"],
        d,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}
