use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cursed-sig"));
    c.env_remove("RUST_LOG");
    c
}

fn games() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/games")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    assert!(text.starts_with("# "), "missing comment line: {text}");
    text.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn solve_kmn_finds_separating_at_low_chi() {
    let game = games().join("kmn.json");
    let out = stdout(&run(&["solve", "--game", game.to_str().unwrap(), "--chi", "0.3"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    let kinds: Vec<&str> = v["equilibria"].as_array().unwrap().iter().map(|e| e["kind"].as_str().unwrap()).collect();
    assert!(kinds.contains(&"separating"), "{kinds:?}");
    let sep = v["equilibria"].as_array().unwrap().iter().find(|e| e["kind"] == "separating").unwrap();
    assert_eq!(sep["receiver"]["1"], 44.0);
    assert_eq!(sep["refinement_verdicts"]["cursed_intuitive"], true);
}

#[test]
fn solve_beer_quiche_reports_pooling_and_semi_separating() {
    let game = games().join("beer_quiche.json");
    let v: Value = serde_json::from_str(&stdout(&run(&["solve", "--game", game.to_str().unwrap(), "--chi", "0"]))).unwrap();
    let eqs = v["equilibria"].as_array().unwrap();
    assert!(eqs.iter().any(|e| e["kind"] == "pooling" && e["sender"]["weak"]["Quiche"] == 1.0));
    let semi = eqs.iter().find(|e| e["kind"] == "hybrid").expect("semi-separating found");
    assert_eq!(semi["sender"]["weak"]["Beer"], 0.375);
    assert_eq!(semi["receiver"]["Beer"]["Fight"], 0.5);
    let survivors: Vec<_> = eqs.iter().filter(|e| e["refinement_verdicts"]["cursed_intuitive"] == true).collect();
    assert_eq!(survivors.len(), 1);
    assert_eq!(survivors[0]["kind"], "hybrid");
}

#[test]
fn solve_output_verifies_and_refines() {
    let dir = tempfile::tempdir().unwrap();
    let eqs = dir.path().join("eqs.json");
    let game = games().join("kmn.json");
    let game = game.to_str().unwrap();
    stdout(&run(&["solve", "--game", game, "--chi", "0.7", "--out", eqs.to_str().unwrap()]));
    let v: Value = serde_json::from_str(&stdout(&run(&["verify", "--game", game, "--assessment", eqs.to_str().unwrap()]))).unwrap();
    assert!(v["checked"].as_u64().unwrap() >= 3);
    assert_eq!(v["checked"], v["passed"]);
    let r: Value = serde_json::from_str(&stdout(&run(&["refine", "--game", game, "--equilibria", eqs.to_str().unwrap()]))).unwrap();
    assert_eq!(r["results"].as_array().unwrap().len() as u64, v["checked"].as_u64().unwrap());
}

#[test]
fn verify_flags_a_broken_assessment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"chi": 0.5, "sender": {"theta_H": {"1": 1}, "theta_L": {"0": 1}},
            "receiver": {"0": 10, "1": 50},
            "beliefs": {"0": {"theta_L": 1}, "1": {"theta_H": 1}}}"#,
    )
    .unwrap();
    let game = games().join("kmn.json");
    let v: Value = serde_json::from_str(&stdout(&run(&["verify", "--game", game.to_str().unwrap(), "--assessment", path.to_str().unwrap()]))).unwrap();
    assert_eq!(v["passed"], 0);
    assert_eq!(v["results"][0]["first_violation"], "on-path belief");
}

#[test]
fn refine_regimes() {
    let bq = games().join("beer_quiche.json");
    let v: Value = serde_json::from_str(&stdout(&run(&["refine", "--game", bq.to_str().unwrap(), "--chi", "0.6"]))).unwrap();
    let pool = v["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["equilibrium"]["kind"] == "pooling")
        .unwrap();
    assert_eq!(pool["cursed_intuitive"]["survives"], true);
    assert_eq!(pool["standard_intuitive"]["survives"], false);

    let kmn = games().join("kmn.json");
    for (chi, kind) in [("0.3", "separating"), ("0.9", "pooling")] {
        let v: Value = serde_json::from_str(&stdout(&run(&["refine", "--game", kmn.to_str().unwrap(), "--chi", chi]))).unwrap();
        let alive: Vec<&str> = v["results"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|r| r["cursed_intuitive"]["survives"] == true)
            .map(|r| r["equilibrium"]["kind"].as_str().unwrap())
            .collect();
        assert_eq!(alive, vec![kind], "chi = {chi}");
    }
}

#[test]
fn sweep_spence_regions() {
    let out = stdout(&run(&[
        "sweep", "--spence", "--cost", "linear", "--theta-h", "2", "--theta-l", "1", "--p", "0.5", "--chi", "0:1:0.01", "--what", "regions",
    ]));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 101);
    assert_eq!(rows[50][..5], ["0.5", "0.5", "1", "0", "0.25"].map(String::from));
    assert_eq!(rows[100][..5], ["1", "", "", "0", "0"].map(String::from));
}

#[test]
fn sweep_kmn_breakpoints_and_jobs() {
    let serial = stdout(&run(&["sweep", "--kmn", "--chi", "0:1:0.005", "--what", "regimes"]));
    let parallel = stdout(&run(&["sweep", "--kmn", "--chi", "0:1:0.005", "--what", "regimes", "--jobs", "4"]));
    assert_eq!(serial, parallel);
    let rows = csv_rows(&serial);
    let first = |col: usize| rows.iter().find(|r| r[col] == "true").map(|r| r[0].clone());
    assert_eq!(first(2).as_deref(), Some("0.55"));
    let last_sep = rows.iter().filter(|r| r[1] == "true").next_back().unwrap();
    assert_eq!(last_sep[0], "0.775");
}

#[test]
fn sweep_continuum_compression() {
    let rows = csv_rows(&stdout(&run(&["sweep", "--continuum", "--theta-min", "1", "--mean", "2", "--chi", "0:1:0.25"])));
    let slopes: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(slopes, ["1", "0.75", "0.5", "0.25", "0"]);
    assert!(rows.iter().all(|r| r[3] == "2"));
}

#[test]
fn continuum_schedule_and_spence_report() {
    let rows = csv_rows(&stdout(&run(&["continuum", "--theta-min", "1", "--mean", "2", "--chi", "0.5", "--points", "3"])));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], "0");
    assert_eq!(rows[2][3], "2.5");
    let v: Value = serde_json::from_str(&stdout(&run(&[
        "spence", "--theta-l", "1", "--theta-h", "2", "--p", "0.5", "--cost", "e/theta", "--chi", "0.5",
    ])))
    .unwrap();
    assert_eq!(v["riley"]["e_h"], 0.5);
    assert_eq!(v["surviving_candidates"].as_array().unwrap().len(), 1);
}

#[test]
fn kmn_stats_tables() {
    let rows = csv_rows(&stdout(&run(&["kmn-stats", "--format", "csv"])));
    assert_eq!(rows.len(), 32);
    let sig3_b2_low = rows.iter().find(|r| r[0] == "SIG3" && r[1] == "2" && r[2] == "low").unwrap();
    let p: f64 = sig3_b2_low[13].parse().unwrap();
    assert!((p - 0.162).abs() <= 0.001);
    let text = stdout(&run(&["kmn-stats", "--chi", "0.7"]));
    assert!(text.lines().next().unwrap().contains("p(χ=0.7)"));
    assert_eq!(text.lines().count(), 33);
}

#[test]
fn outputs_are_byte_identical() {
    let game = games().join("beer_quiche.json");
    let a = stdout(&run(&["sweep", "--game", game.to_str().unwrap(), "--chi", "0:1:0.1"]));
    let b = stdout(&run(&["sweep", "--game", game.to_str().unwrap(), "--chi", "0:1:0.1", "--jobs", "3"]));
    assert_eq!(a, b);
}

#[test]
fn input_errors_exit_2() {
    let cases: [&[&str]; 6] = [
        &["solve", "--game", "does-not-exist.json", "--chi", "0"],
        &["sweep", "--kmn", "--chi", "0:1:0"],
        &["sweep", "--kmn", "--chi", "0:1:0.1", "--no-such-flag"],
        &["sweep", "--spence", "--chi", "0.5"],
        &["spence", "--theta-l", "1", "--theta-h", "2", "--p", "0.5", "--cost", "e*x", "--chi", "0"],
        &["solve", "--game", "x.json", "--chi", "1.5"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = run(&["solve", "--game", "does-not-exist.json", "--chi", "0"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("does-not-exist.json"));
}

#[test]
fn bad_stats_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "treatment,block,worker_type,n,mean,sd\nSIG2,1,high,10,0.5,0.5\nSIG2,2,medium,10,0.5,0.5\n").unwrap();
    let out = run(&["kmn-stats", "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn resource_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.json");
    let types: Vec<String> = (0..8).map(|i| format!(r#"{{"id": "t{i}", "prior": 0.125, "productivity": {i}}}"#)).collect();
    let msgs: Vec<String> = (0..6).map(|m| format!("\"m{m}\"")).collect();
    std::fs::write(
        &path,
        format!(r#"{{"types": [{}], "messages": [{}], "receiver_mode": "wage_quadratic"}}"#, types.join(","), msgs.join(",")),
    )
    .unwrap();
    let out = run(&["solve", "--game", path.to_str().unwrap(), "--chi", "0"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn every_subcommand_has_examples_in_help() {
    for sub in ["solve", "verify", "refine", "sweep", "spence", "continuum", "kmn-stats"] {
        let out = stdout(&run(&[sub, "--help"]));
        assert!(out.contains("Examples:"), "{sub}");
    }
}
