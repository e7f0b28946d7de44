use std::process::{Command, Output};

use serde_json::Value;

fn menon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_menon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn verify_menon_range() {
    let out = menon(&["verify", "--n", "1..30", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = json_lines(&out);
    assert_eq!(recs.len(), 30);
    assert!(recs.iter().all(|r| r["matched"] == true));
}

#[test]
fn verify_record_schema() {
    let out = menon(&["verify", "--n", "2..2", "--r", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "{\"n\":\"2\",\"r\":2,\"lhs\":\"6\",\"rhs\":\"6\",\"group_size\":\"2\",\
         \"matched\":true,\"elapsed_s\":0.0,\"shards\":1}\n"
    );
}

#[test]
fn verify_timing_is_opt_in() {
    let out = menon(&["verify", "--n", "30..30", "--r", "2", "--timing"]);
    let rec = &json_lines(&out)[0];
    assert!(rec["elapsed_s"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_csv() {
    let out = menon(&["verify", "--n", "1..3", "--r", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "n,r,lhs,rhs,group_size,matched,elapsed_s,shards\n\
         1,2,1,1,1,true,0.0,1\n\
         2,2,6,6,2,true,0.0,1\n\
         3,2,36,36,12,true,0.0,1\n"
    );
}

#[test]
fn verify_mismatch_exits_one() {
    let out = menon(&["verify", "--n", "2..3", "--r", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let recs = json_lines(&out);
    assert_eq!(recs[0]["matched"], true);
    assert_eq!(recs[1]["matched"], false);
    assert_eq!(recs[1]["lhs"], "936");
    assert_eq!(recs[1]["rhs"], "864");
    assert!(String::from_utf8_lossy(&out.stderr).contains("n=3 r=3"));
}

#[test]
fn verify_budget_refusal() {
    let out = menon(&["verify", "--n", "100..100", "--r", "4", "--budget", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    let recs = json_lines(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["refused"], true);
    assert_eq!(recs[0]["group_size"], "2560000000000000000");
    assert!(recs[0].get("lhs").is_none());
}

#[test]
fn refusal_mixed_with_results() {
    // |G(2,3)| = 8 costs 72; |G(3,3)| = 216 costs 1944
    let out = menon(&[
        "verify", "--n", "2..3", "--r", "3", "--budget", "100", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        stdout(&out),
        "n,r,lhs,rhs,group_size,matched,elapsed_s,shards\n\
         2,3,32,32,8,true,0.0,1\n\
         3,3,,,216,,,\n"
    );
}

#[test]
fn overflow_exits_three() {
    let out = menon(&["verify", "--n", "1000000..1000000", "--r", "12"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_lines(&out)[0]["overflow"], true);
    let out = menon(&["tau", "--n", "4611686018427387904", "--r", "100000"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout(&out), "");
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        vec!["verify"],
        vec!["verify", "--n", "5..2"],
        vec!["verify", "--n", "1..2", "--format", "xml"],
        vec!["verify", "--n", "1..2", "--shards", "0"],
        vec!["frobnicate"],
        vec![],
    ] {
        assert_eq!(menon(&args).status.code(), Some(64), "{args:?}");
    }
    assert_eq!(menon(&["--help"]).status.code(), Some(0));
}

#[test]
fn burnside_examples() {
    for (n, expect) in [("2..2", "3"), ("12..12", "18")] {
        let out = menon(&["burnside", "--n", n, "--r", "2"]);
        assert_eq!(out.status.code(), Some(0));
        let rec = &json_lines(&out)[0];
        for key in ["burnside_count", "unionfind_count", "chain_count", "tau_r"] {
            assert_eq!(rec[key], expect, "{key}");
        }
        assert_eq!(rec["agree"], true);
    }
    let out = menon(&["burnside", "--n", "1..1", "--r", "3"]);
    assert_eq!(json_lines(&out)[0]["burnside_count"], "1");
    // rank three is fine here: the count uses exact fixed-point sizes
    let out = menon(&["burnside", "--n", "1..6", "--r", "3", "--shards", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_lines(&out).iter().all(|r| r["agree"] == true));
}

#[test]
fn tau_examples() {
    for (n, r, expect) in [("12", "2", "18\n"), ("1", "7", "1\n"), ("8", "3", "20\n")] {
        let out = menon(&["tau", "--n", n, "--r", r]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(stdout(&out), expect);
    }
    let out = menon(&["tau", "--n", "1..4", "--r", "2", "--format", "json"]);
    let recs = json_lines(&out);
    let values: Vec<&str> = recs.iter().map(|r| r["tau_r"].as_str().unwrap()).collect();
    assert_eq!(values, ["1", "3", "3", "6"]);
}

#[test]
fn chains_counts_and_listing() {
    let out = menon(&["chains", "--n", "12", "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rec = &json_lines(&out)[0];
    assert_eq!(rec["chain_count"], "18");
    assert_eq!(rec["matched"], true);
    let out = menon(&["chains", "--n", "2", "--r", "2", "--list"]);
    let chains: Vec<Value> = json_lines(&out)
        .into_iter()
        .map(|r| r["chain"].clone())
        .collect();
    assert_eq!(
        chains,
        vec![
            serde_json::json!(["1", "1"]),
            serde_json::json!(["1", "2"]),
            serde_json::json!(["2", "1"])
        ]
    );
    let out = menon(&["chains", "--n", "720720", "--r", "40", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_rows_and_determinism() {
    let out = menon(&["bench", "--n", "2..10", "--r", "2"]);
    assert_eq!(json_lines(&out).len(), 9);
    let out = menon(&["bench", "--n", "4..4", "--r", "3"]);
    assert_eq!(json_lines(&out)[0]["group_size"], "512");
    let one = menon(&["bench", "--n", "6..6", "--r", "3", "--shards", "1"]);
    let eight = menon(&["bench", "--n", "6..6", "--r", "3", "--shards", "8"]);
    let (one, eight) = (&json_lines(&one)[0], &json_lines(&eight)[0]);
    assert_eq!(one["lhs"], eight["lhs"]);
    assert_eq!(eight["shards"], 8);
    let out = menon(&["bench", "--n", "2..3", "--r", "2", "--format", "csv"]);
    let text = stdout(&out);
    assert!(text.starts_with("n,r,group_size,lhs,elapsed_s,elements_per_s,shards\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn writes_to_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = menon(&[
        "verify",
        "--n",
        "1..5",
        "--r",
        "1",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 6);
}
