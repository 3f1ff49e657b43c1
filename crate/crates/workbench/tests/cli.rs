use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn evmatrix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evmatrix")).args(args).env_remove("EVMATRIX_DATA").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = evmatrix(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let seed_a = ok(&["generate", "--docs", "120", "--relevant", "20", "--seed", "3", "--out", p(&a)]);
    let seed_b = ok(&["generate", "--docs", "120", "--relevant", "20", "--seed", "3", "--out", p(&b)]);
    assert_eq!(seed_a, seed_b);
    for f in ["corpus.jsonl", "truth.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    let empty = dir.path().join("empty");
    assert_eq!(ok(&["generate", "--docs", "0", "--relevant", "0", "--out", p(&empty)]), "");
    assert_eq!(std::fs::read_to_string(empty.join("corpus.jsonl")).unwrap(), "");
    assert_eq!(std::fs::read_to_string(empty.join("truth.json")).unwrap().trim(), "{}");
    assert!(!evmatrix(&["generate", "--docs", "5", "--relevant", "6", "--out", p(&empty)]).status.success());
}

#[test]
fn ingest_build_and_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    let seed = ok(&["generate", "--docs", "100", "--relevant", "20", "--seed", "4", "--out", p(&gen)]);
    let seed = seed.trim();
    let data = dir.path().join("data");
    let corpus = gen.join("corpus.jsonl");

    let report: Value = serde_json::from_str(&ok(&["ingest", p(&corpus), "--data", p(&data), "--id", "synth"])).unwrap();
    assert_eq!(report["accepted"], 100);
    assert_eq!(report["corpus_id"], "synth");

    // from a file: nothing is stored
    let file_export: Value = serde_json::from_str(&ok(&["build-matrix", "--corpus", p(&corpus), "--seed", seed])).unwrap();
    assert!(!data.join("matrices").exists() || std::fs::read_dir(data.join("matrices")).unwrap().next().is_none());

    // from a data dir: a session is created
    let out = evmatrix(&["build-matrix", "--corpus", p(&data), "--seed", seed]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("created matrix m1"));
    let stored: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stored["rows"], file_export["rows"]);
    assert_eq!(stored["cols"], file_export["cols"]);
    assert_eq!(stored["matrix_id"], "m1");

    let exported: Value = serde_json::from_str(&ok(&["export", "--matrix", "m1", "--data", p(&data)])).unwrap();
    assert_eq!(exported, stored);
    let relevant: Value =
        serde_json::from_str(&ok(&["export", "--matrix", "m1", "--data", p(&data), "--only-relevant"])).unwrap();
    assert_eq!(relevant["rows"], serde_json::json!([seed]));
    let csv_path = dir.path().join("m1.csv");
    ok(&["export", "--matrix", "m1", "--data", p(&data), "--format", "csv", "--out", p(&csv_path)]);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), stored["rows"].as_array().unwrap().len() + 1);

    assert!(!evmatrix(&["export", "--matrix", "m7", "--data", p(&data)]).status.success());
    let bad_seed = evmatrix(&["build-matrix", "--corpus", p(&corpus), "--seed", "nope"]);
    assert!(!bad_seed.status.success());
}

#[test]
fn simulate_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    let seed = ok(&["generate", "--docs", "120", "--relevant", "25", "--seed", "2", "--out", p(&gen)]);
    let out = dir.path().join("report.json");
    ok(&[
        "simulate",
        "--corpus",
        p(&gen.join("corpus.jsonl")),
        "--seed",
        seed.trim(),
        "--truth",
        p(&gen.join("truth.json")),
        "--k",
        "5",
        "--rounds",
        "50",
        "--out",
        p(&out),
    ]);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let curve = r["recall_curve"].as_array().unwrap();
    assert_eq!(curve.len() as u64, r["rounds"].as_u64().unwrap());
    assert!(curve.windows(2).all(|w| w[0][0].as_f64() < w[1][0].as_f64() && w[0][1].as_f64() <= w[1][1].as_f64()));
    assert_eq!(r["final_recall"], curve.last().unwrap()[1]);

    let missing = dir.path().join("truth.json");
    std::fs::write(&missing, "{}").unwrap();
    let e = evmatrix(&[
        "simulate",
        "--corpus",
        p(&gen.join("corpus.jsonl")),
        "--seed",
        seed.trim(),
        "--truth",
        p(&missing),
    ]);
    assert!(!e.status.success());
}

#[test]
fn serve_rejects_invalid_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = evmatrix(&["serve", "--data", p(dir.path()), "--alpha", "4"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid parameters"));
}
