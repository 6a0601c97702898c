use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_txanon");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn txanon(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn anonymize_k(dir: &TempDir, algorithm: &str, k: &str, extra: &[&str]) -> (Output, String) {
    let report = dir.path().join(format!("{algorithm}.json"));
    let food = data("food.tsv");
    let table = data("worked.tsv");
    let mut args = vec![
        "anonymize",
        "--algorithm",
        algorithm,
        "--k",
        k,
        "--taxonomy",
        path(&food),
        "--input",
        path(&table),
        "--report",
        path(&report),
    ];
    args.extend_from_slice(extra);
    let out = txanon(&args);
    let report = std::fs::read_to_string(&report).unwrap_or_default();
    (out, report)
}

fn anonymize(dir: &TempDir, algorithm: &str, extra: &[&str]) -> (Output, String) {
    anonymize_k(dir, algorithm, "2", extra)
}

#[test]
fn clump_worked_example() {
    let dir = TempDir::new().unwrap();
    let (out, report) = anonymize(&dir, "clump", &["--validate"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "0\tbeef fruit food\n0\tbeef fruit food\n1\tchicken food\n1\tchicken food\n1\tchicken food\n"
    );
    assert!(report.contains("\"rational\": \"46/7\""), "{report}");
    assert!(report.contains("\"algorithm\": \"clump1\""));
    assert!(stderr(&out).contains("2 groups checked, 2 against the brute-force LCG"));
}

#[test]
fn partition_worked_example() {
    let dir = TempDir::new().unwrap();
    let (out, report) = anonymize(&dir, "partition", &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "0\tfruit meat\n0\tfruit meat\n1\tfood\n1\tfood\n1\tfood\n");
    assert!(report.contains("\"rational\": \"69/7\""), "{report}");
    assert!(report.contains("\"r\": null"));
}

#[test]
fn dedup_output_collapses_repeats() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("in.tsv");
    std::fs::write(&input, "a\torange apple\nb\tbanana apple milk\nc\tbanana orange\n").unwrap();
    let food = data("food.tsv");
    let run = |extra: &[&str]| {
        let mut args = vec!["anonymize", "--k", "3", "--taxonomy", path(&food), "--input", path(&input)];
        args.extend_from_slice(extra);
        stdout(&txanon(&args))
    };
    assert_eq!(run(&[]), "0\tfruit fruit\n".repeat(3));
    assert_eq!(run(&["--dedup-output"]), "0\tfruit\n".repeat(3));
}

#[test]
fn audit_map_only_on_request() {
    let dir = TempDir::new().unwrap();
    let audit = dir.path().join("audit.tsv");
    let (plain, _) = anonymize(&dir, "clump", &[]);
    for tid in ["t1", "t2", "t3", "t4", "t5"] {
        assert!(!stdout(&plain).contains(tid));
    }
    assert!(!audit.exists());

    let (with, _) = anonymize(&dir, "clump", &["--audit-map", path(&audit)]);
    assert_eq!(stdout(&with), stdout(&plain));
    assert_eq!(std::fs::read_to_string(&audit).unwrap(), "t1\t0\nt2\t0\nt3\t1\nt4\t1\nt5\t1\n");
}

#[test]
fn report_subcommand_recomputes_from_release() {
    let dir = TempDir::new().unwrap();
    let public = dir.path().join("public.tsv");
    let audit = dir.path().join("audit.tsv");
    let (out, _) = anonymize(&dir, "partition", &["--output", path(&public), "--audit-map", path(&audit)]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let food = data("food.tsv");
    let table = data("worked.tsv");
    let report = txanon(&[
        "report",
        "--taxonomy",
        path(&food),
        "--input",
        path(&table),
        "--anonymized",
        path(&public),
        "--audit-map",
        path(&audit),
        "--algorithm",
        "partition",
        "--k",
        "2",
    ]);
    assert!(report.status.success(), "{}", stderr(&report));
    assert!(stdout(&report).contains("\"rational\": \"69/7\""));
    assert!(stdout(&report).contains("\"rational\": \"11/7\""));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let (too_big, _) = anonymize_k(&dir, "clump", "100", &[]);
    assert_eq!(too_big.status.code(), Some(2));
    assert!(stderr(&too_big).contains("exceeds database size"));

    let (zero_threads, _) = anonymize(&dir, "clump", &["--threads", "0"]);
    assert_eq!(zero_threads.status.code(), Some(2));

    let bad_tax = dir.path().join("cycle.tsv");
    std::fs::write(&bad_tax, "a\tb\nb\ta\n").unwrap();
    let table = data("worked.tsv");
    let out = txanon(&["anonymize", "--taxonomy", path(&bad_tax), "--input", path(&table)]);
    assert_eq!(out.status.code(), Some(3));

    let missing = dir.path().join("missing.tsv");
    let food = data("food.tsv");
    let out = txanon(&["anonymize", "--taxonomy", path(&food), "--input", path(&missing)]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn ingest_query_log() {
    let dir = TempDir::new().unwrap();
    let output = dir.path().join("tx.tsv");
    let stats = dir.path().join("stats.json");
    let food = data("food.tsv");
    let log = data("querylog.tsv");
    let out = txanon(&[
        "ingest",
        "--taxonomy",
        path(&food),
        "--input",
        path(&log),
        "--output",
        path(&output),
        "--stats",
        path(&stats),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        std::fs::read_to_string(&output).unwrap(),
        "u1\torange chicken beef\nu2\tbanana beef cheese\n"
    );
    let stats: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(stats["rows"], 3);
    assert_eq!(stats["users"], 2);
    assert_eq!(stats["transactions"], 2);

    let header_only = dir.path().join("header.tsv");
    std::fs::write(&header_only, "AnonID\tQuery\tQueryTime\tItemRank\tClickURL\n").unwrap();
    let out = txanon(&["ingest", "--taxonomy", path(&food), "--input", path(&header_only), "--output", path(&output)]);
    assert_eq!(out.status.code(), Some(3));

    let unknown = dir.path().join("unknown.tsv");
    std::fs::write(&unknown, "u1\tzebra giraffe\n").unwrap();
    let out = txanon(&["ingest", "--taxonomy", path(&food), "--input", path(&unknown), "--output", path(&output)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("2 tokens dropped"), "{}", stderr(&out));
}

fn mask_runtime(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect()
}

#[test]
fn bench_sweep_is_deterministic() {
    let run = || {
        let out = txanon(&["bench", "--sizes", "200,400", "--ks", "5", "--rs", "5,10", "--algorithms", "clump,partition", "--leaves", "300", "--seed", "4"]);
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    };
    let a = run();
    let rows = mask_runtime(&a);
    assert_eq!(rows[0], "algorithm,k,r,transactions,distortion,avg_len,avg_level");
    // per size: two clump rows (r = 5, 10) and one partition row
    assert_eq!(rows.len(), 1 + 2 * 3);
    assert!(rows[1].starts_with("clump1,5,5,200,"));
    assert!(rows[3].starts_with("partition,5,,200,"));
    assert_eq!(rows, mask_runtime(&run()));

    let empty = txanon(&["bench", "--sizes", ""]);
    assert_eq!(empty.status.code(), Some(2));
    let too_many = txanon(&["bench", "--sizes", "10", "--leaves", "1", "--branching-min", "1"]);
    assert_eq!(too_many.status.code(), Some(2));
}
