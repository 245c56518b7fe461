use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(ws: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synseek"))
        .arg("--workspace")
        .arg(ws)
        .args(args)
        .output()
        .unwrap()
}

fn ok(ws: &Path, args: &[&str]) -> String {
    let out = run(ws, args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(ws: &Path, args: &[&str]) -> i32 {
    run(ws, args).status.code().unwrap()
}

/// Workspace with the fixture site crawled, the sample synonyms loaded and the index built.
fn site_workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let site = fixtures().join("site");
    let out = ok(dir.path(), &["crawl", "--seed", site.to_str().unwrap(), "--politeness-delay-ms", "0"]);
    assert!(out.contains("crawled 10 pages"), "{out}");
    let table = fixtures().join("sample_synonyms.tsv");
    ok(dir.path(), &["synonyms", "import", table.to_str().unwrap()]);
    ok(dir.path(), &["index"]);
    dir
}

fn eval_workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    for e in fs::read_dir(fixtures().join("eval/corpus")).unwrap() {
        let e = e.unwrap();
        fs::copy(e.path(), corpus.join(e.file_name())).unwrap();
    }
    fs::copy(fixtures().join("eval/synonyms.tsv"), dir.path().join("synonyms.tsv")).unwrap();
    ok(dir.path(), &["index"]);
    dir
}

#[test]
fn crawl_then_index_reports_stats() {
    let ws = site_workspace();
    for f in ["crawl.manifest", "links.tsv", "index.dat", "ranks.tsv", "synonyms.tsv"] {
        assert!(ws.path().join(f).is_file(), "{f} missing");
    }
    assert_eq!(fs::read_dir(ws.path().join("corpus")).unwrap().count(), 10);
    let out = ok(ws.path(), &["index", "--stats"]);
    assert!(out.contains("indexed 10 documents"), "{out}");
    assert!(out.contains("doc_count"), "{out}");
}

#[test]
fn reindexing_is_byte_identical() {
    let ws = site_workspace();
    let index = fs::read(ws.path().join("index.dat")).unwrap();
    let ranks = fs::read(ws.path().join("ranks.tsv")).unwrap();
    ok(ws.path(), &["index"]);
    assert_eq!(fs::read(ws.path().join("index.dat")).unwrap(), index);
    assert_eq!(fs::read(ws.path().join("ranks.tsv")).unwrap(), ranks);
}

#[test]
fn synonym_commands() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    ok(ws, &["synonyms", "add", "car", "auto"]);
    ok(ws, &["synonyms", "add", "Car", "vehicle"]);
    assert!(ok(ws, &["synonyms", "add", "car", "auto"]).contains("already present"));
    assert_eq!(ok(ws, &["synonyms", "list", "car"]), "auto\nvehicle\n");
    assert_eq!(ok(ws, &["synonyms", "list", "zephyr"]), "");
    assert_eq!(code(ws, &["synonyms", "add", "car", "car"]), 1);

    let table = fixtures().join("sample_synonyms.tsv");
    let out = ok(ws, &["synonyms", "import", table.to_str().unwrap()]);
    assert!(out.contains("table holds 3 keywords"), "{out}");
    let listing = ok(ws, &["synonyms", "list"]);
    assert!(listing.contains("car\tauto,vehicle"), "{listing}");
    let stats = ok(ws, &["synonyms", "stats"]);
    assert!(stats.contains("entry_count\t3"), "{stats}");
    assert!(stats.contains("bucket_count\t16"), "{stats}");
    assert_eq!(code(ws, &["synonyms", "import", "/no/such/file.tsv"]), 2);
}

#[test]
fn query_with_and_without_expansion() {
    let ws = site_workspace();
    let expanded = ok(ws.path(), &["query", "car", "--format", "jsonl"]);
    let plain = ok(ws.path(), &["query", "car", "--no-expand", "--format", "jsonl"]);
    assert!(expanded.lines().count() > plain.lines().count(), "{expanded}\n--\n{plain}");
    assert!(expanded.contains("\"synonym\":true"), "{expanded}");
    assert!(!plain.contains("\"synonym\":true"), "{plain}");

    let explain = ok(ws.path(), &["query", "car", "--explain"]);
    assert!(explain.contains("auto"), "{explain}");
    let far = ok(ws.path(), &["query", "car", "--page", "99"]);
    assert!(far.contains("no results"), "{far}");
    assert_eq!(code(ws.path(), &["query", ""]), 1);
    assert_eq!(code(ws.path(), &["query", "car", "--page", "0"]), 1);
}

#[test]
fn query_output_is_stable_across_processes() {
    let ws = site_workspace();
    let first = ok(ws.path(), &["query", "data mining car", "--format", "jsonl"]);
    for _ in 0..3 {
        assert_eq!(ok(ws.path(), &["query", "data mining car", "--format", "jsonl"]), first);
    }
}

#[test]
fn eval_writes_reports() {
    let ws = eval_workspace();
    let judgments = fixtures().join("eval/judgments.tsv");
    let out = ok(ws.path(), &["eval", "--judgments", judgments.to_str().unwrap(), "--k", "5,10"]);
    assert!(out.contains("data mining"), "{out}");
    let jsonl = fs::read_to_string(ws.path().join("report.jsonl")).unwrap();
    assert!(jsonl.lines().count() >= 6, "{jsonl}");
    assert!(ws.path().join("report.txt").is_file());
    assert_eq!(code(ws.path(), &["eval", "--judgments", "/no/such/judgments.tsv"]), 2);
    assert_eq!(code(ws.path(), &["eval", "--judgments", judgments.to_str().unwrap(), "--k", "0"]), 1);
}

#[test]
fn bench_runs_on_generated_and_empty_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["bench", "--generate", "2000", "--lookups", "500"]);
    assert!(out.contains("2000 keywords"), "{out}");
    let empty = ok(dir.path(), &["bench"]);
    assert!(empty.contains("table is empty"), "{empty}");
    assert_eq!(code(dir.path(), &["bench", "--lookups", "0"]), 1);
}

#[test]
fn missing_inputs_exit_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(dir.path(), &["query", "car"]), 2);
    assert_eq!(code(dir.path(), &["index"]), 2);
    fs::create_dir(dir.path().join("corpus")).unwrap();
    assert_eq!(code(dir.path(), &["index"]), 2);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(dir.path(), &["crawl"]), 1);
    assert_eq!(code(dir.path(), &["frobnicate"]), 1);
    assert_eq!(code(dir.path(), &["crawl", "--seed", "x", "--max-pages", "0"]), 1);
    assert_eq!(code(dir.path(), &["--help"]), 0);
}
