//! End-to-end runs of the binary against the shipped fixtures.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn workgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_workgraph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

#[test]
fn validate_clean_fixture_exits_zero() {
    let out = workgraph(&["validate", fixture("diamond.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("0 violations"));
}

#[test]
fn validate_broken_snapshot_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(
        &path,
        r#"{"schema": "workgraph-snapshot/1", "version": "t", "root": "a",
            "nodes": [
              {"id": "a", "title": "A", "kind": "generic"},
              {"id": "c", "title": "C", "kind": "generic"}
            ],
            "edges": []}"#,
    )
    .unwrap();
    let out = workgraph(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("orphan: C"));
}

#[test]
fn stats_reports_counts() {
    let out = workgraph(&["stats", fixture("work.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("multiple inheritance:  1"));
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = workgraph(&["validate", "--bogus", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
    let help = workgraph(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    for sub in ["validate", "stats", "search", "classify", "iaa", "tally", "market", "sunburst", "decompose"] {
        let out = workgraph(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub} --help");
    }
}

#[test]
fn missing_file_is_a_data_error() {
    let out = workgraph(&["stats", "/nonexistent/nope.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn classify_writes_results_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("cls.csv");
    let out = workgraph(&[
        "classify",
        fixture("work.json").to_str().unwrap(),
        fixture("apps_small.csv").to_str().unwrap(),
        "--strategy",
        "spfo",
        "--model",
        &format!("stub:{}", fixture("replies.tsv").display()),
        "--parallel",
        "2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.contains("&facts,SPFO,,analyze market,Analyze Market,analyze-market,false,leaf"));

    let manifest_path = dir.path().join("cls.csv.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["snapshot_version"], "2025-07-fixture");
    assert_eq!(manifest["config"]["strategy"], "SPFO");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 3);

    // Determinism: rerun and compare artifacts byte for byte.
    let rerun_path = dir.path().join("cls2.csv");
    let rerun = workgraph(&[
        "classify",
        fixture("work.json").to_str().unwrap(),
        fixture("apps_small.csv").to_str().unwrap(),
        "--strategy",
        "spfo",
        "--model",
        &format!("stub:{}", fixture("replies.tsv").display()),
        "--parallel",
        "8",
        "--out",
        rerun_path.to_str().unwrap(),
    ]);
    assert_eq!(rerun.status.code(), Some(0));
    assert_eq!(std::fs::read(&out_path).unwrap(), std::fs::read(&rerun_path).unwrap());
}

#[test]
fn classify_records_failures_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("replies.tsv");
    std::fs::write(
        &script,
        "&facts\t{\"main_activity\":\"a b\",\"most_appropriate_node\":\"Analyze Market\"}\n\
         04-x\t!timeout\n\
         0gpt\t{\"main_activity\":\"c d\",\"most_appropriate_node\":\"Classify Content\"}\n",
    )
    .unwrap();
    let out_path = dir.path().join("cls.csv");
    let out = workgraph(&[
        "classify",
        fixture("work.json").to_str().unwrap(),
        fixture("apps_small.csv").to_str().unwrap(),
        "--model",
        &format!("stub:{}", script.display()),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(table.lines().count(), 3, "two successes plus header");
    let errors = std::fs::read_to_string(dir.path().join("cls.csv.errors.csv")).unwrap();
    assert!(errors.contains("04-x"));
    assert!(errors.contains("timed out"));
}

#[test]
fn tally_then_sunburst_produces_deterministic_svg() {
    let dir = tempfile::tempdir().unwrap();
    let tally_path = dir.path().join("tally.csv");
    let out = workgraph(&[
        "tally",
        fixture("work.json").to_str().unwrap(),
        fixture("assignments_small.csv").to_str().unwrap(),
        "--out",
        tally_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&tally_path).unwrap();
    assert!(table.contains("act,Act,0,3,100"));

    let render = |name: &str| {
        let svg = dir.path().join(name);
        let out = workgraph(&[
            "sunburst",
            fixture("work.json").to_str().unwrap(),
            tally_path.to_str().unwrap(),
            "--depth",
            "5",
            "--scale-max",
            "0.4",
            "--svg",
            svg.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(svg).unwrap()
    };
    assert_eq!(render("one.svg"), render("two.svg"));
}

#[test]
fn value_mode_uses_the_weight_column() {
    let dir = tempfile::tempdir().unwrap();
    let assignments = dir.path().join("values.csv");
    std::fs::write(
        &assignments,
        "item,node,weight\n&facts,Analyze Market,1500.50\n04-x,Converse,300\n",
    )
    .unwrap();
    let out_path = dir.path().join("tally.csv");
    let out = workgraph(&[
        "tally",
        fixture("work.json").to_str().unwrap(),
        assignments.to_str().unwrap(),
        "--mode",
        "value",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&out_path).unwrap();
    assert!(table.contains("act,Act,0,1800.5,100"));
    assert!(table.contains("analyze-market,Analyze Market,1500.5,1500.5,"));
}

#[test]
fn tally_by_year_writes_cumulative_slices() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("tally.csv");
    let out = workgraph(&[
        "tally",
        fixture("work.json").to_str().unwrap(),
        fixture("assignments_small.csv").to_str().unwrap(),
        "--by-year",
        "--cumulative",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let y2023 = std::fs::read_to_string(dir.path().join("tally.csv.2023.csv")).unwrap();
    let y2024 = std::fs::read_to_string(dir.path().join("tally.csv.2024.csv")).unwrap();
    assert!(y2023.contains("act,Act,0,2,100"));
    assert!(y2024.contains("act,Act,0,3,100"));
}

#[test]
fn market_robots_prints_the_medical_table() {
    let out = workgraph(&[
        "market",
        "robots",
        fixture("segments.csv").to_str().unwrap(),
        fixture("robots_medical.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("segment Medical"));
    // Relative prices as published: 1.3228 / 16.4021 / 1.0000.
    assert!(text.contains("Perform surgery,6612,600000.00,2500000.00,1550000.00,16.4021"));
    assert!(text.contains("Rehabilitation and non-invasive therapy,5759,69000.00,120000.00,94500.00,1.0000"));
    assert!(text.contains("held unallocated"));
}

#[test]
fn market_combined_reports_the_global_split() {
    let out = workgraph(&[
        "market",
        "combined",
        fixture("work.json").to_str().unwrap(),
        fixture("apps_small.csv").to_str().unwrap(),
        fixture("assignments_small.csv").to_str().unwrap(),
        fixture("segments.csv").to_str().unwrap(),
        fixture("robots_medical.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("software 75% / robotics 25%"));
    assert!(text.contains("Perform Surgery"));
}

#[test]
fn iaa_outputs_both_metrics_and_seeded_ci_is_stable() {
    let run = || {
        let out = workgraph(&[
            "iaa",
            fixture("work.json").to_str().unwrap(),
            fixture("ann_alice.csv").to_str().unwrap(),
            fixture("ann_bob.csv").to_str().unwrap(),
            "--metric",
            "wup",
            "--bootstrap",
            "200",
            "--seed",
            "9",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        stdout(&out)
    };
    let first = run();
    assert!(first.contains("mean Wu-Palmer similarity"));
    assert!(first.contains("95% bootstrap CI"));
    assert_eq!(first, run());

    let kappa = workgraph(&[
        "iaa",
        fixture("work.json").to_str().unwrap(),
        fixture("ann_alice.csv").to_str().unwrap(),
        fixture("ann_bob.csv").to_str().unwrap(),
        "--metric",
        "kappa",
    ]);
    assert_eq!(kappa.status.code(), Some(0));
    assert!(stdout(&kappa).contains("weighted Cohen's kappa"));
}

#[test]
fn decompose_handles_text_and_files() {
    let out = workgraph(&["decompose", "Acquire, distribute and store supplies"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "acquire\tsupplies\ndistribute\tsupplies\nstore\tsupplies\n");

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tasks.txt");
    std::fs::write(&file, "Weld metal\nPlan and develop instructional methods\n").unwrap();
    let out = workgraph(&["decompose", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("weld\tmetal"));
    assert!(text.contains("plan\tinstructional methods"));
}

#[test]
fn manifests_differ_only_in_timestamp_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| -> serde_json::Value {
        let out_path = dir.path().join(name);
        let out = workgraph(&[
            "tally",
            fixture("work.json").to_str().unwrap(),
            fixture("assignments_small.csv").to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let path = dir.path().join(format!("{name}.manifest.json"));
        serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
    };
    let mut a = run("a.csv");
    let mut b = run("b.csv");
    // The out path and timestamp legitimately differ.
    for v in [&mut a, &mut b] {
        v["timestamp"] = serde_json::Value::Null;
        let cmd = v["command"].as_array_mut().unwrap();
        let n = cmd.len();
        cmd[n - 1] = serde_json::Value::Null;
    }
    assert_eq!(a, b);
}

#[test]
fn empty_query_is_a_data_error() {
    let out = workgraph(&[
        "search",
        fixture("work.json").to_str().unwrap(),
        "--query",
        "  ",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
