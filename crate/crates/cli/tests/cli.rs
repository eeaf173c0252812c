use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_district-match"));
    c.env_remove("DISTRICT_MATCH_THREADS");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn outcome_pairs(report: &Value) -> Vec<Vec<(String, Option<String>)>> {
    report["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| {
            o.as_array()
                .unwrap()
                .iter()
                .map(|a| {
                    (
                        a["student"].as_str().unwrap().to_string(),
                        a["school"].as_str().map(str::to_string),
                    )
                })
                .collect()
        })
        .collect()
}

fn pairs(list: &[(&str, Option<&str>)]) -> Vec<(String, Option<String>)> {
    list.iter()
        .map(|(a, b)| (a.to_string(), b.map(str::to_string)))
        .collect()
}

#[test]
fn solve_second_example_under_da() {
    let input = fixture("sec41.json");
    let o = run(&[
        "solve",
        "--input",
        input.to_str().unwrap(),
        "--mechanism",
        "L=DA",
    ]);
    let r = stdout_json(&o);
    assert_eq!(
        outcome_pairs(&r),
        vec![pairs(&[
            ("i1", Some("l1")),
            ("i2", Some("l2")),
            ("i3", Some("r1"))
        ])]
    );
    assert_eq!(r["mechanisms"]["L"], "DA");
}

#[test]
fn solve_second_example_under_boston() {
    let input = fixture("sec41.json");
    let o = run(&[
        "solve",
        "--input",
        input.to_str().unwrap(),
        "--mechanism",
        "L=BM",
        "R=DA",
    ]);
    let r = stdout_json(&o);
    assert_eq!(
        outcome_pairs(&r),
        vec![pairs(&[
            ("i1", None),
            ("i2", Some("l1")),
            ("i3", Some("l2"))
        ])]
    );
}

#[test]
fn malformed_and_invalid_files_fail_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("sec41.json")).unwrap();

    let invalid = dir.path().join("invalid.json");
    fs::write(
        &invalid,
        text.replace(
            "\"preferences\": [\"l2\", \"r1\"]",
            "\"preferences\": [\"l2\", \"nowhere\"]",
        ),
    )
    .unwrap();
    let o = run(&["solve", "--input", invalid.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nowhere"));

    let broken = dir.path().join("broken.json");
    fs::write(&broken, &text[..text.len() / 2]).unwrap();
    let o = run(&["validate", "--input", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed"));

    let o = run(&[
        "solve",
        "--input",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn budget_overrun_has_its_own_code() {
    let input = fixture("cycle3.json");
    let o = run(&[
        "solve",
        "--input",
        input.to_str().unwrap(),
        "--budget",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn sample_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(&[
            "sample",
            "--n",
            "30",
            "--k",
            "4",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let big = dir.path().join("big.json");
    let o = run(&[
        "sample",
        "--n",
        "100",
        "--k",
        "4",
        "--seed",
        "1",
        "--out",
        big.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = run(&["validate", "--input", big.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let p: Value = serde_json::from_slice(&fs::read(&big).unwrap()).unwrap();
    assert_eq!(p["students"].as_array().unwrap().len(), 100);
}

#[test]
fn sample_rejects_long_lists() {
    let o = run(&["sample", "--n", "2", "--k", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiment_rejects_zero_trials() {
    let o = run(&[
        "experiment",
        "--theorem",
        "L1",
        "--n",
        "20",
        "--k",
        "2",
        "--trials",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

fn csv_rows(bytes: &[u8]) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(bytes)
        .records()
        .map(Result::unwrap)
        .collect()
}

fn experiment(args: &[&str], threads: Option<&str>) -> Vec<u8> {
    let mut c = bin();
    c.arg("experiment").args(args);
    if let Some(t) = threads {
        c.env("DISTRICT_MATCH_THREADS", t);
    }
    let o = c.output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o.stdout
}

#[test]
fn fixed_tuple_experiment_reports_calibration() {
    let out = experiment(
        &[
            "--theorem",
            "T2",
            "--n",
            "12",
            "--k",
            "2",
            "--trials",
            "2000",
            "--seed",
            "3",
            "--fixed-tuple",
        ],
        None,
    );
    let header = csv::Reader::from_reader(out.as_slice())
        .headers()
        .unwrap()
        .clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2002);
    let pref = rows
        .iter()
        .find(|r| &r[col("row_type")] == "aggregate_preference")
        .unwrap();
    assert_eq!(&pref[col("within_3se")], "true");
    assert_eq!(&pref[col("master_seed")], "3");
}

#[test]
fn experiments_replay_under_any_thread_count() {
    let args = [
        "--theorem",
        "L1",
        "--n",
        "8,12",
        "--k",
        "2",
        "--trials",
        "40",
        "--seed",
        "11",
        "--confirm",
    ];
    let one = experiment(&args, Some("1"));
    let four = experiment(&args, Some("4"));
    assert_eq!(one, four);
    assert_eq!(csv_rows(&one).len(), 82);

    let o = bin()
        .args(["sample", "--n", "3", "--k", "1"])
        .env("DISTRICT_MATCH_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn detect_and_compare_on_fixtures() {
    let input = fixture("sec41.json");
    let o = run(&[
        "detect",
        "--input",
        input.to_str().unwrap(),
        "--theorem",
        "T2",
        "--confirm",
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].iter().any(|f| f == "true"));

    let o = run(&[
        "compare",
        "--input",
        input.to_str().unwrap(),
        "--student",
        "i2",
        "--change",
        "mechanism:L=DA",
    ]);
    let r = stdout_json(&o);
    assert_eq!(r["answer"], "yes");
}

#[test]
fn weights_need_eight_values() {
    let w = "0.1,0.1,0.1,0.1,0.1,0.1,0.2,0.2";
    let o = run(&["sample", "--n", "5", "--k", "2", "--weights", w]);
    assert!(o.status.success());
    let o = run(&["sample", "--n", "5", "--k", "2", "--weights", "0.5,0.5"]);
    assert_eq!(o.status.code(), Some(2));
}
