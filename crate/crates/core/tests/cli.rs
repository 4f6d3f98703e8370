use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sea(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sea"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SEA_OUTPUT_ROOT")
        .output()
        .expect("failed to start sea")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "sea failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = match fs::read_dir(dir) {
        Ok(rd) => rd
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect(),
        Err(_) => Vec::new(),
    };
    names.sort();
    names
}

const SMALL: &[&str] = &[
    "--horizon",
    "3000",
    "--checkpoints",
    "100,1000,3000",
    "--seeds",
    "0,1",
];

#[test]
fn identical_runs_write_identical_traces() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let mut args = vec!["run", "--method", "sea", "--output-dir", out];
        args.extend_from_slice(SMALL);
        ok(&sea(&args, tmp.path()));
    }
    for name in files_in(&tmp.path().join("a")) {
        if name.starts_with("manifest") {
            continue;
        }
        let a = fs::read(tmp.path().join("a").join(&name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(&name)).unwrap();
        assert!(a == b, "{name} differs between runs");
    }
}

#[test]
fn manifest_rerun_reproduces_aggregate() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["run", "--method", "eps-greedy", "--output-dir", "first"];
    args.extend_from_slice(SMALL);
    ok(&sea(&args, tmp.path()));
    let manifest = tmp.path().join("first/manifest_eps-greedy.json");
    ok(&sea(
        &[
            "run",
            "--config",
            manifest.to_str().unwrap(),
            "--output-dir",
            "second",
        ],
        tmp.path(),
    ));
    let a = fs::read_to_string(tmp.path().join("first/aggregate_eps-greedy.csv")).unwrap();
    let b = fs::read_to_string(tmp.path().join("second/aggregate_eps-greedy.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn baseline_only_writes_one_trace_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&sea(
        &[
            "run",
            "--method",
            "baseline-only",
            "--horizon",
            "500",
            "--seeds",
            "0,1,2",
            "--output-dir",
            "out",
        ],
        tmp.path(),
    ));
    let names = files_in(&tmp.path().join("out"));
    let traces = names
        .iter()
        .filter(|n| n.starts_with("trace_baseline-only_seed"))
        .count();
    let aggregates = names.iter().filter(|n| n.starts_with("aggregate_")).count();
    assert_eq!((traces, aggregates), (3, 1), "{names:?}");
    let agg = fs::read_to_string(tmp.path().join("out/aggregate_baseline-only.csv")).unwrap();
    assert!(agg.starts_with("method,checkpoint,metric,mean,std,n\n"));
    assert!(agg.lines().skip(1).all(|l| l.ends_with(",3")));
}

#[test]
fn unknown_method_fails_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sea(
        &["run", "--method", "sarsa", "--output-dir", "out"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("sarsa") && err.contains("baseline-only"),
        "{err}"
    );
    assert!(files_in(&tmp.path().join("out")).is_empty());
}

#[test]
fn method_task_mismatch_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sea(
        &["run", "--task", "classification", "--method", "dbgd"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_reports_json_and_rejects_unknown_suites() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sea(&["verify", "bounds"], tmp.path());
    ok(&out);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report[0]["suite"], "bounds");
    assert_eq!(report[0]["passed"], true);
    assert!(!report[0]["checks"].as_array().unwrap().is_empty());

    let out = sea(&["verify", "nonsense"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("interleaving"));
}

#[test]
fn synthetic_files_feed_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    for task in ["classification", "ranking"] {
        ok(&sea(
            &[
                "make-synthetic",
                "--task",
                task,
                "--seed",
                "2",
                "--out",
                task,
            ],
            tmp.path(),
        ));
        let train = format!("{task}/train.svm");
        let test = format!("{task}/test.svm");
        let dir = format!("{task}-runs");
        ok(&sea(
            &[
                "run",
                "--task",
                task,
                "--method",
                "bsea",
                "--horizon",
                "400",
                "--seeds",
                "0",
                "--train",
                &train,
                "--test",
                &test,
                "--output-dir",
                &dir,
            ],
            tmp.path(),
        ));
        let trace = fs::read_to_string(tmp.path().join(&dir).join("trace_bsea_seed0.csv")).unwrap();
        assert_eq!(trace.lines().count(), 401);
    }
}
