use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gbspam"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn gbspam")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "gbspam {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Fails with exit code 1 and a single `error:` line on stderr.
fn fails(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(1), "gbspam {args:?} should fail");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "), "{err}");
    err
}

/// 240 rows, 4 features, imbalanced 2:1, label driven by the first two features.
fn synthetic_csv(dir: &Path) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut text = String::new();
    for i in 0..240 {
        let spam = i % 3 == 0;
        let shift = if spam { 1.0 } else { 0.0 };
        let row: Vec<String> = (0..4)
            .map(|f| {
                let v: f64 = rng.gen_range(0.0..1.0) + if f < 2 { shift } else { 0.0 };
                format!("{v:.4}")
            })
            .collect();
        text.push_str(&format!("{},{}\n", row.join(","), u8::from(spam)));
    }
    let path = dir.join("synthetic.csv");
    fs::write(&path, text).unwrap();
    path
}

fn spambase() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/spambase.csv")
        .display()
        .to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_on_spambase_records_the_split() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    ok(&["train", "--data", &spambase(), "--out", s(&out)]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["split"]["test"]["spam"], 544);
    assert_eq!(manifest["split"]["test"]["ham"], 836);
    assert_eq!(manifest["split"]["train"]["spam"], 1268);
    assert_eq!(manifest["split"]["train"]["ham"], 1949);
    assert_eq!(manifest["hyperparams"]["max_depth"], 24);
    assert!(out.join("model.json").exists());
    let log = fs::read_to_string(out.join("training_log.csv")).unwrap();
    assert!(log.starts_with("round,train_error,train_loss,valid_error\n"));

    let eval = tmp.path().join("eval");
    let text = ok(&[
        "evaluate",
        "--model",
        s(&out.join("model.json")),
        "--manifest",
        s(&out.join("manifest.json")),
        "--split",
        "train",
        "--out",
        s(&eval),
    ]);
    assert!(text.contains("Sensitivity/Recall"));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(eval.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(doc["rows"], 3217);
    assert!(doc["metrics"]["accuracy"].as_f64().unwrap() >= 0.995);
}

#[test]
fn seed_changes_the_manifest() {
    let tmp = TempDir::new().unwrap();
    let data = synthetic_csv(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["train", "--data", s(&data), "--seed", "1", "--out", s(&a)]);
    ok(&["train", "--data", s(&data), "--seed", "2", "--out", s(&b)]);
    assert_ne!(
        fs::read(a.join("manifest.json")).unwrap(),
        fs::read(b.join("manifest.json")).unwrap()
    );
}

#[test]
fn identical_flags_give_identical_files() {
    let tmp = TempDir::new().unwrap();
    let data = synthetic_csv(tmp.path());
    let mut docs = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        ok(&["train", "--data", s(&data), "--colsample", "0.5", "--subsample", "0.8", "--out", s(&dir)]);
        ok(&[
            "evaluate",
            "--model",
            s(&dir.join("model.json")),
            "--manifest",
            s(&dir.join("manifest.json")),
            "--out",
            s(&dir.join("eval")),
        ]);
        docs.push(dir);
    }
    for file in ["model.json", "manifest.json", "training_log.csv", "eval/metrics.json", "eval/metrics_roc.csv"] {
        assert_eq!(fs::read(docs[0].join(file)).unwrap(), fs::read(docs[1].join(file)).unwrap(), "{file}");
    }
}

#[test]
fn usage_and_input_errors() {
    let out = run(&["train"]);
    assert_ne!(out.status.code(), Some(0));
    let err = fails(&["train", "--data", "/nonexistent/spam.csv"]);
    assert!(err.contains("/nonexistent/spam.csv"), "{err}");

    let tmp = TempDir::new().unwrap();
    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    fails(&["evaluate", "--model", "x.json", "--data", s(&empty)]);

    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "1,2,0\n3,oops,1\n").unwrap();
    let err = fails(&["train", "--data", s(&bad), "--out", s(&tmp.path().join("o"))]);
    assert!(err.contains("line 2"), "{err}");

    let data = synthetic_csv(tmp.path());
    fails(&["train", "--data", s(&data), "--eta", "0", "--out", s(&tmp.path().join("o"))]);
    let out = run(&["train", "--data", s(&data), "--resample", "adasyn"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn evaluate_rejects_feature_mismatch() {
    let tmp = TempDir::new().unwrap();
    let data = synthetic_csv(tmp.path());
    let dir = tmp.path().join("m");
    ok(&["train", "--data", s(&data), "--out", s(&dir)]);
    let narrow = tmp.path().join("narrow.csv");
    fs::write(&narrow, "0.1,0.2,0\n0.5,0.9,1\n").unwrap();
    let err = fails(&["evaluate", "--model", s(&dir.join("model.json")), "--data", s(&narrow), "--out", s(&tmp.path().join("e"))]);
    assert!(err.contains("features"), "{err}");
    let err = fails(&["evaluate", "--model", s(&dir.join("model.json")), "--data", s(&data), "--split", "test"]);
    assert!(err.contains("--manifest"), "{err}");
}

#[test]
fn grid_search_default_singleton_and_bad_key() {
    let tmp = TempDir::new().unwrap();
    let data = synthetic_csv(tmp.path());

    let out = tmp.path().join("default");
    ok(&["grid-search", "--data", s(&data), "--rounds", "20", "--out", s(&out)]);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 16);
    let best = fs::read_to_string(out.join("best_params.toml")).unwrap();
    assert!(best.contains("eta"));
    assert!(out.join("model.json").exists());

    let single = tmp.path().join("single.toml");
    fs::write(&single, "max_depth = [3]\neta = [0.3]\n").unwrap();
    let out = tmp.path().join("single");
    ok(&["grid-search", "--data", s(&data), "--grid", s(&single), "--validation", "kfold", "--folds", "3", "--out", s(&out)]);
    assert_eq!(fs::read_to_string(out.join("trace.csv")).unwrap().lines().count(), 2);

    // winner can be fed back as a params file
    let again = tmp.path().join("again");
    ok(&["train", "--data", s(&data), "--params", s(&out.join("best_params.toml")), "--out", s(&again)]);
    let manifest = fs::read_to_string(again.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"max_depth\": 3"), "{manifest}");

    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "eta = [0.1]\nlearning_rate = [0.2]\n").unwrap();
    let err = fails(&["grid-search", "--data", s(&data), "--grid", s(&bad)]);
    assert!(err.contains("learning_rate"), "{err}");
}

#[test]
fn reproduce_bundle() {
    let tmp = TempDir::new().unwrap();
    let data = synthetic_csv(tmp.path());
    let out = tmp.path().join("rep");
    let stdout = ok(&["reproduce", "--data", s(&data), "--seeds", "1,2", "--rounds", "30", "--out", s(&out)]);
    assert!(stdout.contains("SVM"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seeds"].as_array().unwrap().len(), 2);
    let rows = summary["resampling"]["rows"].as_array().unwrap();
    let methods: Vec<&str> = rows.iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["none", "over", "under", "smote", "tomek", "smote-tomek"]);
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("reported, not recomputed"));
    assert!(report.contains("rows: predicted, columns: actual"));
    for f in ["model.json", "manifest.json", "test_metrics.json", "test_metrics_roc.csv", "test_metrics_pr.csv"] {
        assert!(out.join("seed-2").join(f).exists(), "{f}");
    }

    // replaying the manifest reproduces the stored test metrics
    let seed_dir = out.join("seed-1");
    let eval = tmp.path().join("replay");
    ok(&[
        "evaluate",
        "--model",
        s(&seed_dir.join("model.json")),
        "--manifest",
        s(&seed_dir.join("manifest.json")),
        "--out",
        s(&eval),
    ]);
    let stored: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(seed_dir.join("test_metrics.json")).unwrap()).unwrap();
    let replayed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(eval.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(stored, replayed);
}

#[test]
fn resample_writes_balanced_csv() {
    let tmp = TempDir::new().unwrap();
    let data = synthetic_csv(tmp.path());
    let out = tmp.path().join("nested/smote.csv");
    let stdout = ok(&["resample", "--data", s(&data), "--resample", "smote", "--k-neighbors", "3", "--out", s(&out)]);
    assert!(stdout.contains("spam 80 -> 160"), "{stdout}");
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 320);
    let spam = text.lines().filter(|l| l.ends_with(",1")).count();
    assert_eq!(spam, 160);
}

#[test]
fn threads_flag_is_accepted() {
    let tmp = TempDir::new().unwrap();
    let data = synthetic_csv(tmp.path());
    ok(&["--threads", "2", "train", "--data", s(&data), "--out", s(&tmp.path().join("t"))]);
}
