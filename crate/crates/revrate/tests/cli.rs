mod common;

use std::fs;
use std::path::Path;

use common::{path, revrate, write_table5, TABLE5};
use revrate::commands::CrossvalOutput;

fn ok(out: &std::process::Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn synth(dir: &Path, name: &str, count: usize, seed: u64) -> std::path::PathBuf {
    let out = dir.join(name);
    ok(&revrate(&[
        "synth",
        "--count",
        &count.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        path(&out),
    ]));
    out.join("corpus.jsonl")
}

#[test]
fn synth_is_reproducible_and_covers_all_stars() {
    let dir = tempfile::tempdir().unwrap();
    let a = fs::read(synth(dir.path(), "a", 100, 7)).unwrap();
    let b = fs::read(synth(dir.path(), "b", 100, 7)).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 100);
    for star in 1..=5 {
        assert!(text.contains(&format!("\"rating\":{star}}}")), "star {star} missing");
    }
    assert_ne!(fs::read(synth(dir.path(), "c", 100, 8)).unwrap(), b);
}

#[test]
fn train_dcnn_writes_checkpoint_history_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "s", 20, 3);
    let out = dir.path().join("m");
    ok(&revrate(&[
        "train",
        "--model",
        "dcnn",
        "--corpus",
        path(&corpus),
        "--epochs",
        "2",
        "--out",
        path(&out),
    ]));
    assert!(fs::read(out.join("model.dcnn")).unwrap().starts_with(b"REVDCNN"));
    let history: serde_json::Value = serde_json::from_slice(&fs::read(out.join("history.json")).unwrap()).unwrap();
    assert_eq!(history["loss"].as_array().unwrap().len(), 2);
    let echo: serde_json::Value = serde_json::from_slice(&fs::read(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echo["dcnn"]["epochs"], 2);
    assert_eq!(echo["command"], "train");
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "s", 20, 3);
    let out = revrate(&[
        "train",
        "--model",
        "handcrafted+svm",
        "--corpus",
        path(&corpus),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("usage"));
    let out = revrate(&[
        "crossval",
        "--model",
        "handcrafted+j48",
        "--corpus",
        path(&corpus),
        "--folds",
        "1",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = revrate(&[
        "train",
        "--model",
        "wordvec+knn",
        "--corpus",
        path(&corpus),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(revrate(&["train", "--bogus"]).status.code(), Some(1));
    assert_eq!(revrate(&["train", "--out", path(dir.path())]).status.code(), Some(1));
    assert_eq!(revrate(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_rating_exits_2_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bad.jsonl");
    fs::write(
        &corpus,
        "{\"app\":\"a\",\"id\":\"r1\",\"text\":\"Fine\",\"rating\":4}\n{\"app\":\"a\",\"id\":\"r2\",\"text\":\"Odd\",\"rating\":7}\n",
    )
    .unwrap();
    let out = revrate(&[
        "train",
        "--model",
        "handcrafted+one-r",
        "--corpus",
        path(&corpus),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(err["error"], "data");
    assert!(err["message"].as_str().unwrap().contains("line 2"));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = revrate(&["synth", "--count", "5", "--out", path(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn predict_preserves_order_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "s", 60, 4);
    let model_dir = dir.path().join("m");
    ok(&revrate(&[
        "train",
        "--model",
        "tfidf+naive-bayes",
        "--corpus",
        path(&corpus),
        "--out",
        path(&model_dir),
    ]));
    let input = dir.path().join("in.csv");
    fs::write(
        &input,
        "app,id,text,rating\nx,z9,Keeps crashing after the update,\nx,a1,\"Love it, works great\",\nx,m5,It is okay I guess,\n",
    )
    .unwrap();
    let model = model_dir.join("model.json");
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&revrate(&[
            "predict",
            "--model",
            path(&model),
            "--input",
            path(&input),
            "--out",
            path(&out),
        ]));
        fs::read_to_string(out.join("predictions.jsonl")).unwrap()
    };
    let first = run("p1");
    assert_eq!(first, run("p2"));
    let ids: Vec<String> = first
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["id"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    assert_eq!(ids, ["z9", "a1", "m5"]);
    for l in first.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["scores"].as_array().unwrap().len(), 5);
        assert!((1..=5).contains(&v["predicted"].as_u64().unwrap()));
    }
}

#[test]
fn empty_text_is_rejected_in_strict_mode() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "s", 30, 4);
    let model_dir = dir.path().join("m");
    ok(&revrate(&[
        "train",
        "--model",
        "dcnn",
        "--corpus",
        path(&corpus),
        "--epochs",
        "1",
        "--out",
        path(&model_dir),
    ]));
    let input = dir.path().join("in.jsonl");
    fs::write(
        &input,
        "{\"app\":\"x\",\"id\":\"e\",\"text\":\"\"}\n{\"app\":\"x\",\"id\":\"f\",\"text\":\"Great app\"}\n",
    )
    .unwrap();
    let model = model_dir.join("model.dcnn");
    let args = [
        "predict",
        "--model",
        path(&model),
        "--input",
        path(&input),
        "--out",
        path(dir.path()),
    ];
    assert_eq!(revrate(&args).status.code(), Some(2));
    let mut lenient = args.to_vec();
    lenient.push("--strict=false");
    ok(&revrate(&lenient));
    let lines: Vec<String> = fs::read_to_string(dir.path().join("predictions.jsonl"))
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("\"predicted\":null"));
}

#[test]
fn mismatch_report_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "s", 40, 9);
    let text = fs::read_to_string(&corpus).unwrap();
    let same: String = text
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            format!("{{\"id\":{},\"predicted\":{}}}\n", v["id"], v["rating"])
        })
        .collect();
    let preds = dir.path().join("same.jsonl");
    fs::write(&preds, &same).unwrap();
    let out = dir.path().join("r");
    ok(&revrate(&[
        "mismatch-report",
        "--corpus",
        path(&corpus),
        "--predictions",
        path(&preds),
        "--out",
        path(&out),
    ]));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["mismatch_pct"], 0.0);
    assert!(report["apps"]
        .as_array()
        .unwrap()
        .iter()
        .all(|a| a["mismatch_pct"] == 0.0));
    for f in ["report.txt", "confusion.csv", "chart.csv", "config.json"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let missing: String = same.lines().skip(1).map(|l| format!("{l}\n")).collect();
    fs::write(&preds, missing).unwrap();
    let out = revrate(&[
        "mismatch-report",
        "--corpus",
        path(&corpus),
        "--predictions",
        path(&preds),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("syn-00001"));
}

#[test]
fn table5_replay_through_report_and_agreement() {
    let dir = tempfile::tempdir().unwrap();
    write_table5(dir.path());
    let corpus = dir.path().join("table5.jsonl");
    let out = dir.path().join("report");
    ok(&revrate(&[
        "mismatch-report",
        "--corpus",
        path(&corpus),
        "--predictions",
        path(&dir.path().join("table5-predictions.jsonl")),
        "--out",
        path(&out),
    ]));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["mismatches"], 1740);
    assert_eq!(format!("{:.2}", report["mismatch_pct"].as_f64().unwrap()), "20.23");

    let out = dir.path().join("agree");
    let run = revrate(&[
        "agreement",
        "--corpus",
        path(&corpus),
        "--annotations",
        path(&dir.path().join("table5-annotations.jsonl")),
        "--out",
        path(&out),
    ]);
    ok(&run);
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "kappa 1.0000");
    let csv = fs::read_to_string(out.join("matrix.csv")).unwrap();
    let rows: Vec<Vec<u64>> = csv
        .lines()
        .skip(1)
        .take(5)
        .map(|l| l.split(',').skip(1).take(5).map(|c| c.parse().unwrap()).collect())
        .collect();
    for (r, row) in rows.iter().enumerate() {
        assert_eq!(row.as_slice(), TABLE5[r]);
    }
    assert_eq!(csv.lines().last().unwrap(), "total,1778,757,1015,1399,3651,8600");
}

#[test]
fn ragged_annotations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "s", 5, 1);
    let ann = dir.path().join("ann.jsonl");
    fs::write(
        &ann,
        "{\"id\":\"syn-00001\",\"ratings\":[1,2,3]}\n{\"id\":\"syn-00002\",\"ratings\":[1,2]}\n",
    )
    .unwrap();
    let out = revrate(&[
        "agreement",
        "--corpus",
        path(&corpus),
        "--annotations",
        path(&ann),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn crossval(dir: &Path, name: &str, extra: &[&str]) -> (String, CrossvalOutput) {
    let out = dir.join(name);
    let mut args = vec!["crossval", "--out", path(&out)];
    args.extend_from_slice(extra);
    ok(&revrate(&args));
    let json = fs::read_to_string(out.join("crossval.json")).unwrap();
    let parsed = serde_json::from_str(&json).unwrap();
    (json, parsed)
}

#[test]
fn crossval_is_deterministic_and_parallelism_free() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "s", 80, 2);
    let base = [
        "--model",
        "handcrafted+j48",
        "--corpus",
        path(&corpus),
        "--folds",
        "4",
        "--seed",
        "3",
    ];
    let (a, parsed) = crossval(dir.path(), "a", &base);
    let (b, _) = crossval(dir.path(), "b", &base);
    let mut par = base.to_vec();
    par.push("--parallel-folds");
    let (c, _) = crossval(dir.path(), "c", &par);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(parsed.fold_accuracies.len(), 4);
    let mean = parsed.fold_accuracies.iter().sum::<f64>() / 4.0;
    assert!((parsed.mean - mean).abs() < 1e-12);
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "s", 40, 2);
    let (first, _) = crossval(
        dir.path(),
        "a",
        &[
            "--model",
            "tfidf+knn",
            "--corpus",
            path(&corpus),
            "--folds",
            "3",
            "--seed",
            "11",
            "--k",
            "3",
        ],
    );
    let echo = dir.path().join("a").join("config.json");
    let (again, _) = crossval(dir.path(), "b", &["--config", path(&echo)]);
    assert_eq!(first, again);
    let echo_b = fs::read_to_string(dir.path().join("b").join("config.json")).unwrap();
    let echo_a = fs::read_to_string(&echo).unwrap();
    assert_eq!(echo_a.replace("/a\"", "/b\""), echo_b);
}

#[test]
fn wordvec_and_csv_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.csv");
    let mut text = String::from("app,id,text,rating\n");
    for i in 0..12 {
        let (t, r) = if i % 2 == 0 {
            ("great fast app", 5)
        } else {
            ("crash crash slow", 1)
        };
        text.push_str(&format!("a,r{i},{t},{r}\n"));
    }
    fs::write(&corpus, text).unwrap();
    let vectors = dir.path().join("vec.txt");
    fs::write(&vectors, "great 1 0\nfast 0.8 0.1\ncrash -1 0.2\nslow -0.7 0\n").unwrap();
    let out = dir.path().join("m");
    ok(&revrate(&[
        "train",
        "--model",
        "wordvec+knn",
        "--corpus",
        path(&corpus),
        "--embeddings",
        path(&vectors),
        "--out",
        path(&out),
    ]));
    let history: serde_json::Value = serde_json::from_slice(&fs::read(out.join("history.json")).unwrap()).unwrap();
    assert_eq!(history["training_accuracy"], 1.0);
}
