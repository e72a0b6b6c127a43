#![allow(dead_code)]

use std::fmt::Write;
use std::path::Path;
use std::process::{Command, Output};

/// Annotator (rows) by original (columns) rating counts over 8,600 reviews.
pub const TABLE5: [[u64; 5]; 5] = [
    [1337, 367, 238, 84, 73],
    [314, 313, 257, 168, 89],
    [74, 57, 397, 275, 229],
    [15, 5, 52, 434, 510],
    [38, 15, 71, 438, 2750],
];

/// `(original, annotated)` star pairs, one per review in the table.
pub fn table5_pairs() -> Vec<(u8, u8)> {
    let mut out = Vec::new();
    for (ann, row) in TABLE5.iter().enumerate() {
        for (org, &n) in row.iter().enumerate() {
            for _ in 0..n {
                out.push((org as u8 + 1, ann as u8 + 1));
            }
        }
    }
    out
}

/// Table 5 as files: a rated corpus, three agreeing annotators per review
/// and the annotator ratings as predictions.
pub fn write_table5(dir: &Path) {
    let (mut corpus, mut annotations, mut predictions) = (String::new(), String::new(), String::new());
    for (i, (org, ann)) in table5_pairs().into_iter().enumerate() {
        let id = format!("t{i:04}");
        let app = format!("app-{}", i % 7);
        writeln!(
            corpus,
            r#"{{"app":"{app}","id":"{id}","text":"review {i}","rating":{org}}}"#
        )
        .unwrap();
        writeln!(annotations, r#"{{"id":"{id}","ratings":[{ann},{ann},{ann}]}}"#).unwrap();
        writeln!(predictions, r#"{{"id":"{id}","predicted":{ann}}}"#).unwrap();
    }
    std::fs::write(dir.join("table5.jsonl"), corpus).unwrap();
    std::fs::write(dir.join("table5-annotations.jsonl"), annotations).unwrap();
    std::fs::write(dir.join("table5-predictions.jsonl"), predictions).unwrap();
}

pub fn revrate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revrate"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}
