//! Text, CSV and JSON renderings of evaluation results.

use std::collections::BTreeMap;
use std::fmt::Write;

use revrate_core::corpus::{Corpus, MismatchMatrix, RatingCategory, StarRating, STAR_COUNT};
use revrate_core::eval::EvalReport;

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Aligned per-app table with an overall row; means to two decimals.
pub fn report_table(report: &EvalReport) -> String {
    let header = [
        "app",
        "reviews",
        "mismatches",
        "mismatch %",
        "original mean",
        "new mean",
    ];
    let mut rows: Vec<[String; 6]> = report
        .apps
        .iter()
        .map(|a| {
            [
                a.app_id.clone(),
                a.reviews.to_string(),
                a.mismatches.to_string(),
                format!("{:.2}", a.mismatch_pct),
                format!("{:.2}", a.original_mean),
                format!("{:.2}", a.predicted_mean),
            ]
        })
        .collect();
    let overall_mean = |f: fn(&revrate_core::eval::AppReport) -> f64| {
        let sum: f64 = report.apps.iter().map(|a| f(a) * a.reviews as f64).sum();
        format!("{:.2}", sum / report.reviews as f64)
    };
    rows.push([
        "(all)".into(),
        report.reviews.to_string(),
        report.mismatches.to_string(),
        format!("{:.2}", report.mismatch_pct),
        overall_mean(|a| a.original_mean),
        overall_mean(|a| a.predicted_mean),
    ]);
    let mut widths = header.map(str::len);
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let mut l = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i == 0 {
                let _ = write!(l, "{cell:<w$}");
            } else {
                let _ = write!(l, "  {cell:>w$}");
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(&header);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    line(&rule.iter().map(String::as_str).collect::<Vec<_>>());
    for r in &rows {
        line(&r.iter().map(String::as_str).collect::<Vec<_>>());
    }
    let _ = writeln!(out, "\naccuracy {:.4}", report.accuracy);
    out
}

fn csv_text(rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Rows are original ratings, columns predicted ratings.
pub fn confusion_csv(confusion: &[[u64; STAR_COUNT]; STAR_COUNT]) -> String {
    let mut rows = vec![std::iter::once("original\\predicted".to_string())
        .chain(StarRating::ALL.iter().map(|s| s.value().to_string()))
        .collect()];
    for s in StarRating::ALL {
        rows.push(
            std::iter::once(s.value().to_string())
                .chain(confusion[s.index()].iter().map(u64::to_string))
                .collect(),
        );
    }
    csv_text(rows)
}

/// Annotator/predicted rating rows against original rating columns, with
/// totals, in the layout of the agreement table.
pub fn mismatch_matrix_csv(m: &MismatchMatrix) -> String {
    let mut rows = vec![std::iter::once("other\\original".to_string())
        .chain(StarRating::ALL.iter().map(|s| s.value().to_string()))
        .chain(["total".to_string()])
        .collect::<Vec<_>>()];
    let row_totals = m.row_totals();
    for s in StarRating::ALL {
        rows.push(
            std::iter::once(s.value().to_string())
                .chain(m.counts[s.index()].iter().map(u64::to_string))
                .chain([row_totals[s.index()].to_string()])
                .collect(),
        );
    }
    rows.push(
        std::iter::once("total".to_string())
            .chain(m.col_totals().iter().map(u64::to_string))
            .chain([m.total.to_string()])
            .collect(),
    );
    csv_text(rows)
}

const CATEGORIES: [RatingCategory; 3] = [RatingCategory::Good, RatingCategory::Neutral, RatingCategory::Bad];

/// Per app and original category: how many predictions match it.
pub fn chart_csv(corpus: &Corpus, predictions: &BTreeMap<String, StarRating>) -> String {
    let mut rows = vec![vec![
        "app".to_string(),
        "category".into(),
        "match".into(),
        "mismatch".into(),
    ]];
    for app in corpus.apps() {
        let mut counts = [[0u64; 2]; 3];
        for r in corpus.app_reviews(app) {
            let (Some(orig), Some(pred)) = (r.rating, predictions.get(&r.review_id)) else {
                continue;
            };
            let c = CATEGORIES
                .iter()
                .position(|&c| c == orig.category())
                .expect("three categories");
            counts[c][usize::from(orig.category() != pred.category())] += 1;
        }
        for (c, [hit, miss]) in CATEGORIES.iter().zip(counts) {
            rows.push(vec![
                app.to_string(),
                format!("{c:?}"),
                hit.to_string(),
                miss.to_string(),
            ]);
        }
    }
    csv_text(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use revrate_core::corpus::{LoadMode, Review};
    use revrate_core::eval::prevalence_report;

    fn star(v: i64) -> StarRating {
        StarRating::new(v).unwrap()
    }

    fn fixture() -> (Corpus, BTreeMap<String, StarRating>) {
        let corpus = Corpus::from_reviews(
            [
                Review::new("alpha", "1", "x", Some(star(5))),
                Review::new("alpha", "2", "x", Some(star(1))),
                Review::new("b", "3", "x", Some(star(3))),
            ],
            LoadMode::default(),
        )
        .unwrap();
        let preds = [("1", 4), ("2", 5), ("3", 3)]
            .into_iter()
            .map(|(id, s)| (id.to_string(), star(s)))
            .collect();
        (corpus, preds)
    }

    #[test]
    fn table_is_aligned() {
        let (corpus, preds) = fixture();
        let table = report_table(&prevalence_report(&corpus, &preds).unwrap());
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(
            lines[0],
            "app    reviews  mismatches  mismatch %  original mean  new mean"
        );
        assert_eq!(
            lines[2],
            "alpha        2           1       50.00           3.00      4.50"
        );
        assert_eq!(
            lines[4],
            "(all)        3           1       33.33           3.00      4.00"
        );
        assert!(table.ends_with("accuracy 0.6667\n"));
    }

    #[test]
    fn csv_renderings() {
        let (corpus, preds) = fixture();
        let report = prevalence_report(&corpus, &preds).unwrap();
        let conf = confusion_csv(&report.confusion);
        assert_eq!(conf.lines().next().unwrap(), "original\\predicted,1,2,3,4,5");
        assert_eq!(conf.lines().nth(5).unwrap(), "5,0,0,0,1,0");
        let chart = chart_csv(&corpus, &preds);
        assert_eq!(
            chart.lines().collect::<Vec<_>>(),
            [
                "app,category,match,mismatch",
                "alpha,Good,1,0",
                "alpha,Neutral,0,0",
                "alpha,Bad,0,1",
                "b,Good,0,0",
                "b,Neutral,1,0",
                "b,Bad,0,0",
            ]
        );
    }
}
