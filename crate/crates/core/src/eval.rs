//! Category accuracy, k-fold plans, correlation and mismatch-prevalence
//! reports.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{is_mismatch, Corpus, StarRating, STAR_COUNT};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("cannot split {n} items into {k} folds (need 2 <= k <= n)")]
    BadK { k: usize, n: usize },
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("missing predictions for {0:?}")]
    MissingPredictions(Vec<String>),
    #[error("review {0:?} has no original rating")]
    Unrated(String),
}

/// Share of pairs whose rating categories agree, evaluated as
/// `1 − mismatches/n` so it equals one minus the mismatch rate bit for bit.
pub fn accuracy(pred: &[StarRating], truth: &[StarRating]) -> Result<f64, EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(EvalError::Empty);
    }
    let mismatches = pred.iter().zip(truth).filter(|(p, t)| is_mismatch(**t, **p)).count();
    Ok(1.0 - mismatches as f64 / pred.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

/// Seeded shuffle of `0..n`, then contiguous folds; the first `n mod k`
/// folds hold one extra item.
pub fn kfold_plan(n: usize, k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k < 2 || n < k {
        return Err(EvalError::BadK { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed, "kfold", 0));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(FoldPlan { folds, seed })
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    pub fn items(&self) -> usize {
        self.folds.iter().map(Vec::len).sum()
    }

    pub fn test(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// Every other fold, in ascending item order.
    pub fn train(&self, fold: usize) -> Vec<usize> {
        let mut t: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(f, _)| *f != fold)
            .flat_map(|(_, items)| items.iter().copied())
            .collect();
        t.sort_unstable();
        t
    }

    /// Sub-seed for everything fitted inside one fold.
    pub fn fold_seed(&self, fold: usize) -> u64 {
        seed::derive(self.seed, "fold", fold as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub mean: f64,
    pub folds: Vec<f64>,
}

impl CvResult {
    pub fn from_folds(folds: Vec<f64>) -> Self {
        let mean = folds.iter().sum::<f64>() / folds.len() as f64;
        CvResult { mean, folds }
    }
}

/// Accuracy of the test predictions of one fold.
pub fn fold_accuracy(truth: &[StarRating], test: &[usize], predicted: &[StarRating]) -> Result<f64, EvalError> {
    let expected: Vec<StarRating> = test.iter().map(|&i| truth[i]).collect();
    accuracy(predicted, &expected)
}

/// Runs `trainer(fold, train, test)` for each fold; it must return one
/// prediction per test item, fitted on the training items only.
pub fn cross_validate<E, F>(truth: &[StarRating], plan: &FoldPlan, mut trainer: F) -> Result<CvResult, E>
where
    E: From<EvalError>,
    F: FnMut(usize, &[usize], &[usize]) -> Result<Vec<StarRating>, E>,
{
    if plan.items() != truth.len() {
        return Err(EvalError::LengthMismatch {
            left: plan.items(),
            right: truth.len(),
        }
        .into());
    }
    let mut folds = Vec::with_capacity(plan.len());
    for f in 0..plan.len() {
        let train = plan.train(f);
        let predicted = trainer(f, &train, plan.test(f))?;
        folds.push(fold_accuracy(truth, plan.test(f), &predicted)?);
    }
    Ok(CvResult::from_folds(folds))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub pearson: f64,
    pub spearman: f64,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(EvalError::TooFewPoints(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson and Spearman correlation between star ratings and scores.
pub fn correlate(ratings: &[StarRating], scores: &[f64]) -> Result<Correlation, EvalError> {
    let x: Vec<f64> = ratings.iter().map(|r| f64::from(r.value())).collect();
    let p = pearson(&x, scores)?;
    let s = pearson(&midranks(&x), &midranks(scores))?;
    Ok(Correlation {
        pearson: p,
        spearman: s,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppReport {
    pub app_id: String,
    pub reviews: u64,
    pub mismatches: u64,
    pub mismatch_pct: f64,
    pub original_mean: f64,
    pub predicted_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Category accuracy of the predictions against the original ratings.
    pub accuracy: f64,
    pub reviews: u64,
    pub mismatches: u64,
    pub mismatch_pct: f64,
    /// `confusion[original][predicted]`, star indices.
    pub confusion: [[u64; STAR_COUNT]; STAR_COUNT],
    pub apps: Vec<AppReport>,
}

/// Mismatch prevalence and mean ratings per app (in corpus app order) and
/// overall.
pub fn prevalence_report(corpus: &Corpus, predictions: &BTreeMap<String, StarRating>) -> Result<EvalReport, EvalError> {
    if corpus.is_empty() {
        return Err(EvalError::Empty);
    }
    let missing: Vec<String> = corpus
        .reviews()
        .iter()
        .filter(|r| !predictions.contains_key(&r.review_id))
        .map(|r| r.review_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingPredictions(missing));
    }
    let mut confusion = [[0u64; STAR_COUNT]; STAR_COUNT];
    let mut apps = Vec::new();
    let (mut total, mut total_mismatch) = (0u64, 0u64);
    for app in corpus.apps() {
        let (mut n, mut mism, mut orig_sum, mut pred_sum) = (0u64, 0u64, 0u64, 0u64);
        for r in corpus.app_reviews(app) {
            let original = r.rating.ok_or_else(|| EvalError::Unrated(r.review_id.clone()))?;
            let predicted = predictions[&r.review_id];
            confusion[original.index()][predicted.index()] += 1;
            n += 1;
            mism += u64::from(is_mismatch(original, predicted));
            orig_sum += u64::from(original.value());
            pred_sum += u64::from(predicted.value());
        }
        total += n;
        total_mismatch += mism;
        apps.push(AppReport {
            app_id: app.into(),
            reviews: n,
            mismatches: mism,
            mismatch_pct: 100.0 * mism as f64 / n as f64,
            original_mean: orig_sum as f64 / n as f64,
            predicted_mean: pred_sum as f64 / n as f64,
        });
    }
    Ok(EvalReport {
        accuracy: 1.0 - total_mismatch as f64 / total as f64,
        reviews: total,
        mismatches: total_mismatch,
        mismatch_pct: 100.0 * total_mismatch as f64 / total as f64,
        confusion,
        apps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LoadMode, Review};

    fn stars(v: &[i64]) -> Vec<StarRating> {
        v.iter().map(|&s| StarRating::new(s).unwrap()).collect()
    }

    #[test]
    fn accuracy_is_category_level() {
        assert_eq!(accuracy(&stars(&[1, 3, 5]), &stars(&[1, 3, 5])), Ok(1.0));
        assert_eq!(accuracy(&stars(&[4]), &stars(&[5])), Ok(1.0));
        assert_eq!(accuracy(&stars(&[3]), &stars(&[5])), Ok(0.0));
        assert_eq!(accuracy(&stars(&[2, 1]), &stars(&[1, 3])), Ok(0.5));
        assert_eq!(accuracy(&[], &[]), Err(EvalError::Empty));
        assert_eq!(
            accuracy(&stars(&[1]), &stars(&[1, 2])),
            Err(EvalError::LengthMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn fold_sizes() {
        let p = kfold_plan(10, 10, 1).unwrap();
        assert!(p.folds.iter().all(|f| f.len() == 1));
        let p = kfold_plan(8600, 10, 1).unwrap();
        assert!(p.folds.iter().all(|f| f.len() == 860));
        let p = kfold_plan(23, 5, 1).unwrap();
        let sizes: Vec<usize> = p.folds.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![5, 5, 5, 4, 4]);
        assert_eq!(p, kfold_plan(23, 5, 1).unwrap());
        assert_ne!(p, kfold_plan(23, 5, 2).unwrap());
        assert_eq!(kfold_plan(5, 1, 0), Err(EvalError::BadK { k: 1, n: 5 }));
        assert_eq!(kfold_plan(3, 4, 0), Err(EvalError::BadK { k: 4, n: 3 }));
        let train = p.train(0);
        assert_eq!(train.len(), 18);
        assert!(train.iter().all(|i| !p.test(0).contains(i)));
    }

    #[test]
    fn majority_trainer_on_constant_labels() {
        let truth = stars(&[4; 20]);
        let plan = kfold_plan(20, 4, 3).unwrap();
        let r: CvResult = cross_validate::<EvalError, _>(&truth, &plan, |_, train, test| {
            let mut counts = [0usize; 5];
            for &i in train {
                counts[truth[i].index()] += 1;
            }
            let best = (0..5).max_by_key(|&s| (counts[s], core::cmp::Reverse(s))).unwrap();
            Ok(vec![StarRating::from_index(best).unwrap(); test.len()])
        })
        .unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.folds.len(), 4);
    }

    #[test]
    fn correlation_basics() {
        let r = stars(&[1, 2, 3, 4, 5, 3]);
        let s: Vec<f64> = r.iter().map(|x| f64::from(x.value())).collect();
        let c = correlate(&r, &s).unwrap();
        assert!((c.pearson - 1.0).abs() < 1e-12 && (c.spearman - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let c = correlate(&r, &neg).unwrap();
        assert!((c.pearson + 1.0).abs() < 1e-12 && (c.spearman + 1.0).abs() < 1e-12);
        assert_eq!(correlate(&r, &[1.0; 6]), Err(EvalError::ZeroVariance));
        assert_eq!(correlate(&r[..2], &s[..2]), Err(EvalError::TooFewPoints(2)));
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    fn small_corpus() -> Corpus {
        let rows = [
            ("a", "1", 5),
            ("a", "2", 5),
            ("a", "3", 4),
            ("b", "4", 1),
            ("b", "5", 3),
        ];
        Corpus::from_reviews(
            rows.iter()
                .map(|(app, id, s)| Review::new(*app, *id, "text", Some(StarRating::new(*s).unwrap()))),
            LoadMode::default(),
        )
        .unwrap()
    }

    #[test]
    fn prevalence_identity_and_means() {
        let c = small_corpus();
        let same: BTreeMap<String, StarRating> = c
            .reviews()
            .iter()
            .map(|r| (r.review_id.clone(), r.rating.unwrap()))
            .collect();
        let rep = prevalence_report(&c, &same).unwrap();
        assert_eq!(rep.mismatch_pct, 0.0);
        assert_eq!(rep.accuracy, 1.0);
        assert_eq!(rep.apps[0].app_id, "a");
        assert_eq!(libm::round(rep.apps[0].original_mean * 100.0) / 100.0, 4.67);
        assert!(rep.apps.iter().all(|a| a.original_mean == a.predicted_mean));

        let mut changed = same.clone();
        changed.insert("5".into(), StarRating::new(1).unwrap());
        let rep = prevalence_report(&c, &changed).unwrap();
        assert_eq!(rep.mismatches, 1);
        assert_eq!(rep.apps[1].mismatch_pct, 50.0);
        assert_eq!(rep.apps.iter().map(|a| a.reviews).sum::<u64>(), rep.reviews);

        changed.remove("2");
        assert_eq!(
            prevalence_report(&c, &changed),
            Err(EvalError::MissingPredictions(vec!["2".into()]))
        );
    }
}
