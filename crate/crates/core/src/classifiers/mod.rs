//! Classic supervised baselines over any [`FeatureVector`] schema.
//!
//! Every model produces a score per star (a probability, vote share or
//! leaf distribution); the prediction is the highest score, with ties going
//! to the lower star.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{StarRating, STAR_COUNT};
use crate::features::FeatureVector;

mod boost;
mod knn;
mod naive_bayes;
mod one_r;
mod stump;
mod tree;

pub use boost::AdaBoost;
pub use knn::{Distance, Knn};
pub use naive_bayes::NaiveBayes;
pub use one_r::OneR;
pub use stump::DecisionStump;
pub use tree::DecisionTree;

pub type Scores = [f64; STAR_COUNT];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifierError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("input has dimension {found}, model expects {expected}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
}

/// Describes the feature layout a model was trained on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub name: String,
    pub dim: usize,
    pub sparse: bool,
}

/// Labelled rows sharing one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: Schema,
    pub rows: Vec<(FeatureVector, StarRating)>,
}

impl Dataset {
    pub fn new(schema: Schema, rows: Vec<(FeatureVector, StarRating)>) -> Result<Self, ClassifierError> {
        for (x, _) in &rows {
            if x.dim() != schema.dim {
                return Err(ClassifierError::SchemaMismatch {
                    expected: schema.dim,
                    found: x.dim(),
                });
            }
        }
        Ok(Dataset { schema, rows })
    }

    /// Dense rows with `dim` dimensions named `x0..`.
    pub fn dense(rows: Vec<(Vec<f64>, StarRating)>) -> Result<Self, ClassifierError> {
        let dim = rows.first().map_or(0, |r| r.0.len());
        let schema = Schema {
            name: "dense".into(),
            dim,
            sparse: false,
        };
        Dataset::new(
            schema,
            rows.into_iter().map(|(x, y)| (FeatureVector::Dense(x), y)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<StarRating> {
        self.rows.iter().map(|r| r.1).collect()
    }

    /// All values of one dimension.
    pub(crate) fn column(&self, d: usize) -> Vec<f64> {
        self.rows.iter().map(|(x, _)| x.get(d)).collect()
    }

    pub(crate) fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.schema.dim).map(|d| self.column(d)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    NaiveBayes,
    DecisionStump,
    OneR,
    Knn,
    J48,
    AdaBoost,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::NaiveBayes,
        Algorithm::DecisionStump,
        Algorithm::OneR,
        Algorithm::Knn,
        Algorithm::J48,
        Algorithm::AdaBoost,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::NaiveBayes => "naive-bayes",
            Algorithm::DecisionStump => "decision-stump",
            Algorithm::OneR => "one-r",
            Algorithm::Knn => "knn",
            Algorithm::J48 => "j48",
            Algorithm::AdaBoost => "adaboost",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = ClassifierError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| ClassifierError::UnknownAlgorithm(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Neighbours for kNN.
    pub k: usize,
    /// Boosting rounds.
    pub rounds: usize,
    /// kNN distance; `None` picks cosine for sparse schemas, Euclidean otherwise.
    pub distance: Option<Distance>,
    /// Upper bound on 1R bins per dimension.
    pub one_r_bins: usize,
    /// Minimum rows per tree leaf.
    pub min_leaf: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            k: 1,
            rounds: 10,
            distance: None,
            one_r_bins: 10,
            min_leaf: 2,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), ClassifierError> {
        if self.k == 0 {
            return Err(ClassifierError::BadConfig("k must be >= 1".into()));
        }
        if self.rounds == 0 {
            return Err(ClassifierError::BadConfig("rounds must be >= 1".into()));
        }
        if self.one_r_bins == 0 {
            return Err(ClassifierError::BadConfig("one_r_bins must be >= 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(ClassifierError::BadConfig("min_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

/// A trained baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum BaselineModel {
    NaiveBayes(NaiveBayes),
    DecisionStump(DecisionStump),
    OneR(OneR),
    Knn(Knn),
    J48(DecisionTree),
    AdaBoost(AdaBoost),
}

pub fn train(algorithm: Algorithm, data: &Dataset, config: &TrainConfig) -> Result<TrainedModel, ClassifierError> {
    config.validate()?;
    if data.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let model = match algorithm {
        Algorithm::NaiveBayes => BaselineModel::NaiveBayes(NaiveBayes::fit(data)),
        Algorithm::DecisionStump => {
            let weights = alloc::vec![1.0; data.len()];
            BaselineModel::DecisionStump(DecisionStump::fit(&data.columns(), &data.labels(), &weights))
        }
        Algorithm::OneR => BaselineModel::OneR(OneR::fit(data, config.one_r_bins)),
        Algorithm::Knn => {
            let distance = config.distance.unwrap_or(if data.schema.sparse {
                Distance::Cosine
            } else {
                Distance::Euclidean
            });
            BaselineModel::Knn(Knn::fit(data, config.k, distance))
        }
        Algorithm::J48 => BaselineModel::J48(DecisionTree::fit(data, config.min_leaf)),
        Algorithm::AdaBoost => BaselineModel::AdaBoost(AdaBoost::fit(data, config.rounds)),
    };
    Ok(TrainedModel {
        schema: data.schema.clone(),
        model,
    })
}

/// A model together with the schema it accepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema: Schema,
    pub model: BaselineModel,
}

impl TrainedModel {
    pub fn algorithm(&self) -> Algorithm {
        match self.model {
            BaselineModel::NaiveBayes(_) => Algorithm::NaiveBayes,
            BaselineModel::DecisionStump(_) => Algorithm::DecisionStump,
            BaselineModel::OneR(_) => Algorithm::OneR,
            BaselineModel::Knn(_) => Algorithm::Knn,
            BaselineModel::J48(_) => Algorithm::J48,
            BaselineModel::AdaBoost(_) => Algorithm::AdaBoost,
        }
    }

    pub fn scores(&self, x: &FeatureVector) -> Result<Scores, ClassifierError> {
        if x.dim() != self.schema.dim {
            return Err(ClassifierError::SchemaMismatch {
                expected: self.schema.dim,
                found: x.dim(),
            });
        }
        Ok(match &self.model {
            BaselineModel::NaiveBayes(m) => m.scores(x),
            BaselineModel::DecisionStump(m) => m.scores(x),
            BaselineModel::OneR(m) => m.scores(x),
            BaselineModel::Knn(m) => m.scores(x),
            BaselineModel::J48(m) => m.scores(x),
            BaselineModel::AdaBoost(m) => m.scores(x),
        })
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<StarRating, ClassifierError> {
        self.scores(x).map(|s| argmax_lowest(&s))
    }
}

/// Highest-scoring star; equal scores go to the lower star.
pub fn argmax_lowest(scores: &[f64]) -> StarRating {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    StarRating::from_index(best).expect("five scores")
}

/// Class weights per star.
pub(crate) fn class_weights(labels: &[StarRating], weights: &[f64], rows: &[usize]) -> Scores {
    let mut w = [0.0; STAR_COUNT];
    for &i in rows {
        w[labels[i].index()] += weights[i];
    }
    w
}

pub(crate) fn normalized(mut s: Scores) -> Scores {
    let total: f64 = s.iter().sum();
    if total > 0.0 {
        for x in &mut s {
            *x /= total;
        }
    }
    s
}

pub(crate) fn entropy(w: &Scores) -> f64 {
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    w.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| {
            let p = x / total;
            -p * libm::log2(p)
        })
        .sum()
}

/// Best binary split of one column by information gain.
///
/// Candidate thresholds are midpoints between consecutive distinct values;
/// both sides must hold at least `min_side` rows. Returns
/// `(gain, threshold)` for the first best candidate.
pub(crate) fn best_threshold(
    column: &[f64],
    labels: &[StarRating],
    weights: &[f64],
    rows: &[usize],
    min_side: usize,
) -> Option<(f64, f64)> {
    let mut order: Vec<usize> = rows.to_vec();
    order.sort_by(|&a, &b| column[a].total_cmp(&column[b]).then(a.cmp(&b)));
    let total = class_weights(labels, weights, rows);
    let total_w: f64 = total.iter().sum();
    if total_w <= 0.0 {
        return None;
    }
    let parent = entropy(&total);
    let mut left = [0.0; STAR_COUNT];
    let mut best: Option<(f64, f64)> = None;
    for pos in 0..order.len().saturating_sub(1) {
        let i = order[pos];
        left[labels[i].index()] += weights[i];
        let (here, next) = (column[i], column[order[pos + 1]]);
        if here == next || pos + 1 < min_side || order.len() - pos - 1 < min_side {
            continue;
        }
        let mut right = total;
        for c in 0..STAR_COUNT {
            right[c] -= left[c];
        }
        let lw: f64 = left.iter().sum();
        let rw = total_w - lw;
        let gain = parent - (lw / total_w) * entropy(&left) - (rw / total_w) * entropy(&right);
        if best.is_none_or(|(g, _)| gain > g + 1e-12) {
            best = Some((gain, here + (next - here) / 2.0));
        }
    }
    best
}
