//! Text → features → model wiring shared by training, prediction and
//! cross-validation. Every fitted statistic (percentile tables, TF-IDF
//! document frequencies, the network vocabulary) is learnt from the rows
//! passed to `fit` and nothing else.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{self, Algorithm, ClassifierError, Dataset, Schema, Scores, TrainConfig, TrainedModel};
use crate::corpus::{Corpus, StarRating};
use crate::dcnn::{self, DcnnConfig, DcnnError, DcnnModel, PreparedReview};
use crate::deptree::DependencyTree;
use crate::eval::{self, CvResult, EvalError, FoldPlan};
use crate::features::{self, CorpusStats, EmbeddingTable, FeatureError, FeatureVector, Lexicons, TfIdfModel};
use crate::textproc::{content_words, tokenize};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Dcnn(#[from] DcnnError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("word-vector representation needs an embedding table")]
    MissingEmbeddings,
    #[error("review {0:?} has no rating")]
    Unrated(String),
    #[error("unknown model kind {0:?}; expected dcnn or <handcrafted|tfidf|wordvec>+<algorithm>")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Handcrafted,
    TfIdf,
    WordVec,
}

impl Representation {
    pub const ALL: [Representation; 3] = [
        Representation::Handcrafted,
        Representation::TfIdf,
        Representation::WordVec,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Representation::Handcrafted => "handcrafted",
            Representation::TfIdf => "tfidf",
            Representation::WordVec => "wordvec",
        }
    }
}

/// What to train: a baseline over one representation, or the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Baseline(Representation, Algorithm),
    Dcnn,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Dcnn => f.write_str("dcnn"),
            ModelKind::Baseline(r, a) => write!(f, "{}+{}", r.tag(), a),
        }
    }
}

impl FromStr for ModelKind {
    type Err = PipelineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "dcnn" {
            return Ok(ModelKind::Dcnn);
        }
        let unknown = || PipelineError::UnknownKind(s.to_string());
        let (rep, alg) = s.split_once('+').ok_or_else(unknown)?;
        let rep = Representation::ALL
            .into_iter()
            .find(|r| r.tag() == rep)
            .ok_or_else(unknown)?;
        let alg: Algorithm = alg.parse().map_err(|_| unknown())?;
        Ok(ModelKind::Baseline(rep, alg))
    }
}

/// Feature extractor state fitted on training texts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "kebab-case")]
pub enum FittedFeatures {
    Handcrafted { lexicons: Lexicons, stats: CorpusStats },
    TfIdf { model: TfIdfModel },
    WordVec { dim: usize },
}

impl FittedFeatures {
    pub fn fit(
        rep: Representation,
        texts: &[&str],
        lexicons: &Lexicons,
        embeddings: Option<&EmbeddingTable>,
    ) -> Result<Self, PipelineError> {
        Ok(match rep {
            Representation::Handcrafted => FittedFeatures::Handcrafted {
                lexicons: lexicons.clone(),
                stats: CorpusStats::fit(texts.iter().copied())?,
            },
            Representation::TfIdf => {
                let docs: Vec<Vec<String>> = texts.iter().map(|t| content_words(&tokenize(t))).collect();
                FittedFeatures::TfIdf {
                    model: TfIdfModel::fit(&docs)?,
                }
            }
            Representation::WordVec => FittedFeatures::WordVec {
                dim: embeddings.ok_or(PipelineError::MissingEmbeddings)?.dim(),
            },
        })
    }

    pub fn representation(&self) -> Representation {
        match self {
            FittedFeatures::Handcrafted { .. } => Representation::Handcrafted,
            FittedFeatures::TfIdf { .. } => Representation::TfIdf,
            FittedFeatures::WordVec { .. } => Representation::WordVec,
        }
    }

    pub fn schema(&self) -> Schema {
        let (dim, sparse) = match self {
            FittedFeatures::Handcrafted { .. } => (features::HANDCRAFTED_NAMES.len(), false),
            FittedFeatures::TfIdf { model } => (model.dim(), true),
            FittedFeatures::WordVec { dim } => (*dim, false),
        };
        Schema {
            name: self.representation().tag().into(),
            dim,
            sparse,
        }
    }

    pub fn transform(&self, text: &str, embeddings: Option<&EmbeddingTable>) -> Result<FeatureVector, PipelineError> {
        match self {
            FittedFeatures::Handcrafted { lexicons, stats } => {
                Ok(features::handcrafted_features(&tokenize(text), text, lexicons, stats)?)
            }
            FittedFeatures::TfIdf { model } => Ok(model.transform(&content_words(&tokenize(text)))),
            FittedFeatures::WordVec { dim } => {
                let table = embeddings.ok_or(PipelineError::MissingEmbeddings)?;
                if table.dim() != *dim {
                    return Err(ClassifierError::SchemaMismatch {
                        expected: *dim,
                        found: table.dim(),
                    }
                    .into());
                }
                Ok(features::embed_review_mean(&features::words_of(text), table).0)
            }
        }
    }
}

/// A fitted feature extractor with a classifier on top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselinePipeline {
    pub features: FittedFeatures,
    pub model: TrainedModel,
}

impl BaselinePipeline {
    pub fn fit(
        rep: Representation,
        algorithm: Algorithm,
        config: &TrainConfig,
        rows: &[(&str, StarRating)],
        lexicons: &Lexicons,
        embeddings: Option<&EmbeddingTable>,
    ) -> Result<Self, PipelineError> {
        let texts: Vec<&str> = rows.iter().map(|r| r.0).collect();
        let features = FittedFeatures::fit(rep, &texts, lexicons, embeddings)?;
        let data: Vec<(FeatureVector, StarRating)> = rows
            .iter()
            .map(|(t, y)| features.transform(t, embeddings).map(|x| (x, *y)))
            .collect::<Result<_, _>>()?;
        let data = Dataset::new(features.schema(), data)?;
        let model = classifiers::train(algorithm, &data, config)?;
        Ok(BaselinePipeline { features, model })
    }

    pub fn scores(&self, text: &str, embeddings: Option<&EmbeddingTable>) -> Result<Scores, PipelineError> {
        Ok(self.model.scores(&self.features.transform(text, embeddings)?)?)
    }

    pub fn predict(&self, text: &str, embeddings: Option<&EmbeddingTable>) -> Result<StarRating, PipelineError> {
        Ok(classifiers::argmax_lowest(&self.scores(text, embeddings)?))
    }
}

/// Dependency parses per review id, one tree per sentence.
pub type Parses = BTreeMap<String, Vec<DependencyTree>>;

/// Network input for one review, using its parses when present.
pub fn prepare_review(review_id: &str, text: &str, parses: Option<&Parses>) -> Result<PreparedReview, DcnnError> {
    let trees = parses.and_then(|p| p.get(review_id)).map(Vec::as_slice);
    dcnn::prepare(text, trees)
}

/// Everything needed to train any model kind.
#[derive(Debug, Clone, Default)]
pub struct TrainSettings<'a> {
    pub baseline: TrainConfig,
    pub dcnn: DcnnConfig,
    pub lexicons: Lexicons,
    pub embeddings: Option<&'a EmbeddingTable>,
    pub parses: Option<&'a Parses>,
}

/// A trained model of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Fitted {
    Baseline(BaselinePipeline),
    Dcnn(DcnnModel),
}

fn rated(corpus: &Corpus, rows: &[usize]) -> Result<Vec<StarRating>, PipelineError> {
    rows.iter()
        .map(|&i| {
            let r = &corpus.reviews()[i];
            r.rating.ok_or_else(|| PipelineError::Unrated(r.review_id.clone()))
        })
        .collect()
}

/// Trains `kind` on the given corpus rows. `seed` replaces the network's
/// configured seed so folds can derive their own.
pub fn fit(
    kind: ModelKind,
    corpus: &Corpus,
    rows: &[usize],
    settings: &TrainSettings<'_>,
    seed: u64,
) -> Result<(Fitted, Option<dcnn::TrainHistory>), PipelineError> {
    let labels = rated(corpus, rows)?;
    let reviews = corpus.reviews();
    match kind {
        ModelKind::Baseline(rep, alg) => {
            let data: Vec<(&str, StarRating)> = rows
                .iter()
                .zip(&labels)
                .map(|(&i, y)| (reviews[i].text.as_str(), *y))
                .collect();
            let p = BaselinePipeline::fit(
                rep,
                alg,
                &settings.baseline,
                &data,
                &settings.lexicons,
                settings.embeddings,
            )?;
            Ok((Fitted::Baseline(p), None))
        }
        ModelKind::Dcnn => {
            let data: Vec<(PreparedReview, StarRating)> = rows
                .iter()
                .zip(&labels)
                .map(|(&i, y)| {
                    prepare_review(&reviews[i].review_id, &reviews[i].text, settings.parses).map(|r| (r, *y))
                })
                .collect::<Result<_, _>>()?;
            let cfg = DcnnConfig {
                seed,
                ..settings.dcnn.clone()
            };
            let (model, history) = dcnn::fit(&cfg, &data)?;
            Ok((Fitted::Dcnn(model), Some(history)))
        }
    }
}

impl Fitted {
    pub fn scores(&self, review_id: &str, text: &str, settings: &TrainSettings<'_>) -> Result<Scores, PipelineError> {
        match self {
            Fitted::Baseline(p) => p.scores(text, settings.embeddings),
            Fitted::Dcnn(m) => {
                let r = prepare_review(review_id, text, settings.parses)?;
                Ok(m.forward(&r, false, 0)?.scores)
            }
        }
    }

    pub fn predict(
        &self,
        review_id: &str,
        text: &str,
        settings: &TrainSettings<'_>,
    ) -> Result<StarRating, PipelineError> {
        Ok(classifiers::argmax_lowest(&self.scores(review_id, text, settings)?))
    }
}

/// Trains on one fold's training rows and predicts its test rows.
pub fn fold_predictions(
    kind: ModelKind,
    corpus: &Corpus,
    plan: &FoldPlan,
    fold: usize,
    settings: &TrainSettings<'_>,
) -> Result<Vec<StarRating>, PipelineError> {
    let (model, _) = fit(kind, corpus, &plan.train(fold), settings, plan.fold_seed(fold))?;
    plan.test(fold)
        .iter()
        .map(|&i| {
            let r = &corpus.reviews()[i];
            model.predict(&r.review_id, &r.text, settings)
        })
        .collect()
}

/// Sequential k-fold cross-validation of one model kind.
pub fn cross_validate(
    kind: ModelKind,
    corpus: &Corpus,
    plan: &FoldPlan,
    settings: &TrainSettings<'_>,
) -> Result<CvResult, PipelineError> {
    let truth = rated(corpus, &(0..corpus.len()).collect::<Vec<_>>())?;
    eval::cross_validate(&truth, plan, |fold, _, _| {
        fold_predictions(kind, corpus, plan, fold, settings)
    })
}
