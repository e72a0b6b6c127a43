//! One function per subcommand. Each reads its inputs from a resolved
//! [`RunConfig`], writes into the output directory and echoes the config.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use revrate_core::corpus::{
    consolidate_annotations, fleiss_kappa, mismatch_matrix, AnnotatedReview, AnnotationSet, Corpus, StarRating,
};
use revrate_core::dcnn::{self, DcnnModel, TrainHistory};
use revrate_core::eval::{self, CvResult, EvalError};
use revrate_core::features::EmbeddingTable;
use revrate_core::pipeline::{self, BaselinePipeline, Fitted, ModelKind, Parses, Representation, TrainSettings};
use revrate_core::synth::{self, SynthSpec};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io;
use crate::report;

const BASELINE_FORMAT: &str = "revrate-baseline";
const BASELINE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaselineFile {
    format: String,
    version: u32,
    kind: String,
    pipeline: BaselinePipeline,
}

/// Inputs shared by training and prediction.
struct Resources {
    lexicons: revrate_core::features::Lexicons,
    embeddings: Option<EmbeddingTable>,
    parses: Option<Parses>,
}

impl Resources {
    fn load(cfg: &RunConfig, needs_embeddings: bool) -> Result<Self> {
        let l = &cfg.lexicons;
        let lexicons = io::load_lexicons(l.positive.as_deref(), l.negative.as_deref(), l.sentiment.as_deref())?;
        let embeddings = match &cfg.embeddings {
            Some(p) => Some(io::load_embeddings(p)?),
            None if needs_embeddings => {
                return Err(CliError::usage("word-vector models need --embeddings"));
            }
            None => None,
        };
        let parses = cfg.parses.as_deref().map(io::load_parses).transpose()?;
        Ok(Resources {
            lexicons,
            embeddings,
            parses,
        })
    }

    fn settings<'a>(&'a self, cfg: &RunConfig) -> TrainSettings<'a> {
        TrainSettings {
            baseline: cfg.baseline,
            dcnn: cfg.dcnn.clone(),
            lexicons: self.lexicons.clone(),
            embeddings: self.embeddings.as_ref(),
            parses: self.parses.as_ref(),
        }
    }
}

fn needs_embeddings(kind: ModelKind) -> bool {
    matches!(kind, ModelKind::Baseline(Representation::WordVec, _))
}

fn model_kind(cfg: &RunConfig) -> Result<ModelKind> {
    Ok(RunConfig::require(&cfg.model, "model")?.parse()?)
}

fn load_corpus(cfg: &RunConfig, path: &Path) -> Result<Corpus> {
    io::load_reviews(path, cfg.format, cfg.load_mode())
}

fn check_rated(corpus: &Corpus) -> Result<()> {
    match corpus.reviews().iter().find(|r| r.rating.is_none()) {
        Some(r) => Err(CliError::data(format!("review {:?} has no rating", r.review_id))),
        None if corpus.is_empty() => Err(CliError::data("corpus is empty")),
        None => Ok(()),
    }
}

pub fn encode_model(kind: ModelKind, model: &Fitted) -> Vec<u8> {
    match model {
        Fitted::Dcnn(m) => dcnn::encode_checkpoint(m),
        Fitted::Baseline(p) => report::to_json(&BaselineFile {
            format: BASELINE_FORMAT.into(),
            version: BASELINE_VERSION,
            kind: kind.to_string(),
            pipeline: p.clone(),
        })
        .into_bytes(),
    }
}

/// Reads a network checkpoint or a baseline JSON model.
pub fn load_model(path: &Path) -> Result<(ModelKind, Fitted)> {
    let bytes = std::fs::read(path).map_err(|e| CliError::read(path, e))?;
    let bad = |msg: String| CliError::data(format!("{}: {msg}", path.display()));
    if bytes.starts_with(b"REVDCNN") {
        let model: DcnnModel = dcnn::decode_checkpoint(&bytes).map_err(|e| bad(e.to_string()))?;
        return Ok((ModelKind::Dcnn, Fitted::Dcnn(model)));
    }
    let file: BaselineFile = serde_json::from_slice(&bytes).map_err(|e| bad(format!("not a model file: {e}")))?;
    if file.format != BASELINE_FORMAT || file.version != BASELINE_VERSION {
        return Err(bad(format!(
            "unsupported model format {} v{}",
            file.format, file.version
        )));
    }
    let kind: ModelKind = file
        .kind
        .parse()
        .map_err(|e: pipeline::PipelineError| bad(e.to_string()))?;
    Ok((kind, Fitted::Baseline(file.pipeline)))
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum History {
    Dcnn(TrainHistory),
    Baseline { training_accuracy: f64 },
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let kind = model_kind(cfg)?;
    let corpus = load_corpus(cfg, RunConfig::require(&cfg.corpus, "corpus")?)?;
    check_rated(&corpus)?;
    let res = Resources::load(cfg, needs_embeddings(kind))?;
    let settings = res.settings(cfg);
    let rows: Vec<usize> = (0..corpus.len()).collect();
    let (model, history) = pipeline::fit(kind, &corpus, &rows, &settings, cfg.seed)?;
    let history = match history {
        Some(h) => History::Dcnn(h),
        None => {
            let predicted = predict_rows(&model, &corpus, &settings)?;
            let truth: Vec<StarRating> = corpus.reviews().iter().filter_map(|r| r.rating).collect();
            History::Baseline {
                training_accuracy: eval::accuracy(&predicted, &truth).map_err(|e| CliError::data(e.to_string()))?,
            }
        }
    };
    let out = cfg.out_dir()?;
    let name = if kind == ModelKind::Dcnn {
        "model.dcnn"
    } else {
        "model.json"
    };
    io::write_bytes(&out.join(name), encode_model(kind, &model))?;
    io::write_bytes(&out.join("history.json"), report::to_json(&history))?;
    cfg.write_echo(out)
}

fn predict_rows(model: &Fitted, corpus: &Corpus, settings: &TrainSettings<'_>) -> Result<Vec<StarRating>> {
    corpus
        .reviews()
        .iter()
        .map(|r| {
            model
                .predict(&r.review_id, &r.text, settings)
                .map_err(|e| CliError::data(format!("review {:?}: {e}", r.review_id)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub predicted: Option<u8>,
    #[serde(default)]
    pub scores: Option<[f64; 5]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn predict(cfg: &RunConfig) -> Result<()> {
    let model_path = Path::new(RunConfig::require(&cfg.model, "model")?);
    let (kind, model) = load_model(model_path)?;
    let input = cfg
        .input
        .as_deref()
        .or(cfg.corpus.as_deref())
        .ok_or_else(|| CliError::usage("--input is required"))?;
    let corpus = load_corpus(cfg, input)?;
    let res = Resources::load(cfg, needs_embeddings(kind))?;
    let settings = res.settings(cfg);
    let mut out = String::new();
    for r in corpus.reviews() {
        let rec = match model.scores(&r.review_id, &r.text, &settings) {
            Ok(scores) => PredictionRecord {
                id: r.review_id.clone(),
                predicted: Some(revrate_core::classifiers::argmax_lowest(&scores).value()),
                scores: Some(scores),
                error: None,
            },
            Err(e) if !cfg.strict => PredictionRecord {
                id: r.review_id.clone(),
                predicted: None,
                scores: None,
                error: Some(e.to_string()),
            },
            Err(e) => return Err(CliError::data(format!("review {:?}: {e}", r.review_id))),
        };
        out.push_str(&serde_json::to_string(&rec).expect("plain record"));
        out.push('\n');
    }
    let dir = cfg.out_dir()?;
    io::write_bytes(&dir.join("predictions.jsonl"), out)?;
    cfg.write_echo(dir)
}

/// Predictions JSONL as written by `predict`; rows without a prediction
/// are skipped.
pub fn parse_predictions(text: &str) -> std::result::Result<BTreeMap<String, StarRating>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredictionRecord = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        let Some(p) = rec.predicted else { continue };
        let star = StarRating::new(i64::from(p)).map_err(|e| format!("line {}: {e}", i + 1))?;
        if out.insert(rec.id.clone(), star).is_some() {
            return Err(format!("line {}: duplicate id {:?}", i + 1, rec.id));
        }
    }
    Ok(out)
}

pub fn mismatch_report(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg, RunConfig::require(&cfg.corpus, "corpus")?)?;
    check_rated(&corpus)?;
    let predictions = match (&cfg.predictions, &cfg.model) {
        (Some(p), _) => {
            parse_predictions(&io::read_text(p)?).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?
        }
        (None, Some(m)) => {
            let (kind, model) = load_model(Path::new(m))?;
            let res = Resources::load(cfg, needs_embeddings(kind))?;
            let predicted = predict_rows(&model, &corpus, &res.settings(cfg))?;
            corpus
                .reviews()
                .iter()
                .map(|r| r.review_id.clone())
                .zip(predicted)
                .collect()
        }
        (None, None) => return Err(CliError::usage("either --model or --predictions is required")),
    };
    let report = eval::prevalence_report(&corpus, &predictions).map_err(|e| match e {
        EvalError::MissingPredictions(ids) => CliError::data(format!("no prediction for review(s) {}", ids.join(", "))),
        e => CliError::data(e.to_string()),
    })?;
    let dir = cfg.out_dir()?;
    let table = report::report_table(&report);
    io::write_bytes(&dir.join("report.json"), report::to_json(&report))?;
    io::write_bytes(&dir.join("report.txt"), &table)?;
    io::write_bytes(&dir.join("confusion.csv"), report::confusion_csv(&report.confusion))?;
    io::write_bytes(&dir.join("chart.csv"), report::chart_csv(&corpus, &predictions))?;
    cfg.write_echo(dir)?;
    print!("{table}");
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossvalOutput {
    pub model: String,
    pub folds: usize,
    pub seed: u64,
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
}

pub fn crossval(cfg: &RunConfig) -> Result<()> {
    let kind = model_kind(cfg)?;
    let corpus = load_corpus(cfg, RunConfig::require(&cfg.corpus, "corpus")?)?;
    check_rated(&corpus)?;
    let plan = eval::kfold_plan(corpus.len(), cfg.folds, cfg.seed).map_err(|e| match e {
        EvalError::BadK { .. } => CliError::usage(e.to_string()),
        e => CliError::data(e.to_string()),
    })?;
    let res = Resources::load(cfg, needs_embeddings(kind))?;
    let settings = res.settings(cfg);
    let truth: Vec<StarRating> = corpus.reviews().iter().filter_map(|r| r.rating).collect();
    let run_fold = |fold: usize| -> Result<f64> {
        let predicted = pipeline::fold_predictions(kind, &corpus, &plan, fold, &settings)?;
        eval::fold_accuracy(&truth, plan.test(fold), &predicted).map_err(|e| CliError::Internal(e.to_string()))
    };
    let folds: Vec<f64> = if cfg.parallel_folds {
        (0..plan.len()).into_par_iter().map(run_fold).collect::<Result<_>>()?
    } else {
        (0..plan.len()).map(run_fold).collect::<Result<_>>()?
    };
    let result = CvResult::from_folds(folds);
    let output = CrossvalOutput {
        model: kind.to_string(),
        folds: plan.len(),
        seed: cfg.seed,
        fold_accuracies: result.folds,
        mean: result.mean,
    };
    let json = report::to_json(&output);
    let dir = cfg.out_dir()?;
    io::write_bytes(&dir.join("crossval.json"), &json)?;
    cfg.write_echo(dir)?;
    print!("{json}");
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementOutput {
    pub items: usize,
    pub annotators: usize,
    pub kappa: f64,
    pub mismatches: u64,
    pub mismatch_pct: f64,
}

pub fn agreement(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg, RunConfig::require(&cfg.corpus, "corpus")?)?;
    let annotations = io::load_annotations(RunConfig::require(&cfg.annotations, "annotations")?)?;
    let mut items = Vec::with_capacity(annotations.len());
    for (id, ratings) in annotations {
        let review = corpus
            .get(&id)
            .ok_or_else(|| CliError::data(format!("annotated review {id:?} is not in the corpus")))?;
        items.push(AnnotatedReview {
            review: review.clone(),
            annotator_ratings: ratings,
        });
    }
    let set = AnnotationSet::new(items).map_err(|e| CliError::data(e.to_string()))?;
    let kappa = fleiss_kappa(&set.count_matrix()).map_err(|e| CliError::data(e.to_string()))?;
    let mut consolidated = String::new();
    let mut pairs = Vec::with_capacity(set.items().len());
    for item in set.items() {
        let rating = consolidate_annotations(&item.annotator_ratings).map_err(|e| CliError::data(e.to_string()))?;
        let original = item
            .review
            .rating
            .ok_or_else(|| CliError::data(format!("review {:?} has no original rating", item.review.review_id)))?;
        pairs.push((original, rating));
        consolidated.push_str(&serde_json::json!({"id": item.review.review_id, "rating": rating.value()}).to_string());
        consolidated.push('\n');
    }
    let (matrix, mismatches) = mismatch_matrix(&pairs);
    let output = AgreementOutput {
        items: pairs.len(),
        annotators: set.annotators(),
        kappa,
        mismatches,
        mismatch_pct: 100.0 * matrix.mismatch_rate(),
    };
    let dir = cfg.out_dir()?;
    io::write_bytes(&dir.join("agreement.json"), report::to_json(&output))?;
    io::write_bytes(&dir.join("consolidated.jsonl"), consolidated)?;
    io::write_bytes(&dir.join("matrix.csv"), report::mismatch_matrix_csv(&matrix))?;
    cfg.write_echo(dir)?;
    println!("kappa {kappa:.4}");
    Ok(())
}

pub fn synth(cfg: &RunConfig) -> Result<()> {
    let spec = match &cfg.synth_spec {
        Some(p) => {
            serde_json::from_str(&io::read_text(p)?).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?
        }
        None => SynthSpec::default(),
    };
    let corpus = synth::generate(&spec, cfg.count, cfg.seed).map_err(|e| CliError::usage(e.to_string()))?;
    let dir = cfg.out_dir()?;
    io::write_bytes(&dir.join("corpus.jsonl"), io::reviews_to_jsonl(&corpus))?;
    cfg.write_echo(dir)
}
