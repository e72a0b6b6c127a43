//! Run configuration: a JSON config file merged with command-line flags
//! (flags win), echoed back in canonical form next to every output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use revrate_core::classifiers::TrainConfig;
use revrate_core::corpus::LoadMode;
use revrate_core::dcnn::DcnnConfig;
use revrate_core::seed;

use crate::error::{CliError, Result};
use crate::io::{self, Format};

/// Replacement lexicon files; absent entries use the shipped lists.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconPaths {
    pub positive: Option<PathBuf>,
    pub negative: Option<PathBuf>,
    pub sentiment: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Subcommand the config was resolved for.
    pub command: Option<String>,
    pub seed: u64,
    /// Reject empty review texts.
    pub strict: bool,
    pub corpus: Option<PathBuf>,
    pub format: Option<Format>,
    /// Model kind (`train`, `crossval`) or model file (`predict`, `mismatch-report`).
    pub model: Option<String>,
    pub out: Option<PathBuf>,
    pub parses: Option<PathBuf>,
    /// Reviews to score (`predict`).
    pub input: Option<PathBuf>,
    /// Precomputed predictions JSONL (`mismatch-report`).
    pub predictions: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub lexicons: LexiconPaths,
    pub folds: usize,
    pub parallel_folds: bool,
    /// Reviews to generate (`synth`).
    pub count: usize,
    /// Generator settings file (`synth`).
    pub synth_spec: Option<PathBuf>,
    pub baseline: TrainConfig,
    pub dcnn: DcnnConfig,
    /// Seeds of the named random streams, recomputed from `seed` on every
    /// run; recorded for reference only.
    pub sub_seeds: BTreeMap<String, u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            seed: 1,
            strict: true,
            corpus: None,
            format: None,
            model: None,
            out: None,
            parses: None,
            input: None,
            predictions: None,
            annotations: None,
            embeddings: None,
            lexicons: LexiconPaths::default(),
            folds: 10,
            parallel_folds: false,
            count: 1000,
            synth_spec: None,
            baseline: TrainConfig::default(),
            dcnn: DcnnConfig::default(),
            sub_seeds: BTreeMap::new(),
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Model kind (dcnn, handcrafted+j48, tfidf+knn, ...) or a model file.
    #[arg(long)]
    pub model: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CoNLL-U parses keyed by `# review_id = <id> sent = <n>`.
    #[arg(long)]
    pub parses: Option<PathBuf>,
    /// Reject empty review texts (default true).
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    pub strict: Option<bool>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Word vectors, one `word v1 ... vd` per line.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub positive_lexicon: Option<PathBuf>,
    #[arg(long)]
    pub negative_lexicon: Option<PathBuf>,
    /// `word<TAB>score` lines.
    #[arg(long)]
    pub sentiment_lexicon: Option<PathBuf>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Train folds concurrently; results do not depend on it.
    #[arg(long)]
    pub parallel_folds: bool,
    /// Number of reviews to generate.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub synth_spec: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// kNN neighbours.
    #[arg(long)]
    pub k: Option<usize>,
    /// Boosting rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("config: {e}")))
    }

    /// Canonical JSON: fixed key order, two-space indent, trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Loads `--config` (if any), applies the flags and fills the derived
    /// fields.
    pub fn resolve(command: &str, flags: &Flags) -> Result<Self> {
        let mut cfg = match &flags.config {
            Some(p) => RunConfig::from_json(&io::read_text(p)?)?,
            None => RunConfig::default(),
        };
        if let Some(c) = &cfg.command {
            if c != command {
                return Err(CliError::usage(format!(
                    "config was written for `{c}`, not `{command}`"
                )));
            }
        }
        cfg.command = Some(command.to_string());
        macro_rules! take {
            ($($flag:ident => $field:expr),* $(,)?) => {
                $(if let Some(v) = &flags.$flag { $field = v.clone().into(); })*
            };
        }
        take! {
            seed => cfg.seed,
            corpus => cfg.corpus,
            format => cfg.format,
            model => cfg.model,
            out => cfg.out,
            parses => cfg.parses,
            strict => cfg.strict,
            input => cfg.input,
            predictions => cfg.predictions,
            annotations => cfg.annotations,
            embeddings => cfg.embeddings,
            positive_lexicon => cfg.lexicons.positive,
            negative_lexicon => cfg.lexicons.negative,
            sentiment_lexicon => cfg.lexicons.sentiment,
            folds => cfg.folds,
            count => cfg.count,
            synth_spec => cfg.synth_spec,
            epochs => cfg.dcnn.epochs,
            batch_size => cfg.dcnn.batch_size,
            k => cfg.baseline.k,
            rounds => cfg.baseline.rounds,
        }
        cfg.parallel_folds |= flags.parallel_folds;
        cfg.dcnn.seed = cfg.seed;
        cfg.sub_seeds = [
            "dcnn-init",
            "dcnn-epoch",
            "dropout",
            "kfold",
            "synth-review",
            "synth-stars",
        ]
        .into_iter()
        .map(|name| (name.to_string(), seed::derive(cfg.seed, name, 0)))
        .collect();
        Ok(cfg)
    }

    pub fn load_mode(&self) -> LoadMode {
        LoadMode {
            allow_empty_text: !self.strict,
        }
    }

    pub fn require<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
        value
            .as_ref()
            .ok_or_else(|| CliError::usage(format!("--{flag} is required")))
    }

    pub fn out_dir(&self) -> Result<&Path> {
        let dir = RunConfig::require(&self.out, "out")?;
        std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
        Ok(dir)
    }

    /// Writes `config.json` into the output directory.
    pub fn write_echo(&self, dir: &Path) -> Result<()> {
        io::write_bytes(&dir.join("config.json"), self.to_json())
    }
}
