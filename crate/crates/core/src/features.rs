//! Review representations for the classic classifiers.
//!
//! Three schemas: the eight handcrafted features, sparse TF-IDF weights, and
//! the mean of pre-trained word vectors. The lexicon-based sentence sentiment
//! score also lives here since it feeds one of the handcrafted dimensions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::StarRating;
use crate::resources;
use crate::textproc::{
    content_words, count_syllables_lenient, squeeze_elongation, tokenize, Token, TokenizedReview, Vocabulary,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("lexicon {0:?} is empty")]
    EmptyLexicon(String),
    #[error("sentiment lexicon line {line}: {reason}")]
    BadLexiconLine { line: usize, reason: String },
    #[error("percentile tables have not been fitted")]
    UnfittedStats,
    #[error("review has no sentences")]
    EmptyReview,
    #[error("review has no words")]
    NoWords,
    #[error("percentile table is empty")]
    EmptyTable,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("vector for {word:?} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        word: String,
        expected: usize,
        found: usize,
    },
    #[error("embedding line {line}: {reason}")]
    BadEmbeddingLine { line: usize, reason: String },
}

/// Dense or sparse feature values with a fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureVector {
    Dense(Vec<f64>),
    Sparse(SparseVector),
}

/// Sorted `(index, value)` pairs over `dim` dimensions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    pub dim: usize,
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVector {
    /// Checks that indices are strictly increasing and below `dim`.
    pub fn new(dim: usize, indices: Vec<u32>, values: Vec<f64>) -> Option<Self> {
        let sorted = indices.windows(2).all(|w| w[0] < w[1]);
        let in_range = indices.last().is_none_or(|&i| (i as usize) < dim);
        (sorted && in_range && indices.len() == values.len()).then_some(SparseVector { dim, indices, values })
    }

    pub fn get(&self, i: usize) -> f64 {
        match self.indices.binary_search(&(i as u32)) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }
}

impl FeatureVector {
    pub fn dim(&self) -> usize {
        match self {
            FeatureVector::Dense(v) => v.len(),
            FeatureVector::Sparse(s) => s.dim,
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        match self {
            FeatureVector::Dense(v) => v[i],
            FeatureVector::Sparse(s) => s.get(i),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            FeatureVector::Dense(v) => v.clone(),
            FeatureVector::Sparse(s) => {
                let mut d = vec![0.0; s.dim];
                for (&i, &v) in s.indices.iter().zip(&s.values) {
                    d[i as usize] = v;
                }
                d
            }
        }
    }

    /// Non-zero entries as `(index, value)`.
    pub fn nonzero(&self) -> Vec<(usize, f64)> {
        match self {
            FeatureVector::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(i, x)| (i, *x))
                .collect(),
            FeatureVector::Sparse(s) => s
                .indices
                .iter()
                .zip(&s.values)
                .filter(|(_, x)| **x != 0.0)
                .map(|(i, x)| (*i as usize, *x))
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            FeatureVector::Dense(v) => v.iter().all(|x| x.is_finite()),
            FeatureVector::Sparse(s) => s.values.iter().all(|x| x.is_finite()),
        }
    }
}

/// A named set of lowercase cue words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub name: String,
    entries: BTreeSet<String>,
}

impl Lexicon {
    /// One word per line; entries are lowercased.
    pub fn parse(name: &str, text: &str) -> Result<Self, FeatureError> {
        let entries: BTreeSet<String> = resources::entries(text).map(str::to_lowercase).collect();
        if entries.is_empty() {
            return Err(FeatureError::EmptyLexicon(name.to_string()));
        }
        Ok(Lexicon {
            name: name.to_string(),
            entries,
        })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Word → integer score in `−2..=2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentLexicon {
    scores: BTreeMap<String, i8>,
}

impl SentimentLexicon {
    /// `word<TAB>score` lines.
    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        let mut scores = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| FeatureError::BadLexiconLine {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (word, score) = line.split_once('\t').ok_or_else(|| bad("expected word<TAB>score"))?;
            let score: i8 = score.trim().parse().map_err(|_| bad("score is not an integer"))?;
            if !(-2..=2).contains(&score) {
                return Err(bad("score outside -2..=2"));
            }
            scores.insert(word.trim().to_lowercase(), score);
        }
        if scores.is_empty() {
            return Err(FeatureError::EmptyLexicon("sentiment".into()));
        }
        Ok(SentimentLexicon { scores })
    }

    pub fn score(&self, word: &str) -> i8 {
        self.scores.get(word).copied().unwrap_or(0)
    }
}

/// Lexicons used by the handcrafted features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicons {
    pub positive: Lexicon,
    pub negative: Lexicon,
    pub sentiment: SentimentLexicon,
}

impl Default for Lexicons {
    fn default() -> Self {
        Lexicons {
            positive: Lexicon::parse("positive", resources::POSITIVE_CUES).expect("shipped list"),
            negative: Lexicon::parse("negative", resources::NEGATIVE_CUES).expect("shipped list"),
            sentiment: SentimentLexicon::parse(resources::SENTIMENT).expect("shipped list"),
        }
    }
}

fn lookup_form(t: &Token) -> String {
    squeeze_elongation(&t.lower)
}

/// Score of one sentence on the 1..=5 scale: 3 plus the clamped lexicon sum.
pub fn sentence_sentiment(sentence: &[Token], lex: &SentimentLexicon) -> u8 {
    let sum: i32 = sentence.iter().map(|t| i32::from(lex.score(&lookup_form(t)))).sum();
    (3 + sum.clamp(-2, 2)) as u8
}

/// Rounded mean of the per-sentence scores.
pub fn sentiment_score(review: &TokenizedReview, lex: &SentimentLexicon) -> Result<StarRating, FeatureError> {
    if review.sentences.is_empty() {
        return Err(FeatureError::EmptyReview);
    }
    let total: u32 = review
        .sentences
        .iter()
        .map(|s| u32::from(sentence_sentiment(s, lex)))
        .sum();
    Ok(StarRating::from_mean(f64::from(total) / review.sentences.len() as f64))
}

fn is_word(t: &Token) -> bool {
    t.surface.chars().any(char::is_alphabetic)
}

/// Flesch-Kincaid grade level:
/// `0.39·(words/sentences) + 11.8·(syllables/words) − 15.59`.
///
/// Words are tokens with at least one letter; sentences without words are
/// not counted.
pub fn readability(review: &TokenizedReview) -> Result<f64, FeatureError> {
    let mut words = 0usize;
    let mut sentences = 0usize;
    let mut syllables = 0usize;
    for s in &review.sentences {
        let before = words;
        for t in s.iter().filter(|t| is_word(t)) {
            words += 1;
            syllables += count_syllables_lenient(&t.surface);
        }
        if words > before {
            sentences += 1;
        }
    }
    if words == 0 {
        return Err(FeatureError::NoWords);
    }
    let (w, s, y) = (words as f64, sentences as f64, syllables as f64);
    Ok(0.39 * (w / s) + 11.8 * (y / w) - 15.59)
}

/// Midrank percentile of `value` within a sorted table:
/// `(#less + ½·#equal) / n`.
pub fn percentile_scale(value: f64, table: &[f64]) -> Result<f64, FeatureError> {
    if table.is_empty() {
        return Err(FeatureError::EmptyTable);
    }
    let less = table.partition_point(|&x| x < value);
    let less_eq = table.partition_point(|&x| x <= value);
    let equal = less_eq - less;
    Ok((less as f64 + 0.5 * equal as f64) / table.len() as f64)
}

/// Number of whitespace-delimited words in the raw text.
pub fn review_length(raw_text: &str) -> usize {
    raw_text.split_whitespace().count()
}

/// Percentile tables fitted on a training corpus.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub lengths: Vec<f64>,
    pub readability: Vec<f64>,
}

impl CorpusStats {
    pub fn fit<'a>(texts: impl IntoIterator<Item = &'a str>) -> Result<Self, FeatureError> {
        let mut lengths = Vec::new();
        let mut read = Vec::new();
        for text in texts {
            lengths.push(review_length(text) as f64);
            if let Ok(r) = readability(&tokenize(text)) {
                read.push(r);
            }
        }
        if lengths.is_empty() {
            return Err(FeatureError::EmptyCorpus);
        }
        if read.is_empty() {
            read.push(0.0);
        }
        lengths.sort_by(f64::total_cmp);
        read.sort_by(f64::total_cmp);
        Ok(CorpusStats {
            lengths,
            readability: read,
        })
    }

    pub fn is_fitted(&self) -> bool {
        !self.lengths.is_empty() && !self.readability.is_empty()
    }
}

pub const HANDCRAFTED_NAMES: [&str; 8] = [
    "HasAllCapitalWords",
    "HasNegativeCueWords",
    "HasQuestions",
    "HasExclamation",
    "HasPositiveCueWords",
    "ReviewLength",
    "SentimentScore",
    "ReadabilityScore",
];

const INTERROGATIVES: [&str; 6] = ["why", "when", "where", "what", "how", "who"];

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// The eight handcrafted dimensions, in [`HANDCRAFTED_NAMES`] order.
///
/// Reviews without sentences get a neutral sentiment (0.5) and reviews
/// without words a median readability (0.5).
pub fn handcrafted_features(
    review: &TokenizedReview,
    raw_text: &str,
    lexicons: &Lexicons,
    stats: &CorpusStats,
) -> Result<FeatureVector, FeatureError> {
    if !stats.is_fitted() {
        return Err(FeatureError::UnfittedStats);
    }
    let tokens: Vec<&Token> = review.tokens().collect();
    let all_caps = tokens
        .iter()
        .any(|t| t.is_alphabetic() && t.surface.chars().count() >= 2 && t.surface.chars().all(char::is_uppercase));
    let forms: Vec<String> = tokens.iter().map(|t| lookup_form(t)).collect();
    let negative = forms.iter().any(|w| lexicons.negative.contains(w));
    let positive = forms.iter().any(|w| lexicons.positive.contains(w));
    let question = tokens.iter().any(|t| t.surface == "?")
        || review.sentences.iter().any(|s| {
            s.iter()
                .find(|t| is_word(t))
                .is_some_and(|t| INTERROGATIVES.contains(&t.lower.as_str()))
        });
    let exclamation = raw_text.contains('!');
    let length = percentile_scale(review_length(raw_text) as f64, &stats.lengths)?;
    let sentiment = match sentiment_score(review, &lexicons.sentiment) {
        Ok(s) => (f64::from(s.value()) - 1.0) / 4.0,
        Err(_) => 0.5,
    };
    let read = match readability(review) {
        Ok(r) => percentile_scale(r, &stats.readability)?,
        Err(_) => 0.5,
    };
    Ok(FeatureVector::Dense(vec![
        flag(all_caps),
        flag(negative),
        flag(question),
        flag(exclamation),
        flag(positive),
        length,
        sentiment,
        read,
    ]))
}

/// Document frequencies over a training corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdfModel {
    pub vocabulary: Vocabulary,
    /// Indexed by term index (vocabulary id − 2).
    pub document_frequency: Vec<u32>,
    pub documents: u32,
}

const FIRST_TERM: u32 = 2;

impl TfIdfModel {
    /// Fits on bags of words (typically [`content_words`]).
    pub fn fit<D: AsRef<[String]>>(docs: &[D]) -> Result<Self, FeatureError> {
        if docs.is_empty() {
            return Err(FeatureError::EmptyCorpus);
        }
        let vocabulary = Vocabulary::from_documents(docs.iter().map(|d| d.as_ref().iter()), 1);
        let mut df = vec![0u32; vocabulary.len() - FIRST_TERM as usize];
        for d in docs {
            let seen: BTreeSet<u32> = d.as_ref().iter().filter_map(|w| vocabulary.get(w)).collect();
            for id in seen {
                df[(id - FIRST_TERM) as usize] += 1;
            }
        }
        Ok(TfIdfModel {
            vocabulary,
            document_frequency: df,
            documents: docs.len() as u32,
        })
    }

    pub fn dim(&self) -> usize {
        self.document_frequency.len()
    }

    /// `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, term: usize) -> f64 {
        let n = f64::from(self.documents);
        let df = f64::from(self.document_frequency[term]);
        libm::log((1.0 + n) / (1.0 + df)) + 1.0
    }

    pub fn term_index(&self, word: &str) -> Option<usize> {
        self.vocabulary
            .get(word)
            .filter(|&id| id >= FIRST_TERM)
            .map(|id| (id - FIRST_TERM) as usize)
    }

    /// `tf · idf` with `tf = count / |d|`; unseen terms are ignored.
    pub fn transform(&self, words: &[String]) -> FeatureVector {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for w in words {
            if let Some(t) = self.term_index(w) {
                *counts.entry(t).or_default() += 1;
            }
        }
        let len = words.len() as f64;
        let mut s = SparseVector {
            dim: self.dim(),
            ..SparseVector::default()
        };
        for (t, c) in counts {
            s.indices.push(t as u32);
            s.values.push(f64::from(c) / len * self.idf(t));
        }
        FeatureVector::Sparse(s)
    }
}

/// Pre-trained word vectors of one dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f32>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, word: String, v: Vec<f32>) -> Result<(), FeatureError> {
        if self.vectors.is_empty() && self.dim == 0 {
            self.dim = v.len();
        }
        if v.len() != self.dim {
            return Err(FeatureError::DimensionMismatch {
                word,
                expected: self.dim,
                found: v.len(),
            });
        }
        self.vectors.insert(word, v);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Parses one `word v1 … vd` line.
    pub fn parse_line(line: &str, line_no: usize) -> Result<(String, Vec<f32>), FeatureError> {
        let mut parts = line.split_whitespace();
        let word = parts.next().ok_or(FeatureError::BadEmbeddingLine {
            line: line_no,
            reason: "empty line".into(),
        })?;
        let v = parts
            .map(|p| p.parse::<f32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| FeatureError::BadEmbeddingLine {
                line: line_no,
                reason: "non-numeric component".into(),
            })?;
        if v.is_empty() {
            return Err(FeatureError::BadEmbeddingLine {
                line: line_no,
                reason: "no vector components".into(),
            });
        }
        Ok((word.to_string(), v))
    }

    /// Parses a whole text word-vector file; the first line fixes `d`.
    pub fn from_text(text: &str) -> Result<Self, FeatureError> {
        let mut t = EmbeddingTable::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (w, v) = Self::parse_line(line, i + 1)?;
            t.insert(w, v)?;
        }
        Ok(t)
    }
}

/// Mean of the vectors of the in-table words. The flag is true when no word
/// was found (the vector is then all zeros).
///
/// Vectors are summed in sorted word order so the result does not depend on
/// token order.
pub fn embed_review_mean(words: &[String], table: &EmbeddingTable) -> (FeatureVector, bool) {
    let mut hits: Vec<&str> = words
        .iter()
        .map(String::as_str)
        .filter(|w| table.get(w).is_some())
        .collect();
    hits.sort_unstable();
    let mut mean = vec![0.0f64; table.dim()];
    for w in &hits {
        for (m, &x) in mean.iter_mut().zip(table.get(w).unwrap_or(&[])) {
            *m += f64::from(x);
        }
    }
    if !hits.is_empty() {
        let n = hits.len() as f64;
        for m in &mut mean {
            *m /= n;
        }
    }
    (FeatureVector::Dense(mean), hits.is_empty())
}

/// Convenience: tokenized content words of raw text.
pub fn words_of(text: &str) -> Vec<String> {
    content_words(&tokenize(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats() -> CorpusStats {
        CorpusStats::fit(["short one", "a somewhat longer review of this app here", "ok"]).unwrap()
    }

    fn feats(text: &str) -> Vec<f64> {
        handcrafted_features(&tokenize(text), text, &Lexicons::default(), &stats())
            .unwrap()
            .to_dense()
    }

    #[test]
    fn handcrafted_examples() {
        assert_eq!(feats("NOTIFICATIONS STOPPED WORKING")[0], 1.0);
        let f = feats("awesome app!");
        assert_eq!(f[3], 1.0);
        assert_eq!(f[4], 1.0);
        assert_eq!(feats("Why are there so many updates?")[2], 1.0);
        assert_eq!(feats("why is it slow")[2], 1.0);
        assert_eq!(feats("I like it")[0], 0.0);
        assert_eq!(feats("app keeps crashing and freezeeeees")[1], 1.0);
    }

    #[test]
    fn unfitted_stats_rejected() {
        let r = handcrafted_features(&tokenize("x"), "x", &Lexicons::default(), &CorpusStats::default());
        assert_eq!(r, Err(FeatureError::UnfittedStats));
    }

    #[test]
    fn sentiment_examples() {
        let lex = SentimentLexicon::parse("great\t2\nok\t1\nbad\t-1\n").unwrap();
        let s = |t: &str| sentiment_score(&tokenize(t), &lex).unwrap().value();
        assert_eq!(s("It is an app."), 3);
        // 4 and 5 average to 4.5, rounded up.
        assert_eq!(s("It is ok. It is great."), 5);
        assert_eq!(s("Nothing here. Nor here."), 3);
        assert_eq!(s("bad bad bad bad"), 1);
        assert_eq!(sentiment_score(&tokenize(""), &lex), Err(FeatureError::EmptyReview));
        assert!(SentimentLexicon::parse("x\t3\n").is_err());
        assert!(SentimentLexicon::parse("x 1\n").is_err());
    }

    #[test]
    fn readability_formula() {
        // Ten one-syllable words in one sentence.
        let r = readability(&tokenize("the cat sat on a mat and it was fun")).unwrap();
        assert!((r - 0.11).abs() < 1e-12, "{r}");
        let once = readability(&tokenize("Nice app but annoying ads.")).unwrap();
        let twice = readability(&tokenize("Nice app but annoying ads. Nice app but annoying ads.")).unwrap();
        assert!((once - twice).abs() < 1e-12);
        assert_eq!(readability(&tokenize("")), Err(FeatureError::NoWords));
        assert_eq!(readability(&tokenize("!!! :)")), Err(FeatureError::NoWords));
    }

    #[test]
    fn percentiles() {
        let table: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(percentile_scale(6.5, &table), Ok(0.6));
        assert_eq!(percentile_scale(0.0, &table), Ok(0.0));
        assert_eq!(percentile_scale(11.0, &table), Ok(1.0));
        assert_eq!(percentile_scale(3.0, &[3.0]), Ok(0.5));
        assert_eq!(percentile_scale(1.0, &[]), Err(FeatureError::EmptyTable));
    }

    #[test]
    fn tfidf_hand_values() {
        let docs = vec![words_of("good app"), words_of("bad app")];
        let m = TfIdfModel::fit(&docs).unwrap();
        let app = m.term_index("app").unwrap();
        assert_eq!(m.idf(app), 1.0);
        // tf = 1/2, idf = ln(3/2) + 1
        let good = m.term_index("good").unwrap();
        let v = m.transform(&docs[0]);
        let expected = 0.5 * (libm::log(1.5) + 1.0);
        assert!((v.get(good) - expected).abs() < 1e-15);
        assert!((v.get(app) - 0.5).abs() < 1e-15);
        let unseen = m.transform(&words_of("zebra quokka"));
        assert!(unseen.nonzero().is_empty());
        assert!(m.transform(&[]).nonzero().is_empty());
        assert!(TfIdfModel::fit::<Vec<String>>(&[]).is_err());
    }

    #[test]
    fn embedding_mean() {
        let t = EmbeddingTable::from_text("good 1 2\nbad -1 -2\n").unwrap();
        let w = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let (v, warn) = embed_review_mean(&w(&["good"]), &t);
        assert_eq!(v.to_dense(), vec![1.0, 2.0]);
        assert!(!warn);
        let (v, _) = embed_review_mean(&w(&["good", "bad"]), &t);
        assert_eq!(v.to_dense(), vec![0.0, 0.0]);
        let (v, warn) = embed_review_mean(&w(&["zzz"]), &t);
        assert_eq!(v.to_dense(), vec![0.0, 0.0]);
        assert!(warn);
        assert!(matches!(
            EmbeddingTable::from_text("a 1 2\nb 1\n"),
            Err(FeatureError::DimensionMismatch { .. })
        ));
    }
}
