//! Dependency-based convolutional network.
//!
//! Three convolution channels read windows of word embeddings: the ancestor
//! path of each token, the token with its siblings, and the centred
//! sequential n-gram. Each filter is max-pooled over every position of every
//! sentence in the review, the three pooled vectors are concatenated, passed
//! through dropout and a fully connected softmax layer over the five stars.
//!
//! Parameters are stored as `f32` in one flat vector (see [`Layout`]); all
//! arithmetic runs in `f64`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{StarRating, STAR_COUNT};
use crate::deptree::{self, DependencyTree};
use crate::seed;
use crate::textproc::{self, Vocabulary, PAD_ID};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DcnnError {
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("review has no tokens")]
    EmptyReview,
    #[error("review is empty after preprocessing")]
    EmptyAfterPreprocessing,
    #[error("word id {0} is outside the model vocabulary")]
    VocabMismatch(u32),
    #[error("parameter/gradient/state shapes differ")]
    ShapeMismatch,
    #[error("no training examples")]
    EmptyDataset,
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckpointError {
    #[error("checkpoint version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt checkpoint: {0}")]
    CorruptFile(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DcnnConfig {
    pub embed_dim: usize,
    pub filters: usize,
    pub ancestor_window: usize,
    pub sibling_window: usize,
    pub sequential_window: usize,
    pub dropout: f64,
    /// Adadelta decay.
    pub rho: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for DcnnConfig {
    fn default() -> Self {
        DcnnConfig {
            embed_dim: 100,
            filters: 100,
            ancestor_window: 3,
            sibling_window: 3,
            sequential_window: 3,
            dropout: 0.5,
            rho: 0.95,
            epsilon: 1e-6,
            epochs: 10,
            batch_size: 1,
            seed: 1,
        }
    }
}

impl DcnnConfig {
    pub fn validate(&self) -> Result<(), DcnnError> {
        let positive = [
            ("embed_dim", self.embed_dim),
            ("filters", self.filters),
            ("ancestor_window", self.ancestor_window),
            ("sibling_window", self.sibling_window),
            ("sequential_window", self.sequential_window),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(DcnnError::BadConfig(alloc::format!("{name} must be positive")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(DcnnError::BadConfig("dropout must be in [0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(DcnnError::BadConfig("rho must be in [0, 1)".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(DcnnError::BadConfig("epsilon must be positive".into()));
        }
        Ok(())
    }

    /// Window sizes in channel order.
    pub fn windows(&self) -> [usize; 3] {
        [self.ancestor_window, self.sibling_window, self.sequential_window]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Ancestor,
    Sibling,
    Sequential,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Ancestor, Channel::Sibling, Channel::Sequential];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Offsets into the flat parameter vector, in checkpoint order: the
/// embedding matrix (row per word id), then for each channel the filter
/// weights (row per filter, `k·d` wide) and the filter biases, then the
/// output weights (row per star, `3N` wide) and the output biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub vocab: usize,
    pub dim: usize,
    pub filters: usize,
    pub windows: [usize; 3],
}

impl Layout {
    pub fn embedding(&self, id: usize) -> Range<usize> {
        id * self.dim..(id + 1) * self.dim
    }

    pub fn filter_weights(&self, c: Channel) -> Range<usize> {
        let mut start = self.vocab * self.dim;
        for prev in 0..c.index() {
            start += self.filters * (self.windows[prev] * self.dim + 1);
        }
        start..start + self.filters * self.windows[c.index()] * self.dim
    }

    pub fn filter_biases(&self, c: Channel) -> Range<usize> {
        let w = self.filter_weights(c);
        w.end..w.end + self.filters
    }

    pub fn pooled_len(&self) -> usize {
        3 * self.filters
    }

    pub fn output_weights(&self) -> Range<usize> {
        let start = self.filter_biases(Channel::Sequential).end;
        start..start + STAR_COUNT * self.pooled_len()
    }

    pub fn output_biases(&self) -> Range<usize> {
        let w = self.output_weights();
        w.end..w.end + STAR_COUNT
    }

    pub fn total(&self) -> usize {
        self.output_biases().end
    }

    /// Named parameter groups.
    pub fn groups(&self) -> Vec<(&'static str, Range<usize>)> {
        vec![
            ("embeddings", 0..self.vocab * self.dim),
            (
                "ancestor filters",
                self.filter_weights(Channel::Ancestor).start..self.filter_biases(Channel::Ancestor).end,
            ),
            (
                "sibling filters",
                self.filter_weights(Channel::Sibling).start..self.filter_biases(Channel::Sibling).end,
            ),
            (
                "sequential filters",
                self.filter_weights(Channel::Sequential).start..self.filter_biases(Channel::Sequential).end,
            ),
            ("output", self.output_weights().start..self.total()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcnnModel {
    pub config: DcnnConfig,
    pub vocab: Vocabulary,
    pub params: Vec<f32>,
}

const INIT_RANGE: f32 = 0.05;

/// Uniform `[-0.05, 0.05]` initialisation; the PAD embedding is zero.
pub fn init_model(config: &DcnnConfig, vocab: Vocabulary, seed: u64) -> Result<DcnnModel, DcnnError> {
    config.validate()?;
    let layout = layout_for(config, vocab.len());
    let mut rng = seed::rng(seed, "dcnn-init", 0);
    let mut params: Vec<f32> = (0..layout.total())
        .map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE))
        .collect();
    params[layout.embedding(PAD_ID as usize)].fill(0.0);
    Ok(DcnnModel {
        config: config.clone(),
        vocab,
        params,
    })
}

fn layout_for(config: &DcnnConfig, vocab: usize) -> Layout {
    Layout {
        vocab,
        dim: config.embed_dim,
        filters: config.filters,
        windows: config.windows(),
    }
}

/// A review ready for the network: one tree per sentence whose forms are
/// the normalised words.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedReview {
    pub sentences: Vec<DependencyTree>,
}

impl PreparedReview {
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flat_map(|t| t.forms().iter().map(String::as_str))
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(DependencyTree::len).sum()
    }
}

fn normalize_form(form: &str) -> String {
    textproc::squeeze_elongation(&form.to_lowercase())
}

/// Special characters are removed and words lowercased. With parses, their
/// tokens are used and punctuation nodes contracted out of each tree;
/// otherwise each tokenized sentence becomes a left-headed chain.
pub fn prepare(text: &str, parses: Option<&[DependencyTree]>) -> Result<PreparedReview, DcnnError> {
    let mut sentences = Vec::new();
    match parses {
        Some(trees) => {
            for tree in trees {
                let keep: Vec<bool> = tree
                    .forms()
                    .iter()
                    .map(|f| f.chars().any(char::is_alphanumeric))
                    .collect();
                if let Some(t) = tree.retain(&keep) {
                    let forms = t.forms().iter().map(|f| normalize_form(f)).collect();
                    let heads = t.heads().to_vec();
                    sentences.push(DependencyTree::new(forms, heads).expect("same shape"));
                }
            }
        }
        None => {
            let tokenized = textproc::tokenize(text);
            for sentence in &tokenized.sentences {
                let words: Vec<String> = textproc::strip_special(sentence)
                    .into_iter()
                    .map(|t| t.surface)
                    .collect();
                if !words.is_empty() {
                    sentences.push(deptree::fallback_chain(words).expect("non-empty"));
                }
            }
        }
    }
    if sentences.is_empty() {
        return Err(DcnnError::EmptyAfterPreprocessing);
    }
    Ok(PreparedReview { sentences })
}

/// Word-id windows of every position of a review, per channel; position `p`
/// of channel `c` occupies `ids[c][p*k..(p+1)*k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub ids: [Vec<u32>; 3],
    pub positions: usize,
}

/// Result of a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    /// Max-pooled activations `[ancestor; sibling; sequential]`.
    pub pooled: Vec<f64>,
    /// Position each pooled value came from.
    pub argmax: Vec<usize>,
    /// Pooled values after dropout (or evaluation scaling).
    pub hidden: Vec<f64>,
    /// Dropout keep mask; `None` in evaluation mode.
    pub mask: Option<Vec<bool>>,
    pub scores: [f64; STAR_COUNT],
    pub probabilities: [f64; STAR_COUNT],
}

impl ForwardPass {
    pub fn predicted(&self) -> StarRating {
        crate::classifiers::argmax_lowest(&self.scores)
    }
}

fn dot(w: &[f32], x: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let wc = w.chunks_exact(4);
    let xc = x.chunks_exact(4);
    let (wr, xr) = (wc.remainder(), xc.remainder());
    for (a, b) in wc.zip(xc) {
        for l in 0..4 {
            acc[l] += a[l] as f64 * b[l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (a, b) in wr.iter().zip(xr) {
        s += *a as f64 * b;
    }
    s
}

pub fn softmax(scores: &[f64; STAR_COUNT]) -> [f64; STAR_COUNT] {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p = [0.0; STAR_COUNT];
    for (o, s) in p.iter_mut().zip(scores) {
        *o = libm::exp(s - max);
    }
    let total: f64 = p.iter().sum();
    for o in &mut p {
        *o /= total;
    }
    p
}

impl DcnnModel {
    pub fn layout(&self) -> Layout {
        layout_for(&self.config, self.vocab.len())
    }

    pub fn embedding(&self, id: u32) -> &[f32] {
        &self.params[self.layout().embedding(id as usize)]
    }

    pub fn encode(&self, review: &PreparedReview) -> Result<Encoded, DcnnError> {
        if review.token_count() == 0 {
            return Err(DcnnError::EmptyReview);
        }
        let [ka, ks, kq] = self.config.windows();
        let mut ids: [Vec<u32>; 3] = Default::default();
        for tree in &review.sentences {
            let word_ids: Vec<u32> = tree.forms().iter().map(|f| self.vocab.id(f)).collect();
            for i in 0..tree.len() {
                let anc = deptree::ancestor_window(tree, i, ka).expect("in range");
                ids[0].extend(anc.into_iter().map(|j| word_ids[j]));
                let sib = deptree::sibling_window(tree, i, ks).expect("in range");
                ids[1].extend(sib.into_iter().map(|j| word_ids[j]));
                let seq = deptree::sequential_window(tree.len(), i, kq);
                ids[2].extend(seq.into_iter().map(|j| j.map_or(PAD_ID, |j| word_ids[j])));
            }
        }
        Ok(Encoded {
            ids,
            positions: review.token_count(),
        })
    }

    fn window_input(&self, ids: &[u32], out: &mut Vec<f64>) {
        let layout = self.layout();
        out.clear();
        for &id in ids {
            out.extend(self.params[layout.embedding(id as usize)].iter().map(|&v| v as f64));
        }
    }

    /// Activations `tanh(w·x + b)` of every filter at every position:
    /// `N` rows of `windows.len()` columns.
    pub fn channel_feature_map(&self, channel: Channel, windows: &[Vec<u32>]) -> Result<Vec<Vec<f64>>, DcnnError> {
        let layout = self.layout();
        let k = layout.windows[channel.index()];
        for w in windows {
            if w.len() != k {
                return Err(DcnnError::DimensionMismatch {
                    expected: k,
                    found: w.len(),
                });
            }
            if let Some(&bad) = w.iter().find(|&&id| id as usize >= layout.vocab) {
                return Err(DcnnError::VocabMismatch(bad));
            }
        }
        let weights = &self.params[layout.filter_weights(channel)];
        let biases = &self.params[layout.filter_biases(channel)];
        let width = k * layout.dim;
        let mut map = vec![vec![0.0; windows.len()]; layout.filters];
        let mut x = Vec::with_capacity(width);
        for (p, w) in windows.iter().enumerate() {
            self.window_input(w, &mut x);
            for f in 0..layout.filters {
                let pre = dot(&weights[f * width..(f + 1) * width], &x) + biases[f] as f64;
                map[f][p] = libm::tanh(pre);
            }
        }
        Ok(map)
    }

    fn check_ids(&self, enc: &Encoded) -> Result<(), DcnnError> {
        if enc.positions == 0 {
            return Err(DcnnError::EmptyReview);
        }
        let layout = self.layout();
        for c in 0..3 {
            if enc.ids[c].len() != enc.positions * layout.windows[c] {
                return Err(DcnnError::DimensionMismatch {
                    expected: enc.positions * layout.windows[c],
                    found: enc.ids[c].len(),
                });
            }
            if let Some(&bad) = enc.ids[c].iter().find(|&&id| id as usize >= layout.vocab) {
                return Err(DcnnError::VocabMismatch(bad));
            }
        }
        Ok(())
    }

    /// Max-over-tree pooling of all three channels; first position wins ties.
    fn pool(&self, enc: &Encoded) -> (Vec<f64>, Vec<usize>) {
        let layout = self.layout();
        let n = layout.filters;
        let mut pooled = vec![f64::NEG_INFINITY; 3 * n];
        let mut argmax = vec![0usize; 3 * n];
        let mut x = Vec::new();
        for c in Channel::ALL {
            let k = layout.windows[c.index()];
            let width = k * layout.dim;
            let weights = &self.params[layout.filter_weights(c)];
            let biases = &self.params[layout.filter_biases(c)];
            for p in 0..enc.positions {
                self.window_input(&enc.ids[c.index()][p * k..(p + 1) * k], &mut x);
                for f in 0..n {
                    let a = libm::tanh(dot(&weights[f * width..(f + 1) * width], &x) + biases[f] as f64);
                    let slot = c.index() * n + f;
                    if a > pooled[slot] {
                        pooled[slot] = a;
                        argmax[slot] = p;
                    }
                }
            }
        }
        (pooled, argmax)
    }

    pub fn forward_encoded(&self, enc: &Encoded, train_mode: bool, seed: u64) -> Result<ForwardPass, DcnnError> {
        self.check_ids(enc)?;
        let layout = self.layout();
        let (pooled, argmax) = self.pool(enc);
        let keep = 1.0 - self.config.dropout;
        let (hidden, mask): (Vec<f64>, _) = if train_mode {
            let mut rng = seed::rng(seed, "dropout", 0);
            let mask: Vec<bool> = (0..pooled.len()).map(|_| rng.gen::<f64>() < keep).collect();
            let hidden = pooled
                .iter()
                .zip(&mask)
                .map(|(&v, &m)| if m { v } else { 0.0 })
                .collect();
            (hidden, Some(mask))
        } else {
            (pooled.iter().map(|v| v * keep).collect(), None)
        };
        let w = &self.params[layout.output_weights()];
        let b = &self.params[layout.output_biases()];
        let h = layout.pooled_len();
        let mut scores = [0.0; STAR_COUNT];
        for (j, s) in scores.iter_mut().enumerate() {
            *s = dot(&w[j * h..(j + 1) * h], &hidden) + b[j] as f64;
        }
        Ok(ForwardPass {
            probabilities: softmax(&scores),
            pooled,
            argmax,
            hidden,
            mask,
            scores,
        })
    }

    pub fn forward(&self, review: &PreparedReview, train_mode: bool, seed: u64) -> Result<ForwardPass, DcnnError> {
        self.forward_encoded(&self.encode(review)?, train_mode, seed)
    }

    /// Cross-entropy loss and its gradient (in parameter layout) for one
    /// example, with the dropout mask drawn from `seed`.
    pub fn loss_and_grads(&self, enc: &Encoded, label: StarRating, seed: u64) -> Result<(f64, Vec<f64>), DcnnError> {
        let mut grads = vec![0.0; self.params.len()];
        let loss = self.accumulate_grads(enc, label, seed, &mut grads)?;
        Ok((loss, grads))
    }

    fn accumulate_grads(
        &self,
        enc: &Encoded,
        label: StarRating,
        seed: u64,
        grads: &mut [f64],
    ) -> Result<f64, DcnnError> {
        let fwd = self.forward_encoded(enc, true, seed)?;
        let layout = self.layout();
        let h = layout.pooled_len();
        let n = layout.filters;
        let y = label.index();
        let loss = -libm::log(fwd.probabilities[y].max(f64::MIN_POSITIVE));

        let mut d_scores = fwd.probabilities;
        d_scores[y] -= 1.0;
        let w_out = &self.params[layout.output_weights()];
        let ow = layout.output_weights().start;
        let ob = layout.output_biases().start;
        let mut d_hidden = vec![0.0; h];
        for j in 0..STAR_COUNT {
            grads[ob + j] += d_scores[j];
            for i in 0..h {
                grads[ow + j * h + i] += d_scores[j] * fwd.hidden[i];
                d_hidden[i] += d_scores[j] * w_out[j * h + i] as f64;
            }
        }
        let mask = fwd.mask.as_ref().expect("train mode");
        let mut x = Vec::new();
        for c in Channel::ALL {
            let k = layout.windows[c.index()];
            let width = k * layout.dim;
            let fw = layout.filter_weights(c).start;
            let fb = layout.filter_biases(c).start;
            for f in 0..n {
                let slot = c.index() * n + f;
                if !mask[slot] {
                    continue;
                }
                let a = fwd.pooled[slot];
                let d_pre = d_hidden[slot] * (1.0 - a * a);
                if d_pre == 0.0 {
                    continue;
                }
                let p = fwd.argmax[slot];
                let ids = &enc.ids[c.index()][p * k..(p + 1) * k];
                self.window_input(ids, &mut x);
                grads[fb + f] += d_pre;
                let row = fw + f * width;
                for (g, xv) in grads[row..row + width].iter_mut().zip(&x) {
                    *g += d_pre * xv;
                }
                for (j, &id) in ids.iter().enumerate() {
                    if id == PAD_ID {
                        continue;
                    }
                    let e = layout.embedding(id as usize).start;
                    for t in 0..layout.dim {
                        grads[e + t] += d_pre * self.params[row + j * layout.dim + t] as f64;
                    }
                }
            }
        }
        Ok(loss)
    }

    pub fn predict_encoded(&self, enc: &Encoded) -> Result<StarRating, DcnnError> {
        Ok(self.forward_encoded(enc, false, 0)?.predicted())
    }

    /// Star rating for raw review text; without parses each sentence is
    /// treated as a left-headed chain.
    pub fn predict_rating(&self, text: &str, parses: Option<&[DependencyTree]>) -> Result<StarRating, DcnnError> {
        let review = prepare(text, parses)?;
        self.predict_encoded(&self.encode(&review)?)
    }
}

/// Per-parameter adadelta accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct AdadeltaState {
    pub sq_grad: Vec<f64>,
    pub sq_update: Vec<f64>,
}

impl AdadeltaState {
    pub fn new(len: usize) -> Self {
        AdadeltaState {
            sq_grad: vec![0.0; len],
            sq_update: vec![0.0; len],
        }
    }
}

/// Storage type of a parameter vector.
pub trait Param: Copy {
    fn to_f64(self) -> f64;
    fn from_f64(v: f64) -> Self;
}

impl Param for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

impl Param for f64 {
    fn to_f64(self) -> f64 {
        self
    }
    fn from_f64(v: f64) -> Self {
        v
    }
}

/// One adadelta update:
/// `E[g²] ← ρE[g²] + (1−ρ)g²`, `Δx = −√(E[Δx²]+ε)/√(E[g²]+ε)·g`,
/// `E[Δx²] ← ρE[Δx²] + (1−ρ)Δx²`.
pub fn adadelta_step<P: Param>(
    params: &mut [P],
    grads: &[f64],
    state: &mut AdadeltaState,
    rho: f64,
    epsilon: f64,
) -> Result<(), DcnnError> {
    let n = params.len();
    if grads.len() != n || state.sq_grad.len() != n || state.sq_update.len() != n {
        return Err(DcnnError::ShapeMismatch);
    }
    for i in 0..n {
        let g = grads[i];
        let eg = rho * state.sq_grad[i] + (1.0 - rho) * g * g;
        let dx = -libm::sqrt(state.sq_update[i] + epsilon) / libm::sqrt(eg + epsilon) * g;
        state.sq_grad[i] = eg;
        state.sq_update[i] = rho * state.sq_update[i] + (1.0 - rho) * dx * dx;
        if dx != 0.0 {
            params[i] = P::from_f64(params[i].to_f64() + dx);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean training loss per epoch.
    pub loss: Vec<f64>,
    /// Category accuracy on the training set after each epoch.
    pub accuracy: Vec<f64>,
}

/// Category accuracy of the model on encoded examples.
pub fn category_accuracy(model: &DcnnModel, data: &[(Encoded, StarRating)]) -> Result<f64, DcnnError> {
    let mut hits = 0usize;
    for (enc, y) in data {
        if model.predict_encoded(enc)?.category() == y.category() {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

/// Epoch loop with a seeded shuffle per epoch and an adadelta step after
/// every `batch_size` examples (gradients averaged over the batch).
pub fn train(
    mut model: DcnnModel,
    data: &[(PreparedReview, StarRating)],
) -> Result<(DcnnModel, TrainHistory), DcnnError> {
    model.config.validate()?;
    if data.is_empty() {
        return Err(DcnnError::EmptyDataset);
    }
    let encoded: Vec<(Encoded, StarRating)> = data
        .iter()
        .map(|(r, y)| model.encode(r).map(|e| (e, *y)))
        .collect::<Result<_, _>>()?;
    let cfg = model.config.clone();
    let mut state = AdadeltaState::new(model.params.len());
    let mut grads = vec![0.0; model.params.len()];
    let mut history = TrainHistory::default();
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut step = 0u64;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut seed::rng(cfg.seed, "dcnn-epoch", epoch as u64));
        let mut total_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.fill(0.0);
            for &i in batch {
                let (enc, y) = &encoded[i];
                total_loss += model.accumulate_grads(enc, *y, seed::derive(cfg.seed, "dropout", step), &mut grads)?;
                step += 1;
            }
            if batch.len() > 1 {
                let scale = 1.0 / batch.len() as f64;
                grads.iter_mut().for_each(|g| *g *= scale);
            }
            adadelta_step(&mut model.params, &grads, &mut state, cfg.rho, cfg.epsilon)?;
        }
        history.loss.push(total_loss / encoded.len() as f64);
        history.accuracy.push(category_accuracy(&model, &encoded)?);
    }
    Ok((model, history))
}

/// Builds the vocabulary from the training reviews, initialises and trains.
pub fn fit(config: &DcnnConfig, data: &[(PreparedReview, StarRating)]) -> Result<(DcnnModel, TrainHistory), DcnnError> {
    let vocab = Vocabulary::from_documents(data.iter().map(|(r, _)| r.words()), 1);
    let model = init_model(config, vocab, config.seed)?;
    train(model, data)
}

const MAGIC: &[u8; 8] = b"REVDCNN\0";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Serialises a model: magic, version, length-prefixed config JSON,
/// vocabulary (count, then length-prefixed words), parameter count and
/// little-endian `f32` parameters, CRC32 of everything before it.
pub fn encode_checkpoint(model: &DcnnModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let config = serde_json::to_string(&model.config).expect("config serialises");
    put_bytes(&mut out, config.as_bytes());
    out.extend_from_slice(&(model.vocab.len() as u32).to_le_bytes());
    for w in model.vocab.words() {
        put_bytes(&mut out, w.as_bytes());
    }
    out.extend_from_slice(&(model.params.len() as u64).to_le_bytes());
    for p in &model.params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(bytes);
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| CheckpointError::CorruptFile("truncated".into()))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String, CheckpointError> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        core::str::from_utf8(bytes)
            .map(ToString::to_string)
            .map_err(|_| CheckpointError::CorruptFile("invalid utf-8".into()))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<DcnnModel, CheckpointError> {
    let corrupt = |m: &str| CheckpointError::CorruptFile(m.into());
    if bytes.len() < MAGIC.len() + 4 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::VersionMismatch {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    if bytes.len() < 16 {
        return Err(corrupt("truncated"));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let crc = u32::from_le_bytes(trailer.try_into().expect("4 bytes"));
    if crc32fast::hash(body) != crc {
        return Err(corrupt("checksum mismatch"));
    }
    let mut r = Reader { data: body, pos: 12 };
    let config: DcnnConfig =
        serde_json::from_str(&r.string()?).map_err(|e| CheckpointError::CorruptFile(alloc::format!("config: {e}")))?;
    config
        .validate()
        .map_err(|e| CheckpointError::CorruptFile(e.to_string()))?;
    let count = r.u32()? as usize;
    let mut words = Vec::with_capacity(count.min(body.len()));
    for _ in 0..count {
        words.push(r.string()?);
    }
    let vocab = Vocabulary::from_words(words).map_err(|e| CheckpointError::CorruptFile(e.to_string()))?;
    let n = r.u64()? as usize;
    if n != layout_for(&config, vocab.len()).total() {
        return Err(corrupt("parameter count does not match config"));
    }
    let raw = r.take(n.checked_mul(4).ok_or_else(|| corrupt("parameter count overflow"))?)?;
    let params: Vec<f32> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    if r.pos != body.len() {
        return Err(corrupt("trailing bytes"));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(corrupt("non-finite parameter"));
    }
    Ok(DcnnModel { config, vocab, params })
}

#[cfg(test)]
mod tests;
