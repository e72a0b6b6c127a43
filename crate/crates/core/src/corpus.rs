//! Reviews, star ratings and the Good/Neutral/Bad mismatch rule.
//!
//! A mismatch is counted only when a rating moves between categories: an
//! original 5 against an annotated 4 is tolerated, an original 5 against an
//! annotated 3 is not.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of distinct star values.
pub const STAR_COUNT: usize = 5;

/// A star rating in `1..=5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct StarRating(u8);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rating {0} is outside 1..=5")]
pub struct RatingOutOfRange(pub i64);

impl StarRating {
    pub const ALL: [StarRating; STAR_COUNT] = [
        StarRating(1),
        StarRating(2),
        StarRating(3),
        StarRating(4),
        StarRating(5),
    ];

    pub fn new(value: i64) -> Result<Self, RatingOutOfRange> {
        if (1..=5).contains(&value) {
            Ok(StarRating(value as u8))
        } else {
            Err(RatingOutOfRange(value))
        }
    }

    /// Builds a rating from a 0-based class index (0 → 1 star).
    pub fn from_index(index: usize) -> Option<Self> {
        (index < STAR_COUNT).then(|| StarRating(index as u8 + 1))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// 0-based class index (1 star → 0).
    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }

    pub fn category(self) -> RatingCategory {
        category_of(self)
    }

    /// Rounds half away from zero and clamps into `1..=5`.
    pub fn from_mean(mean: f64) -> Self {
        let r = crate::round_half_away(mean);
        let r = if r.is_nan() { 3.0 } else { r.clamp(1.0, 5.0) };
        StarRating(r as u8)
    }
}

impl TryFrom<i64> for StarRating {
    type Error = RatingOutOfRange;
    fn try_from(v: i64) -> Result<Self, Self::Error> {
        StarRating::new(v)
    }
}

impl From<StarRating> for u8 {
    fn from(r: StarRating) -> u8 {
        r.0
    }
}

impl fmt::Display for StarRating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Coarse bucket over star ratings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RatingCategory {
    Bad,
    Neutral,
    Good,
}

impl fmt::Display for RatingCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RatingCategory::Bad => "Bad",
            RatingCategory::Neutral => "Neutral",
            RatingCategory::Good => "Good",
        })
    }
}

/// 5,4 → Good; 3 → Neutral; 1,2 → Bad.
pub fn category_of(r: StarRating) -> RatingCategory {
    match r.0 {
        4 | 5 => RatingCategory::Good,
        3 => RatingCategory::Neutral,
        _ => RatingCategory::Bad,
    }
}

/// True iff the two ratings fall in different categories.
pub fn is_mismatch(original: StarRating, other: StarRating) -> bool {
    category_of(original) != category_of(other)
}

/// One app review. `rating` is absent for unrated prediction inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub app_id: String,
    pub review_id: String,
    pub text: String,
    pub rating: Option<StarRating>,
}

impl Review {
    pub fn new(
        app_id: impl Into<String>,
        review_id: impl Into<String>,
        text: impl Into<String>,
        rating: Option<StarRating>,
    ) -> Self {
        Review {
            app_id: app_id.into(),
            review_id: review_id.into(),
            text: text.into(),
            rating,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("duplicate review id {0:?}")]
    DuplicateId(String),
    #[error("review {0:?} has empty text")]
    EmptyText(String),
}

/// Whether empty review texts are accepted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadMode {
    pub allow_empty_text: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct AppEntry {
    app_id: String,
    members: Vec<usize>,
}

/// Reviews in insertion order with per-app and per-id indexes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    reviews: Vec<Review>,
    apps: Vec<AppEntry>,
    app_pos: BTreeMap<String, usize>,
    id_pos: BTreeMap<String, usize>,
    mode: LoadMode,
}

impl Corpus {
    pub fn new(mode: LoadMode) -> Self {
        Corpus {
            mode,
            ..Corpus::default()
        }
    }

    pub fn from_reviews(reviews: impl IntoIterator<Item = Review>, mode: LoadMode) -> Result<Self, CorpusError> {
        let mut c = Corpus::new(mode);
        for r in reviews {
            c.push(r)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, review: Review) -> Result<(), CorpusError> {
        if self.id_pos.contains_key(&review.review_id) {
            return Err(CorpusError::DuplicateId(review.review_id));
        }
        if !self.mode.allow_empty_text && review.text.trim().is_empty() {
            return Err(CorpusError::EmptyText(review.review_id));
        }
        let pos = self.reviews.len();
        self.id_pos.insert(review.review_id.clone(), pos);
        match self.app_pos.get(&review.app_id) {
            Some(&a) => self.apps[a].members.push(pos),
            None => {
                self.app_pos.insert(review.app_id.clone(), self.apps.len());
                self.apps.push(AppEntry {
                    app_id: review.app_id.clone(),
                    members: alloc::vec![pos],
                });
            }
        }
        self.reviews.push(review);
        Ok(())
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn get(&self, review_id: &str) -> Option<&Review> {
        self.id_pos.get(review_id).map(|&i| &self.reviews[i])
    }

    pub fn position(&self, review_id: &str) -> Option<usize> {
        self.id_pos.get(review_id).copied()
    }

    /// App ids in first-seen order.
    pub fn apps(&self) -> impl Iterator<Item = &str> {
        self.apps.iter().map(|a| a.app_id.as_str())
    }

    /// Reviews of one app in insertion order.
    pub fn app_reviews<'a>(&'a self, app_id: &str) -> impl Iterator<Item = &'a Review> + 'a {
        let members: &'a [usize] = self
            .app_pos
            .get(app_id)
            .map(|&a| self.apps[a].members.as_slice())
            .unwrap_or(&[]);
        members.iter().map(move |&i| &self.reviews[i])
    }

    /// Review ids of one app in insertion order.
    pub fn app_review_ids<'a>(&'a self, app_id: &str) -> impl Iterator<Item = &'a str> + 'a {
        self.app_reviews(app_id).map(|r| r.review_id.as_str())
    }

    /// Sub-corpus of the given positions, in the order given.
    pub fn subset(&self, positions: &[usize]) -> Corpus {
        let mut c = Corpus::new(self.mode);
        for &p in positions {
            c.push(self.reviews[p].clone())
                .expect("subset of a valid corpus stays valid");
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgreementError {
    #[error("annotation list is empty")]
    EmptyAnnotationList,
    #[error("item {item} has {found} annotations, expected {expected}")]
    InconsistentAnnotatorCount { item: usize, expected: usize, found: usize },
    #[error("at least two annotators are required, found {0}")]
    TooFewAnnotators(usize),
    #[error("no items to score")]
    NoItems,
}

/// A review together with the ratings its annotators assigned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedReview {
    pub review: Review,
    pub annotator_ratings: Vec<StarRating>,
}

/// Annotated reviews sharing one annotator count `A ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSet {
    annotators: usize,
    items: Vec<AnnotatedReview>,
}

impl AnnotationSet {
    pub fn new(items: Vec<AnnotatedReview>) -> Result<Self, AgreementError> {
        let first = items.first().ok_or(AgreementError::NoItems)?;
        let annotators = first.annotator_ratings.len();
        if annotators < 2 {
            return Err(AgreementError::TooFewAnnotators(annotators));
        }
        for (item, a) in items.iter().enumerate() {
            if a.annotator_ratings.len() != annotators {
                return Err(AgreementError::InconsistentAnnotatorCount {
                    item,
                    expected: annotators,
                    found: a.annotator_ratings.len(),
                });
            }
        }
        Ok(AnnotationSet { annotators, items })
    }

    pub fn annotators(&self) -> usize {
        self.annotators
    }

    pub fn items(&self) -> &[AnnotatedReview] {
        &self.items
    }

    /// Item × star count matrix for [`fleiss_kappa`].
    pub fn count_matrix(&self) -> Vec<[u32; STAR_COUNT]> {
        self.items.iter().map(|a| rating_counts(&a.annotator_ratings)).collect()
    }
}

/// Number of annotators choosing each star value.
pub fn rating_counts(ratings: &[StarRating]) -> [u32; STAR_COUNT] {
    let mut counts = [0u32; STAR_COUNT];
    for r in ratings {
        counts[r.index()] += 1;
    }
    counts
}

/// Majority rating when at least two annotators agree and no other value ties
/// the top count; otherwise the mean rounded half away from zero.
pub fn consolidate_annotations(ratings: &[StarRating]) -> Result<StarRating, AgreementError> {
    if ratings.is_empty() {
        return Err(AgreementError::EmptyAnnotationList);
    }
    let counts = rating_counts(ratings);
    let top = *counts.iter().max().unwrap_or(&0);
    let holders: Vec<usize> = (0..STAR_COUNT).filter(|&i| counts[i] == top).collect();
    if top >= 2 && holders.len() == 1 {
        return Ok(StarRating::ALL[holders[0]]);
    }
    let sum: u32 = ratings.iter().map(|r| u32::from(r.value())).sum();
    Ok(StarRating::from_mean(f64::from(sum) / ratings.len() as f64))
}

/// Fleiss' kappa over an item × category count matrix.
///
/// Every row must sum to the same annotator count `A ≥ 2`. When every
/// annotation falls in a single category the chance agreement is 1 and the
/// ratio is 0/0; that case is defined as perfect agreement (1.0).
pub fn fleiss_kappa<const C: usize>(rows: &[[u32; C]]) -> Result<f64, AgreementError> {
    let first = rows.first().ok_or(AgreementError::NoItems)?;
    let a: u32 = first.iter().sum();
    if a < 2 {
        return Err(AgreementError::TooFewAnnotators(a as usize));
    }
    for (item, row) in rows.iter().enumerate() {
        let s: u32 = row.iter().sum();
        if s != a {
            return Err(AgreementError::InconsistentAnnotatorCount {
                item,
                expected: a as usize,
                found: s as usize,
            });
        }
    }
    let n_items = rows.len() as f64;
    let a = f64::from(a);

    let mut totals = [0u64; C];
    let mut p_bar = 0.0;
    for row in rows {
        let mut sq = 0.0;
        for (j, &c) in row.iter().enumerate() {
            totals[j] += u64::from(c);
            sq += f64::from(c) * f64::from(c);
        }
        p_bar += (sq - a) / (a * (a - 1.0));
    }
    p_bar /= n_items;

    if totals.iter().filter(|&&t| t > 0).count() == 1 {
        return Ok(1.0);
    }
    let grand = n_items * a;
    let p_e: f64 = totals
        .iter()
        .map(|&t| {
            let p = t as f64 / grand;
            p * p
        })
        .sum();
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Counts of (annotated-or-predicted, original) rating pairs.
///
/// `counts[other][original]`: rows are the annotated/predicted rating,
/// columns the original rating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MismatchMatrix {
    pub counts: [[u64; STAR_COUNT]; STAR_COUNT],
    pub total: u64,
}

impl MismatchMatrix {
    pub fn add(&mut self, original: StarRating, other: StarRating) {
        self.counts[other.index()][original.index()] += 1;
        self.total += 1;
    }

    /// Totals per annotated/predicted rating.
    pub fn row_totals(&self) -> [u64; STAR_COUNT] {
        let mut t = [0; STAR_COUNT];
        for (i, row) in self.counts.iter().enumerate() {
            t[i] = row.iter().sum();
        }
        t
    }

    /// Totals per original rating.
    pub fn col_totals(&self) -> [u64; STAR_COUNT] {
        let mut t = [0; STAR_COUNT];
        for row in &self.counts {
            for (j, &c) in row.iter().enumerate() {
                t[j] += c;
            }
        }
        t
    }

    /// Sum of the cells whose row and column categories differ.
    pub fn mismatch_count(&self) -> u64 {
        let mut m = 0;
        for other in StarRating::ALL {
            for original in StarRating::ALL {
                if is_mismatch(original, other) {
                    m += self.counts[other.index()][original.index()];
                }
            }
        }
        m
    }

    pub fn mismatch_rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.mismatch_count() as f64 / self.total as f64
        }
    }
}

/// Tallies `(original, other)` pairs and counts category mismatches.
pub fn mismatch_matrix(pairs: &[(StarRating, StarRating)]) -> (MismatchMatrix, u64) {
    let mut m = MismatchMatrix::default();
    for &(original, other) in pairs {
        m.add(original, other);
    }
    let mismatches = m.mismatch_count();
    (m, mismatches)
}
