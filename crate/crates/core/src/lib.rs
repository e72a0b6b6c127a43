//! Star-rating prediction for app reviews and review-rating mismatch analysis.
//!
//! The crate is `no_std` (with `alloc`). Everything here is a pure function of
//! its inputs and a seed; file formats, the CLI and report rendering live in the
//! `revrate` companion crate.
//!
//! Layout:
//!
//! - [`corpus`]: ratings, categories, the mismatch rule, annotator consolidation
//!   and agreement statistics.
//! - [`textproc`]: tokenization, normalization, syllables, vocabularies.
//! - [`features`]: handcrafted features, TF-IDF, mean word vectors, sentiment.
//! - [`classifiers`]: classic baselines (naive Bayes, stump, 1R, kNN, tree, boosting).
//! - [`deptree`]: dependency trees and the ancestor/sibling/sequential windows.
//! - [`dcnn`]: the dependency-based convolutional network.
//! - [`eval`]: accuracy, k-fold plans, correlation, prevalence reports.
//! - [`pipeline`]: end-to-end text → rating models used by training and CV.
//! - [`synth`]: seeded synthetic review generator.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classifiers;
pub mod corpus;
pub mod dcnn;
pub mod deptree;
pub mod eval;
pub mod features;
pub mod pipeline;
pub mod resources;
pub mod seed;
pub mod synth;
pub mod textproc;

pub use corpus::{Corpus, RatingCategory, Review, StarRating};

/// Rounds half away from zero (2.5 → 3, −2.5 → −3).
pub(crate) fn round_half_away(x: f64) -> f64 {
    libm::round(x)
}
