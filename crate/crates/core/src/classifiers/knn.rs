use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Dataset, Scores};
use crate::corpus::{StarRating, STAR_COUNT};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distance {
    Euclidean,
    /// `1 - cos`; a zero vector is at distance 1 from everything.
    Cosine,
}

impl Distance {
    pub fn between(self, a: &FeatureVector, b: &FeatureVector) -> f64 {
        match self {
            Distance::Euclidean => {
                let dim = a.dim().max(b.dim());
                let mut s = 0.0;
                for d in 0..dim {
                    let diff = a.get(d) - b.get(d);
                    s += diff * diff;
                }
                libm::sqrt(s)
            }
            Distance::Cosine => {
                let dot: f64 = a.nonzero().into_iter().map(|(d, v)| v * b.get(d)).sum();
                let na = libm::sqrt(a.nonzero().into_iter().map(|(_, v)| v * v).sum());
                let nb = libm::sqrt(b.nonzero().into_iter().map(|(_, v)| v * v).sum());
                if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    1.0 - dot / (na * nb)
                }
            }
        }
    }
}

/// Instance-based learner; stores the training rows verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub distance: Distance,
    pub rows: Vec<(FeatureVector, StarRating)>,
}

impl Knn {
    pub fn fit(data: &Dataset, k: usize, distance: Distance) -> Self {
        Knn {
            k,
            distance,
            rows: data.rows.clone(),
        }
    }

    /// Vote shares among the `k` nearest rows; equal distances resolve by
    /// training order.
    pub fn scores(&self, x: &FeatureVector) -> Scores {
        let mut near: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, (r, _))| (self.distance.between(x, r), i))
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.min(near.len());
        let mut votes = [0.0; STAR_COUNT];
        for &(_, i) in &near[..k] {
            votes[self.rows[i].1.index()] += 1.0;
        }
        for v in &mut votes {
            *v /= k as f64;
        }
        votes
    }
}
