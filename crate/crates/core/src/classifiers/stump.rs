use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{best_threshold, class_weights, normalized, Scores};
use crate::corpus::StarRating;
use crate::features::FeatureVector;

/// One-level tree: `x[dim] <= threshold` picks the left leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionStump {
    pub dim: usize,
    pub threshold: f64,
    pub left: Scores,
    pub right: Scores,
}

impl DecisionStump {
    /// Weighted information-gain split over all dimensions. Without any
    /// usable split both leaves carry the overall class distribution.
    pub fn fit(columns: &[Vec<f64>], labels: &[StarRating], weights: &[f64]) -> Self {
        let rows: Vec<usize> = (0..labels.len()).collect();
        let mut best: Option<(f64, usize, f64)> = None;
        for (d, col) in columns.iter().enumerate() {
            if let Some((gain, t)) = best_threshold(col, labels, weights, &rows, 1) {
                if best.is_none_or(|(g, _, _)| gain > g + 1e-12) {
                    best = Some((gain, d, t));
                }
            }
        }
        let all = normalized(class_weights(labels, weights, &rows));
        match best {
            None => DecisionStump {
                dim: 0,
                threshold: f64::INFINITY,
                left: all,
                right: all,
            },
            Some((_, dim, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| columns[dim][i] <= threshold);
                DecisionStump {
                    dim,
                    threshold,
                    left: normalized(class_weights(labels, weights, &l)),
                    right: normalized(class_weights(labels, weights, &r)),
                }
            }
        }
    }

    pub fn scores(&self, x: &FeatureVector) -> Scores {
        if self.threshold.is_infinite() || x.get(self.dim) <= self.threshold {
            self.left
        } else {
            self.right
        }
    }
}
