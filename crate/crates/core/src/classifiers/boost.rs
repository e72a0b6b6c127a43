use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{argmax_lowest, Dataset, DecisionStump, Scores};
use crate::corpus::STAR_COUNT;
use crate::features::FeatureVector;

/// Weighted error at or above which a round is rejected (`1 - 1/K`).
const MAX_ERROR: f64 = 1.0 - 1.0 / STAR_COUNT as f64;
/// Vote weight given to a stump with zero training error.
const PERFECT_ALPHA: f64 = 1e3;

/// Multi-class AdaBoost (SAMME) over decision stumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stumps: Vec<(f64, DecisionStump)>,
}

impl AdaBoost {
    pub fn fit(data: &Dataset, rounds: usize) -> Self {
        Self::fit_with_history(data, rounds).0
    }

    /// Also returns the ensemble's training error after each accepted round.
    pub fn fit_with_history(data: &Dataset, rounds: usize) -> (Self, Vec<f64>) {
        let n = data.len();
        let columns = data.columns();
        let labels = data.labels();
        let mut weights = alloc::vec![1.0 / n as f64; n];
        let mut model = AdaBoost { stumps: Vec::new() };
        let mut history = Vec::new();
        for _ in 0..rounds {
            let stump = DecisionStump::fit(&columns, &labels, &weights);
            let preds: Vec<_> = data.rows.iter().map(|(x, _)| argmax_lowest(&stump.scores(x))).collect();
            let err: f64 = (0..n).filter(|&i| preds[i] != labels[i]).map(|i| weights[i]).sum();
            if err >= MAX_ERROR {
                break;
            }
            if err <= 0.0 {
                model.stumps.push((PERFECT_ALPHA, stump));
                history.push(model.training_error(data));
                break;
            }
            let alpha = libm::log((1.0 - err) / err) + libm::log(STAR_COUNT as f64 - 1.0);
            for i in 0..n {
                if preds[i] != labels[i] {
                    weights[i] *= libm::exp(alpha);
                }
            }
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            model.stumps.push((alpha, stump));
            history.push(model.training_error(data));
        }
        if model.stumps.is_empty() {
            let uniform = alloc::vec![1.0; n];
            model
                .stumps
                .push((1.0, DecisionStump::fit(&columns, &labels, &uniform)));
        }
        (model, history)
    }

    fn training_error(&self, data: &Dataset) -> f64 {
        let wrong = data
            .rows
            .iter()
            .filter(|(x, y)| argmax_lowest(&self.scores(x)) != *y)
            .count();
        wrong as f64 / data.len() as f64
    }

    /// Normalized weighted votes.
    pub fn scores(&self, x: &FeatureVector) -> Scores {
        let mut votes = [0.0; STAR_COUNT];
        for (alpha, stump) in &self.stumps {
            votes[argmax_lowest(&stump.scores(x)).index()] += alpha;
        }
        super::normalized(votes)
    }
}
