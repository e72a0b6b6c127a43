use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Dataset, Scores};
use crate::corpus::STAR_COUNT;
use crate::features::FeatureVector;

const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    /// Class priors; zero for classes absent from training.
    pub priors: Scores,
    /// `means[class][dim]`.
    pub means: Vec<Vec<f64>>,
    /// `variances[class][dim]`, floored at 1e-9.
    pub variances: Vec<Vec<f64>>,
}

impl NaiveBayes {
    pub fn fit(data: &Dataset) -> Self {
        let dim = data.schema.dim;
        let mut counts = [0usize; STAR_COUNT];
        let mut means = vec![vec![0.0; dim]; STAR_COUNT];
        for (x, y) in &data.rows {
            counts[y.index()] += 1;
            for (d, v) in x.nonzero() {
                means[y.index()][d] += v;
            }
        }
        for c in 0..STAR_COUNT {
            if counts[c] > 0 {
                for m in &mut means[c] {
                    *m /= counts[c] as f64;
                }
            }
        }
        let mut variances = vec![vec![0.0; dim]; STAR_COUNT];
        for (x, y) in &data.rows {
            let c = y.index();
            for d in 0..dim {
                let diff = x.get(d) - means[c][d];
                variances[c][d] += diff * diff;
            }
        }
        for c in 0..STAR_COUNT {
            for v in &mut variances[c] {
                if counts[c] > 0 {
                    *v /= counts[c] as f64;
                }
                *v = v.max(VARIANCE_FLOOR);
            }
        }
        let n = data.len() as f64;
        let mut priors = [0.0; STAR_COUNT];
        for c in 0..STAR_COUNT {
            priors[c] = counts[c] as f64 / n;
        }
        NaiveBayes {
            priors,
            means,
            variances,
        }
    }

    /// Posterior probabilities.
    pub fn scores(&self, x: &FeatureVector) -> Scores {
        let dense = x.to_dense();
        let mut log_post = [f64::NEG_INFINITY; STAR_COUNT];
        for c in 0..STAR_COUNT {
            if self.priors[c] <= 0.0 {
                continue;
            }
            let mut lp = libm::log(self.priors[c]);
            for (d, &v) in dense.iter().enumerate() {
                let var = self.variances[c][d];
                let diff = v - self.means[c][d];
                lp -= 0.5 * libm::log(2.0 * core::f64::consts::PI * var) + diff * diff / (2.0 * var);
            }
            log_post[c] = lp;
        }
        let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = [0.0; STAR_COUNT];
        for c in 0..STAR_COUNT {
            if log_post[c].is_finite() {
                s[c] = libm::exp(log_post[c] - max);
            }
        }
        super::normalized(s)
    }
}
