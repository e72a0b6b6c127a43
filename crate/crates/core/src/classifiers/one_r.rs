use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{argmax_lowest, normalized, Dataset, Scores};
use crate::corpus::STAR_COUNT;
use crate::features::FeatureVector;

/// Holte's 1R: the single dimension whose binned majority rule makes the
/// fewest training errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneR {
    pub dim: usize,
    /// Ascending bin boundaries; bin `b` holds values `<= cuts[b]`, the last
    /// bin everything above.
    pub cuts: Vec<f64>,
    /// Class distribution per bin (`cuts.len() + 1` entries).
    pub bins: Vec<Scores>,
}

/// Equal-frequency cut points. A cut falling inside a run of equal values
/// moves forward to the next value change, so low-cardinality dimensions
/// still get their natural boundaries.
fn equal_frequency_cuts(sorted: &[f64], bins: usize) -> Vec<f64> {
    let n = sorted.len();
    let mut cuts: Vec<f64> = Vec::new();
    for b in 1..bins.min(n) {
        let mut p = b * n / bins.min(n);
        while p < n && sorted[p - 1] == sorted[p] {
            p += 1;
        }
        if p >= n {
            break;
        }
        let cut = sorted[p - 1] + (sorted[p] - sorted[p - 1]) / 2.0;
        if cuts.last().is_none_or(|&c| cut > c) {
            cuts.push(cut);
        }
    }
    cuts
}

fn bin_of(cuts: &[f64], v: f64) -> usize {
    cuts.partition_point(|&c| c < v)
}

impl OneR {
    pub fn fit(data: &Dataset, max_bins: usize) -> Self {
        let labels = data.labels();
        let mut best: Option<(usize, OneR)> = None;
        for d in 0..data.schema.dim {
            let col = data.column(d);
            let mut sorted = col.clone();
            sorted.sort_by(f64::total_cmp);
            let cuts = equal_frequency_cuts(&sorted, max_bins);
            let mut counts = alloc::vec![[0.0; STAR_COUNT]; cuts.len() + 1];
            for (i, &v) in col.iter().enumerate() {
                counts[bin_of(&cuts, v)][labels[i].index()] += 1.0;
            }
            let errors: usize = counts
                .iter()
                .map(|c| {
                    let total: f64 = c.iter().sum();
                    (total - c[argmax_lowest(c).index()]) as usize
                })
                .sum();
            if best.as_ref().is_none_or(|(e, _)| errors < *e) {
                let bins = counts.into_iter().map(normalized).collect();
                best = Some((errors, OneR { dim: d, cuts, bins }));
            }
        }
        best.map(|(_, m)| m).unwrap_or_else(|| {
            let mut c = [0.0; STAR_COUNT];
            for y in &labels {
                c[y.index()] += 1.0;
            }
            OneR {
                dim: 0,
                cuts: Vec::new(),
                bins: alloc::vec![normalized(c)],
            }
        })
    }

    pub fn scores(&self, x: &FeatureVector) -> Scores {
        let v = if self.cuts.is_empty() { 0.0 } else { x.get(self.dim) };
        self.bins[bin_of(&self.cuts, v)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cuts_follow_value_changes() {
        let mut v = alloc::vec![0.0; 73];
        v.extend([1.0; 27]);
        assert_eq!(equal_frequency_cuts(&v, 10), alloc::vec![0.5]);
        let ramp: Vec<f64> = (0..20).map(f64::from).collect();
        assert_eq!(equal_frequency_cuts(&ramp, 4), alloc::vec![4.5, 9.5, 14.5]);
        assert!(equal_frequency_cuts(&[2.0, 2.0, 2.0], 10).is_empty());
    }
}
