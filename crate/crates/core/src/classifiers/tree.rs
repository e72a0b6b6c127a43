use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{best_threshold, class_weights, entropy, normalized, Dataset, Scores};
use crate::features::FeatureVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Node {
    Leaf(Scores),
    Split {
        dim: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Unpruned C4.5-style tree over numeric attributes, grown by information
/// gain. Nodes live in an arena; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn fit(data: &Dataset, min_leaf: usize) -> Self {
        let columns = data.columns();
        let labels = data.labels();
        let weights = vec![1.0; data.len()];
        let mut nodes = vec![Node::Leaf([0.0; 5])];
        let mut pending: Vec<(usize, Vec<usize>)> = vec![(0, (0..data.len()).collect())];
        while let Some((slot, rows)) = pending.pop() {
            let counts = class_weights(&labels, &weights, &rows);
            let mut best: Option<(f64, usize, f64)> = None;
            if entropy(&counts) > 0.0 {
                for (d, col) in columns.iter().enumerate() {
                    if let Some((gain, t)) = best_threshold(col, &labels, &weights, &rows, min_leaf) {
                        if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g + 1e-12) {
                            best = Some((gain, d, t));
                        }
                    }
                }
            }
            match best {
                None => nodes[slot] = Node::Leaf(normalized(counts)),
                Some((_, dim, threshold)) => {
                    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| columns[dim][i] <= threshold);
                    let left = nodes.len();
                    nodes.push(Node::Leaf([0.0; 5]));
                    nodes.push(Node::Leaf([0.0; 5]));
                    nodes[slot] = Node::Split {
                        dim,
                        threshold,
                        left,
                        right: left + 1,
                    };
                    pending.push((left + 1, r));
                    pending.push((left, l));
                }
            }
        }
        DecisionTree { nodes }
    }

    pub fn depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((n, depth)) = stack.pop() {
            deepest = deepest.max(depth);
            if let Node::Split { left, right, .. } = self.nodes[n] {
                stack.push((left, depth + 1));
                stack.push((right, depth + 1));
            }
        }
        deepest
    }

    pub fn scores(&self, x: &FeatureVector) -> Scores {
        let mut n = 0;
        loop {
            match &self.nodes[n] {
                Node::Leaf(s) => return *s,
                Node::Split {
                    dim,
                    threshold,
                    left,
                    right,
                } => n = if x.get(*dim) <= *threshold { *left } else { *right },
            }
        }
    }
}
