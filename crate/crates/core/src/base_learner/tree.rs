use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

/// Binary CART tree stored as a flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

pub(crate) struct GrowParams {
    pub mtry: usize,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![TreeNode::Leaf { value }],
        }
    }

    pub fn from_nodes(nodes: Vec<TreeNode>) -> Self {
        Tree { nodes }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + go(nodes, left as usize).max(go(nodes, right as usize))
                }
            }
        }
        go(&self.nodes, 0)
    }

    /// Positive fraction stored in the leaf reached by `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[feature as usize] <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    /// Grows a Gini tree on `samples` (row indices into `x`, repeats allowed).
    pub(crate) fn grow<R: Rng>(
        x: &Matrix,
        samples: Vec<usize>,
        target: &dyn Fn(usize) -> bool,
        params: &GrowParams,
        rng: &mut R,
    ) -> Tree {
        let mut tree = Tree { nodes: Vec::new() };
        let mut features: Vec<usize> = (0..x.cols()).collect();
        // (samples, depth, slot to patch in parent)
        let mut stack = vec![(samples, 0usize, None::<(usize, bool)>)];
        while let Some((samples, depth, parent)) = stack.pop() {
            let id = tree.nodes.len();
            if let Some((p, is_left)) = parent {
                if let TreeNode::Split { left, right, .. } = &mut tree.nodes[p] {
                    if is_left {
                        *left = id as u32;
                    } else {
                        *right = id as u32;
                    }
                }
            }
            let n = samples.len();
            let pos = samples.iter().filter(|&&i| target(i)).count();
            let value = pos as f64 / n as f64;
            let stop = pos == 0
                || pos == n
                || n < params.min_samples_split
                || params.max_depth.is_some_and(|d| depth >= d);
            let split = if stop {
                None
            } else {
                best_split(x, &samples, target, params.mtry, &mut features, rng)
            };
            match split {
                None => tree.nodes.push(TreeNode::Leaf { value }),
                Some(c) => {
                    tree.nodes.push(TreeNode::Split {
                        feature: c.feature as u32,
                        threshold: c.threshold,
                        left: 0,
                        right: 0,
                    });
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        samples.into_iter().partition(|&i| x.get(i, c.feature) <= c.threshold);
                    // Right pushed first so the left subtree is laid out first.
                    stack.push((r, depth + 1, Some((id, false))));
                    stack.push((l, depth + 1, Some((id, true))));
                }
            }
        }
        tree
    }
}

/// Best split over a random subset of `mtry` features. If none of them admits
/// a split, further features are drawn one at a time until one does.
/// Ties go to the lowest feature index, then the lowest threshold.
fn best_split<R: Rng>(
    x: &Matrix,
    samples: &[usize],
    target: &dyn Fn(usize) -> bool,
    mtry: usize,
    features: &mut [usize],
    rng: &mut R,
) -> Option<Candidate> {
    features.shuffle(rng);
    let mtry = mtry.clamp(1, features.len());
    let mut first: Vec<usize> = features[..mtry].to_vec();
    first.sort_unstable();
    let mut best: Option<Candidate> = None;
    for &f in &first {
        consider(x, samples, target, f, &mut best);
    }
    if best.is_none() {
        for &f in &features[mtry..] {
            consider(x, samples, target, f, &mut best);
            if best.is_some() {
                break;
            }
        }
    }
    best
}

fn consider(
    x: &Matrix,
    samples: &[usize],
    target: &dyn Fn(usize) -> bool,
    feature: usize,
    best: &mut Option<Candidate>,
) {
    let mut pairs: Vec<(f64, bool)> = samples.iter().map(|&i| (x.get(i, feature), target(i))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let total_pos = pairs.iter().filter(|p| p.1).count();
    let mut left_pos = 0usize;
    for i in 0..n - 1 {
        left_pos += usize::from(pairs[i].1);
        let (v, next) = (pairs[i].0, pairs[i + 1].0);
        if v >= next {
            continue;
        }
        let nl = (i + 1) as f64;
        let nr = (n - i - 1) as f64;
        let pl = left_pos as f64;
        let pr = (total_pos - left_pos) as f64;
        // Proportional to the weighted Gini impurity of the children.
        let score = pl * (nl - pl) / nl + pr * (nr - pr) / nr;
        let mut threshold = v + (next - v) / 2.0;
        if threshold >= next {
            threshold = v;
        }
        let better = match best {
            None => true,
            Some(b) => score < b.score,
        };
        if better {
            *best = Some(Candidate {
                feature,
                threshold,
                score,
            });
        }
    }
}
