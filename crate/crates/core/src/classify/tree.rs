use serde::{Deserialize, Serialize};

use super::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    /// `x[feature] <= threshold` goes left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { positive: bool },
}

/// Binary classification tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> bool {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { positive } => return positive,
                TreeNode::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Row indices sorted by value for each column, computed once per training set.
#[derive(Debug, Clone)]
pub struct SortedColumns {
    order: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub fn new(x: &DenseMatrix) -> Self {
        let order = (0..x.cols())
            .map(|j| {
                let mut idx: Vec<u32> = (0..x.rows() as u32).collect();
                idx.sort_by(|&a, &b| x.get(a as usize, j).total_cmp(&x.get(b as usize, j)).then(a.cmp(&b)));
                idx
            })
            .collect();
        SortedColumns { order }
    }
}

/// Total weight times Gini impurity.
fn weighted_gini(p: f64, n: f64) -> f64 {
    let w = p + n;
    if w <= 0.0 {
        0.0
    } else {
        w - (p * p + n * n) / w
    }
}

const NO_SLOT: usize = usize::MAX;

/// Grows a weighted-Gini tree breadth-first to at most `max_depth` levels,
/// splitting only on `features`.
pub fn fit_tree(
    x: &DenseMatrix,
    y: &[bool],
    w: &[f64],
    features: &[usize],
    sorted: &SortedColumns,
    max_depth: usize,
) -> DecisionTree {
    let n = x.rows();
    let mut nodes = vec![TreeNode::Leaf { positive: false }];
    let mut node_of = vec![0usize; n];
    let mut frontier = vec![0usize];
    for _ in 0..max_depth {
        let mut slot_of = vec![NO_SLOT; nodes.len()];
        for (s, &node) in frontier.iter().enumerate() {
            slot_of[node] = s;
        }
        let k = frontier.len();
        let (mut tp, mut tn, mut count) = (vec![0.0; k], vec![0.0; k], vec![0usize; k]);
        for i in 0..n {
            let s = slot_of[node_of[i]];
            if s == NO_SLOT {
                continue;
            }
            count[s] += 1;
            if y[i] {
                tp[s] += w[i];
            } else {
                tn[s] += w[i];
            }
        }
        let open: Vec<bool> = (0..k).map(|s| count[s] >= 2 && tp[s] > 0.0 && tn[s] > 0.0).collect();
        if !open.iter().any(|&o| o) {
            break;
        }
        let parent: Vec<f64> = (0..k).map(|s| weighted_gini(tp[s], tn[s])).collect();
        let mut best: Vec<Option<(f64, usize, f64)>> = vec![None; k];
        let (mut lp, mut ln, mut last) = (vec![0.0; k], vec![0.0; k], vec![f64::NAN; k]);
        for &f in features {
            lp.iter_mut().for_each(|v| *v = 0.0);
            ln.iter_mut().for_each(|v| *v = 0.0);
            last.iter_mut().for_each(|v| *v = f64::NAN);
            for &i in &sorted.order[f] {
                let i = i as usize;
                let s = slot_of[node_of[i]];
                if s == NO_SLOT || !open[s] {
                    continue;
                }
                let v = x.get(i, f);
                if !last[s].is_nan() && v > last[s] {
                    let gain = parent[s] - weighted_gini(lp[s], ln[s]) - weighted_gini(tp[s] - lp[s], tn[s] - ln[s]);
                    if gain > 1e-12 && best[s].is_none_or(|(g, _, _)| gain > g) {
                        let mid = last[s] + (v - last[s]) / 2.0;
                        let thr = if mid < v { mid } else { last[s] };
                        best[s] = Some((gain, f, thr));
                    }
                }
                if y[i] {
                    lp[s] += w[i];
                } else {
                    ln[s] += w[i];
                }
                last[s] = v;
            }
        }
        let mut next = Vec::new();
        let mut split_of = vec![None; k];
        for (s, b) in best.iter().enumerate() {
            if let Some((_, feature, threshold)) = *b {
                let left = nodes.len();
                nodes.push(TreeNode::Leaf { positive: false });
                nodes.push(TreeNode::Leaf { positive: false });
                nodes[frontier[s]] = TreeNode::Split { feature, threshold, left, right: left + 1 };
                split_of[s] = Some((feature, threshold, left));
                next.extend([left, left + 1]);
            }
        }
        if next.is_empty() {
            break;
        }
        for i in 0..n {
            let s = slot_of[node_of[i]];
            if s == NO_SLOT {
                continue;
            }
            if let Some((f, thr, left)) = split_of[s] {
                node_of[i] = if x.get(i, f) <= thr { left } else { left + 1 };
            }
        }
        frontier = next;
    }
    let mut wp = vec![0.0; nodes.len()];
    let mut wn = vec![0.0; nodes.len()];
    for i in 0..n {
        if y[i] {
            wp[node_of[i]] += w[i];
        } else {
            wn[node_of[i]] += w[i];
        }
    }
    for (j, node) in nodes.iter_mut().enumerate() {
        if let TreeNode::Leaf { positive } = node {
            *positive = wp[j] > wn[j];
        }
    }
    DecisionTree { nodes }
}
