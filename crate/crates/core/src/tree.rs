//! Binary CART classification trees (Gini impurity, axis-aligned splits).

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 10,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Node {
    Leaf {
        label: i8,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    dim: usize,
    nodes: Vec<Node>,
}

/// Majority label with ties going to `-1`.
fn majority(pos: usize, neg: usize) -> i8 {
    if pos > neg {
        1
    } else {
        -1
    }
}

/// `n * gini` for a node with `pos` positives out of `n`.
fn weighted_gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (p, q) = (pos as f64, (n - pos) as f64);
    n as f64 - (p * p + q * q) / n as f64
}

struct Builder<'a> {
    dim: usize,
    x: &'a [f64],
    y: &'a [i8],
    params: TreeParams,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn value(&self, i: usize, k: usize) -> f64 {
        self.x[i * self.dim + k]
    }

    /// Best split as (feature, threshold); lowest feature then lowest threshold on ties.
    fn best_split(&self, idx: &[usize], pos_total: usize) -> Option<(usize, f64)> {
        let n = idx.len();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for k in 0..self.dim {
            order.sort_by(|&a, &b| self.value(a, k).total_cmp(&self.value(b, k)).then(a.cmp(&b)));
            let mut pos_left = 0;
            for s in 1..n {
                if self.y[order[s - 1]] == 1 {
                    pos_left += 1;
                }
                let (lo, hi) = (self.value(order[s - 1], k), self.value(order[s], k));
                if lo == hi || s < min_leaf || n - s < min_leaf {
                    continue;
                }
                let score = weighted_gini(pos_left, s) + weighted_gini(pos_total - pos_left, n - s);
                if best.is_none_or(|(b, _, _)| score < b) {
                    let mut thr = 0.5 * (lo + hi);
                    if thr >= hi {
                        thr = lo;
                    }
                    best = Some((score, k, thr));
                }
            }
        }
        best.map(|(_, k, thr)| (k, thr))
    }

    fn grow(&mut self, idx: &[usize], depth: usize) -> usize {
        let pos = idx.iter().filter(|&&i| self.y[i] == 1).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            label: majority(pos, idx.len() - pos),
        });
        if pos == 0 || pos == idx.len() || depth >= self.params.max_depth {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(idx, pos) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.value(i, feature) <= threshold);
        let left = self.grow(&l, depth + 1);
        let right = self.grow(&r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

impl DecisionTree {
    /// Fits a tree on point-major `x` (`dim` columns) with labels in `{-1, +1}`.
    pub fn fit(dim: usize, x: &[f64], y: &[i8], params: TreeParams) -> DecisionTree {
        assert_eq!(x.len(), y.len() * dim, "feature matrix does not match labels");
        let mut b = Builder {
            dim,
            x,
            y,
            params,
            nodes: Vec::new(),
        };
        let idx: Vec<usize> = (0..y.len()).collect();
        if idx.is_empty() {
            b.nodes.push(Node::Leaf { label: -1 });
        } else {
            b.grow(&idx, 0);
        }
        DecisionTree { dim, nodes: b.nodes }
    }

    /// Tree that always predicts `label`.
    pub fn constant(dim: usize, label: i8) -> DecisionTree {
        DecisionTree {
            dim,
            nodes: vec![Node::Leaf { label }],
        }
    }

    /// Single split on `feature`.
    pub fn stump(dim: usize, feature: usize, threshold: f64, left: i8, right: i8) -> DecisionTree {
        DecisionTree {
            dim,
            nodes: vec![
                Node::Split {
                    feature,
                    threshold,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { label: left },
                Node::Leaf { label: right },
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn predict(&self, point: &[f64]) -> i8 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { label } => return label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if point[feature] <= threshold { left } else { right },
            }
        }
    }
}
