//! Tree ensembles trained on random subsets of the labeled points.

use std::path::Path;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SplitDataset};
use crate::error::{Error, Result};
use crate::rng;
use crate::tree::{DecisionTree, TreeParams};
use crate::votes::VoteMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Size of each training subset relative to the labeled sample.
    pub subset_fraction: f64,
    pub tree: TreeParams,
    /// Train trees on the rayon pool; the result is identical either way.
    #[serde(default)]
    pub parallel: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 20,
            subset_fraction: 0.2,
            tree: TreeParams::default(),
            parallel: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
    /// Dataset indices each tree was trained on.
    pub subset_indices: Vec<Vec<usize>>,
    pub config: ForestConfig,
    dim: usize,
}

/// Stream offset so tree streams never collide with the pipeline stage streams.
const TREE_STREAM_BASE: u64 = 1 << 32;

/// Trains `cfg.n_trees` trees, each on `round(subset_fraction * n)` labeled
/// points drawn uniformly without replacement. Tree `j` draws from its own
/// random stream, so serial and parallel training agree.
pub fn train_forest(
    d: &Dataset,
    split: &SplitDataset,
    cfg: &ForestConfig,
    seed: u64,
) -> Result<Forest> {
    if cfg.n_trees == 0 {
        return Err(Error::invalid_arg("a forest needs at least one tree"));
    }
    let n = split.n();
    let size = (cfg.subset_fraction * n as f64).round() as usize;
    if size < 1 || size > n {
        return Err(Error::invalid_arg(format!(
            "subset fraction {} gives {size} of {n} labeled points",
            cfg.subset_fraction
        )));
    }
    let train = |j: usize| {
        let mut r = rng::stream(seed, TREE_STREAM_BASE + j as u64);
        let mut picks = index::sample(&mut r, n, size).into_vec();
        picks.sort_unstable();
        let subset: Vec<usize> = picks.iter().map(|&k| split.labeled[k]).collect();
        let y: Vec<i8> = picks.iter().map(|&k| split.labeled_labels[k]).collect();
        let x = d.gather(&subset);
        (DecisionTree::fit(d.dim(), &x, &y, cfg.tree), subset)
    };
    let fitted: Vec<(DecisionTree, Vec<usize>)> = if cfg.parallel {
        (0..cfg.n_trees).into_par_iter().map(train).collect()
    } else {
        (0..cfg.n_trees).map(train).collect()
    };
    let (trees, subset_indices) = fitted.into_iter().unzip();
    Ok(Forest {
        trees,
        subset_indices,
        config: *cfg,
        dim: d.dim(),
    })
}

impl Forest {
    pub fn from_trees(dim: usize, trees: Vec<DecisionTree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::invalid_arg("a forest needs at least one tree"));
        }
        if let Some(t) = trees.iter().find(|t| t.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: t.dim(),
            });
        }
        let n = trees.len();
        Ok(Forest {
            trees,
            subset_indices: vec![Vec::new(); n],
            config: ForestConfig {
                n_trees: n,
                ..ForestConfig::default()
            },
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Votes of every tree on the point-major matrix `points` with `dim` columns.
    pub fn vote_matrix(&self, dim: usize, points: &[f64]) -> Result<VoteMatrix> {
        if dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: dim,
            });
        }
        if points.len() % dim != 0 {
            return Err(Error::invalid_data(format!(
                "{} values do not form rows of width {dim}",
                points.len()
            )));
        }
        let m = points.len() / dim;
        let mut votes = Vec::with_capacity(self.trees.len() * m);
        for tree in &self.trees {
            votes.extend(points.chunks_exact(dim).map(|p| tree.predict(p)));
        }
        VoteMatrix::new(self.trees.len(), m, votes)
    }

    /// Votes on the unlabeled part of a split.
    pub fn votes_for(&self, d: &Dataset, split: &SplitDataset) -> Result<VoteMatrix> {
        self.vote_matrix(d.dim(), &d.gather(&split.unlabeled))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_json(path, "c2rf-forest", self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        crate::io::read_json(path, "c2rf-forest")
    }
}
