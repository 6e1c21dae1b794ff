//! Synthetic generators: labeled point clouds and planted vote matrices.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::votes::VoteMatrix;

/// Two isotropic unit-variance Gaussians whose means are `separation` apart
/// along the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoGaussians {
    pub n: usize,
    pub dim: usize,
    pub separation: f64,
    pub positive_fraction: f64,
}

impl Default for TwoGaussians {
    fn default() -> Self {
        TwoGaussians {
            n: 2000,
            dim: 2,
            separation: 2.0,
            positive_fraction: 0.5,
        }
    }
}

pub fn two_gaussians(spec: &TwoGaussians, seed: u64) -> Result<Dataset> {
    if spec.dim == 0 || spec.n < 2 {
        return Err(Error::invalid_arg("need dim >= 1 and n >= 2"));
    }
    if !(0.0..=1.0).contains(&spec.positive_fraction) {
        return Err(Error::invalid_arg("positive fraction must lie in [0, 1]"));
    }
    let mut r = rng::stream(seed, rng::streams::SYNTHETIC);
    let n_pos = (spec.positive_fraction * spec.n as f64).round() as usize;
    let mut labels: Vec<i8> = (0..spec.n).map(|i| if i < n_pos { 1 } else { -1 }).collect();
    labels.shuffle(&mut r);
    let offset = 0.5 * spec.separation / (spec.dim as f64).sqrt();
    let mut features = Vec::with_capacity(spec.n * spec.dim);
    for &l in &labels {
        for _ in 0..spec.dim {
            let z: f64 = StandardNormal.sample(&mut r);
            features.push(z + f64::from(l) * offset);
        }
    }
    Dataset::new(spec.dim, features, labels, (0..spec.n as u64).collect())
}

/// Vote matrix with planted duplicate and unanimous columns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedVotes {
    pub n_trees: usize,
    pub n_points: usize,
    /// Number of distinct non-unanimous columns the points are drawn from.
    pub distinct_columns: usize,
    /// Share of points whose column is unanimous.
    pub unanimous_fraction: f64,
    /// Number of trees that copy the row of an earlier tree.
    pub duplicate_trees: usize,
    pub ell: f64,
    pub u: f64,
}

impl Default for PlantedVotes {
    fn default() -> Self {
        PlantedVotes {
            n_trees: 20,
            n_points: 500,
            distinct_columns: 150,
            unanimous_fraction: 0.25,
            duplicate_trees: 0,
            ell: 1.0,
            u: 100.0,
        }
    }
}

/// Planted instance: the matrix and a cardinality target `lambda` that a
/// hidden weight vector in `[ell, u]` meets exactly, so the optimum is 0.
#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub votes: VoteMatrix,
    pub lambda: u64,
    pub hidden_weights: Vec<f64>,
}

pub fn planted_votes(spec: &PlantedVotes, seed: u64) -> Result<PlantedInstance> {
    let t = spec.n_trees;
    let base_trees = t.saturating_sub(spec.duplicate_trees);
    if base_trees == 0 {
        return Err(Error::invalid_arg("at least one tree must be original"));
    }
    if spec.distinct_columns == 0 && spec.unanimous_fraction < 1.0 {
        return Err(Error::invalid_arg("need distinct columns for non-unanimous points"));
    }
    let mut r = rng::stream(seed, rng::streams::SYNTHETIC);
    // tree j copies tree source[j]
    let mut source: Vec<usize> = (0..t).collect();
    for j in base_trees..t {
        source[j] = r.random_range(0..base_trees);
    }
    let mut hidden = vec![0.0; t];
    for j in 0..base_trees {
        hidden[j] = r.random_range(spec.ell..=spec.u);
    }
    for j in base_trees..t {
        hidden[j] = hidden[source[j]];
    }
    let margin = |col: &[i8]| -> f64 { col.iter().zip(&hidden).map(|(&v, a)| f64::from(v) * a).sum() };

    let mut pool: Vec<Vec<i8>> = Vec::with_capacity(spec.distinct_columns);
    let mut attempts = 0;
    while pool.len() < spec.distinct_columns {
        attempts += 1;
        if attempts > 1000 * spec.distinct_columns + 1000 {
            return Err(Error::invalid_arg("could not draw enough distinct columns"));
        }
        let bias: f64 = r.random();
        let mut col = vec![0i8; t];
        for j in 0..base_trees {
            col[j] = if r.random::<f64>() < bias { 1 } else { -1 };
        }
        for j in base_trees..t {
            col[j] = col[source[j]];
        }
        let unanimous = col.iter().all(|&v| v == col[0]);
        if unanimous || margin(&col).abs() < 1.0 || pool.contains(&col) {
            continue;
        }
        pool.push(col);
    }

    let m = spec.n_points;
    let n_unanimous = (spec.unanimous_fraction * m as f64).ceil() as usize;
    let mut columns: Vec<Vec<i8>> = Vec::with_capacity(m);
    for _ in 0..n_unanimous.min(m) {
        let v = if r.random::<bool>() { 1 } else { -1 };
        columns.push(vec![v; t]);
    }
    // every pool column appears at least once while there is room
    for k in 0..m - columns.len() {
        let c = if k < pool.len() {
            pool[k].clone()
        } else {
            pool[r.random_range(0..pool.len())].clone()
        };
        columns.push(c);
    }
    columns.shuffle(&mut r);
    let lambda = columns.iter().filter(|c| margin(c) >= 1.0).count() as u64;
    Ok(PlantedInstance {
        votes: VoteMatrix::from_columns(t, &columns)?,
        lambda,
        hidden_weights: hidden,
    })
}

/// Uniformly random `t x m` vote matrix (no planted structure).
pub fn random_votes(n_trees: usize, n_points: usize, seed: u64) -> VoteMatrix {
    let mut r = rng::stream(seed, rng::streams::SYNTHETIC);
    let votes = (0..n_trees * n_points)
        .map(|_| if r.random::<bool>() { 1 } else { -1 })
        .collect();
    VoteMatrix::new(n_trees, n_points, votes).expect("shape is consistent")
}
