//! The tree-by-point vote matrix and the majority-vote baseline.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `t x m` matrix of per-tree votes in `{-1, +1}`, stored tree-major.
///
/// `tree_weights[j]` and `point_weights[i]` are multiplicities: a row (column)
/// with weight `w` stands for `w` identical original trees (points). Both are
/// all ones until duplicates are merged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteMatrix {
    n_trees: usize,
    n_points: usize,
    votes: Vec<i8>,
    tree_weights: Vec<u32>,
    point_weights: Vec<u32>,
}

impl VoteMatrix {
    /// Unit-weight matrix from tree-major `votes`.
    pub fn new(n_trees: usize, n_points: usize, votes: Vec<i8>) -> Result<Self> {
        Self::with_weights(n_trees, n_points, votes, vec![1; n_trees], vec![1; n_points])
    }

    pub fn with_weights(
        n_trees: usize,
        n_points: usize,
        votes: Vec<i8>,
        tree_weights: Vec<u32>,
        point_weights: Vec<u32>,
    ) -> Result<Self> {
        let r = VoteMatrix {
            n_trees,
            n_points,
            votes,
            tree_weights,
            point_weights,
        };
        r.validate()?;
        Ok(r)
    }

    /// Builds a matrix from point columns (each of length `n_trees`).
    pub fn from_columns(n_trees: usize, columns: &[Vec<i8>]) -> Result<Self> {
        let m = columns.len();
        let mut votes = vec![0i8; n_trees * m];
        for (i, c) in columns.iter().enumerate() {
            if c.len() != n_trees {
                return Err(Error::DimensionMismatch {
                    expected: n_trees,
                    got: c.len(),
                });
            }
            for (j, &v) in c.iter().enumerate() {
                votes[j * m + i] = v;
            }
        }
        Self::new(n_trees, m, votes)
    }

    pub fn validate(&self) -> Result<()> {
        if self.votes.len() != self.n_trees * self.n_points {
            return Err(Error::DimensionMismatch {
                expected: self.n_trees * self.n_points,
                got: self.votes.len(),
            });
        }
        if self.tree_weights.len() != self.n_trees {
            return Err(Error::DimensionMismatch {
                expected: self.n_trees,
                got: self.tree_weights.len(),
            });
        }
        if self.point_weights.len() != self.n_points {
            return Err(Error::DimensionMismatch {
                expected: self.n_points,
                got: self.point_weights.len(),
            });
        }
        if let Some(v) = self.votes.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::invalid_data(format!("vote {v} is not +1/-1")));
        }
        if self.tree_weights.iter().chain(&self.point_weights).any(|&w| w == 0) {
            return Err(Error::invalid_data("multiplicities must be positive"));
        }
        Ok(())
    }

    pub fn n_trees(&self) -> usize {
        self.n_trees
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn vote(&self, tree: usize, point: usize) -> i8 {
        self.votes[tree * self.n_points + point]
    }

    pub fn row(&self, tree: usize) -> &[i8] {
        &self.votes[tree * self.n_points..(tree + 1) * self.n_points]
    }

    pub fn column(&self, point: usize) -> Vec<i8> {
        (0..self.n_trees).map(|j| self.vote(j, point)).collect()
    }

    pub fn tree_weights(&self) -> &[u32] {
        &self.tree_weights
    }

    pub fn point_weights(&self) -> &[u32] {
        &self.point_weights
    }

    /// Number of original trees represented.
    pub fn t_eff(&self) -> u64 {
        self.tree_weights.iter().map(|&w| u64::from(w)).sum()
    }

    /// Number of original points represented.
    pub fn m_eff(&self) -> u64 {
        self.point_weights.iter().map(|&w| u64::from(w)).sum()
    }

    pub fn has_unit_weights(&self) -> bool {
        self.tree_weights.iter().chain(&self.point_weights).all(|&w| w == 1)
    }

    /// `sum_j tree_weights[j] * votes[j][i]`.
    pub fn weighted_column_sum(&self, point: usize) -> i64 {
        (0..self.n_trees)
            .map(|j| i64::from(self.tree_weights[j]) * i64::from(self.vote(j, point)))
            .sum()
    }

    /// Keeps the given points (in order).
    pub fn select_points(&self, points: &[usize]) -> VoteMatrix {
        let m = points.len();
        let mut votes = Vec::with_capacity(self.n_trees * m);
        for j in 0..self.n_trees {
            let row = self.row(j);
            votes.extend(points.iter().map(|&i| row[i]));
        }
        VoteMatrix {
            n_trees: self.n_trees,
            n_points: m,
            votes,
            tree_weights: self.tree_weights.clone(),
            point_weights: points.iter().map(|&i| self.point_weights[i]).collect(),
        }
    }

    pub(crate) fn set_tree_weights(&mut self, w: Vec<u32>) {
        debug_assert_eq!(w.len(), self.n_trees);
        self.tree_weights = w;
    }

    pub(crate) fn set_point_weights(&mut self, w: Vec<u32>) {
        debug_assert_eq!(w.len(), self.n_points);
        self.point_weights = w;
    }

    /// Keeps the given trees (in order).
    pub fn select_trees(&self, trees: &[usize]) -> VoteMatrix {
        let mut votes = Vec::with_capacity(trees.len() * self.n_points);
        for &j in trees {
            votes.extend_from_slice(self.row(j));
        }
        VoteMatrix {
            n_trees: trees.len(),
            n_points: self.n_points,
            votes,
            tree_weights: trees.iter().map(|&j| self.tree_weights[j]).collect(),
            point_weights: self.point_weights.clone(),
        }
    }

    /// Compact CSV: one line per tree, one `+1`/`-1` entry per point, no header.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.votes.len() * 3);
        for j in 0..self.n_trees {
            for (i, v) in self.row(j).iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{v}");
            }
            s.push('\n');
        }
        s
    }

    /// Parses [`VoteMatrix::to_csv`] output; weights are reset to one.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut votes = Vec::new();
        let mut n_points = None;
        let mut n_trees = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Vec<i8> = line
                .split(',')
                .map(|f| match f.trim() {
                    "1" | "+1" => Ok(1),
                    "-1" => Ok(-1),
                    other => Err(Error::invalid_data(format!(
                        "line {}: vote '{other}' is not +1/-1",
                        lineno + 1
                    ))),
                })
                .collect::<Result<_>>()?;
            match n_points {
                None => n_points = Some(row.len()),
                Some(m) if m != row.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        got: row.len(),
                    })
                }
                _ => {}
            }
            votes.extend(row);
            n_trees += 1;
        }
        Self::new(n_trees, n_points.unwrap_or(0), votes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_json(path, "c2rf-votes", self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let r: VoteMatrix = crate::io::read_json(path, "c2rf-votes")?;
        r.validate()?;
        Ok(r)
    }
}

/// Weighted majority vote per point; ties go to `-1`.
pub fn majority_vote(r: &VoteMatrix) -> Vec<i8> {
    (0..r.n_points())
        .map(|i| if r.weighted_column_sum(i) > 0 { 1 } else { -1 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_examples() {
        let r = VoteMatrix::from_columns(3, &[vec![1, 1, -1]]).unwrap();
        assert_eq!(majority_vote(&r), vec![1]);
        let r = VoteMatrix::from_columns(2, &[vec![1, -1]]).unwrap();
        assert_eq!(majority_vote(&r), vec![-1]);
        let r = VoteMatrix::new(4, 3, vec![1; 12]).unwrap();
        assert_eq!(majority_vote(&r), vec![1, 1, 1]);
    }

    #[test]
    fn weights_change_majority() {
        let r = VoteMatrix::with_weights(2, 1, vec![1, -1], vec![2, 1], vec![1]).unwrap();
        assert_eq!(majority_vote(&r), vec![1]);
        assert_eq!(r.t_eff(), 3);
    }

    #[test]
    fn empty_matrix_is_valid() {
        let r = VoteMatrix::new(5, 0, vec![]).unwrap();
        assert_eq!(r.n_points(), 0);
        assert!(majority_vote(&r).is_empty());
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(VoteMatrix::new(1, 2, vec![1, 0]).is_err());
        assert!(VoteMatrix::new(1, 2, vec![1]).is_err());
        assert!(VoteMatrix::with_weights(1, 1, vec![1], vec![0], vec![1]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let r = VoteMatrix::new(2, 3, vec![1, -1, 1, -1, -1, 1]).unwrap();
        let s = r.to_csv();
        assert_eq!(s, "1,-1,1\n-1,-1,1\n");
        assert_eq!(VoteMatrix::from_csv(&s).unwrap(), r);
        assert!(VoteMatrix::from_csv("1,2\n").is_err());
        assert!(VoteMatrix::from_csv("1,1\n1\n").is_err());
    }
}
