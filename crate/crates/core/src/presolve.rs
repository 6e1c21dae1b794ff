//! Problem reductions specific to the forest MILP, and the map that lifts
//! reduced solutions back to the original variables.
//!
//! 1. Points whose sign is the same for every admissible weight vector get
//!    their `z` fixed and leave the model.
//! 2. The cardinality target drops by the weight of the points fixed to 1.
//! 3. Trees with identical vote rows merge into one weighted tree.
//! 4. Points with identical vote columns merge into one weighted point.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bnb::Solution;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::votes::VoteMatrix;

/// Fixing certificates. `phi` is the smallest and `psi` the largest margin a
/// point can reach with weights in `[ell, u]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixReport {
    /// Points forced to `z = 1` (`phi >= 1`).
    pub p: Vec<usize>,
    /// Points forced to `z = 0` (`psi <= -1`).
    pub n: Vec<usize>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

pub fn fix_variables(r: &VoteMatrix, ell: f64, u: f64) -> FixReport {
    let m = r.n_points();
    let tw = r.tree_weights();
    let (mut phi, mut psi) = (Vec::with_capacity(m), Vec::with_capacity(m));
    let (mut p, mut n) = (Vec::new(), Vec::new());
    for i in 0..m {
        let (mut neg, mut pos) = (0u64, 0u64);
        for (j, &w) in tw.iter().enumerate() {
            if r.vote(j, i) < 0 {
                neg += u64::from(w);
            } else {
                pos += u64::from(w);
            }
        }
        let (a, b) = (neg as f64, pos as f64);
        let lo = -u * a + ell * b;
        let hi = -ell * a + u * b;
        if lo >= 1.0 {
            p.push(i);
        } else if hi <= -1.0 {
            n.push(i);
        }
        phi.push(lo);
        psi.push(hi);
    }
    FixReport { p, n, phi, psi }
}

/// `max(0, lambda - fixed_positive)`.
pub fn update_lambda(lambda: u64, fixed_positive: u64) -> u64 {
    lambda.saturating_sub(fixed_positive)
}

/// A set of original indices represented by `rep` (its lowest member).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub rep: usize,
    pub members: Vec<usize>,
}

fn group_by<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = K>) -> Vec<Group> {
    let mut index: HashMap<K, usize> = HashMap::new();
    let mut groups: Vec<Group> = Vec::new();
    for (i, k) in keys.enumerate() {
        match index.get(&k) {
            Some(&g) => groups[g].members.push(i),
            None => {
                index.insert(k, groups.len());
                groups.push(Group { rep: i, members: vec![i] });
            }
        }
    }
    groups
}

/// Collapses identical columns; group `k` becomes column `k` of the result.
pub fn merge_points(r: &VoteMatrix) -> (VoteMatrix, Vec<Group>) {
    let groups = group_by((0..r.n_points()).map(|i| r.column(i)));
    let reps: Vec<usize> = groups.iter().map(|g| g.rep).collect();
    let mut out = r.select_points(&reps);
    let pw = r.point_weights();
    out.set_point_weights(
        groups
            .iter()
            .map(|g| g.members.iter().map(|&i| pw[i]).sum())
            .collect(),
    );
    (out, groups)
}

/// Collapses identical rows; group `k` becomes row `k` of the result.
pub fn merge_trees(r: &VoteMatrix) -> (VoteMatrix, Vec<Group>) {
    let groups = group_by((0..r.n_trees()).map(|j| r.row(j)));
    let reps: Vec<usize> = groups.iter().map(|g| g.rep).collect();
    let mut out = r.select_trees(&reps);
    let tw = r.tree_weights();
    out.set_tree_weights(
        groups
            .iter()
            .map(|g| g.members.iter().map(|&j| tw[j]).sum())
            .collect(),
    );
    (out, groups)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresolveStats {
    pub fixed_positive: usize,
    pub fixed_negative: usize,
    pub trees_merged: usize,
    pub points_merged: usize,
    /// The reduced target was clamped into `[0, m_reduced]`.
    pub lambda_clamped: bool,
}

/// Everything needed to map reduced solutions back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresolveMap {
    pub n_trees: usize,
    pub n_points: usize,
    pub fixed: FixReport,
    /// Reduced tree `k` stands for the original trees of `tree_groups[k]`.
    pub tree_groups: Vec<Group>,
    /// Reduced point `k` stands for the original points of `point_groups[k]`.
    pub point_groups: Vec<Group>,
    pub lambda_original: u64,
    pub lambda_reduced: u64,
    /// Original objective minus reduced objective; nonzero only when the
    /// target had to be clamped.
    pub eta_offset: u64,
    pub stats: PresolveStats,
}

impl PresolveMap {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_json(path, "c2rf-presolve-map", self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        crate::io::read_json(path, "c2rf-presolve-map")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Presolved {
    pub reduced: VoteMatrix,
    pub lambda: u64,
    pub map: PresolveMap,
}

/// Runs fixing, the target update, tree merging and point merging, in that
/// order.
///
/// When more points are fixed to 0 than the target allows (or more to 1),
/// the reduced target is clamped into `[0, m_reduced]` and the excess is
/// carried in `eta_offset`, so reduced and original objectives differ by a
/// constant.
pub fn presolve(r: &VoteMatrix, spec: &ModelSpec) -> Result<Presolved> {
    spec.validate(r)?;
    let fixed = fix_variables(r, spec.ell, spec.u);
    let pw = r.point_weights();
    let weight = |set: &[usize]| set.iter().map(|&i| u64::from(pw[i])).sum::<u64>();
    let w_pos = weight(&fixed.p);

    let mut is_fixed = vec![false; r.n_points()];
    for &i in fixed.p.iter().chain(&fixed.n) {
        is_fixed[i] = true;
    }
    let survivors: Vec<usize> = (0..r.n_points()).filter(|&i| !is_fixed[i]).collect();
    let r1 = r.select_points(&survivors);

    let m1 = r1.m_eff();
    let unclamped = update_lambda(spec.lambda, w_pos);
    let lambda = unclamped.min(m1);
    let eta_offset = w_pos.saturating_sub(spec.lambda) + (unclamped - lambda);

    let (r2, tree_groups) = merge_trees(&r1);
    let (reduced, groups) = merge_points(&r2);
    let point_groups: Vec<Group> = groups
        .into_iter()
        .map(|g| Group {
            rep: survivors[g.rep],
            members: g.members.iter().map(|&k| survivors[k]).collect(),
        })
        .collect();

    let stats = PresolveStats {
        fixed_positive: fixed.p.len(),
        fixed_negative: fixed.n.len(),
        trees_merged: r.n_trees() - reduced.n_trees(),
        points_merged: survivors.len() - reduced.n_points(),
        lambda_clamped: eta_offset > 0,
    };
    Ok(Presolved {
        reduced,
        lambda,
        map: PresolveMap {
            n_trees: r.n_trees(),
            n_points: r.n_points(),
            fixed,
            tree_groups,
            point_groups,
            lambda_original: spec.lambda,
            lambda_reduced: lambda,
            eta_offset,
            stats,
        },
    })
}

/// Maps a solution of the reduced model to the original variable space.
pub fn lift_solution(reduced: &Solution, map: &PresolveMap) -> Result<Solution> {
    let offset = map.eta_offset as f64;
    let mut out = reduced.clone();
    out.objective += offset;
    out.bound += offset;
    out.eta += offset;
    if !reduced.status.has_solution() {
        out.values.clear();
        out.alpha.clear();
        out.z.clear();
        return Ok(out);
    }
    if reduced.alpha.len() != map.tree_groups.len() {
        return Err(Error::DimensionMismatch {
            expected: map.tree_groups.len(),
            got: reduced.alpha.len(),
        });
    }
    if reduced.z.len() != map.point_groups.len() {
        return Err(Error::DimensionMismatch {
            expected: map.point_groups.len(),
            got: reduced.z.len(),
        });
    }
    let mut alpha = vec![f64::NAN; map.n_trees];
    for (g, &a) in map.tree_groups.iter().zip(&reduced.alpha) {
        for &j in &g.members {
            alpha[j] = a;
        }
    }
    let mut z = vec![0u8; map.n_points];
    for &i in &map.fixed.p {
        z[i] = 1;
    }
    for (g, &v) in map.point_groups.iter().zip(&reduced.z) {
        for &i in &g.members {
            z[i] = v;
        }
    }
    out.values = alpha
        .iter()
        .copied()
        .chain(std::iter::once(out.eta))
        .chain(z.iter().map(|&v| f64::from(v)))
        .collect();
    out.alpha = alpha;
    out.z = z;
    Ok(out)
}
