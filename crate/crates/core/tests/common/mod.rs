#![allow(dead_code)]

use c2rf_core::bnb::{solve_milp, Solution, SolveStatus, SolverConfig};
use c2rf_core::milp::MilpModel;
use c2rf_core::model::{build_milp, Layout, ModelSpec};
use c2rf_core::pipeline::{run_approach, Approach};
use c2rf_core::votes::VoteMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn unlimited() -> SolverConfig {
    SolverConfig {
        time_limit_secs: None,
        ..SolverConfig::default()
    }
}

pub fn pm(b: bool) -> i8 {
    if b {
        1
    } else {
        -1
    }
}

/// `t x m` matrix from a flat row-major sign vector.
pub fn matrix(t: usize, m: usize, signs: &[bool]) -> VoteMatrix {
    VoteMatrix::new(t, m, signs.iter().map(|&b| pm(b)).collect()).unwrap()
}

/// Small instance: matrix, target and upper weight bound.
pub fn arb_instance(max_t: usize, max_m: usize) -> impl Strategy<Value = (VoteMatrix, ModelSpec)> {
    (2..=max_t, 1..=max_m)
        .prop_flat_map(|(t, m)| {
            (
                Just(t),
                Just(m),
                proptest::collection::vec(any::<bool>(), t * m),
                0..=m as u64,
                prop_oneof![Just(2.0), Just(100.0)],
            )
        })
        .prop_map(|(t, m, s, lambda, u)| (matrix(t, m, &s), ModelSpec::new(1.0, u, lambda)))
}

pub fn random_matrix<R: Rng>(rng: &mut R, t: usize, m: usize) -> VoteMatrix {
    let votes = (0..t * m).map(|_| pm(rng.random())).collect();
    VoteMatrix::new(t, m, votes).unwrap()
}

/// Matrix with `distinct` random columns repeated up to `m` points, a share of
/// unanimous columns and `dup_trees` copied rows.
pub fn structured_matrix<R: Rng>(
    rng: &mut R,
    t: usize,
    m: usize,
    distinct: usize,
    unanimous: usize,
    dup_trees: usize,
) -> VoteMatrix {
    let base = t - dup_trees;
    let source: Vec<usize> = (0..t)
        .map(|j| if j < base { j } else { rng.random_range(0..base) })
        .collect();
    let draw = |rng: &mut R| -> Vec<i8> {
        let raw: Vec<i8> = (0..base).map(|_| pm(rng.random())).collect();
        source.iter().map(|&s| raw[s]).collect()
    };
    let pool: Vec<Vec<i8>> = (0..distinct).map(|_| draw(rng)).collect();
    let mut cols: Vec<Vec<i8>> = (0..unanimous.min(m)).map(|_| vec![pm(rng.random()); t]).collect();
    while cols.len() < m {
        let k = cols.len() - unanimous.min(m);
        let c = if k < pool.len() {
            pool[k].clone()
        } else {
            pool[rng.random_range(0..pool.len())].clone()
        };
        cols.push(c);
    }
    cols.shuffle(rng);
    VoteMatrix::from_columns(t, &cols).unwrap()
}

pub fn solve_direct(r: &VoteMatrix, spec: &ModelSpec) -> Solution {
    solve_milp(&build_milp(r, spec).unwrap(), &unlimited()).unwrap()
}

pub fn solve_approach(r: &VoteMatrix, spec: &ModelSpec, a: Approach, cfg: &SolverConfig) -> Solution {
    run_approach(r, spec.lambda, a, spec.ell, spec.u, cfg)
        .unwrap()
        .solution
        .unwrap()
}

/// Largest violation of the original model's rows and bounds at `s`.
pub fn violation(r: &VoteMatrix, spec: &ModelSpec, s: &Solution) -> f64 {
    assert!(s.status.has_solution());
    build_milp(r, spec).unwrap().max_violation(&s.values)
}

/// `|sum c_i z_i - lambda|` recomputed from the assignment.
pub fn deviation(r: &VoteMatrix, lambda: u64, z: &[u8]) -> u64 {
    let pos: u64 = z
        .iter()
        .zip(r.point_weights())
        .filter(|(&v, _)| v == 1)
        .map(|(_, &w)| u64::from(w))
        .sum();
    pos.abs_diff(lambda)
}

pub fn optimal_objective(s: &Solution) -> u64 {
    assert_eq!(s.status, SolveStatus::Optimal, "solver did not finish");
    assert_eq!(s.objective.fract(), 0.0);
    s.objective as u64
}

/// Copy of a forest model with the upper bound of `eta` replaced.
pub fn with_eta_upper(model: &MilpModel, upper: f64) -> MilpModel {
    let eta = Layout::from_model(model).unwrap().eta;
    let mut out = MilpModel::new(model.name.clone());
    for (j, v) in model.variables().iter().enumerate() {
        let ub = if j == eta { upper } else { v.upper };
        out.add_var(v.name.clone(), v.lower, ub, v.integer);
    }
    for c in model.constraints() {
        out.add_row(c.name.clone(), c.coeffs.clone(), c.lower, c.upper);
    }
    out.set_objective(model.objective().to_vec());
    out.metadata = model.metadata.clone();
    out
}
