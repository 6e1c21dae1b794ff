//! Exhaustive reference solver for tiny instances.
//!
//! For a fixed assignment `z` the optimal deviation is `|sum c_i z_i - lambda|`,
//! so the optimum is the first assignment, in order of increasing deviation,
//! for which some weight vector in `[ell, u]` realizes every sign. Each such
//! check is one LP.

use crate::bnb::{SolveStatus, Solution};
use crate::error::{Error, Result};
use crate::milp::{solve_lp, LpStatus};
use crate::model::{build_milp, Layout, ModelSpec};
use crate::votes::VoteMatrix;

pub const ORACLE_MAX_POINTS: u64 = 20;

/// Every optimal assignment, in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleOptima {
    pub objective: Option<u64>,
    pub assignments: Vec<Vec<u8>>,
}

/// Candidate assignments sorted by deviation, then lexicographically.
fn candidates(r: &VoteMatrix, lambda: u64) -> Vec<(u64, u32)> {
    let m = r.n_points();
    let w = r.point_weights();
    let mut out: Vec<(u64, u32)> = (0..1u32 << m)
        .map(|mask| {
            // z_0 is the most significant bit so numeric order is lexicographic
            let total: u64 = (0..m)
                .filter(|&i| mask >> (m - 1 - i) & 1 == 1)
                .map(|i| u64::from(w[i]))
                .sum();
            (total.abs_diff(lambda), mask)
        })
        .collect();
    out.sort_unstable();
    out
}

fn assignment(mask: u32, m: usize) -> Vec<u8> {
    (0..m).map(|i| (mask >> (m - 1 - i) & 1) as u8).collect()
}

struct Checker {
    model: crate::milp::MilpModel,
    layout: Layout,
}

impl Checker {
    fn new(r: &VoteMatrix, spec: &ModelSpec) -> Result<Self> {
        if r.m_eff() > ORACLE_MAX_POINTS {
            return Err(Error::invalid_arg(format!(
                "oracle is limited to {ORACLE_MAX_POINTS} points, got {}",
                r.m_eff()
            )));
        }
        let model = build_milp(r, spec)?;
        Ok(Checker {
            layout: Layout::for_matrix(r),
            model,
        })
    }

    /// LP values when `z` admits a weight vector.
    fn check(&self, z: &[u8]) -> Result<Option<Vec<f64>>> {
        let fixes: Vec<(usize, f64, f64)> = z
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.layout.z(i), f64::from(v), f64::from(v)))
            .collect();
        let r = solve_lp(&self.model, &fixes);
        match r.status {
            LpStatus::Optimal => Ok(Some(r.values)),
            LpStatus::Infeasible => Ok(None),
            other => Err(Error::invalid_data(format!("oracle LP ended with {other:?}"))),
        }
    }
}

/// Optimal solution with the lexicographically smallest `z`.
pub fn brute_force_solve(r: &VoteMatrix, spec: &ModelSpec) -> Result<Solution> {
    let start = std::time::Instant::now();
    let checker = Checker::new(r, spec)?;
    let m = r.n_points();
    let mut checked = 0;
    for (dev, mask) in candidates(r, spec.lambda) {
        let z = assignment(mask, m);
        checked += 1;
        if let Some(mut values) = checker.check(&z)? {
            values[checker.layout.eta] = dev as f64;
            let mut s = Solution::empty(SolveStatus::Optimal);
            s.objective = dev as f64;
            s.bound = dev as f64;
            s.alpha = checker.layout.alpha(&values).to_vec();
            s.eta = dev as f64;
            s.z = z;
            s.values = values;
            s.stats.nodes = checked;
            s.stats.wall_secs = start.elapsed().as_secs_f64();
            return Ok(s);
        }
    }
    let mut s = Solution::empty(SolveStatus::Infeasible);
    s.stats.nodes = checked;
    s.stats.wall_secs = start.elapsed().as_secs_f64();
    Ok(s)
}

/// All optimal assignments.
pub fn brute_force_all_optima(r: &VoteMatrix, spec: &ModelSpec) -> Result<OracleOptima> {
    let checker = Checker::new(r, spec)?;
    let m = r.n_points();
    let mut best: Option<u64> = None;
    let mut assignments = Vec::new();
    for (dev, mask) in candidates(r, spec.lambda) {
        if best.is_some_and(|b| dev > b) {
            break;
        }
        let z = assignment(mask, m);
        if checker.check(&z)?.is_some() {
            best = Some(dev);
            assignments.push(z);
        }
    }
    Ok(OracleOptima {
        objective: best,
        assignments,
    })
}
