//! Bounded-variable primal simplex on a dense tableau.
//!
//! Every row `i` gets a logical column `s_i = a_i x` carrying the row bounds,
//! so the working system is `[A | -I] (x, s) = 0` with every column boxed
//! (logical columns may be half-infinite). Phase 1 minimizes the sum of bound
//! violations of the basic columns, phase 2 the model objective. Pricing is
//! Dantzig's rule; after a streak of degenerate steps the solver switches to
//! Bland's rule until it makes progress again.
//!
//! A solver instance keeps its basis between calls, which is how branch and
//! bound warm-starts. Any basis is a valid start for phase 1, so a warm start
//! only affects speed. The tableau is rebuilt from the original rows after a
//! fixed number of pivots and whenever the final audit (row activities
//! recomputed from the model) fails.

use crate::milp::model::MilpModel;

/// Feasibility tolerance used while iterating.
const PRIMAL_TOL: f64 = 1e-8;
/// Tolerance of the final audit against the original rows and bounds.
pub const AUDIT_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;
const REFACTOR_EVERY: usize = 400;
const MAX_AUDIT_RETRIES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    IterationLimit,
    /// Only reachable when some column lacks a finite bound in the improving direction.
    Unbounded,
    /// The audit kept failing after rebuilding the tableau.
    Numerical,
}

#[derive(Clone, Debug)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// Structural variable values (meaningful for `Optimal`).
    pub values: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LpOptions {
    /// Basis changes allowed per solve; `None` means `10 * (rows + cols)`.
    pub max_iterations: Option<usize>,
}

const NONBASIC: usize = usize::MAX;

/// Reusable simplex state for one model.
pub struct LpSolver<'a> {
    model: &'a MilpModel,
    n: usize,
    rows: usize,
    ncol: usize,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    tab: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    at_upper: Vec<bool>,
    x: Vec<f64>,
    pivots_since_refactor: usize,
    options: LpOptions,
    // scratch
    prow_idx: Vec<usize>,
    prow_val: Vec<f64>,
    dj: Vec<f64>,
}

impl<'a> LpSolver<'a> {
    pub fn new(model: &'a MilpModel, options: LpOptions) -> Self {
        let n = model.num_vars();
        let rows = model.num_rows();
        let ncol = n + rows;
        let mut lb = Vec::with_capacity(ncol);
        let mut ub = Vec::with_capacity(ncol);
        for v in model.variables() {
            lb.push(v.lower);
            ub.push(v.upper);
        }
        for c in model.constraints() {
            lb.push(c.lower);
            ub.push(c.upper);
        }
        let mut cost = vec![0.0; ncol];
        for &(j, c) in model.objective() {
            cost[j] = c;
        }
        let mut s = LpSolver {
            model,
            n,
            rows,
            ncol,
            lb,
            ub,
            cost,
            tab: Vec::new(),
            basis: (n..ncol).collect(),
            pos: vec![NONBASIC; ncol],
            at_upper: vec![false; ncol],
            x: vec![0.0; ncol],
            pivots_since_refactor: 0,
            options,
            prow_idx: Vec::new(),
            prow_val: Vec::new(),
            dj: vec![0.0; ncol],
        };
        s.slack_tableau();
        s
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    /// Tableau of the all-logical basis: `[-A | I]`.
    fn slack_tableau(&mut self) {
        self.tab = vec![0.0; self.rows * self.ncol];
        for (i, c) in self.model.constraints().iter().enumerate() {
            let row = &mut self.tab[i * self.ncol..(i + 1) * self.ncol];
            for &(j, a) in &c.coeffs {
                row[j] = -a;
            }
            row[self.n + i] = 1.0;
        }
        for p in self.pos.iter_mut() {
            *p = NONBASIC;
        }
        for i in 0..self.rows {
            self.basis[i] = self.n + i;
            self.pos[self.n + i] = i;
        }
        self.pivots_since_refactor = 0;
    }

    /// Rebuilds the tableau for the current basis from the original rows.
    /// Columns whose pivot turns out too small drop out of the basis.
    fn refactor(&mut self) {
        let target: Vec<usize> = (0..self.n).filter(|&j| self.pos[j] != NONBASIC).collect();
        let keep_logical: Vec<bool> = (0..self.rows).map(|i| self.pos[self.n + i] != NONBASIC).collect();
        self.slack_tableau();
        for q in target {
            let mut best = None;
            let mut best_abs = PIVOT_TOL;
            for i in 0..self.rows {
                let b = self.basis[i];
                if b >= self.n && !keep_logical[b - self.n] {
                    let a = self.tab[i * self.ncol + q].abs();
                    if a > best_abs {
                        best_abs = a;
                        best = Some(i);
                    }
                }
            }
            match best {
                Some(p) => self.pivot(p, q),
                None => {
                    // singular: leave q at its nearest bound
                    self.at_upper[q] = (self.x[q] - self.ub[q]).abs() < (self.x[q] - self.lb[q]).abs();
                }
            }
        }
        for j in 0..self.ncol {
            if self.pos[j] == NONBASIC && self.lb[j] == f64::NEG_INFINITY {
                self.at_upper[j] = true;
            }
        }
        self.pivots_since_refactor = 0;
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let ncol = self.ncol;
        let piv = self.tab[p * ncol + q];
        let inv = 1.0 / piv;
        self.prow_idx.clear();
        self.prow_val.clear();
        {
            let prow = &mut self.tab[p * ncol..(p + 1) * ncol];
            for (k, v) in prow.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < 1e-13 {
                        *v = 0.0;
                    } else {
                        self.prow_idx.push(k);
                        self.prow_val.push(*v);
                    }
                }
            }
            prow[q] = 1.0;
        }
        let dense = self.prow_idx.len() * 3 > ncol;
        for i in 0..self.rows {
            if i == p {
                continue;
            }
            let f = self.tab[i * ncol + q];
            if f == 0.0 {
                continue;
            }
            if dense {
                let (head, tail) = self.tab.split_at_mut(p.max(i) * ncol);
                let (row, prow) = if i < p {
                    (&mut head[i * ncol..(i + 1) * ncol], &tail[..ncol])
                } else {
                    (&mut tail[..ncol], &head[p * ncol..(p + 1) * ncol])
                };
                for (r, &pv) in row.iter_mut().zip(prow) {
                    *r -= f * pv;
                }
            } else {
                let row = &mut self.tab[i * ncol..(i + 1) * ncol];
                for (&k, &pv) in self.prow_idx.iter().zip(&self.prow_val) {
                    row[k] -= f * pv;
                }
            }
            self.tab[i * ncol + q] = 0.0;
        }
        let leaving = self.basis[p];
        self.pos[leaving] = NONBASIC;
        self.basis[p] = q;
        self.pos[q] = p;
        self.pivots_since_refactor += 1;
    }

    /// Places nonbasic columns on their bounds and recomputes basic values.
    fn sync_values(&mut self) {
        for j in 0..self.ncol {
            if self.pos[j] != NONBASIC {
                continue;
            }
            let (l, u) = (self.lb[j], self.ub[j]);
            if self.at_upper[j] && u == f64::INFINITY {
                self.at_upper[j] = false;
            }
            if !self.at_upper[j] && l == f64::NEG_INFINITY && u.is_finite() {
                self.at_upper[j] = true;
            }
            self.x[j] = if self.at_upper[j] {
                u
            } else if l.is_finite() {
                l
            } else {
                0.0
            };
        }
        for i in 0..self.rows {
            let row = &self.tab[i * self.ncol..(i + 1) * self.ncol];
            let mut v = 0.0;
            for (j, &t) in row.iter().enumerate() {
                if t != 0.0 && self.pos[j] == NONBASIC {
                    v -= t * self.x[j];
                }
            }
            self.x[self.basis[i]] = v;
        }
    }

    /// Phase-1 cost of basic row `i`: -1 below its lower bound, +1 above its upper.
    fn infeasibility_sign(&self, i: usize) -> f64 {
        let b = self.basis[i];
        let v = self.x[b];
        if v < self.lb[b] - PRIMAL_TOL {
            -1.0
        } else if v > self.ub[b] + PRIMAL_TOL {
            1.0
        } else {
            0.0
        }
    }

    fn audit(&self) -> bool {
        let x = &self.x[..self.n];
        for j in 0..self.n {
            if x[j] < self.lb[j] - AUDIT_TOL || x[j] > self.ub[j] + AUDIT_TOL {
                return false;
            }
        }
        for (i, c) in self.model.constraints().iter().enumerate() {
            let a = c.activity(x);
            if a < self.lb[self.n + i] - AUDIT_TOL || a > self.ub[self.n + i] + AUDIT_TOL {
                return false;
            }
        }
        true
    }

    /// Solves the LP relaxation with structural bounds `lower`/`upper`.
    pub fn solve(&mut self, lower: &[f64], upper: &[f64]) -> LpResult {
        assert_eq!(lower.len(), self.n);
        assert_eq!(upper.len(), self.n);
        self.lb[..self.n].copy_from_slice(lower);
        self.ub[..self.n].copy_from_slice(upper);
        if self.pivots_since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
        if (0..self.n).any(|j| lower[j] > upper[j]) {
            return self.result(LpStatus::Infeasible, 0);
        }
        self.sync_values();

        let limit = self
            .options
            .max_iterations
            .unwrap_or(10 * (self.rows + self.n).max(1));
        let mut iterations = 0;
        let mut audits = 0;
        let mut infeasible_retry = false;
        let mut degenerate = 0;
        let mut bland = false;

        loop {
            if iterations >= limit {
                return self.result(LpStatus::IterationLimit, iterations);
            }
            let signs: Vec<(usize, f64)> = (0..self.rows)
                .filter_map(|i| {
                    let s = self.infeasibility_sign(i);
                    (s != 0.0).then_some((i, s))
                })
                .collect();
            let phase1 = !signs.is_empty();

            // reduced costs of nonbasic columns
            if phase1 {
                self.dj.iter_mut().for_each(|d| *d = 0.0);
                for &(i, s) in &signs {
                    let row = &self.tab[i * self.ncol..(i + 1) * self.ncol];
                    for (d, &t) in self.dj.iter_mut().zip(row) {
                        *d -= s * t;
                    }
                }
            } else {
                self.dj.copy_from_slice(&self.cost);
                for i in 0..self.rows {
                    let c = self.cost[self.basis[i]];
                    if c != 0.0 {
                        let row = &self.tab[i * self.ncol..(i + 1) * self.ncol];
                        for (d, &t) in self.dj.iter_mut().zip(row) {
                            *d -= c * t;
                        }
                    }
                }
            }

            let mut entering = None;
            let mut best = DUAL_TOL;
            for j in 0..self.ncol {
                if self.pos[j] != NONBASIC || self.lb[j] == self.ub[j] {
                    continue;
                }
                let d = self.dj[j];
                let free = self.lb[j] == f64::NEG_INFINITY && self.ub[j] == f64::INFINITY;
                let improving = if free {
                    d.abs() > DUAL_TOL
                } else if self.at_upper[j] {
                    d > DUAL_TOL
                } else {
                    d < -DUAL_TOL
                };
                if !improving {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = Some(j);
                }
            }

            let Some(q) = entering else {
                if phase1 {
                    if !infeasible_retry && self.pivots_since_refactor > 0 {
                        infeasible_retry = true;
                        self.refactor();
                        self.sync_values();
                        continue;
                    }
                    return self.result(LpStatus::Infeasible, iterations);
                }
                if self.audit() {
                    return self.result(LpStatus::Optimal, iterations);
                }
                audits += 1;
                if audits > MAX_AUDIT_RETRIES {
                    return self.result(LpStatus::Numerical, iterations);
                }
                self.refactor();
                self.sync_values();
                continue;
            };

            let dir = if self.dj[q] < 0.0 { 1.0 } else { -1.0 };
            // ratio test
            let mut theta = self.ub[q] - self.lb[q];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_piv = 0.0;
            for i in 0..self.rows {
                let a = self.tab[i * self.ncol + q];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[i];
                let rate = -a * dir;
                let v = self.x[b];
                let (l, u) = (self.lb[b], self.ub[b]);
                let (limit, to_upper) = if rate < 0.0 {
                    if v > u + PRIMAL_TOL {
                        ((v - u) / -rate, true)
                    } else if v >= l - PRIMAL_TOL && l.is_finite() {
                        (((v - l) / -rate).max(0.0), false)
                    } else {
                        continue;
                    }
                } else if v < l - PRIMAL_TOL {
                    ((l - v) / rate, false)
                } else if v <= u + PRIMAL_TOL && u.is_finite() {
                    (((u - v) / rate).max(0.0), true)
                } else {
                    continue;
                };
                let better = match leave {
                    None => limit < theta || (limit == theta && theta.is_finite()),
                    Some((r, _)) => {
                        if limit < theta - 1e-12 {
                            true
                        } else if limit <= theta + 1e-12 {
                            if bland {
                                b < self.basis[r]
                            } else {
                                a.abs() > leave_piv
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta = theta.min(limit);
                    leave = Some((i, to_upper));
                    leave_piv = a.abs();
                }
            }
            if theta == f64::INFINITY {
                return self.result(LpStatus::Unbounded, iterations);
            }

            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }

            // move
            let step = dir * theta;
            if step != 0.0 {
                for i in 0..self.rows {
                    let a = self.tab[i * self.ncol + q];
                    if a != 0.0 {
                        self.x[self.basis[i]] -= a * step;
                    }
                }
            }
            iterations += 1;
            match leave {
                None => {
                    // bound flip
                    self.at_upper[q] = !self.at_upper[q];
                    self.x[q] = if self.at_upper[q] { self.ub[q] } else { self.lb[q] };
                }
                Some((p, to_upper)) => {
                    let b = self.basis[p];
                    self.x[q] += step;
                    self.pivot(p, q);
                    self.at_upper[b] = to_upper;
                    self.x[b] = if to_upper { self.ub[b] } else { self.lb[b] };
                }
            }
        }
    }

    fn result(&self, status: LpStatus, iterations: usize) -> LpResult {
        let values = self.x[..self.n].to_vec();
        let objective = if status == LpStatus::Optimal {
            self.model.objective_value(&values)
        } else {
            f64::NAN
        };
        LpResult {
            status,
            objective,
            values,
            iterations,
        }
    }
}

/// Solves the LP relaxation of `model` from a cold start, with optional
/// per-variable bound overrides `(index, lower, upper)`.
pub fn solve_lp(model: &MilpModel, overrides: &[(usize, f64, f64)]) -> LpResult {
    solve_lp_with(model, overrides, LpOptions::default())
}

pub fn solve_lp_with(model: &MilpModel, overrides: &[(usize, f64, f64)], options: LpOptions) -> LpResult {
    let mut lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
    let mut upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
    for &(j, l, u) in overrides {
        lower[j] = l;
        upper[j] = u;
    }
    LpSolver::new(model, options).solve(&lower, &upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var() -> MilpModel {
        // min -x - 2y  s.t. x + y <= 4, 2x + y >= 2, x in [0, 10], y in [0, 3]
        let mut m = MilpModel::new("t");
        let x = m.add_var("x", 0.0, 10.0, false);
        let y = m.add_var("y", 0.0, 3.0, false);
        m.add_row("c1", vec![(x, 1.0), (y, 1.0)], f64::NEG_INFINITY, 4.0);
        m.add_row("c2", vec![(x, 2.0), (y, 1.0)], 2.0, f64::INFINITY);
        m.set_objective(vec![(x, -1.0), (y, -2.0)]);
        m
    }

    #[test]
    fn small_lp() {
        let r = solve_lp(&two_var(), &[]);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 7.0).abs() < 1e-9);
        assert!((r.values[0] - 1.0).abs() < 1e-9);
        assert!((r.values[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn override_makes_infeasible() {
        let r = solve_lp(&two_var(), &[(0, 0.0, 0.0), (1, 0.0, 1.0)]);
        assert_eq!(r.status, LpStatus::Infeasible);
    }

    #[test]
    fn one_variable_eta() {
        // min eta s.t. lambda - eta <= 0 <= lambda + eta with lambda = 3
        let mut m = MilpModel::new("eta");
        let e = m.add_var("eta", 0.0, 3.0, false);
        m.add_row("lo", vec![(e, 1.0)], 3.0, f64::INFINITY);
        m.add_row("hi", vec![(e, -1.0)], f64::NEG_INFINITY, 3.0);
        m.set_objective(vec![(e, 1.0)]);
        let r = solve_lp(&m, &[]);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ranged_rows() {
        // min x + y  s.t. x + y = 2, 1 <= x - y <= 1.5
        let mut m = MilpModel::new("eq");
        let x = m.add_var("x", -5.0, 5.0, false);
        let y = m.add_var("y", -5.0, 5.0, false);
        m.add_row("e", vec![(x, 1.0), (y, 1.0)], 2.0, 2.0);
        m.add_row("r", vec![(x, 1.0), (y, -1.0)], 1.0, 1.5);
        m.set_objective(vec![(x, 1.0), (y, 1.0)]);
        let r = solve_lp(&m, &[]);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 2.0).abs() < 1e-9);
        assert!(m.max_violation(&r.values) < 1e-9);
    }

    #[test]
    fn warm_start_matches_cold_start() {
        let m = two_var();
        let mut s = LpSolver::new(&m, LpOptions::default());
        let a = s.solve(&[0.0, 0.0], &[10.0, 3.0]);
        let b = s.solve(&[0.0, 0.0], &[10.0, 1.0]);
        let c = solve_lp(&m, &[(1, 0.0, 1.0)]);
        assert_eq!(a.status, LpStatus::Optimal);
        assert_eq!(b.status, LpStatus::Optimal);
        assert!((b.objective - c.objective).abs() < 1e-9);
        let d = s.solve(&[0.0, 0.0], &[10.0, 3.0]);
        assert!((d.objective - a.objective).abs() < 1e-9);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let r = solve_lp_with(&two_var(), &[], LpOptions { max_iterations: Some(0) });
        assert_eq!(r.status, LpStatus::IterationLimit);
    }
}
