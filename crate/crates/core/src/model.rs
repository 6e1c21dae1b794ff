//! The cardinality-constrained forest MILP.
//!
//! Variables, in this order: one weight `alpha_j` per (merged) tree, the
//! deviation `eta`, one binary `z_i` per (merged) point. For every point `i`
//! with weighted margin `s_i = sum_j w_j v_ji alpha_j` the rows are
//!
//! ```text
//! lo_i:  s_i - M z_i <= -1
//! hi_i:  s_i - M z_i >= 1 - M
//! ```
//!
//! so `z_i = 1` forces `s_i >= 1` and `z_i = 0` forces `s_i <= -1`. The
//! cardinality pair `card_lo`/`card_hi` keeps `sum_i c_i z_i` within `eta` of
//! `lambda`, where `c_i` is the point multiplicity. The objective is `min eta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::MilpModel;
use crate::votes::VoteMatrix;

/// Metadata keys understood by the branch-and-bound solver.
pub mod meta {
    /// `"true"` when every integer-feasible objective value is an integer.
    pub const INTEGRAL_OBJECTIVE: &str = "integral_objective";
    /// Index of the `>=` cardinality row (`sum c_i z_i + eta >= lambda`).
    pub const CARDINALITY_ROW: &str = "cardinality_row";
    pub const CARDINALITY_TARGET: &str = "cardinality_target";
    pub const N_ALPHA: &str = "n_alpha";
    pub const ETA: &str = "eta_index";
    pub const Z_START: &str = "z_start";
    pub const N_Z: &str = "n_z";
    pub const BIG_M: &str = "big_m";
    pub const ETA_BAR: &str = "eta_bar";
    pub const ELL: &str = "ell";
    pub const U: &str = "u";
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub ell: f64,
    pub u: f64,
    pub lambda: u64,
}

impl ModelSpec {
    pub fn new(ell: f64, u: f64, lambda: u64) -> Self {
        ModelSpec { ell, u, lambda }
    }

    pub fn check_bounds(&self) -> Result<()> {
        if !(self.ell > 0.0 && self.ell < self.u && self.u.is_finite()) {
            return Err(Error::invalid_arg(format!(
                "weight bounds must satisfy 0 < ell < u, got [{}, {}]",
                self.ell, self.u
            )));
        }
        Ok(())
    }

    pub fn validate(&self, r: &VoteMatrix) -> Result<()> {
        self.check_bounds()?;
        if self.lambda > r.m_eff() {
            return Err(Error::invalid_arg(format!(
                "lambda {} exceeds the {} points",
                self.lambda,
                r.m_eff()
            )));
        }
        Ok(())
    }
}

pub fn big_m(t_eff: u64, u: f64) -> f64 {
    u * t_eff as f64 + 1.0
}

pub fn eta_bar(lambda: u64, m_eff: u64) -> f64 {
    lambda.max(m_eff.saturating_sub(lambda)) as f64
}

/// Positions of the variable blocks inside a model built by [`build_milp`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n_alpha: usize,
    pub eta: usize,
    pub z_start: usize,
    pub n_z: usize,
}

impl Layout {
    pub fn for_matrix(r: &VoteMatrix) -> Self {
        let t = r.n_trees();
        Layout {
            n_alpha: t,
            eta: t,
            z_start: t + 1,
            n_z: r.n_points(),
        }
    }

    pub fn from_model(model: &MilpModel) -> Option<Self> {
        let get = |k: &str| model.metadata.get(k)?.parse::<usize>().ok();
        Some(Layout {
            n_alpha: get(meta::N_ALPHA)?,
            eta: get(meta::ETA)?,
            z_start: get(meta::Z_START)?,
            n_z: get(meta::N_Z)?,
        })
    }

    pub fn z(&self, i: usize) -> usize {
        self.z_start + i
    }

    pub fn alpha<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..self.n_alpha]
    }

    pub fn zs<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.z_start..self.z_start + self.n_z]
    }
}

/// Builds the MILP for `r`. The big-M constant and the bound on `eta` are
/// derived from `r` itself.
pub fn build_milp(r: &VoteMatrix, spec: &ModelSpec) -> Result<MilpModel> {
    spec.validate(r)?;
    let (t, m) = (r.n_trees(), r.n_points());
    let big = big_m(r.t_eff(), spec.u);
    let bar = eta_bar(spec.lambda, r.m_eff());
    let layout = Layout::for_matrix(r);

    let mut model = MilpModel::new("C2RF");
    for j in 0..t {
        model.add_var(format!("a{j}"), spec.ell, spec.u, false);
    }
    let eta = model.add_var("eta", 0.0, bar, false);
    for i in 0..m {
        model.add_var(format!("z{i}"), 0.0, 1.0, true);
    }

    let tw = r.tree_weights();
    for i in 0..m {
        let mut coeffs: Vec<(usize, f64)> = (0..t)
            .map(|j| (j, f64::from(tw[j]) * f64::from(r.vote(j, i))))
            .collect();
        coeffs.push((layout.z(i), -big));
        model.add_row(format!("lo{i}"), coeffs.clone(), f64::NEG_INFINITY, -1.0);
        model.add_row(format!("hi{i}"), coeffs, 1.0 - big, f64::INFINITY);
    }

    let lambda = spec.lambda as f64;
    let mut card: Vec<(usize, f64)> = r
        .point_weights()
        .iter()
        .enumerate()
        .map(|(i, &w)| (layout.z(i), f64::from(w)))
        .collect();
    card.push((eta, 1.0));
    let card_row = model.add_row("card_lo", card.clone(), lambda, f64::INFINITY);
    card.last_mut().expect("eta entry").1 = -1.0;
    model.add_row("card_hi", card, f64::NEG_INFINITY, lambda);
    model.set_objective(vec![(eta, 1.0)]);

    let md = &mut model.metadata;
    md.insert(meta::INTEGRAL_OBJECTIVE.into(), "true".into());
    md.insert(meta::CARDINALITY_ROW.into(), card_row.to_string());
    md.insert(meta::CARDINALITY_TARGET.into(), spec.lambda.to_string());
    md.insert(meta::N_ALPHA.into(), layout.n_alpha.to_string());
    md.insert(meta::ETA.into(), layout.eta.to_string());
    md.insert(meta::Z_START.into(), layout.z_start.to_string());
    md.insert(meta::N_Z.into(), layout.n_z.to_string());
    md.insert(meta::BIG_M.into(), crate::milp::mps::fmt_num(big));
    md.insert(meta::ETA_BAR.into(), crate::milp::mps::fmt_num(bar));
    md.insert(meta::ELL.into(), crate::milp::mps::fmt_num(spec.ell));
    md.insert(meta::U.into(), crate::milp::mps::fmt_num(spec.u));
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert_eq!(big_m(20, 100.0), 2001.0);
        assert_eq!(big_m(1, 1.0), 2.0);
        assert_eq!(big_m(3, 2.0), 7.0);
        assert_eq!(eta_bar(3, 10), 7.0);
        assert_eq!(eta_bar(0, 0), 0.0);
        assert_eq!(eta_bar(5, 10), 5.0);
    }

    #[test]
    fn shape_of_small_model() {
        let r = VoteMatrix::new(3, 4, vec![1; 12]).unwrap();
        let m = build_milp(&r, &ModelSpec::new(1.0, 100.0, 2)).unwrap();
        assert_eq!(m.num_vars(), 3 + 1 + 4);
        assert_eq!(m.integer_vars().count(), 4);
        assert_eq!(m.num_rows(), 8 + 2);
        assert_eq!(m.objective(), &[(3, 1.0)]);
        m.validate().unwrap();
        let l = Layout::from_model(&m).unwrap();
        assert_eq!(l, Layout::for_matrix(&r));
        assert_eq!(m.variables()[l.eta].upper, 2.0);
        // big-M recomputed from the matrix: 100 * 3 + 1
        assert_eq!(m.constraints()[0].coeffs.last(), Some(&(4, -301.0)));
        assert_eq!(m.constraints()[1].lower, -300.0);
    }

    #[test]
    fn weights_enter_coefficients() {
        let r = VoteMatrix::with_weights(2, 1, vec![1, -1], vec![2, 1], vec![2]).unwrap();
        let m = build_milp(&r, &ModelSpec::new(1.0, 10.0, 1)).unwrap();
        assert_eq!(m.constraints()[0].coeffs, vec![(0, 2.0), (1, -1.0), (3, -31.0)]);
        let card = &m.constraints()[2];
        assert_eq!(card.coeffs, vec![(2, 1.0), (3, 2.0)]);
        assert_eq!(card.lower, 1.0);
    }

    #[test]
    fn invalid_specs() {
        let r = VoteMatrix::new(1, 2, vec![1, 1]).unwrap();
        assert!(build_milp(&r, &ModelSpec::new(1.0, 1.0, 0)).is_err());
        assert!(build_milp(&r, &ModelSpec::new(0.0, 1.0, 0)).is_err());
        assert!(build_milp(&r, &ModelSpec::new(1.0, 2.0, 3)).is_err());
    }

    #[test]
    fn names_fit_mps() {
        let r = VoteMatrix::new(2, 3, vec![1, -1, 1, -1, 1, 1]).unwrap();
        let m = build_milp(&r, &ModelSpec::new(1.0, 100.0, 1)).unwrap();
        let back = crate::milp::parse_mps(&crate::milp::write_mps(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
