use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

/// `lower <= sum coeffs * x <= upper`; either side may be infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// Sorted by variable index, no duplicates, no zeros.
    pub coeffs: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

/// A mixed-integer linear program in minimization form.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MilpModel {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(usize, f64)>,
    /// Free-form tags; the branch-and-bound solver reads a few well-known keys.
    pub metadata: BTreeMap<String, String>,
}

fn normalize(mut coeffs: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    coeffs.sort_by_key(|&(j, _)| j);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
    for (j, a) in coeffs {
        match out.last_mut() {
            Some((k, b)) if *k == j => *b += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|&(_, a)| a != 0.0);
    out
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        MilpModel {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, integer: bool) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer,
        });
        self.variables.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        lower: f64,
        upper: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs: normalize(coeffs),
            lower,
            upper,
        });
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, f64)>) {
        self.objective = normalize(coeffs);
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(usize, f64)] {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn integer_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.integer)
            .map(|(j, _)| j)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xj) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - xj).max(xj - v.upper);
        }
        for c in &self.constraints {
            let a = c.activity(x);
            worst = worst.max(c.lower - a).max(a - c.upper);
        }
        worst
    }

    /// Checks the structural invariants: finite boxed variables, consistent
    /// bounds, valid indices and finite coefficients.
    pub fn validate(&self) -> Result<()> {
        for v in &self.variables {
            if !(v.lower.is_finite() && v.upper.is_finite()) {
                return Err(Error::invalid_data(format!(
                    "variable {} must have finite bounds",
                    v.name
                )));
            }
            if v.lower > v.upper {
                return Err(Error::invalid_data(format!(
                    "variable {} has lower bound above upper bound",
                    v.name
                )));
            }
        }
        let n = self.variables.len();
        let check = |coeffs: &[(usize, f64)], what: &str| -> Result<()> {
            for &(j, a) in coeffs {
                if j >= n {
                    return Err(Error::invalid_data(format!("{what} references variable {j}")));
                }
                if !a.is_finite() {
                    return Err(Error::invalid_data(format!("{what} has a non-finite coefficient")));
                }
            }
            Ok(())
        };
        for c in &self.constraints {
            check(&c.coeffs, &c.name)?;
            if c.lower.is_nan() || c.upper.is_nan() || c.lower > c.upper {
                return Err(Error::invalid_data(format!("row {} has inconsistent bounds", c.name)));
            }
            if c.lower == f64::INFINITY || c.upper == f64::NEG_INFINITY {
                return Err(Error::invalid_data(format!("row {} is unsatisfiable", c.name)));
            }
        }
        check(&self.objective, "objective")
    }
}
