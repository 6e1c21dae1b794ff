//! Generic MILP representation, LP relaxation solver and file formats.

pub mod lp_format;
pub mod model;
pub mod mps;
pub mod simplex;

pub use lp_format::write_lp;
pub use model::{Constraint, MilpModel, Variable};
pub use mps::{export_mps, import_mps, parse_mps, write_mps};
pub use simplex::{solve_lp, solve_lp_with, LpOptions, LpResult, LpSolver, LpStatus};
