pub mod bnb;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod forest;
pub mod io;
pub mod milp;
pub mod model;
pub mod pipeline;
pub mod presolve;
pub mod rng;
pub mod synth;
pub mod tree;
pub mod votes;

pub use error::{Error, Result};
