//! Shared fixtures for the solver benchmarks.

use c2rf_core::model::ModelSpec;
use c2rf_core::synth::{planted_votes, PlantedVotes};
use c2rf_core::votes::VoteMatrix;

/// Planted instance with `m` points drawn from `m / 3` distinct columns.
pub fn planted(n_trees: usize, m: usize, seed: u64) -> (VoteMatrix, ModelSpec) {
    let spec = PlantedVotes {
        n_trees,
        n_points: m,
        distinct_columns: (m / 3).max(1),
        ..PlantedVotes::default()
    };
    let inst = planted_votes(&spec, seed).expect("valid planted spec");
    (inst.votes, ModelSpec::new(spec.ell, spec.u, inst.lambda))
}
