use crate::votes::VoteMatrix;

/// `|weighted mean|` of each point's votes.
pub fn theta(r: &VoteMatrix) -> Vec<f64> {
    let t = r.t_eff() as f64;
    (0..r.n_points())
        .map(|i| {
            if t == 0.0 {
                0.0
            } else {
                r.weighted_column_sum(i).unsigned_abs() as f64 / t
            }
        })
        .collect()
}

/// Dense 0-based rank of each point's `theta` among all distinct values, in
/// increasing order. Ranks are computed on the exact integer vote sums.
pub fn branching_priorities(r: &VoteMatrix) -> Vec<u32> {
    let sums: Vec<u64> = (0..r.n_points())
        .map(|i| r.weighted_column_sum(i).unsigned_abs())
        .collect();
    let mut distinct = sums.clone();
    distinct.sort_unstable();
    distinct.dedup();
    sums.iter()
        .map(|s| distinct.binary_search(s).expect("value present") as u32)
        .collect()
}
