//! Fixed benchmark inputs, shared so every bench sees the same graphs.

use polarlab::dynamics::standard_normal;
use polarlab::graph::{generate_geometric, generate_sbm, largest_component};
use polarlab::Graph;

pub const SEED: u64 = 7;

/// 5-block SBM with `n` nodes, `p = 0.1`, `q = 0.01`.
pub fn sbm5(n: usize) -> Graph {
    largest_component(&generate_sbm(5, n, 0.1, 0.01, SEED).expect("valid SBM parameters"))
}

/// Random geometric graph with radius 0.1.
pub fn geometric(n: usize) -> Graph {
    largest_component(&generate_geometric(n, 0.1, SEED).expect("valid geometric parameters"))
}

pub fn opinions(g: &Graph) -> Vec<f64> {
    standard_normal(g.node_count(), SEED)
}
