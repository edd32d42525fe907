//! Seeded fixtures shared by the benchmarks.

use fkd_core::convex::ConvexOrdering;
use fkd_core::cw::CliqueExpression;
use fkd_core::gen;
use fkd_core::tin::TreeDecomposition;
use fkd_core::ConflictInstance;

pub const SEED: u64 = 2024;

/// Connected-ish convex bipartite instance with `na + nb` vertices.
pub fn convex(na: usize, nb: usize, k: usize, max_profit: u64) -> (ConflictInstance, ConvexOrdering) {
    gen::gen_convex_bipartite(na, nb, k, max_profit, SEED)
}

pub fn ktree(n: usize, width: usize, k: usize, max_profit: u64) -> (ConflictInstance, TreeDecomposition) {
    gen::gen_partial_ktree(n, width, k, max_profit, 20, SEED).expect("width below n")
}

pub fn cliquewidth(leaves: usize, labels: usize, k: usize, max_profit: u64) -> (ConflictInstance, CliqueExpression) {
    gen::gen_cw_instance(leaves, labels, k, max_profit, SEED)
}

/// The same instance with every profit multiplied by `factor`.
pub fn scaled(inst: &ConflictInstance, factor: u64) -> ConflictInstance {
    let profits = inst
        .profit_matrix()
        .iter()
        .map(|row| row.iter().map(|p| p * factor).collect())
        .collect();
    inst.with_profits(profits).expect("profits stay small")
}
