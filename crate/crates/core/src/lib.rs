//! Exact and approximate solvers for fair k-division of indivisible items
//! under a conflict graph.
//!
//! Given a graph `G = (V, E)` and `k` additive profit functions, a *partial
//! k-coloring* assigns each agent an independent set of items, with the
//! sets pairwise disjoint. Its *profit profile* is the k-tuple of per-agent
//! totals, and its *satisfaction level* is the smallest entry. The solvers
//! here maximize the satisfaction level by computing full profile sets:
//!
//! * [`convex`]: connected convex bipartite conflict graphs, merged over
//!   components;
//! * [`cw`]: graphs supplied with a clique-width expression;
//! * [`tin`]: graphs supplied with a tree decomposition of bounded
//!   independence number (including clique trees of chordal graphs);
//! * [`approx`]: a profit-scaling approximation scheme around any of the above;
//! * [`oracle`]: exhaustive enumeration, used as ground truth in tests.

pub mod approx;
pub mod convex;
pub mod cw;
pub mod error;
pub mod gen;
pub mod model;
pub mod oracle;
pub mod profile;
pub mod report;
pub mod tin;

pub use error::{Error, Result};
pub use model::{
    connected_components, parse_instance, profile_of, validate_coloring, Component, ComponentPartition,
    ConflictInstance, PartialKColoring,
};
pub use profile::{edgeless_profiles, satisfaction_level, Profile, ProfileSet};
pub use report::{Solution, SolveReport, SolveStats};

/// Resource caps shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of profiles in any single profile set.
    pub profile_cap: usize,
    /// Maximum `(k+1)^n` the exhaustive oracle will enumerate.
    pub enumeration_cap: u128,
    /// Search-node budget when certifying a bag's independence number.
    pub alpha_node_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            profile_cap: profile::DEFAULT_PROFILE_CAP,
            enumeration_cap: oracle::DEFAULT_ENUMERATION_CAP,
            alpha_node_cap: tin::DEFAULT_ALPHA_NODE_CAP,
        }
    }
}
