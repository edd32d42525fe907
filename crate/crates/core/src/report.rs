//! Solver results and their JSON form.

use serde::{Deserialize, Serialize};

use crate::model::PartialKColoring;
use crate::profile::Profile;

/// Counters reported alongside a solution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Wall-clock time; not covered by any determinism guarantee.
    #[serde(rename = "elapsed-ms")]
    pub elapsed_ms: u64,
    /// Number of nonempty DP table cells computed.
    #[serde(rename = "dp-cells")]
    pub dp_cells: u64,
    /// Total number of profiles stored across all DP cells.
    #[serde(rename = "profiles-stored")]
    pub profiles_stored: u64,
    /// Candidate profile combinations examined (vector additions).
    #[serde(skip)]
    pub work: u64,
}

impl SolveStats {
    pub fn absorb(&mut self, other: &SolveStats) {
        self.dp_cells += other.dp_cells;
        self.profiles_stored += other.profiles_stored;
        self.work += other.work;
    }
}

/// An optimal (or, for the approximation scheme, certified) solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub optimum: u64,
    pub profile: Profile,
    pub witness: PartialKColoring,
    pub stats: SolveStats,
}

/// The JSON result object written by the command-line tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub optimum: u64,
    pub profile: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Vec<Vec<usize>>>,
    pub method: String,
    pub stats: SolveStats,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub guarantee: Option<f64>,
}

impl SolveReport {
    pub fn new(solution: &Solution, method: &str) -> Self {
        SolveReport {
            optimum: solution.optimum,
            profile: solution.profile.as_slice().to_vec(),
            witness: Some(solution.witness.to_one_based()),
            method: method.to_string(),
            stats: solution.stats,
            epsilon: None,
            guarantee: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
