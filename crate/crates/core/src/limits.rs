//! Resource caps for the dense and enumerative routines.

use serde::{Deserialize, Serialize};

pub const DEFAULT_DIM_CAP: usize = 4096;
pub const DEFAULT_STRATEGY_CAP: u128 = 100_000_000;
pub const DEFAULT_PROJECTION_DIM_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest joint Hilbert-space dimension that will be assembled.
    pub dim_cap: usize,
    /// Largest number of deterministic strategies enumerated by `lhv_bound`.
    pub strategy_cap: u128,
    /// Largest local dimension scanned by the qubit-projection search.
    pub projection_dim_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            dim_cap: DEFAULT_DIM_CAP,
            strategy_cap: DEFAULT_STRATEGY_CAP,
            projection_dim_cap: DEFAULT_PROJECTION_DIM_CAP,
        }
    }
}
