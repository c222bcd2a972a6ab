//! Shared inputs for the criterion benchmarks.

use fairgini_core::sim::{Regime, SimConfig};

/// Integer level grid `0, 1, ..., n - 1`.
pub fn unit_levels(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64).collect()
}

pub fn fair_config(agents: usize, steps: u64) -> SimConfig {
    SimConfig::new(Regime::FairExchange, agents, agents as f64, steps, 7)
}

pub fn rich_config(agents: usize, steps: u64) -> SimConfig {
    SimConfig::new(Regime::RichGetRicher, agents, agents as f64, steps, 7)
}
