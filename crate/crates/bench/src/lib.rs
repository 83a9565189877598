//! Shared fixtures for the benchmark suite.

use btb_core::{MarketParams, PopulationParams};

/// Positively informative base market used throughout the benchmarks.
pub fn base_market() -> MarketParams {
    MarketParams { w: 1.0, b: 2.0, c_low: 0.3, c_high: 1.5, phi0: 0.2, phi1: 0.6 }
}

/// Negatively informative variant with all three equilibrium kinds at high p.
pub fn swapped_market() -> MarketParams {
    MarketParams { phi0: 0.6, phi1: 0.2, ..base_market() }
}

pub fn base_population() -> PopulationParams {
    PopulationParams { gamma: 0.8, p1: 0.8, p2: 0.25 }
}
