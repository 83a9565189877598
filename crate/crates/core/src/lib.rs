//! Equilibrium analysis of a two-group hiring market with a noisy
//! qualification test, and of the welfare effects of banning the test
//! ("ban the box").
//!
//! The crate is organised as:
//! - [`model`]: parameters, validation, signal structure, beliefs, typologies;
//! - [`solver`]: single-group sequential-equilibrium enumeration, payoffs, and
//!   Pareto selection;
//! - [`btb`]: two-group solutions with and without the test, welfare deltas,
//!   and scenario classification;
//! - [`oracle`]: independent verification via best-response checks, grid
//!   search, and Monte Carlo simulation;
//! - [`sweep`]: parameter-grid region maps with CSV/JSON emission;
//! - [`sampling`]: random valid instances for randomized testing.

pub mod btb;
pub mod model;
pub mod oracle;
pub mod sampling;
pub mod solver;
pub mod sweep;

pub use btb::{
    compare_btb, employer_btb_interval, population_potential, solve_banned, solve_with_box,
    BtbComparison, BtbError, GroupSolution, MarketSolution, Regime, Scenario, WelfareDeltas,
};
pub use model::{
    classify_potentials, classify_test, hiring_threshold, posterior_mu, signal_distribution,
    stage_payoffs, validate, MarketParams, ModelError, PopulationParams, PotentialTypology,
    TestSignal, TestTypology, ValidatedModel, DEFAULT_EPS,
};
pub use oracle::{
    check_equilibrium, check_profile, grid_search_equilibria, simulate_payoffs,
    verify_comparison, ComparisonVerification, DeviationReport, GridCluster, MonteCarloEstimate,
    SimulatedPayoffs,
};
pub use solver::{
    enumerate_equilibria, equilibrium_payoffs, mse_profile, pareto_select, profile_payoffs,
    solve_group, Equilibrium, EquilibriumKind, PayoffTable, Posture, SolverError,
};
pub use sweep::{
    emit_csv, emit_json, run_sweep, Axis, SweepCell, SweepError, SweepMode, SweepResult, SweepSpec,
};
