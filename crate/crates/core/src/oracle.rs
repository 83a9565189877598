//! Independent numerical verification: best-response deviation checks,
//! brute-force fixed-point search over a discretized strategy grid, and
//! seeded Monte Carlo simulation of the extensive form.
//!
//! Nothing here reuses the solver's region logic; the checks operate
//! directly on the stage game so they can catch solver bugs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::btb::{BtbComparison, Regime};
use crate::model::{posterior_mu, MarketParams, PopulationParams, StrategyProfile};
use crate::solver::Equilibrium;

/// Outcome of a unilateral-deviation check at a candidate profile.
/// All gains are reported as `max(0, gain)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub worker_gain: f64,
    pub employer_gain: f64,
    pub belief_error: f64,
    pub passed: bool,
}

/// Low-cost worker's payoff difference between qualifying and not, given the
/// employer mixes at `eta` on the garbled signal.
fn qualification_premium(eta: f64, params: &MarketParams) -> f64 {
    let pay_q1 = params.w * (params.phi1 + (1.0 - params.phi1) * eta) - params.c_low;
    let pay_q0 = params.w * (1.0 - params.phi0) * eta;
    pay_q1 - pay_q0
}

/// Deviation gains for `(chi, eta)` with an explicitly supplied belief `mu`.
pub fn check_profile_with_belief(
    chi: f64,
    eta: f64,
    mu: f64,
    params: &MarketParams,
    p: f64,
    tol: f64,
) -> DeviationReport {
    let premium = qualification_premium(eta, params);
    let worker_gain = if premium > 0.0 { (1.0 - chi) * premium } else { -chi * premium };
    // Employer's conditional value of hiring on the garbled signal.
    let hire_value = mu * params.b - params.w;
    let employer_gain = hire_value.max(0.0) - eta * hire_value;
    let belief_error = (mu - posterior_mu(chi, p, params)).abs();
    DeviationReport {
        worker_gain: worker_gain.max(0.0),
        employer_gain: employer_gain.max(0.0),
        belief_error,
        passed: worker_gain <= tol && employer_gain <= tol && belief_error <= tol,
    }
}

/// Deviation gains for a bare profile, with the belief derived consistently
/// from the profile itself.
pub fn check_profile(
    profile: &StrategyProfile,
    params: &MarketParams,
    p: f64,
    tol: f64,
) -> DeviationReport {
    let mu = posterior_mu(profile.chi, p, params);
    check_profile_with_belief(profile.chi, profile.eta, mu, params, p, tol)
}

/// Checks a solver equilibrium, including consistency of its recorded belief.
pub fn check_equilibrium(
    eq: &Equilibrium,
    params: &MarketParams,
    p: f64,
    tol: f64,
) -> DeviationReport {
    check_profile_with_belief(eq.chi, eq.eta, eq.mu, params, p, tol)
}

/// An approximate equilibrium found by grid search: the best passing cell of
/// one connected cluster, plus the cluster's extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCluster {
    pub profile: StrategyProfile,
    pub cells: usize,
}

/// Exhaustively scans the `(chi, eta)` grid for approximate equilibria and
/// merges adjacent passing cells (8-neighborhood) into clusters. Each
/// closed-form equilibrium lies within grid spacing of a returned profile.
///
/// A cell passes on *best-response residuals*, not deviation gains: an
/// interior mixing weight demands indifference of the randomizing side, while
/// a boundary weight demands the corresponding weak inequality. Residuals
/// are not damped by the mixing weights themselves, so profiles that merely
/// make deviations rare (rather than unprofitable) do not pass. Each
/// tolerance is widened by three quarters of a grid step times a slope bound
/// so the cell nearest an exact equilibrium always passes: the worker's
/// indifference residual moves at rate `w |phi0 - phi1|` per unit `eta`, the
/// employer's at rate `B |d mu / d chi|`, bounded locally around each cell.
pub fn grid_search_equilibria(
    params: &MarketParams,
    p: f64,
    grid_n: usize,
    tol: f64,
) -> Vec<GridCluster> {
    assert!(grid_n >= 2, "grid_n must be at least 2");
    let step = 1.0 / (grid_n - 1) as f64;
    let worker_slope = params.w * (params.phi0 - params.phi1).abs();
    let worker_tol = tol + 0.75 * worker_slope * step;
    let a = 1.0 - params.phi1;
    let b0 = 1.0 - params.phi0;
    // Posterior denominator is linear in chi; bound its minimum one step out.
    let denom = |chi: f64| a * chi * p + b0 * (1.0 - chi * p);

    // Total residual per cell, or infinity for failing cells.
    let scores: Vec<f64> = (0..grid_n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let chi = i as f64 * step;
            let mu = posterior_mu(chi, p, params);
            let hire_value = mu * params.b - params.w;
            let denom_local =
                denom((chi - step).max(0.0)).min(denom((chi + step).min(1.0))).max(1e-12);
            let mu_slope = a * p * b0 / (denom_local * denom_local);
            let employer_tol = tol + 0.75 * params.b * mu_slope * step;
            (0..grid_n).map(move |j| {
                let eta = j as f64 * step;
                let premium = qualification_premium(eta, params);
                let worker_residual = if i == 0 {
                    premium.max(0.0)
                } else if i == grid_n - 1 {
                    (-premium).max(0.0)
                } else {
                    premium.abs()
                };
                let employer_residual = if j == 0 {
                    hire_value.max(0.0)
                } else if j == grid_n - 1 {
                    (-hire_value).max(0.0)
                } else {
                    hire_value.abs()
                };
                if worker_residual <= worker_tol && employer_residual <= employer_tol {
                    worker_residual + employer_residual
                } else {
                    f64::INFINITY
                }
            })
        })
        .collect();

    // Flood fill over passing cells; keep each component's best cell.
    let idx = |i: usize, j: usize| i * grid_n + j;
    let mut visited = vec![false; grid_n * grid_n];
    let mut clusters = Vec::new();
    for start in 0..grid_n * grid_n {
        if visited[start] || scores[start].is_infinite() {
            continue;
        }
        let mut stack = vec![start];
        visited[start] = true;
        let mut best = start;
        let mut cells = 0usize;
        while let Some(cell) = stack.pop() {
            cells += 1;
            if scores[cell] < scores[best] {
                best = cell;
            }
            let (i, j) = (cell / grid_n, cell % grid_n);
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= grid_n as i64 || nj >= grid_n as i64 {
                        continue;
                    }
                    let n = idx(ni as usize, nj as usize);
                    if !visited[n] && scores[n].is_finite() {
                        visited[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        let (bi, bj) = (best / grid_n, best % grid_n);
        clusters.push(GridCluster {
            profile: StrategyProfile { chi: bi as f64 * step, eta: bj as f64 * step },
            cells,
        });
    }
    clusters.sort_by(|a, b| {
        (a.profile.chi, a.profile.eta)
            .partial_cmp(&(b.profile.chi, b.profile.eta))
            .unwrap()
    });
    clusters
}

/// A seeded Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    sum: f64,
    sum_sq: f64,
    n: u64,
}

impl Accumulator {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
        self.n += 1;
    }

    fn estimate(&self, seed: u64) -> MonteCarloEstimate {
        let n = self.n.max(1) as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0).max(1.0)).max(0.0);
        MonteCarloEstimate { mean, std_error: (var / n).sqrt(), n: self.n, seed }
    }
}

/// Per-actor Monte Carlo payoff estimates for one simulated group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedPayoffs {
    pub worker_low: MonteCarloEstimate,
    pub worker_high: MonteCarloEstimate,
    pub worker_exante: MonteCarloEstimate,
    pub employer: MonteCarloEstimate,
}

/// Simulates `n` plays of the extensive form under `profile` at potential
/// `p`. Deterministic for a fixed `(seed, stream)`; distinct streams give
/// independent draws from the same seed.
pub fn simulate_payoffs_stream(
    profile: &StrategyProfile,
    params: &MarketParams,
    p: f64,
    n: u64,
    seed: u64,
    stream: u64,
) -> SimulatedPayoffs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut low = Accumulator::default();
    let mut high = Accumulator::default();
    let mut exante = Accumulator::default();
    let mut employer = Accumulator::default();
    for _ in 0..n {
        let low_cost = rng.gen::<f64>() < p;
        let qualified = low_cost && rng.gen::<f64>() < profile.chi;
        let dist = crate::model::signal_distribution(qualified, params);
        let u = rng.gen::<f64>();
        let hired = if u < dist[0] {
            false // theta = 1
        } else if u < dist[0] + dist[1] {
            rng.gen::<f64>() < profile.eta // theta = 2
        } else {
            true // theta = 3
        };
        let cost = if low_cost { params.c_low } else { params.c_high };
        let (worker_pay, employer_pay) =
            crate::model::stage_payoffs(qualified, hired, cost, params);
        if low_cost {
            low.push(worker_pay);
        } else {
            high.push(worker_pay);
        }
        exante.push(worker_pay);
        employer.push(employer_pay);
    }
    SimulatedPayoffs {
        worker_low: low.estimate(seed),
        worker_high: high.estimate(seed),
        worker_exante: exante.estimate(seed),
        employer: employer.estimate(seed),
    }
}

pub fn simulate_payoffs(
    profile: &StrategyProfile,
    params: &MarketParams,
    p: f64,
    n: u64,
    seed: u64,
) -> SimulatedPayoffs {
    simulate_payoffs_stream(profile, params, p, n, seed, 0)
}

/// One actor-level delta check in a comparison verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaCheck {
    pub actor: String,
    pub analytic: f64,
    pub simulated: f64,
    pub std_error: f64,
    pub passed: bool,
}

/// Result of re-deriving a BTB comparison by simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerification {
    pub checks: Vec<DeltaCheck>,
    pub passed: bool,
}

impl ComparisonVerification {
    pub fn first_failure(&self) -> Option<&DeltaCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

const SIGMA_POLICY: f64 = 4.0;

fn profile_of(eq: &Equilibrium) -> StrategyProfile {
    StrategyProfile { chi: eq.chi, eta: eq.eta }
}

/// Re-derives every welfare delta of `cmp` by simulating both regimes and
/// confirms agreement with the analytic values at the four-standard-error
/// policy. Each (regime, group) pair gets its own RNG stream.
pub fn verify_comparison(
    cmp: &BtbComparison,
    params: &MarketParams,
    pop: &PopulationParams,
    n: u64,
    seed: u64,
) -> ComparisonVerification {
    let sims: Vec<SimulatedPayoffs> = [
        (&cmp.with_box.group1, pop.p1, 1u64),
        (&cmp.with_box.group2, pop.p2, 2),
        (&cmp.banned.group1, pop.p1, 3),
        (&cmp.banned.group2, pop.p2, 4),
    ]
    .into_par_iter()
    .map(|(group, p, stream)| {
        simulate_payoffs_stream(&profile_of(&group.equilibrium), params, p, n, seed, stream)
    })
    .collect();
    let (box1, box2, ban1, ban2) = (&sims[0], &sims[1], &sims[2], &sims[3]);

    let delta = |a: &MonteCarloEstimate, b: &MonteCarloEstimate| {
        (b.mean - a.mean, (a.std_error * a.std_error + b.std_error * b.std_error).sqrt())
    };
    let gamma = pop.gamma;
    let mut checks = Vec::new();
    let mut push = |actor: &str, analytic: f64, simulated: f64, std_error: f64| {
        let passed = (simulated - analytic).abs() <= SIGMA_POLICY * std_error + 1e-9;
        checks.push(DeltaCheck {
            actor: actor.to_string(),
            analytic,
            simulated,
            std_error,
            passed,
        });
    };

    let (d1, se1) = delta(&box1.employer, &ban1.employer);
    let (d2, se2) = delta(&box2.employer, &ban2.employer);
    push(
        "employer",
        cmp.deltas.employer,
        gamma * d1 + (1.0 - gamma) * d2,
        (gamma * gamma * se1 * se1 + (1.0 - gamma) * (1.0 - gamma) * se2 * se2).sqrt(),
    );
    let (d, se) = delta(&box1.worker_low, &ban1.worker_low);
    push("group1 worker_low", cmp.deltas.w1_low, d, se);
    let (d, se) = delta(&box1.worker_high, &ban1.worker_high);
    push("group1 worker_high", cmp.deltas.w1_high, d, se);
    let (d, se) = delta(&box2.worker_low, &ban2.worker_low);
    push("group2 worker_low", cmp.deltas.w2_low, d, se);
    let (d, se) = delta(&box2.worker_high, &ban2.worker_high);
    push("group2 worker_high", cmp.deltas.w2_high, d, se);

    let passed = checks.iter().all(|c| c.passed);
    ComparisonVerification { checks, passed }
}

/// Regime label helper for reports.
pub fn regime_label(regime: Regime) -> &'static str {
    match regime {
        Regime::WithBox => "with-box",
        Regime::Banned => "banned",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::btb::compare_btb;
    use crate::model::DEFAULT_EPS;
    use crate::solver::enumerate_equilibria;

    fn base() -> MarketParams {
        MarketParams { w: 1.0, b: 2.0, c_low: 0.3, c_high: 1.5, phi0: 0.2, phi1: 0.6 }
    }

    fn neg() -> MarketParams {
        MarketParams { phi0: 0.6, phi1: 0.2, ..base() }
    }

    #[test]
    fn mse_profile_passes_check() {
        let profile = StrategyProfile { chi: 2.0 / 3.0 / 0.8, eta: 0.75 };
        let rep = check_profile(&profile, &base(), 0.8, 1e-9);
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn aggressive_fqe_fails_worker_check_when_phi0_low() {
        let rep = check_profile(&StrategyProfile { chi: 1.0, eta: 1.0 }, &base(), 0.8, 1e-9);
        assert!(!rep.passed);
        assert!((rep.worker_gain - 0.1).abs() < 1e-12);
    }

    #[test]
    fn zqe_passes_when_qualification_unprofitable() {
        let m = MarketParams { phi0: 0.1, phi1: 0.2, ..base() };
        let rep = check_profile(&StrategyProfile { chi: 0.0, eta: 0.0 }, &m, 0.8, 1e-9);
        assert!(rep.passed);
    }

    #[test]
    fn solver_equilibria_pass_deviation_checks() {
        for (m, p) in [(base(), 0.8), (base(), 0.5), (neg(), 0.5), (neg(), 0.2)] {
            for eq in enumerate_equilibria(&m, p, DEFAULT_EPS) {
                let rep = check_equilibrium(&eq, &m, p, 1e-9);
                assert!(rep.passed, "{eq:?} -> {rep:?}");
            }
        }
    }

    #[test]
    fn grid_search_finds_single_mse_cluster() {
        let clusters = grid_search_equilibria(&base(), 0.8, 401, 1e-9);
        assert_eq!(clusters.len(), 1, "{clusters:?}");
        let c = &clusters[0];
        assert!((c.profile.chi - 2.0 / 3.0 / 0.8).abs() <= 1.0 / 400.0 + 1e-12);
        assert!((c.profile.eta - 0.75).abs() <= 1.0 / 400.0 + 1e-12);
    }

    #[test]
    fn grid_search_finds_three_clusters_in_region_1() {
        let clusters = grid_search_equilibria(&neg(), 0.5, 401, 1e-9);
        assert_eq!(clusters.len(), 3, "{clusters:?}");
        let step = 1.0 / 400.0;
        let targets = [(0.0, 0.0), (2.0 / 3.0, 0.25), (1.0, 1.0)];
        for (target, cluster) in targets.iter().zip(&clusters) {
            assert!((cluster.profile.chi - target.0).abs() <= 2.0 * step);
            assert!((cluster.profile.eta - target.1).abs() <= 2.0 * step);
        }
    }

    #[test]
    fn grid_search_uninformative_single_zqe_cluster() {
        let m = MarketParams { phi0: 0.1, phi1: 0.2, ..base() };
        let clusters = grid_search_equilibria(&m, 0.8, 401, 1e-9);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].profile, StrategyProfile { chi: 0.0, eta: 0.0 });
    }

    #[test]
    fn simulate_degenerate_profile_is_exact() {
        let sim = simulate_payoffs(
            &StrategyProfile { chi: 0.0, eta: 0.0 },
            &base(),
            0.8,
            10_000,
            7,
        );
        assert_eq!(sim.worker_exante.mean, 0.0);
        assert_eq!(sim.worker_exante.std_error, 0.0);
        assert_eq!(sim.employer.mean, 0.0);
    }

    #[test]
    fn simulate_is_deterministic() {
        let profile = StrategyProfile { chi: 0.5, eta: 0.4 };
        let a = simulate_payoffs(&profile, &base(), 0.7, 50_000, 42);
        let b = simulate_payoffs(&profile, &base(), 0.7, 50_000, 42);
        assert_eq!(a, b);
        let c = simulate_payoffs(&profile, &base(), 0.7, 50_000, 43);
        assert_ne!(a.employer.mean, c.employer.mean);
    }

    #[test]
    fn simulate_matches_mse_closed_forms() {
        let profile = StrategyProfile { chi: 2.0 / 3.0 / 0.8, eta: 0.75 };
        let sim = simulate_payoffs(&profile, &base(), 0.8, 1_000_000, 42);
        assert!((sim.worker_exante.mean - 0.6).abs() <= 4.0 * sim.worker_exante.std_error);
        assert!((sim.employer.mean - 0.4).abs() <= 4.0 * sim.employer.std_error);
    }

    #[test]
    fn verify_comparison_passes_on_solver_output() {
        let pop = PopulationParams { gamma: 0.8, p1: 0.8, p2: 0.4 };
        let cmp = compare_btb(&base(), &pop, DEFAULT_EPS).unwrap();
        let report = verify_comparison(&cmp, &base(), &pop, 200_000, 42);
        assert!(report.passed, "{:?}", report.first_failure());
    }

    #[test]
    fn verify_comparison_flags_tampered_deltas() {
        let pop = PopulationParams { gamma: 0.8, p1: 0.8, p2: 0.4 };
        let mut cmp = compare_btb(&base(), &pop, DEFAULT_EPS).unwrap();
        cmp.deltas.w2_low += 0.2;
        let report = verify_comparison(&cmp, &base(), &pop, 200_000, 42);
        assert!(!report.passed);
        assert_eq!(report.first_failure().unwrap().actor, "group2 worker_low");
    }
}
