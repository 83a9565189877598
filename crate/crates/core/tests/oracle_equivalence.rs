//! Randomized cross-checks between the closed-form solver and the
//! independent oracles (best-response audit, grid search, Monte Carlo).

use btb_core::model::StrategyProfile;
use btb_core::oracle::{
    check_equilibrium, check_profile, grid_search_equilibria, simulate_payoffs, verify_comparison,
};
use btb_core::sampling::{sample_instance, sample_scenario_instance, DEFAULT_MARGIN};
use btb_core::solver::{enumerate_equilibria, equilibrium_payoffs, solve_group};
use btb_core::{compare_btb, TestTypology, DEFAULT_EPS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn every_enumerated_equilibrium_passes_the_best_response_audit() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..300 {
        let (market, p) = sample_instance(&mut rng, DEFAULT_MARGIN);
        for eq in enumerate_equilibria(&market, p, DEFAULT_EPS) {
            let report = check_equilibrium(&eq, &market, p, 1e-9);
            assert!(
                report.passed,
                "audit failed for {eq:?} on {market:?}, p={p}: {report:?}"
            );
        }
    }
}

#[test]
fn non_equilibrium_profiles_fail_the_audit() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut rejected = 0;
    let mut tried = 0;
    for _ in 0..100 {
        let (market, p) = sample_instance(&mut rng, DEFAULT_MARGIN);
        let eqs = enumerate_equilibria(&market, p, DEFAULT_EPS);
        for &(chi, eta) in &[(0.5, 0.5), (0.25, 0.9), (0.9, 0.1)] {
            // Skip probes that accidentally land near a genuine equilibrium.
            if eqs.iter().any(|e| (e.chi - chi).abs() < 0.05 && (e.eta - eta).abs() < 0.05) {
                continue;
            }
            tried += 1;
            if !check_profile(&StrategyProfile { chi, eta }, &market, p, 1e-6).passed {
                rejected += 1;
            }
        }
    }
    assert!(tried > 100);
    // The audit must reject the overwhelming majority of arbitrary profiles.
    assert!(rejected as f64 >= 0.95 * tried as f64, "rejected {rejected}/{tried}");
}

#[test]
fn grid_search_recovers_each_closed_form_equilibrium() {
    let grid_n = 201;
    let step = 1.0 / (grid_n - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..60 {
        let (market, p) = sample_instance(&mut rng, DEFAULT_MARGIN);
        let eqs = enumerate_equilibria(&market, p, DEFAULT_EPS);
        let clusters = grid_search_equilibria(&market, p, grid_n, 1e-9);
        for eq in &eqs {
            let hit = clusters.iter().any(|c| {
                (c.profile.chi - eq.chi).abs() <= 2.0 * step
                    && (c.profile.eta - eq.eta).abs() <= 2.0 * step
            });
            assert!(hit, "no grid cluster near {eq:?}; clusters: {clusters:?}");
        }
        for cluster in &clusters {
            let near = eqs.iter().any(|eq| {
                (cluster.profile.chi - eq.chi).abs() <= 2.0 * step
                    && (cluster.profile.eta - eq.eta).abs() <= 2.0 * step
            });
            assert!(near, "spurious grid cluster {cluster:?}; equilibria: {eqs:?}");
        }
    }
}

#[test]
fn simulation_reproduces_closed_form_payoffs() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for seed in 0..12u64 {
        let (market, p) = sample_instance(&mut rng, DEFAULT_MARGIN);
        let (eq, pay) = solve_group(&market, p, DEFAULT_EPS).unwrap();
        let profile = StrategyProfile { chi: eq.chi, eta: eq.eta };
        let sim = simulate_payoffs(&profile, &market, p, 200_000, 100 + seed);
        for (closed, mc, name) in [
            (pay.worker_low, &sim.worker_low, "worker_low"),
            (pay.worker_high, &sim.worker_high, "worker_high"),
            (pay.worker_exante, &sim.worker_exante, "worker_exante"),
            (pay.employer, &sim.employer, "employer"),
        ] {
            let slack = 4.0 * mc.std_error + 1e-9;
            assert!(
                (closed - mc.mean).abs() <= slack,
                "{name}: closed {closed} vs simulated {} +/- {} (seed {seed})",
                mc.mean,
                mc.std_error
            );
        }
    }
}

#[test]
fn full_comparison_verification_passes_on_random_scenarios() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for (i, &typology) in [
        TestTypology::UniformlyInformative,
        TestTypology::PositivelyInformative,
        TestTypology::NegativelyInformative,
        TestTypology::Uninformative,
    ]
    .iter()
    .enumerate()
    {
        let (market, pop) =
            sample_scenario_instance(&mut rng, typology, i % 2 == 0, DEFAULT_MARGIN);
        let cmp = compare_btb(&market, &pop, DEFAULT_EPS).unwrap();
        let verification = verify_comparison(&cmp, &market, &pop, 200_000, 500 + i as u64);
        assert!(
            verification.passed,
            "verification failed on {typology:?}: {:?}",
            verification.first_failure()
        );
    }
}

#[test]
fn closed_forms_match_payoff_identities_from_mixing_weights() {
    // In a mixed-strategy equilibrium the low-cost worker's payoff equals
    // w * (1 - phi0) * eta_M and the employer's equals (B - w) * phi1 * p_E*.
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let mut checked = 0;
    while checked < 100 {
        let (market, p) = sample_instance(&mut rng, DEFAULT_MARGIN);
        let eqs = enumerate_equilibria(&market, p, DEFAULT_EPS);
        let Some(mse) = eqs.iter().find(|e| e.kind == btb_core::EquilibriumKind::Mse) else {
            continue;
        };
        let pay = equilibrium_payoffs(mse, &market, p);
        let expected_worker = market.w * (1.0 - market.phi0) * mse.eta;
        let expected_employer =
            (market.b - market.w) * market.phi1 * btb_core::hiring_threshold(&market);
        assert!((pay.worker_low - expected_worker).abs() <= 1e-9);
        assert!((pay.employer - expected_employer).abs() <= 1e-9);
        checked += 1;
    }
}
