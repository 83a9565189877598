//! Single-group sequential-equilibrium enumeration, closed-form payoffs,
//! and Pareto selection.
//!
//! The enumeration reproduces the six parameter regions of the single-group
//! characterization: which of the full-qualification (FQE), mixed-strategy
//! (MSE), and zero-qualification (ZQE) equilibria exist depends on where
//! `phi0` and `phi1` sit relative to `c_L / w` and where the group potential
//! sits relative to the hiring threshold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{hiring_threshold, posterior_mu, MarketParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Fqe,
    Mse,
    Zqe,
}

/// Employer posture on the garbled signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Posture {
    Aggressive,
    Conservative,
    Mixed,
}

/// A sequential equilibrium of the single-group game: the strategy profile
/// `(chi, eta)` together with the consistent garbled-signal belief `mu`.
/// Beliefs on the decisive signals are the structural constants `mu(1) = 0`
/// and `mu(3) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub chi: f64,
    pub eta: f64,
    pub posture: Posture,
    pub mu: f64,
}

/// Expected payoffs at an equilibrium: worker by cost type, ex-ante worker,
/// and employer per applicant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffTable {
    pub worker_low: f64,
    pub worker_high: f64,
    pub worker_exante: f64,
    pub employer: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("empty equilibrium list")]
    EmptyEnumeration,
    #[error("Pareto ranking violated: {kind_a:?} does not dominate {kind_b:?} ({detail})")]
    ParetoInconsistency {
        kind_a: EquilibriumKind,
        kind_b: EquilibriumKind,
        detail: String,
    },
}

/// Mixed-strategy profile `(eta_M, chi_M)`, or `None` when no such profile
/// exists (including `phi0 = phi1`, where the worker indifference condition
/// has no solution). `eta_M` must be interior; `chi_M` may equal 1, the
/// continuous limit reached when the potential sits exactly at the hiring
/// threshold (the employer is indifferent there, so mixing on the garbled
/// signal remains an equilibrium).
pub fn mse_profile(params: &MarketParams, p: f64) -> Option<(f64, f64)> {
    let denom = params.w * (params.phi1 - params.phi0);
    if denom == 0.0 {
        return None;
    }
    let eta_m = (params.w * params.phi1 - params.c_low) / denom;
    let chi_m = hiring_threshold(params) / p;
    if eta_m > 0.0 && eta_m < 1.0 && chi_m > 0.0 && chi_m <= 1.0 {
        Some((eta_m, chi_m))
    } else {
        None
    }
}

fn fqe(params: &MarketParams, p: f64, posture: Posture) -> Equilibrium {
    let eta = match posture {
        Posture::Aggressive => 1.0,
        Posture::Conservative => 0.0,
        Posture::Mixed => unreachable!("FQE posture is pure"),
    };
    Equilibrium {
        kind: EquilibriumKind::Fqe,
        chi: 1.0,
        eta,
        posture,
        mu: posterior_mu(1.0, p, params),
    }
}

fn zqe() -> Equilibrium {
    Equilibrium {
        kind: EquilibriumKind::Zqe,
        chi: 0.0,
        eta: 0.0,
        posture: Posture::Conservative,
        mu: 0.0,
    }
}

fn mse(params: &MarketParams, p: f64, eta_m: f64, chi_m: f64) -> Equilibrium {
    Equilibrium {
        kind: EquilibriumKind::Mse,
        chi: chi_m,
        eta: eta_m,
        posture: Posture::Mixed,
        mu: posterior_mu(chi_m, p, params),
    }
}

/// Enumerates all sequential equilibria at group potential `p`.
///
/// Boundary inputs within `eps` of a region edge resolve to the weak side:
/// `p` within `eps` of the hiring threshold counts as high potential, and a
/// phi within `eps` of `c_L / w` counts as weakly above it.
pub fn enumerate_equilibria(params: &MarketParams, p: f64, eps: f64) -> Vec<Equilibrium> {
    let cutoff = params.cost_cutoff();
    let high_p = p >= hiring_threshold(params) - eps;

    if (params.phi0 - params.phi1).abs() <= eps {
        // Equal phis: either the moral hazard problem is too severe (ZQE) or
        // a unique FQE, aggressive iff potential is high.
        let phi = 0.5 * (params.phi0 + params.phi1);
        if phi < cutoff - eps {
            return vec![zqe()];
        }
        let posture = if high_p { Posture::Aggressive } else { Posture::Conservative };
        return vec![fqe(params, p, posture)];
    }

    let below0 = params.phi0 < cutoff - eps;
    let below1 = params.phi1 < cutoff - eps;

    if !high_p {
        // Conservative hiring is forced; qualification survives only if the
        // decisive signal for qualified workers pays for itself.
        return if below1 { vec![zqe()] } else { vec![fqe(params, p, Posture::Conservative)] };
    }

    // `high_p` admits potentials up to `eps` below the threshold; evaluate
    // the mixed profile at the threshold in that sliver so that `chi_M`
    // clamps to 1 instead of falling fractionally outside the unit interval.
    let p_mse = p.max(hiring_threshold(params));
    match (below0, below1) {
        // Negatively informative: FQE, MSE, and ZQE coexist.
        (false, true) => {
            let mut eqs = vec![fqe(params, p, Posture::Aggressive)];
            if let Some((eta_m, chi_m)) = mse_profile(params, p_mse) {
                eqs.push(mse(params, p, eta_m, chi_m));
            }
            eqs.push(zqe());
            eqs
        }
        // Uniformly informative: qualification is strictly optimal.
        (false, false) => vec![fqe(params, p, Posture::Aggressive)],
        // Positively informative: only the mixed profile survives.
        (true, false) => match mse_profile(params, p_mse) {
            Some((eta_m, chi_m)) => vec![mse(params, p, eta_m, chi_m)],
            // Degenerate edge of the region (eta_M or chi_M on a boundary).
            None => vec![zqe()],
        },
        (true, true) => vec![zqe()],
    }
}

/// Closed-form expected payoffs for an enumerated equilibrium.
pub fn equilibrium_payoffs(eq: &Equilibrium, params: &MarketParams, p: f64) -> PayoffTable {
    let (worker_low, worker_high, employer) = match (eq.kind, eq.posture) {
        (EquilibriumKind::Zqe, _) => (0.0, 0.0, 0.0),
        (EquilibriumKind::Mse, _) => {
            let v = (1.0 - params.phi0) * (params.phi1 * params.w - params.c_low)
                / (params.phi1 - params.phi0);
            let employer = (params.b - params.w) * params.phi1 * hiring_threshold(params);
            (v, v, employer)
        }
        (EquilibriumKind::Fqe, Posture::Aggressive) => (
            params.w - params.c_low,
            params.w * (1.0 - params.phi0),
            p * (params.b - params.w) - (1.0 - p) * params.w * (1.0 - params.phi0),
        ),
        (EquilibriumKind::Fqe, Posture::Conservative) => (
            params.phi1 * params.w - params.c_low,
            0.0,
            p * params.phi1 * (params.b - params.w),
        ),
        (EquilibriumKind::Fqe, Posture::Mixed) => unreachable!("FQE posture is pure"),
    };
    PayoffTable {
        worker_low,
        worker_high,
        worker_exante: p * worker_low + (1.0 - p) * worker_high,
        employer,
    }
}

/// Generic expected payoffs of an arbitrary profile `(chi, eta)` evaluated at
/// group potential `p`. Agrees with [`equilibrium_payoffs`] on equilibrium
/// profiles; used for per-group attribution under a pooled profile.
pub fn profile_payoffs(chi: f64, eta: f64, p: f64, params: &MarketParams) -> PayoffTable {
    let w = params.w;
    let (phi0, phi1) = (params.phi0, params.phi1);
    let pay_q1 = w * (phi1 + (1.0 - phi1) * eta) - params.c_low;
    let pay_q0 = w * (1.0 - phi0) * eta;
    let worker_low = chi * pay_q1 + (1.0 - chi) * pay_q0;
    let worker_high = pay_q0;
    let share_q = p * chi;
    let employer = share_q * (params.b - w) * (phi1 + (1.0 - phi1) * eta)
        - (1.0 - share_q) * w * (1.0 - phi0) * eta;
    PayoffTable {
        worker_low,
        worker_high,
        worker_exante: p * worker_low + (1.0 - p) * worker_high,
        employer,
    }
}

const PARETO_RANK_TOL: f64 = 1e-9;

fn kind_rank(kind: EquilibriumKind) -> u8 {
    match kind {
        EquilibriumKind::Fqe => 2,
        EquilibriumKind::Mse => 1,
        EquilibriumKind::Zqe => 0,
    }
}

/// Returns the Pareto-dominant equilibrium (FQE over MSE over ZQE), checking
/// the computed payoffs against the ranking. A ranking violation signals a
/// solver bug and is reported rather than silently ignored.
pub fn pareto_select(
    equilibria: &[Equilibrium],
    payoffs: &[PayoffTable],
) -> Result<(Equilibrium, PayoffTable), SolverError> {
    assert_eq!(equilibria.len(), payoffs.len());
    let best = equilibria
        .iter()
        .zip(payoffs)
        .max_by_key(|(eq, _)| kind_rank(eq.kind))
        .ok_or(SolverError::EmptyEnumeration)?;
    for (eq, pay) in equilibria.iter().zip(payoffs) {
        if kind_rank(eq.kind) >= kind_rank(best.0.kind) {
            continue;
        }
        let dominated = best.1.worker_low >= pay.worker_low - PARETO_RANK_TOL
            && best.1.worker_high >= pay.worker_high - PARETO_RANK_TOL
            && best.1.employer >= pay.employer - PARETO_RANK_TOL;
        if !dominated {
            return Err(SolverError::ParetoInconsistency {
                kind_a: best.0.kind,
                kind_b: eq.kind,
                detail: format!("payoffs {:?} vs {:?}", best.1, pay),
            });
        }
    }
    Ok((*best.0, *best.1))
}

/// Convenience: enumerate, price, and Pareto-select in one call.
pub fn solve_group(
    params: &MarketParams,
    p: f64,
    eps: f64,
) -> Result<(Equilibrium, PayoffTable), SolverError> {
    let eqs = enumerate_equilibria(params, p, eps);
    let pays: Vec<PayoffTable> =
        eqs.iter().map(|eq| equilibrium_payoffs(eq, params, p)).collect();
    pareto_select(&eqs, &pays)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_EPS;

    fn base() -> MarketParams {
        MarketParams { w: 1.0, b: 2.0, c_low: 0.3, c_high: 1.5, phi0: 0.2, phi1: 0.6 }
    }

    fn neg() -> MarketParams {
        MarketParams { phi0: 0.6, phi1: 0.2, ..base() }
    }

    #[test]
    fn mse_profile_positively_informative() {
        let (eta_m, chi_m) = mse_profile(&base(), 0.8).unwrap();
        assert!((eta_m - 0.75).abs() < 1e-12);
        assert!((chi_m - 2.0 / 3.0 / 0.8).abs() < 1e-12);
    }

    #[test]
    fn mse_profile_negatively_informative() {
        let (eta_m, chi_m) = mse_profile(&neg(), 0.5).unwrap();
        assert!((eta_m - 0.25).abs() < 1e-12);
        assert!((chi_m - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mse_profile_absent_at_boundary() {
        // c_L = w * phi1 makes eta_M vanish.
        let m = MarketParams { c_low: 0.6, c_high: 1.5, ..base() };
        assert_eq!(mse_profile(&m, 0.9), None);
        // Equal phis never admit an interior mixed profile.
        let m = MarketParams { phi0: 0.4, phi1: 0.4, ..base() };
        assert_eq!(mse_profile(&m, 0.9), None);
    }

    #[test]
    fn enumerate_region_1_three_equilibria() {
        let eqs = enumerate_equilibria(&neg(), 0.5, DEFAULT_EPS);
        let kinds: Vec<_> = eqs.iter().map(|e| (e.kind, e.posture)).collect();
        assert_eq!(
            kinds,
            vec![
                (EquilibriumKind::Fqe, Posture::Aggressive),
                (EquilibriumKind::Mse, Posture::Mixed),
                (EquilibriumKind::Zqe, Posture::Conservative),
            ]
        );
    }

    #[test]
    fn enumerate_mse_only() {
        let eqs = enumerate_equilibria(&base(), 0.8, DEFAULT_EPS);
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].kind, EquilibriumKind::Mse);
        assert!((eqs[0].chi - 2.0 / 3.0 / 0.8).abs() < 1e-12);
        assert!((eqs[0].eta - 0.75).abs() < 1e-12);
    }

    #[test]
    fn enumerate_low_potential_fqe_conservative() {
        let eqs = enumerate_equilibria(&base(), 0.5, DEFAULT_EPS);
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].kind, EquilibriumKind::Fqe);
        assert_eq!(eqs[0].posture, Posture::Conservative);
        assert_eq!(eqs[0].eta, 0.0);
    }

    #[test]
    fn enumerate_uninformative_zqe() {
        let m = MarketParams { phi0: 0.1, phi1: 0.2, ..base() };
        let eqs = enumerate_equilibria(&m, 0.9, DEFAULT_EPS);
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].kind, EquilibriumKind::Zqe);
    }

    #[test]
    fn mu_is_consistent_with_chi() {
        for p in [0.3, 0.5, 0.72, 0.9] {
            for m in [base(), neg()] {
                for eq in enumerate_equilibria(&m, p, DEFAULT_EPS) {
                    assert!((eq.mu - posterior_mu(eq.chi, p, &m)).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn payoffs_mse_base_instance() {
        let eqs = enumerate_equilibria(&base(), 0.8, DEFAULT_EPS);
        let pay = equilibrium_payoffs(&eqs[0], &base(), 0.8);
        assert!((pay.worker_low - 0.6).abs() < 1e-12);
        assert!((pay.worker_high - 0.6).abs() < 1e-12);
        assert!((pay.employer - 0.4).abs() < 1e-12);
    }

    #[test]
    fn payoffs_fqe_aggressive() {
        let eqs = enumerate_equilibria(&neg(), 0.5, DEFAULT_EPS);
        let pay = equilibrium_payoffs(&eqs[0], &neg(), 0.5);
        assert!((pay.worker_low - 0.7).abs() < 1e-12);
        assert!((pay.worker_high - 0.4).abs() < 1e-12);
        assert!((pay.employer - 0.3).abs() < 1e-12);
    }

    #[test]
    fn payoffs_zqe_all_zero() {
        let pay = equilibrium_payoffs(&zqe(), &base(), 0.8);
        assert_eq!(pay, PayoffTable { worker_low: 0.0, worker_high: 0.0, worker_exante: 0.0, employer: 0.0 });
    }

    #[test]
    fn profile_payoffs_agrees_with_closed_forms() {
        for p in [0.4, 0.5, 0.8] {
            for m in [base(), neg()] {
                for eq in enumerate_equilibria(&m, p, DEFAULT_EPS) {
                    let closed = equilibrium_payoffs(&eq, &m, p);
                    let generic = profile_payoffs(eq.chi, eq.eta, p, &m);
                    assert!((closed.worker_low - generic.worker_low).abs() < 1e-12);
                    assert!((closed.worker_high - generic.worker_high).abs() < 1e-12);
                    assert!((closed.employer - generic.employer).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pareto_select_prefers_fqe() {
        let eqs = enumerate_equilibria(&neg(), 0.5, DEFAULT_EPS);
        let pays: Vec<_> = eqs.iter().map(|e| equilibrium_payoffs(e, &neg(), 0.5)).collect();
        let (best, _) = pareto_select(&eqs, &pays).unwrap();
        assert_eq!(best.kind, EquilibriumKind::Fqe);
        assert_eq!(best.posture, Posture::Aggressive);
    }

    #[test]
    fn pareto_select_singleton() {
        let eqs = enumerate_equilibria(&base(), 0.8, DEFAULT_EPS);
        let pays: Vec<_> = eqs.iter().map(|e| equilibrium_payoffs(e, &base(), 0.8)).collect();
        let (best, _) = pareto_select(&eqs, &pays).unwrap();
        assert_eq!(best.kind, EquilibriumKind::Mse);
    }

    #[test]
    fn region_1_worker_gap_closed_form() {
        // worker_low(FQE) - worker_low(MSE) = (1-phi1)(phi0 w - c_L)/(phi0-phi1)
        let m = neg();
        let eqs = enumerate_equilibria(&m, 0.5, DEFAULT_EPS);
        let fqe_pay = equilibrium_payoffs(&eqs[0], &m, 0.5);
        let mse_pay = equilibrium_payoffs(&eqs[1], &m, 0.5);
        let expected = (1.0 - m.phi1) * (m.phi0 * m.w - m.c_low) / (m.phi0 - m.phi1);
        assert!(expected > 0.0);
        assert!((fqe_pay.worker_low - mse_pay.worker_low - expected).abs() < 1e-12);
    }
}
