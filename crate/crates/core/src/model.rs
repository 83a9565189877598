//! Game primitives: market parameters, group structure, the noisy test
//! signal, stage payoffs, belief updating, and the typology classifiers.
//!
//! Everything here is a pure function of its inputs; validated values are
//! immutable and freely shareable across threads.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default absolute tolerance for boundary comparisons.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Market primitives shared by all analyses.
///
/// `w` is the wage paid on hire, `b` the employer's benefit from a qualified
/// hire, `c_low`/`c_high` the two qualification costs, and `phi0`/`phi1` the
/// probabilities that the test decisively reveals an unqualified (theta = 1)
/// or qualified (theta = 3) worker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub w: f64,
    pub b: f64,
    pub c_low: f64,
    pub c_high: f64,
    pub phi0: f64,
    pub phi1: f64,
}

/// Group structure: share of group 1 and the two group potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationParams {
    pub gamma: f64,
    pub p1: f64,
    pub p2: f64,
}

/// Validation failure, reporting the first violated invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("wage must be positive: w = {w}")]
    WageNotPositive { w: f64 },
    #[error("cost ordering violated: c_L ≤ 0 (c_L = {c_low})")]
    CostLowNotPositive { c_low: f64 },
    #[error("cost ordering violated: c_L ≥ w (c_L = {c_low}, w = {w})")]
    CostLowAboveWage { c_low: f64, w: f64 },
    #[error("cost ordering violated: c_H ≤ w (c_H = {c_high}, w = {w})")]
    CostHighBelowWage { c_high: f64, w: f64 },
    #[error("employer benefit must exceed wage: B ≤ w (B = {b}, w = {w})")]
    BenefitBelowWage { b: f64, w: f64 },
    #[error("{name} = {value} outside (0,1)")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },
    #[error("p1 < p2 (p1 = {p1}, p2 = {p2})")]
    PotentialsOutOfOrder { p1: f64, p2: f64 },
}

fn check_unit_open(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(ModelError::ProbabilityOutOfRange { name, value })
    }
}

impl MarketParams {
    // Negated comparisons are deliberate: they reject NaN inputs, which
    // compare false on both sides of every ordering.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.w > 0.0) {
            return Err(ModelError::WageNotPositive { w: self.w });
        }
        if !(self.c_low > 0.0) {
            return Err(ModelError::CostLowNotPositive { c_low: self.c_low });
        }
        if !(self.c_low < self.w) {
            return Err(ModelError::CostLowAboveWage { c_low: self.c_low, w: self.w });
        }
        if !(self.c_high > self.w) {
            return Err(ModelError::CostHighBelowWage { c_high: self.c_high, w: self.w });
        }
        if !(self.b > self.w) {
            return Err(ModelError::BenefitBelowWage { b: self.b, w: self.w });
        }
        check_unit_open("phi0", self.phi0)?;
        check_unit_open("phi1", self.phi1)?;
        Ok(())
    }

    /// Qualification-cost cutoff `c_L / w` against which the phis are compared.
    pub fn cost_cutoff(&self) -> f64 {
        self.c_low / self.w
    }
}

impl PopulationParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        check_unit_open("gamma", self.gamma)?;
        check_unit_open("p1", self.p1)?;
        check_unit_open("p2", self.p2)?;
        if self.p1 < self.p2 {
            return Err(ModelError::PotentialsOutOfOrder { p1: self.p1, p2: self.p2 });
        }
        Ok(())
    }
}

/// A validated (market, population) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidatedModel {
    pub market: MarketParams,
    pub population: PopulationParams,
}

/// Checks all invariants and returns the pair unchanged on success.
pub fn validate(
    market: MarketParams,
    population: PopulationParams,
) -> Result<ValidatedModel, ModelError> {
    market.validate()?;
    population.validate()?;
    Ok(ValidatedModel { market, population })
}

/// Test outcome: 1 reveals unqualified, 3 reveals qualified, 2 is garbled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestSignal {
    Theta1,
    Theta2,
    Theta3,
}

/// Distribution of the test signal conditional on qualification `q`,
/// as `(Pr[theta=1], Pr[theta=2], Pr[theta=3])`.
pub fn signal_distribution(q: bool, params: &MarketParams) -> [f64; 3] {
    if q {
        [0.0, 1.0 - params.phi1, params.phi1]
    } else {
        [params.phi0, 1.0 - params.phi0, 0.0]
    }
}

/// Stage payoffs `(worker, employer)` given qualification `q`, hiring `h`,
/// and the worker's realized qualification cost `c`.
pub fn stage_payoffs(q: bool, h: bool, c: f64, params: &MarketParams) -> (f64, f64) {
    let qf = if q { 1.0 } else { 0.0 };
    let hf = if h { 1.0 } else { 0.0 };
    let worker = params.w * hf - c * qf;
    let employer = (params.b * qf - params.w) * hf;
    (worker, employer)
}

/// A worker strategy profile: `chi` is the low-cost qualification rate and
/// `eta` the hiring probability on the garbled signal. `eta(1) = 0` and
/// `eta(3) = 1` are structural constants, as is `chi(c_H) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub chi: f64,
    pub eta: f64,
}

/// Posterior probability of qualification on the garbled signal, consistent
/// with the worker mixing at rate `chi` in a group of potential `p`.
pub fn posterior_mu(chi: f64, p: f64, params: &MarketParams) -> f64 {
    let qualified = (1.0 - params.phi1) * p * chi;
    let unqualified = (1.0 - params.phi0) * (1.0 - p * chi);
    if qualified == 0.0 {
        return 0.0;
    }
    qualified / (qualified + unqualified)
}

/// Potential level at which the employer is indifferent about hiring on the
/// garbled signal when all low-cost workers qualify.
pub fn hiring_threshold(params: &MarketParams) -> f64 {
    params.w * (1.0 - params.phi0)
        / (params.b * (1.0 - params.phi1) + params.w * (params.phi1 - params.phi0))
}

/// Testing-structure typology: where the phis sit relative to `c_L / w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestTypology {
    UniformlyInformative,
    Uninformative,
    PositivelyInformative,
    NegativelyInformative,
    BoundaryEqualPhis,
}

/// Classifies the test structure. Exact-boundary inputs resolve to the weak
/// side (`phi1 >= c_L/w > phi0` and its mirror).
pub fn classify_test(params: &MarketParams, eps: f64) -> TestTypology {
    if (params.phi0 - params.phi1).abs() <= eps {
        return TestTypology::BoundaryEqualPhis;
    }
    let cutoff = params.cost_cutoff();
    let below0 = params.phi0 < cutoff - eps;
    let below1 = params.phi1 < cutoff - eps;
    match (below0, below1) {
        (true, true) => TestTypology::Uninformative,
        (true, false) => TestTypology::PositivelyInformative,
        (false, true) => TestTypology::NegativelyInformative,
        (false, false) => TestTypology::UniformlyInformative,
    }
}

/// Group-potential typology relative to the hiring threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialTypology {
    UniformlyHigh,
    UniformlyLow,
    StatisticallyDistinct,
    EqualPotentials,
}

/// Classifies group potentials against `p_E*`, with the same weak-side
/// boundary convention as [`classify_test`].
pub fn classify_potentials(
    pop: &PopulationParams,
    p_e_star: f64,
    eps: f64,
) -> PotentialTypology {
    if (pop.p1 - pop.p2).abs() <= eps {
        return PotentialTypology::EqualPotentials;
    }
    let below1 = pop.p1 < p_e_star - eps;
    let below2 = pop.p2 < p_e_star - eps;
    match (below1, below2) {
        (false, false) => PotentialTypology::UniformlyHigh,
        (true, true) => PotentialTypology::UniformlyLow,
        (false, true) => PotentialTypology::StatisticallyDistinct,
        // p1 >= p2 is a validated invariant, so p1 below with p2 above
        // cannot occur outside the eps band handled above.
        (true, false) => PotentialTypology::StatisticallyDistinct,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn base_market() -> MarketParams {
        MarketParams { w: 1.0, b: 2.0, c_low: 0.3, c_high: 1.5, phi0: 0.2, phi1: 0.6 }
    }

    #[test]
    fn validate_accepts_base_instance() {
        let pop = PopulationParams { gamma: 0.5, p1: 0.8, p2: 0.4 };
        validate(base_market(), pop).unwrap();
    }

    #[test]
    fn validate_reports_assumption_1() {
        let market = MarketParams { c_low: 1.2, ..base_market() };
        let err = market.validate().unwrap_err();
        assert_eq!(err, ModelError::CostLowAboveWage { c_low: 1.2, w: 1.0 });
        assert!(err.to_string().contains("cost ordering violated: c_L ≥ w"));
    }

    #[test]
    fn validate_reports_potential_order() {
        let pop = PopulationParams { gamma: 0.5, p1: 0.4, p2: 0.6 };
        let err = pop.validate().unwrap_err();
        assert!(err.to_string().starts_with("p1 < p2"));
    }

    #[test]
    fn validate_rejects_degenerate_phi() {
        let market = MarketParams { phi0: 0.0, ..base_market() };
        assert!(matches!(
            market.validate(),
            Err(ModelError::ProbabilityOutOfRange { name: "phi0", .. })
        ));
        let market = MarketParams { phi1: 1.0, ..base_market() };
        assert!(market.validate().is_err());
    }

    #[test]
    fn validate_rejects_benefit_below_wage() {
        let market = MarketParams { b: 0.9, ..base_market() };
        assert!(matches!(market.validate(), Err(ModelError::BenefitBelowWage { .. })));
    }

    #[test]
    fn signal_distribution_matches_test_structure() {
        let m = base_market();
        assert_eq!(signal_distribution(false, &m), [0.2, 0.8, 0.0]);
        assert_eq!(signal_distribution(true, &m), [0.0, 0.4, 0.6]);
    }

    #[test]
    fn stage_payoffs_examples() {
        let m = base_market();
        assert_eq!(stage_payoffs(true, true, 0.3, &m), (0.7, 1.0));
        assert_eq!(stage_payoffs(false, true, 0.3, &m), (1.0, -1.0));
        assert_eq!(stage_payoffs(false, false, 1.5, &m), (0.0, 0.0));
    }

    #[test]
    fn posterior_mu_examples() {
        let m = base_market();
        assert_eq!(posterior_mu(0.0, 0.8, &m), 0.0);
        // Symmetric garbling cancels: chi = 1 and phi0 = phi1 gives mu = p.
        let sym = MarketParams { phi0: 0.4, phi1: 0.4, ..m };
        assert!((posterior_mu(1.0, 0.8, &sym) - 0.8).abs() < 1e-15);
        // Hand plug-in: 0.4*0.8 / (0.32 + 0.16).
        assert!((posterior_mu(1.0, 0.8, &m) - 0.32 / 0.48).abs() < 1e-15);
    }

    #[test]
    fn hiring_threshold_examples() {
        let m = base_market();
        assert!((hiring_threshold(&m) - 0.8 / 1.2).abs() < 1e-15);
        let swapped = MarketParams { phi0: 0.6, phi1: 0.2, ..m };
        assert!((hiring_threshold(&swapped) - 0.4 / 1.2).abs() < 1e-15);
    }

    #[test]
    fn classify_test_examples() {
        let eps = DEFAULT_EPS;
        let m = base_market();
        assert_eq!(classify_test(&m, eps), TestTypology::PositivelyInformative);
        let neg = MarketParams { phi0: 0.6, phi1: 0.2, ..m };
        assert_eq!(classify_test(&neg, eps), TestTypology::NegativelyInformative);
        let unin = MarketParams { phi0: 0.1, phi1: 0.2, ..m };
        assert_eq!(classify_test(&unin, eps), TestTypology::Uninformative);
        let unif = MarketParams { phi0: 0.4, phi1: 0.6, ..m };
        assert_eq!(classify_test(&unif, eps), TestTypology::UniformlyInformative);
        let equal = MarketParams { phi0: 0.4, phi1: 0.4, ..m };
        assert_eq!(classify_test(&equal, eps), TestTypology::BoundaryEqualPhis);
    }

    #[test]
    fn classify_test_boundary_resolves_weak_side() {
        let eps = DEFAULT_EPS;
        // phi1 exactly at c_L/w counts as positively informative.
        let m = MarketParams { phi0: 0.1, phi1: 0.3, ..base_market() };
        assert_eq!(classify_test(&m, eps), TestTypology::PositivelyInformative);
        let m = MarketParams { phi0: 0.3, phi1: 0.1, ..base_market() };
        assert_eq!(classify_test(&m, eps), TestTypology::NegativelyInformative);
    }

    #[test]
    fn classify_potentials_examples() {
        let eps = DEFAULT_EPS;
        let pop = PopulationParams { gamma: 0.5, p1: 0.8, p2: 0.4 };
        assert_eq!(
            classify_potentials(&pop, 2.0 / 3.0, eps),
            PotentialTypology::StatisticallyDistinct
        );
        let pop = PopulationParams { gamma: 0.5, p1: 0.8, p2: 0.7 };
        assert_eq!(classify_potentials(&pop, 0.5, eps), PotentialTypology::UniformlyHigh);
        let pop = PopulationParams { gamma: 0.5, p1: 0.3, p2: 0.2 };
        assert_eq!(classify_potentials(&pop, 0.5, eps), PotentialTypology::UniformlyLow);
        let pop = PopulationParams { gamma: 0.5, p1: 0.4, p2: 0.4 };
        assert_eq!(classify_potentials(&pop, 0.5, eps), PotentialTypology::EqualPotentials);
    }
}
