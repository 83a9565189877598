//! Random generation of valid model instances for randomized testing.
//!
//! Every sampler keeps instances a configurable `margin` away from the
//! knife-edge surfaces of the model (the cost cutoff, equal false rates, the
//! hiring threshold, and the boundaries of interior mixing weights), so that
//! region labels and inequality directions are unambiguous at floating-point
//! precision.

use rand::Rng;

use crate::btb::{employer_btb_interval, population_potential};
use crate::model::{
    classify_potentials, classify_test, hiring_threshold, MarketParams, PopulationParams,
    PotentialTypology, TestTypology,
};
use crate::solver::mse_profile;

/// Default separation margin for sampled instances.
pub const DEFAULT_MARGIN: f64 = 0.02;

/// Draws market parameters with no separation constraints beyond validity.
pub fn sample_market_raw<R: Rng + ?Sized>(rng: &mut R) -> MarketParams {
    let w = rng.gen_range(0.5..2.0);
    MarketParams {
        w,
        b: w * rng.gen_range(1.3..3.5),
        c_low: w * rng.gen_range(0.1..0.9),
        c_high: w * rng.gen_range(1.2..2.5),
        phi0: rng.gen_range(0.05..0.95),
        phi1: rng.gen_range(0.05..0.95),
    }
}

fn market_separated(market: &MarketParams, margin: f64) -> bool {
    let cutoff = market.cost_cutoff();
    (market.phi0 - market.phi1).abs() >= margin
        && (market.phi0 - cutoff).abs() >= margin
        && (market.phi1 - cutoff).abs() >= margin
}

/// Draws a valid market whose false rates are `margin`-separated from each
/// other and from the cost cutoff `c_L / w`.
pub fn sample_market<R: Rng + ?Sized>(rng: &mut R, margin: f64) -> MarketParams {
    loop {
        let market = sample_market_raw(rng);
        if market.validate().is_ok() && market_separated(&market, margin) {
            return market;
        }
    }
}

/// Draws a market of a requested informativeness class, `margin`-separated.
pub fn sample_market_with_typology<R: Rng + ?Sized>(
    rng: &mut R,
    typology: TestTypology,
    margin: f64,
) -> MarketParams {
    loop {
        let market = sample_market(rng, margin);
        if classify_test(&market, 0.0) == typology {
            return market;
        }
    }
}

fn potential_separated(market: &MarketParams, p: f64, margin: f64) -> bool {
    let p_e_star = hiring_threshold(market);
    if (p - p_e_star).abs() < margin {
        return false;
    }
    // Where an interior mixed equilibrium exists (p above the threshold and
    // the false rates straddling the cutoff), keep both mixing weights away
    // from 0 and 1 so oracle grid searches see well-separated clusters.
    if p > p_e_star {
        let cutoff = market.cost_cutoff();
        let straddles = (market.phi0 < cutoff) != (market.phi1 < cutoff);
        if straddles {
            match mse_profile(market, p) {
                Some((eta_m, chi_m)) => {
                    if !(margin..=1.0 - margin).contains(&eta_m)
                        || !(margin..=1.0 - margin).contains(&chi_m)
                    {
                        return false;
                    }
                }
                None => return false,
            }
        }
    }
    true
}

/// Draws a qualification potential separated from the hiring threshold, and —
/// where a mixed equilibrium exists — with both mixing weights in
/// `[margin, 1 - margin]`.
pub fn sample_potential<R: Rng + ?Sized>(rng: &mut R, market: &MarketParams, margin: f64) -> f64 {
    loop {
        let p = rng.gen_range(margin..1.0 - margin);
        if potential_separated(market, p, margin) {
            return p;
        }
    }
}

/// Draws a `margin`-separated (market, potential) pair.
pub fn sample_instance<R: Rng + ?Sized>(rng: &mut R, margin: f64) -> (MarketParams, f64) {
    // Some markets leave almost no room for a separated potential (threshold
    // near 0 or 1, or extreme mixing weights), so resample the market too.
    loop {
        let market = sample_market(rng, margin);
        for _ in 0..64 {
            let p = rng.gen_range(margin..1.0 - margin);
            if potential_separated(&market, p, margin) {
                return (market, p);
            }
        }
    }
}

/// Draws a statistically distinct population for `market`: group 1 above the
/// hiring threshold, group 2 below, with the population average on the side
/// requested by `pbar_high`, all `margin`-separated. Returns `None` when the
/// threshold leaves no room on one side.
pub fn try_sample_distinct_population<R: Rng + ?Sized>(
    rng: &mut R,
    market: &MarketParams,
    pbar_high: bool,
    margin: f64,
) -> Option<PopulationParams> {
    let p_e_star = hiring_threshold(market);
    let lo1 = p_e_star + margin;
    let hi2 = p_e_star - margin;
    if lo1 >= 1.0 - margin || hi2 <= margin {
        return None;
    }
    let (lower, _) = employer_btb_interval(market);
    for _ in 0..256 {
        let p1 = rng.gen_range(lo1..1.0 - margin);
        let p2 = rng.gen_range(margin..hi2);
        let gamma = rng.gen_range(margin..1.0 - margin);
        let pop = PopulationParams { gamma, p1, p2 };
        if pop.validate().is_err() {
            continue;
        }
        let pbar = population_potential(&pop);
        if (pbar - p_e_star).abs() < margin
            || (p1 - p2).abs() < margin
            || (p2 - lower).abs() < margin
        {
            continue;
        }
        let is_high = pbar > p_e_star;
        if is_high == pbar_high {
            return Some(pop);
        }
    }
    None
}

/// Draws a full two-group scenario instance: a market of the requested
/// informativeness class plus a statistically distinct population with the
/// population average on the requested side of the hiring threshold.
pub fn sample_scenario_instance<R: Rng + ?Sized>(
    rng: &mut R,
    typology: TestTypology,
    pbar_high: bool,
    margin: f64,
) -> (MarketParams, PopulationParams) {
    loop {
        let market = sample_market_with_typology(rng, typology, margin);
        if !potential_market_ok(&market, margin) {
            continue;
        }
        if let Some(pop) = try_sample_distinct_population(rng, &market, pbar_high, margin) {
            debug_assert_eq!(
                classify_potentials(&pop, hiring_threshold(&market), 0.0),
                PotentialTypology::StatisticallyDistinct
            );
            return (market, pop);
        }
    }
}

fn potential_market_ok(market: &MarketParams, margin: f64) -> bool {
    let p_e_star = hiring_threshold(market);
    p_e_star > 2.0 * margin && p_e_star < 1.0 - 2.0 * margin
}

/// Draws a population with both groups on the same side of the threshold
/// (`high = true` for uniformly high potentials), `margin`-separated.
pub fn try_sample_uniform_population<R: Rng + ?Sized>(
    rng: &mut R,
    market: &MarketParams,
    high: bool,
    margin: f64,
) -> Option<PopulationParams> {
    let p_e_star = hiring_threshold(market);
    let (lo, hi) = if high {
        (p_e_star + margin, 1.0 - margin)
    } else {
        (margin, p_e_star - margin)
    };
    if lo >= hi {
        return None;
    }
    for _ in 0..256 {
        let a = rng.gen_range(lo..hi);
        let b = rng.gen_range(lo..hi);
        let (p1, p2) = if a >= b { (a, b) } else { (b, a) };
        if (p1 - p2).abs() < margin {
            continue;
        }
        let pop = PopulationParams { gamma: rng.gen_range(margin..1.0 - margin), p1, p2 };
        if pop.validate().is_ok() {
            return Some(pop);
        }
    }
    None
}
