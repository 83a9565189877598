//! Parameter-grid evaluation and region-map emission.
//!
//! `SingleGroupRegions` mode labels each cell with the Pareto-selected
//! equilibrium of the one-group game; `BtbScenarios` mode labels each cell
//! with the ban-the-box scenario. Cells are independent and evaluated in
//! parallel; output files are written atomically and are byte-stable across
//! runs for identical inputs.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::btb::{compare_btb, employer_btb_interval, population_potential, BtbError};
use crate::model::{hiring_threshold, MarketParams, PopulationParams, DEFAULT_EPS};
use crate::solver::{EquilibriumKind, Posture, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepMode {
    SingleGroupRegions,
    BtbScenarios,
}

/// One swept parameter: name, inclusive range, and step count (≥ 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

/// A sweep request: one or two axes over a fixed base instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub mode: SweepMode,
    pub axis1: Axis,
    #[serde(default)]
    pub axis2: Option<Axis>,
    pub market: MarketParams,
    #[serde(default)]
    pub population: Option<PopulationParams>,
    /// Group potential for `SingleGroupRegions`; defaults to `population.p1`.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub label: String,
    pub p_e_star: f64,
    pub chi_star: Option<f64>,
    pub eta_star: Option<f64>,
    pub delta_employer: Option<f64>,
    pub delta_w1_low: Option<f64>,
    pub delta_w1_high: Option<f64>,
    pub delta_w2_low: Option<f64>,
    pub delta_w2_high: Option<f64>,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub mode: SweepMode,
    pub cells: Vec<SweepCell>,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("unknown sweep parameter '{0}'")]
    UnknownParam(String),
    #[error("axis '{param}' needs at least 2 steps, got {steps}")]
    TooFewSteps { param: String, steps: usize },
    #[error("mode {0:?} requires a population block")]
    MissingPopulation(SweepMode),
    #[error("single-group sweep requires 'p' or a population block")]
    MissingPotential,
    #[error("cell ({x}, {y:?}): {source}")]
    Cell {
        x: f64,
        y: Option<f64>,
        #[source]
        source: BtbError,
    },
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

const PROB_PARAMS: &[&str] = &["phi0", "phi1", "p", "gamma", "p1", "p2"];

fn is_probability(param: &str) -> bool {
    PROB_PARAMS.contains(&param)
}

fn axis_values(axis: &Axis, eps: f64) -> Result<Vec<f64>, SweepError> {
    if axis.steps < 2 {
        return Err(SweepError::TooFewSteps { param: axis.param.clone(), steps: axis.steps });
    }
    let step = (axis.max - axis.min) / (axis.steps - 1) as f64;
    Ok((0..axis.steps)
        .map(|i| {
            let v = axis.min + step * i as f64;
            // Probability grids clip endpoints into the open unit interval.
            if is_probability(&axis.param) {
                v.clamp(eps, 1.0 - eps)
            } else {
                v
            }
        })
        .collect())
}

#[derive(Clone, Copy)]
struct CellInstance {
    market: MarketParams,
    population: Option<PopulationParams>,
    p: Option<f64>,
}

fn apply(instance: &mut CellInstance, param: &str, value: f64) -> Result<(), SweepError> {
    match param {
        "w" => instance.market.w = value,
        "b" => instance.market.b = value,
        "c_low" => instance.market.c_low = value,
        "c_high" => instance.market.c_high = value,
        "phi0" => instance.market.phi0 = value,
        "phi1" => instance.market.phi1 = value,
        "p" => instance.p = Some(value),
        "gamma" | "p1" | "p2" => {
            let pop = instance
                .population
                .as_mut()
                .ok_or(SweepError::MissingPopulation(SweepMode::BtbScenarios))?;
            match param {
                "gamma" => pop.gamma = value,
                "p1" => pop.p1 = value,
                _ => pop.p2 = value,
            }
        }
        other => return Err(SweepError::UnknownParam(other.to_string())),
    }
    Ok(())
}

/// Human-readable label for a Pareto-selected single-group equilibrium.
pub fn equilibrium_label(kind: EquilibriumKind, posture: Posture) -> &'static str {
    match (kind, posture) {
        (EquilibriumKind::Zqe, _) => "ZQE",
        (EquilibriumKind::Mse, _) => "MSE",
        (EquilibriumKind::Fqe, Posture::Aggressive) => "FQE-aggressive",
        (EquilibriumKind::Fqe, _) => "FQE-conservative",
    }
}

fn near(a: f64, b: f64, eps: f64) -> bool {
    (a - b).abs() <= eps
}

fn single_group_cell(
    instance: &CellInstance,
    x: f64,
    y: Option<f64>,
    eps: f64,
) -> Result<SweepCell, SweepError> {
    let p = instance
        .p
        .or(instance.population.map(|pop| pop.p1))
        .ok_or(SweepError::MissingPotential)?;
    let market = instance.market;
    if market.validate().is_err() {
        return Ok(invalid_cell(x, y, hiring_threshold(&market)));
    }
    let (eq, _) = crate::solver::solve_group(&market, p, eps)
        .map_err(|e: SolverError| SweepError::Cell { x, y, source: BtbError::Solver(e) })?;
    let p_e_star = hiring_threshold(&market);
    let cutoff = market.cost_cutoff();
    let boundary = near(market.phi0, cutoff, eps)
        || near(market.phi1, cutoff, eps)
        || near(market.phi0, market.phi1, eps)
        || near(p, p_e_star, eps);
    Ok(SweepCell {
        axis1: x,
        axis2: y,
        label: equilibrium_label(eq.kind, eq.posture).to_string(),
        p_e_star,
        chi_star: Some(eq.chi),
        eta_star: Some(eq.eta),
        delta_employer: None,
        delta_w1_low: None,
        delta_w1_high: None,
        delta_w2_low: None,
        delta_w2_high: None,
        boundary,
    })
}

/// Cell for a parameter combination that fails model validation (for
/// example `p1 < p2` in a potentials sweep): labelled, never an error.
fn invalid_cell(x: f64, y: Option<f64>, p_e_star: f64) -> SweepCell {
    SweepCell {
        axis1: x,
        axis2: y,
        label: "Invalid".to_string(),
        p_e_star,
        chi_star: None,
        eta_star: None,
        delta_employer: None,
        delta_w1_low: None,
        delta_w1_high: None,
        delta_w2_low: None,
        delta_w2_high: None,
        boundary: false,
    }
}

fn btb_cell(
    instance: &CellInstance,
    x: f64,
    y: Option<f64>,
    eps: f64,
) -> Result<SweepCell, SweepError> {
    let pop = instance
        .population
        .ok_or(SweepError::MissingPopulation(SweepMode::BtbScenarios))?;
    let market = instance.market;
    let cmp = match compare_btb(&market, &pop, eps) {
        Ok(cmp) => cmp,
        Err(BtbError::Model(_)) => return Ok(invalid_cell(x, y, hiring_threshold(&market))),
        Err(source) => return Err(SweepError::Cell { x, y, source }),
    };
    let p_e_star = hiring_threshold(&market);
    let cutoff = market.cost_cutoff();
    let pbar = population_potential(&pop);
    let (lower, _) = employer_btb_interval(&market);
    let boundary = near(market.phi0, cutoff, eps)
        || near(market.phi1, cutoff, eps)
        || near(market.phi0, market.phi1, eps)
        || near(pop.p1, p_e_star, eps)
        || near(pop.p2, p_e_star, eps)
        || near(pbar, p_e_star, eps)
        || near(pop.p1, pop.p2, eps)
        || near(pop.p2, lower, eps);
    let pooled = cmp.banned.pooled.expect("banned solution carries pooled profile");
    let d = &cmp.deltas;
    Ok(SweepCell {
        axis1: x,
        axis2: y,
        label: cmp.scenario.label().to_string(),
        p_e_star,
        chi_star: Some(pooled.chi),
        eta_star: Some(pooled.eta),
        delta_employer: Some(d.employer),
        delta_w1_low: Some(d.w1_low),
        delta_w1_high: Some(d.w1_high),
        delta_w2_low: Some(d.w2_low),
        delta_w2_high: Some(d.w2_high),
        boundary,
    })
}

/// Evaluates the sweep. Cell order is row-major over (axis1, axis2) and is
/// independent of the parallel schedule.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    let eps = spec.eps;
    let xs = axis_values(&spec.axis1, eps)?;
    let ys = match &spec.axis2 {
        Some(axis) => axis_values(axis, eps)?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let base = CellInstance { market: spec.market, population: spec.population, p: spec.p };
    // Validate axis names up front so bad specs fail before the parallel run.
    {
        let mut probe = base;
        apply(&mut probe, &spec.axis1.param, xs[0])?;
        if let Some(axis) = &spec.axis2 {
            apply(&mut probe, &axis.param, axis.min)?;
        }
    }

    let coords: Vec<(f64, Option<f64>)> =
        xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    let cells: Result<Vec<SweepCell>, SweepError> = coords
        .par_iter()
        .map(|&(x, y)| {
            let mut instance = base;
            apply(&mut instance, &spec.axis1.param, x)?;
            if let (Some(axis), Some(y)) = (&spec.axis2, y) {
                apply(&mut instance, &axis.param, y)?;
            }
            match spec.mode {
                SweepMode::SingleGroupRegions => single_group_cell(&instance, x, y, eps),
                SweepMode::BtbScenarios => btb_cell(&instance, x, y, eps),
            }
        })
        .collect();
    Ok(SweepResult { mode: spec.mode, cells: cells? })
}

/// Counts of cells per label, in label order of first appearance.
pub fn label_counts(result: &SweepResult) -> Vec<(String, usize)> {
    let mut counts: Vec<(String, usize)> = Vec::new();
    for cell in &result.cells {
        match counts.iter_mut().find(|(label, _)| *label == cell.label) {
            Some((_, n)) => *n += 1,
            None => counts.push((cell.label.clone(), 1)),
        }
    }
    counts
}

/// Formats with 9 significant digits in plain decimal notation.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (9 - 1 - magnitude).clamp(0, 17) as usize;
    format!("{x:.decimals$}")
}

fn atomic_write(path: &Path, contents: &str) -> Result<(), SweepError> {
    let io_err = |source: std::io::Error| SweepError::Io {
        path: path.display().to_string(),
        source,
    };
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp).map_err(io_err)?;
        file.write_all(contents.as_bytes()).map_err(io_err)?;
        file.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

pub const CSV_HEADER: &str = "axis1,axis2,label,p_e_star,chi_star,eta_star,\
delta_employer,delta_w1_low,delta_w1_high,delta_w2_low,delta_w2_high,boundary";

fn opt_sig(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

/// Writes the result as CSV (atomically: temp file + rename).
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<(), SweepError> {
    let mut out = String::with_capacity(64 * result.cells.len() + 128);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for cell in &result.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            format_sig(cell.axis1),
            opt_sig(cell.axis2),
            cell.label,
            format_sig(cell.p_e_star),
            opt_sig(cell.chi_star),
            opt_sig(cell.eta_star),
            opt_sig(cell.delta_employer),
            opt_sig(cell.delta_w1_low),
            opt_sig(cell.delta_w1_high),
            opt_sig(cell.delta_w2_low),
            opt_sig(cell.delta_w2_high),
            cell.boundary,
        ));
    }
    atomic_write(path, &out)
}

/// Writes the result as a JSON array of per-cell objects with the same field
/// names as the CSV columns.
pub fn emit_json(result: &SweepResult, path: &Path) -> Result<(), SweepError> {
    let json = serde_json::to_string_pretty(&result.cells).expect("cells serialize");
    atomic_write(path, &(json + "\n"))
}
