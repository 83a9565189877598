//! `btb` — solve, compare, verify, sweep, and simulate hiring-market
//! equilibria with and without a noisy qualification test.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 verification
//! failure, 3 I/O error.

mod config;
mod report;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use btb_core::model::StrategyProfile;
use btb_core::oracle::{check_equilibrium, grid_search_equilibria, simulate_payoffs, verify_comparison};
use btb_core::solver::{enumerate_equilibria, equilibrium_payoffs, solve_group};
use btb_core::sweep::{emit_csv, emit_json, run_sweep};
use btb_core::{compare_btb, hiring_threshold, MarketParams, PopulationParams};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "btb", version, about = "Hiring-market equilibrium analyzer")]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports (overrides config and BTB_OUT_DIR).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for machine-readable artifacts.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Override the Monte Carlo seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the boundary tolerance from the config.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Suppress the human-readable report on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate and select equilibria for a single group.
    Solve,
    /// Compare welfare with and without the qualification test.
    Compare,
    /// Re-derive a comparison with the independent oracles.
    Verify {
        /// Negative control: tamper with the analytic deltas first, to
        /// confirm the verification harness detects the discrepancy.
        #[arg(long)]
        perturb: bool,
    },
    /// Evaluate a parameter grid and emit a region map.
    Sweep,
    /// Monte Carlo simulation of the selected equilibrium's payoffs.
    Simulate,
}

/// Failure classified by exit code.
enum Failure {
    Invalid(String),
    Verification(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Verification(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Verification(m) | Failure::Io(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Invalid("--config is required".into()))?;
    let mut config = RunConfig::load(path).map_err(|e| Failure::Invalid(e.to_string()))?;
    if let Some(seed) = cli.seed {
        config.oracle.seed = seed;
    }
    if let Some(eps) = cli.eps {
        config.eps = eps;
    }
    Ok(config)
}

fn out_dir(cli: &Cli, config: &RunConfig) -> Option<PathBuf> {
    cli.out
        .clone()
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os("BTB_OUT_DIR").map(PathBuf::from))
}

fn chosen_format(cli: &Cli, config: &RunConfig) -> Result<Format, Failure> {
    if let Some(format) = cli.format {
        return Ok(format);
    }
    match config.output.format.as_deref() {
        None => Ok(Format::Json),
        Some("csv") => Ok(Format::Csv),
        Some("json") => Ok(Format::Json),
        Some(other) => Err(Failure::Invalid(format!(
            "unknown output format '{other}' (expected 'csv' or 'json')"
        ))),
    }
}

fn atomic_write(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let io_err = |e: std::io::Error| Failure::Io(format!("writing {}: {e}", path.display()));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp).map_err(io_err)?;
        file.write_all(contents).map_err(io_err)?;
        file.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

fn write_json_report<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Io(format!("serializing {name}: {e}")))?;
    atomic_write(&dir.join(name), (json + "\n").as_bytes())
}

fn emit(cli: &Cli, text: &str) {
    if !cli.quiet {
        print!("{text}");
    }
}

fn group_potential(config: &RunConfig) -> Result<f64, Failure> {
    config
        .p
        .or(config.population.as_ref().map(|pop| pop.p1))
        .ok_or_else(|| Failure::Invalid("config needs 'p' or a 'population' block".into()))
}

fn population(config: &RunConfig) -> Result<&PopulationParams, Failure> {
    config
        .population
        .as_ref()
        .ok_or_else(|| Failure::Invalid("this command needs a 'population' block".into()))
}

fn invalid<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Invalid(e.to_string())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::Solve => cmd_solve(cli, &config),
        Command::Compare => cmd_compare(cli, &config),
        Command::Verify { perturb } => cmd_verify(cli, &config, *perturb),
        Command::Sweep => cmd_sweep(cli, &config),
        Command::Simulate => cmd_simulate(cli, &config),
    }
}

fn cmd_solve(cli: &Cli, config: &RunConfig) -> Result<(), Failure> {
    let market = config.market;
    market.validate().map_err(invalid)?;
    let p = group_potential(config)?;
    if !(0.0 < p && p < 1.0) {
        return Err(Failure::Invalid(format!("p must lie in (0, 1), got {p}")));
    }
    let all: Vec<_> = enumerate_equilibria(&market, p, config.eps)
        .into_iter()
        .map(|eq| {
            let pay = equilibrium_payoffs(&eq, &market, p);
            (eq, pay)
        })
        .collect();
    let selected = solve_group(&market, p, config.eps).map_err(invalid)?;
    emit(cli, &report::solve_report(&market, p, &all, &selected));
    if let Some(dir) = out_dir(cli, config) {
        #[derive(Serialize)]
        struct SolveReport<'a> {
            market: &'a MarketParams,
            p: f64,
            p_e_star: f64,
            equilibria: &'a [(btb_core::Equilibrium, btb_core::PayoffTable)],
            selected: &'a (btb_core::Equilibrium, btb_core::PayoffTable),
        }
        write_json_report(
            &dir,
            "solve.json",
            &SolveReport {
                market: &market,
                p,
                p_e_star: hiring_threshold(&market),
                equilibria: &all,
                selected: &selected,
            },
        )?;
    }
    Ok(())
}

fn cmd_compare(cli: &Cli, config: &RunConfig) -> Result<(), Failure> {
    let pop = *population(config)?;
    let cmp = compare_btb(&config.market, &pop, config.eps).map_err(invalid)?;
    emit(cli, &report::compare_report(&cmp));
    if let Some(dir) = out_dir(cli, config) {
        write_json_report(&dir, "compare.json", &cmp)?;
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, config: &RunConfig, perturb: bool) -> Result<(), Failure> {
    let market = config.market;
    let pop = *population(config)?;
    let mut cmp = compare_btb(&market, &pop, config.eps).map_err(invalid)?;
    if perturb {
        cmp.deltas.employer += 0.01;
        emit(cli, "Negative control: employer delta perturbed by +0.01.\n");
    }
    let oracle = config.oracle;
    let mut failures: Vec<String> = Vec::new();

    // Best-response audit of every equilibrium the comparison relies on.
    let audited = [
        ("with-test group 1", &cmp.with_box.group1.equilibrium, pop.p1),
        ("with-test group 2", &cmp.with_box.group2.equilibrium, pop.p2),
        ("banned pooled", cmp.banned.pooled.as_ref().expect("pooled"), cmp.population_potential),
    ];
    for (name, eq, p) in audited {
        let report = check_equilibrium(eq, &market, p, oracle.tol);
        emit(
            cli,
            &format!(
                "Best-response audit [{}] {name}: worker gain = {:.3e}, employer gain = {:.3e}\n",
                if report.passed { "pass" } else { "FAIL" },
                report.worker_gain,
                report.employer_gain,
            ),
        );
        if !report.passed {
            failures.push(format!("best-response audit failed for {name}"));
        }
    }

    // Grid search must find a cluster near each closed-form equilibrium.
    let step = 1.0 / (oracle.grid_n - 1) as f64;
    for (name, p) in [("group 1", pop.p1), ("group 2", pop.p2), ("pooled", cmp.population_potential)]
    {
        let eqs = enumerate_equilibria(&market, p, config.eps);
        let clusters = grid_search_equilibria(&market, p, oracle.grid_n, oracle.tol);
        let all_found = eqs.iter().all(|eq| {
            clusters.iter().any(|c| {
                (c.profile.chi - eq.chi).abs() <= 2.0 * step
                    && (c.profile.eta - eq.eta).abs() <= 2.0 * step
            })
        });
        emit(
            cli,
            &format!(
                "Grid search [{}] {name}: {} equilibria, {} clusters\n",
                if all_found { "pass" } else { "FAIL" },
                eqs.len(),
                clusters.len(),
            ),
        );
        if !all_found {
            failures.push(format!("grid search missed an equilibrium for {name}"));
        }
    }

    // Monte Carlo re-derivation of every welfare delta.
    let verification = verify_comparison(&cmp, &market, &pop, oracle.n_samples, oracle.seed);
    emit(cli, "Monte Carlo delta checks:\n");
    emit(cli, &report::verification_report(&verification));
    if !verification.passed {
        failures.push(
            verification
                .first_failure()
                .map(|c| format!("simulated delta for {} disagrees with the analytic value", c.actor))
                .unwrap_or_else(|| "Monte Carlo verification failed".into()),
        );
    }

    if let Some(dir) = out_dir(cli, config) {
        #[derive(Serialize)]
        struct VerifyReport<'a> {
            perturbed: bool,
            passed: bool,
            failures: &'a [String],
            comparison: &'a btb_core::BtbComparison,
            monte_carlo: &'a btb_core::ComparisonVerification,
        }
        write_json_report(
            &dir,
            "verify.json",
            &VerifyReport {
                perturbed: perturb,
                passed: failures.is_empty(),
                failures: &failures,
                comparison: &cmp,
                monte_carlo: &verification,
            },
        )?;
    }

    if failures.is_empty() {
        emit(cli, "Verification passed.\n");
        Ok(())
    } else {
        Err(Failure::Verification(failures.join("; ")))
    }
}

fn cmd_sweep(cli: &Cli, config: &RunConfig) -> Result<(), Failure> {
    let spec = config
        .sweep
        .clone()
        .ok_or_else(|| Failure::Invalid("config needs a 'sweep' block".into()))?;
    let result = run_sweep(&spec).map_err(invalid)?;
    emit(cli, &report::sweep_report(&result));
    let dir = out_dir(cli, config)
        .ok_or_else(|| Failure::Invalid("sweep needs an output directory (--out)".into()))?;
    fs::create_dir_all(&dir)
        .map_err(|e| Failure::Io(format!("creating {}: {e}", dir.display())))?;
    let emitted = match chosen_format(cli, config)? {
        Format::Csv => {
            let path = dir.join("sweep.csv");
            emit_csv(&result, &path).map_err(|e| Failure::Io(e.to_string()))?;
            path
        }
        Format::Json => {
            let path = dir.join("sweep.json");
            emit_json(&result, &path).map_err(|e| Failure::Io(e.to_string()))?;
            path
        }
    };
    emit(cli, &format!("Wrote {}\n", emitted.display()));
    Ok(())
}

fn cmd_simulate(cli: &Cli, config: &RunConfig) -> Result<(), Failure> {
    let market = config.market;
    market.validate().map_err(invalid)?;
    let p = group_potential(config)?;
    let (eq, closed) = solve_group(&market, p, config.eps).map_err(invalid)?;
    let oracle = config.oracle;
    let profile = StrategyProfile { chi: eq.chi, eta: eq.eta };
    let sim = simulate_payoffs(&profile, &market, p, oracle.n_samples, oracle.seed);
    emit(cli, &format!("Simulating {}:\n", report::describe_equilibrium(&eq)));
    emit(cli, &report::simulate_report(&closed, &sim));
    if let Some(dir) = out_dir(cli, config) {
        #[derive(Serialize)]
        struct SimulateReport<'a> {
            equilibrium: &'a btb_core::Equilibrium,
            analytic: &'a btb_core::PayoffTable,
            simulated: &'a btb_core::SimulatedPayoffs,
        }
        write_json_report(
            &dir,
            "simulate.json",
            &SimulateReport { equilibrium: &eq, analytic: &closed, simulated: &sim },
        )?;
    }
    Ok(())
}
