//! Human-readable report formatting.

use btb_core::sweep::{equilibrium_label, format_sig, label_counts};
use btb_core::{
    BtbComparison, ComparisonVerification, Equilibrium, MarketParams, PayoffTable,
    SimulatedPayoffs, SweepResult,
};

pub fn describe_equilibrium(eq: &Equilibrium) -> String {
    format!(
        "{} (chi = {}, eta = {}, mu = {})",
        equilibrium_label(eq.kind, eq.posture),
        format_sig(eq.chi),
        format_sig(eq.eta),
        format_sig(eq.mu),
    )
}

pub fn describe_payoffs(pay: &PayoffTable) -> String {
    format!(
        "worker_low = {}, worker_high = {}, worker_exante = {}, employer = {}",
        format_sig(pay.worker_low),
        format_sig(pay.worker_high),
        format_sig(pay.worker_exante),
        format_sig(pay.employer),
    )
}

pub fn solve_report(
    market: &MarketParams,
    p: f64,
    all: &[(Equilibrium, PayoffTable)],
    selected: &(Equilibrium, PayoffTable),
) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "Single-group solve: p = {}, hiring threshold p_E* = {}\n",
        format_sig(p),
        format_sig(btb_core::hiring_threshold(market)),
    ));
    out.push_str(&format!("Equilibria found: {}\n", all.len()));
    for (eq, pay) in all {
        out.push_str(&format!("  - {}\n      {}\n", describe_equilibrium(eq), describe_payoffs(pay)));
    }
    out.push_str(&format!(
        "Selected (Pareto-dominant): {}\n    {}\n",
        describe_equilibrium(&selected.0),
        describe_payoffs(&selected.1),
    ));
    out
}

pub fn compare_report(cmp: &BtbComparison) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "Test typology: {:?}; potential typology: {:?}; population potential = {} ({} threshold)\n",
        cmp.test_typology,
        cmp.potential_typology,
        format_sig(cmp.population_potential),
        if cmp.pbar_high { "above" } else { "below" },
    ));
    out.push_str("With test:\n");
    out.push_str(&format!(
        "  group 1: {}\n      {}\n",
        describe_equilibrium(&cmp.with_box.group1.equilibrium),
        describe_payoffs(&cmp.with_box.group1.payoffs),
    ));
    out.push_str(&format!(
        "  group 2: {}\n      {}\n",
        describe_equilibrium(&cmp.with_box.group2.equilibrium),
        describe_payoffs(&cmp.with_box.group2.payoffs),
    ));
    out.push_str(&format!(
        "  employer total = {}\n",
        format_sig(cmp.with_box.employer_total)
    ));
    out.push_str("Test banned (pooled):\n");
    if let Some(pooled) = &cmp.banned.pooled {
        out.push_str(&format!("  pooled: {}\n", describe_equilibrium(pooled)));
    }
    out.push_str(&format!(
        "  group 1 payoffs: {}\n  group 2 payoffs: {}\n  employer total = {}\n",
        describe_payoffs(&cmp.banned.group1.payoffs),
        describe_payoffs(&cmp.banned.group2.payoffs),
        format_sig(cmp.banned.employer_total),
    ));
    let d = &cmp.deltas;
    out.push_str(&format!(
        "Deltas (banned - with test): employer = {}, w1_low = {}, w1_high = {}, \
         w2_low = {}, w2_high = {}\n",
        format_sig(d.employer),
        format_sig(d.w1_low),
        format_sig(d.w1_high),
        format_sig(d.w2_low),
        format_sig(d.w2_high),
    ));
    out.push_str(&format!("Scenario: {}\n", cmp.scenario.label()));
    out
}

pub fn verification_report(verification: &ComparisonVerification) -> String {
    let mut out = String::new();
    for check in &verification.checks {
        out.push_str(&format!(
            "  [{}] {}: analytic = {}, simulated = {} (se = {})\n",
            if check.passed { "pass" } else { "FAIL" },
            check.actor,
            format_sig(check.analytic),
            format_sig(check.simulated),
            format_sig(check.std_error),
        ));
    }
    out
}

pub fn simulate_report(closed: &PayoffTable, sim: &SimulatedPayoffs) -> String {
    let mut out = String::new();
    for (name, analytic, mc) in [
        ("worker_low", closed.worker_low, &sim.worker_low),
        ("worker_high", closed.worker_high, &sim.worker_high),
        ("worker_exante", closed.worker_exante, &sim.worker_exante),
        ("employer", closed.employer, &sim.employer),
    ] {
        out.push_str(&format!(
            "  {name}: analytic = {}, simulated = {} (se = {}, n = {})\n",
            format_sig(analytic),
            format_sig(mc.mean),
            format_sig(mc.std_error),
            mc.n,
        ));
    }
    out
}

pub fn sweep_report(result: &SweepResult) -> String {
    let mut out = format!("Sweep: {} cells\n", result.cells.len());
    for (label, count) in label_counts(result) {
        out.push_str(&format!("  {label}: {count}\n"));
    }
    out
}
