use std::path::Path;

use aoii_core::{
    active_fraction, aoii_kernel, avg_penalty, cost_always_update, extract_threshold,
    lagrange_cost, lambda_intersection, run, run_sweep, solve_aoi_constrained, solve_constrained,
    solve_lagrangian, stationary, verify_optimality, ConstrainedSolution, MdpConfig,
    MixtureSolution, PolicySpec, SimMetrics, SweepCell, SystemParams, ThresholdDecision,
};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{csv_document, emit, json_document, opt_cell, Format};
use crate::settings::{parse_policy, policy_tag, Settings};

pub fn params(st: &Settings) -> Result<SystemParams, CliError> {
    Ok(SystemParams::new(st.n_states, st.p_remain, st.p_success)?)
}

fn certificate_json(p: &SystemParams, m: &MixtureSolution) -> Result<Value, CliError> {
    let cert = verify_optimality(p, m)?;
    Ok(json!({
        "indifference_residual": cert.indifference_residual,
        "scan_min_margin": cert.scan_min_margin,
        "scan_limit": cert.scan_limit,
        "occupancy_bracket": [cert.occupancy_bracket.0, cert.occupancy_bracket.1],
    }))
}

/// Solve the constrained design problem, certify the answer, and report
/// it. Without an explicit format the output is plain key = value lines.
pub fn cmd_solve(
    st: &Settings,
    format: Option<Format>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let p = params(st)?;
    let sha = st.sha256("solve");
    let sol = solve_constrained(&p, st.alpha)?;

    let text = match (&sol, format) {
        (ConstrainedSolution::Mixture(m), None) => {
            let cert = verify_optimality(&p, m)?;
            format!(
                "policy = mixture\nn0 = {}\nrho = {}\nlambda_star = {}\nexpected_cost = {}\nexpected_power = {}\ncertificate = ok (indifference {:.1e}, min margin {:.3e} over thresholds 0..={}, occupancy bracket [{}, {}])\n",
                m.n0,
                m.rho,
                m.lambda_star,
                m.expected_cost,
                m.expected_power,
                cert.indifference_residual,
                cert.scan_min_margin,
                cert.scan_limit,
                cert.occupancy_bracket.0,
                cert.occupancy_bracket.1,
            )
        }
        (ConstrainedSolution::NeverTransmit { expected_cost }, None) => format!(
            "policy = never\nexpected_cost = {expected_cost}\nexpected_power = 0\n"
        ),
        (ConstrainedSolution::Mixture(m), Some(Format::Json)) => {
            let body = json!({
                "policy": "mixture",
                "n0": m.n0,
                "rho": m.rho,
                "lambda_star": m.lambda_star,
                "expected_cost": m.expected_cost,
                "expected_power": m.expected_power,
                "certificate": certificate_json(&p, m)?,
            });
            json_document(&sha, "solve", body)
        }
        (ConstrainedSolution::NeverTransmit { expected_cost }, Some(Format::Json)) => {
            let body = json!({
                "policy": "never",
                "expected_cost": expected_cost,
                "expected_power": 0.0,
            });
            json_document(&sha, "solve", body)
        }
        (ConstrainedSolution::Mixture(m), Some(Format::Csv)) => {
            verify_optimality(&p, m)?;
            let row = format!(
                "mixture,{},{},{},{},{}",
                m.n0, m.rho, m.lambda_star, m.expected_cost, m.expected_power
            );
            csv_document(
                &sha,
                "policy,n0,rho,lambda_star,expected_cost,expected_power",
                &[row],
            )
        }
        (ConstrainedSolution::NeverTransmit { expected_cost }, Some(Format::Csv)) => csv_document(
            &sha,
            "policy,n0,rho,lambda_star,expected_cost,expected_power",
            &[format!("never,,,,{expected_cost},0")],
        ),
    };
    emit(out, &text)
}

/// Optimal switch point for every stickiness value on the grid, holding
/// the state count, channel, and budget fixed.
pub fn cmd_switchpoints(st: &Settings, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let sha = st.sha256("switchpoints");
    let mut rows = Vec::new();
    let mut body = Vec::new();
    for &pr in &st.p_remain_grid {
        let p = SystemParams::new(st.n_states, pr, st.p_success)?;
        match solve_constrained(&p, st.alpha)? {
            ConstrainedSolution::Mixture(m) => {
                rows.push(format!("{pr},{}", m.n0));
                body.push(json!({"p_remain": pr, "n0": m.n0}));
            }
            ConstrainedSolution::NeverTransmit { .. } => {
                rows.push(format!("{pr},never"));
                body.push(json!({"p_remain": pr, "n0": "never"}));
            }
        }
    }
    let text = match format {
        Format::Csv => csv_document(&sha, "p_remain,n0", &rows),
        Format::Json => json_document(&sha, "switchpoints", Value::Array(body)),
    };
    emit(out, &text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    /// Optimal average penalty across source stickiness values.
    Stickiness,
    /// Average penalty vs. budget: solved policy against the age baseline.
    PenaltyVsBudget,
    /// Average age vs. budget for the same two policy families.
    AgeVsBudget,
}

impl Which {
    pub fn tag(self) -> &'static str {
        match self {
            Which::Stickiness => "stickiness",
            Which::PenaltyVsBudget => "penalty-vs-budget",
            Which::AgeVsBudget => "age-vs-budget",
        }
    }

    pub fn from_tag(s: &str) -> Result<Self, CliError> {
        match s {
            "stickiness" => Ok(Which::Stickiness),
            "penalty-vs-budget" => Ok(Which::PenaltyVsBudget),
            "age-vs-budget" => Ok(Which::AgeVsBudget),
            other => Err(CliError::Config(format!("unknown sweep '{other}'"))),
        }
    }
}

fn solved_policy(p: &SystemParams, alpha: f64) -> Result<(PolicySpec, f64), CliError> {
    Ok(match solve_constrained(p, alpha)? {
        ConstrainedSolution::Mixture(m) => (
            PolicySpec::Mixture {
                n0: m.n0,
                rho: m.rho,
            },
            m.expected_cost,
        ),
        ConstrainedSolution::NeverTransmit { expected_cost } => {
            (PolicySpec::NeverUpdate, expected_cost)
        }
    })
}

/// Simulated curve points with closed-form overlays where one exists.
/// Cells run in parallel; row order follows the grid.
pub fn cmd_sweep(
    st: &Settings,
    which: Which,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let sha = st.sha256("sweep");
    let mut cells = Vec::new();
    // Per cell: x value, closed form when the sweep's metric has one.
    let mut overlay: Vec<(f64, Option<f64>)> = Vec::new();

    match which {
        Which::Stickiness => {
            for &pr in &st.p_remain_grid {
                let p = SystemParams::new(st.n_states, pr, st.p_success)?;
                let (policy, cost) = solved_policy(&p, st.alpha)?;
                overlay.push((pr, Some(cost)));
                cells.push(SweepCell {
                    params: p,
                    policy,
                    label: policy_tag(&policy),
                });
            }
        }
        Which::PenaltyVsBudget | Which::AgeVsBudget => {
            let p = params(st)?;
            for &alpha in &st.alpha_grid {
                let (policy, cost) = solved_policy(&p, alpha)?;
                overlay.push((
                    alpha,
                    (which == Which::PenaltyVsBudget).then_some(cost),
                ));
                cells.push(SweepCell {
                    params: p,
                    policy,
                    label: policy_tag(&policy),
                });

                let base = solve_aoi_constrained(&p, alpha)?;
                let baseline = PolicySpec::AoiMixture {
                    m0: base.m0,
                    rho: base.rho,
                };
                overlay.push((
                    alpha,
                    (which == Which::AgeVsBudget).then_some(base.expected_aoi),
                ));
                cells.push(SweepCell {
                    params: p,
                    policy: baseline,
                    label: policy_tag(&baseline),
                });
            }
        }
    }

    let results = run_sweep(&cells, st.horizon_slots, st.burn_in_slots, st.seed)?;
    let metric = |m: &SimMetrics| match which {
        Which::AgeVsBudget => (m.avg_aoi, m.se_aoi),
        _ => (m.avg_aoii, m.se_aoii),
    };

    let mut rows = Vec::new();
    let mut body = Vec::new();
    for (row, (x, closed)) in results.iter().zip(&overlay) {
        let (mean, se) = metric(&row.metrics);
        rows.push(format!(
            "{x},{},{mean},{se},{}",
            opt_cell(*closed),
            row.label
        ));
        body.push(json!({
            "x": x,
            "closed_form": closed,
            "sim_mean": mean,
            "sim_se": se,
            "policy_tag": row.label,
        }));
    }
    let text = match format {
        Format::Csv => csv_document(&sha, "x,closed_form,sim_mean,sim_se,policy_tag", &rows),
        Format::Json => json_document(&sha, "sweep", Value::Array(body)),
    };
    emit(out, &text)
}

/// One policy, one seed, full batch-means statistics.
pub fn cmd_simulate(st: &Settings, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let Some(policy_str) = &st.policy else {
        return Err(CliError::Config(
            "simulate needs a policy (--policy or the 'policy' key)".into(),
        ));
    };
    let policy = parse_policy(policy_str)?;
    let p = params(st)?;
    let sha = st.sha256("simulate");
    let m = run(&p, policy, st.horizon_slots, st.seed, st.burn_in_slots)?;
    let text = match format {
        Format::Csv => {
            let header = "policy,avg_aoii,se_aoii,avg_aoi,se_aoi,error_rate,se_error,tx_fraction,se_tx,horizon,seed";
            let row = format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                policy_tag(&policy),
                m.avg_aoii,
                m.se_aoii,
                m.avg_aoi,
                m.se_aoi,
                m.error_rate,
                m.se_error,
                m.tx_fraction,
                m.se_tx,
                m.horizon,
                m.seed
            );
            csv_document(&sha, header, &[row])
        }
        Format::Json => {
            let body = json!({
                "params": {
                    "n_states": p.num_states(),
                    "p_remain": p.p_remain(),
                    "p_success": p.p_success(),
                },
                "policy": policy_tag(&policy),
                "metrics": serde_json::to_value(m).expect("metrics serialize"),
            });
            json_document(&sha, "simulate", body)
        }
    };
    emit(out, &text)
}

struct Report {
    failures: usize,
    total: usize,
}

impl Report {
    fn new() -> Self {
        Report {
            failures: 0,
            total: 0,
        }
    }

    fn record(&mut self, name: &str, result: Result<String, String>) {
        self.total += 1;
        match result {
            Ok(detail) => println!("ok: {name} ({detail})"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL: {name}: {detail}");
            }
        }
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn validation_grid() -> Vec<SystemParams> {
    let mut grid = Vec::new();
    for n in [2u32, 4, 8] {
        for pr in [0.3, 0.6, 0.9] {
            for ps in [0.5, 1.0] {
                grid.push(SystemParams::new(n, pr, ps).unwrap());
            }
        }
    }
    grid
}

fn check_kernel(grid: &[SystemParams], fault: bool) -> Result<String, String> {
    let mut cases = 0usize;
    for p in grid {
        for s in [0u64, 1, 5] {
            for transmit in [false, true] {
                let d = aoii_kernel(p, s, transmit);
                if (d.p_reset + d.p_grow - 1.0).abs() > 1e-15 {
                    return Err(format!("row mass off at {p:?} s={s}"));
                }
                let drift = p.p_failure() * p.p_transition();
                // The fault flag flips the sign of the drift term so a
                // deliberately broken run is visibly caught.
                let drift = if fault { -drift } else { drift };
                let want = match (s, transmit) {
                    (0, _) => p.p_remain(),
                    (_, false) => p.p_transition(),
                    (_, true) => p.p_remain() * p.p_success() + drift,
                };
                if (d.p_reset - want).abs() > 1e-15 {
                    return Err(format!(
                        "reset mass {} vs {} at {p:?} s={s} transmit={transmit}",
                        d.p_reset, want
                    ));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} kernel rows"))
}

fn check_series(grid: &[SystemParams]) -> Result<String, String> {
    let mut cases = 0usize;
    for p in grid {
        for n in [1u64, 5, 12] {
            let dist = stationary(p, n);
            let (mut mass, mut mean, mut active) = (0.0f64, 0.0f64, 0.0f64);
            let mut k = 0u64;
            loop {
                let m = dist.pi(k);
                mass += m;
                mean += k as f64 * m;
                if k >= n {
                    active += m;
                }
                if k > n && m < 1e-18 {
                    break;
                }
                k += 1;
                if k > 5_000_000 {
                    return Err(format!("series failed to converge at {p:?} n={n}"));
                }
            }
            if (mass - 1.0).abs() > 1e-10 {
                return Err(format!("law mass {mass} at {p:?} n={n}"));
            }
            if !rel_close(mean, avg_penalty(p, n), 1e-9) {
                return Err(format!("penalty series {mean} at {p:?} n={n}"));
            }
            if !rel_close(active, active_fraction(p, n), 1e-9) {
                return Err(format!("occupancy series {active} at {p:?} n={n}"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} (params, threshold) pairs"))
}

fn check_monotone(grid: &[SystemParams]) -> Result<String, String> {
    let mut cases = 0usize;
    for p in grid.iter().filter(|p| p.p_remain() > p.p_transition()) {
        let mut prev_occ = active_fraction(p, 0);
        let mut prev_cost = avg_penalty(p, 0);
        let mut prev_price = 0.0f64;
        let mut prev_pi0 = stationary(p, 1).pi0();
        for n in 1u64..=25 {
            let occ = active_fraction(p, n);
            let cost = avg_penalty(p, n);
            let price = lambda_intersection(p, n).map_err(|e| e.to_string())?;
            let pi0 = stationary(p, n).pi0();
            if occ >= prev_occ {
                return Err(format!("occupancy not strictly falling at {p:?} n={n}"));
            }
            if cost < prev_cost - 1e-12 * prev_cost.max(1.0) {
                return Err(format!("cost fell at {p:?} n={n}"));
            }
            if price < prev_price - 1e-9 * prev_price.max(1.0) {
                return Err(format!("price fell at {p:?} n={n}"));
            }
            if pi0 > prev_pi0 + 1e-15 {
                return Err(format!("synced mass rose at {p:?} n={n}"));
            }
            prev_occ = occ;
            prev_cost = cost;
            prev_price = price;
            prev_pi0 = pi0;
        }
        cases += 1;
    }
    Ok(format!("{cases} configurations, thresholds to 25"))
}

fn check_silent_regime(grid: &[SystemParams], alpha: f64) -> Result<String, String> {
    let mut cases = 0usize;
    for p in grid.iter().filter(|p| p.p_transition() >= p.p_remain()) {
        match solve_constrained(p, alpha) {
            Ok(ConstrainedSolution::NeverTransmit { .. }) => cases += 1,
            Ok(other) => return Err(format!("expected the silent policy at {p:?}, got {other:?}")),
            Err(e) => return Err(format!("solve failed at {p:?}: {e}")),
        }
    }
    Ok(format!("{cases} jumpy-source configurations"))
}

fn check_dynamic_program(p: &SystemParams) -> Result<String, String> {
    let cfg = MdpConfig::default();
    let free = solve_lagrangian(p, 0.0, &cfg).map_err(|e| e.to_string())?;
    if (free.gain - cost_always_update(p)).abs() > 1e-6 {
        return Err(format!("free-transmission gain {} off", free.gain));
    }
    let mut prices = Vec::new();
    for pair in [(1u64, 2u64), (3, 4)] {
        let lo = lambda_intersection(p, pair.0).map_err(|e| e.to_string())?;
        let hi = lambda_intersection(p, pair.1).map_err(|e| e.to_string())?;
        prices.push(0.5 * (lo + hi));
    }
    for lambda in prices {
        let sol = solve_lagrangian(p, lambda, &cfg).map_err(|e| e.to_string())?;
        let got = extract_threshold(&sol).map_err(|e| e.to_string())?;
        let best = (0u64..200)
            .min_by(|&x, &y| {
                lagrange_cost(p, x, lambda, 0.0)
                    .partial_cmp(&lagrange_cost(p, y, lambda, 0.0))
                    .unwrap()
            })
            .unwrap();
        if got != ThresholdDecision::At(best) {
            return Err(format!("price {lambda}: {got:?} vs argmin {best}"));
        }
        if (sol.gain - lagrange_cost(p, best, lambda, 0.0)).abs() > 1e-6 {
            return Err(format!("price {lambda}: gain {} off", sol.gain));
        }
    }
    Ok("3 prices against the closed-form argmin".into())
}

fn check_budget_and_certificate(p: &SystemParams, alpha: f64) -> Result<String, String> {
    match solve_constrained(p, alpha).map_err(|e| e.to_string())? {
        ConstrainedSolution::Mixture(m) => {
            if (m.expected_power - alpha).abs() > 1e-12 {
                return Err(format!("budget missed: {}", m.expected_power));
            }
            verify_optimality(p, &m).map_err(|e| e.to_string())?;
            Ok(format!("n0={} certified", m.n0))
        }
        ConstrainedSolution::NeverTransmit { .. } => {
            Ok("silent policy, nothing to certify".into())
        }
    }
}

fn check_simulation(p: &SystemParams, st: &Settings) -> Result<String, String> {
    let n = match solve_constrained(p, st.alpha) {
        Ok(ConstrainedSolution::Mixture(m)) if m.n0 >= 1 => m.n0,
        _ => 3,
    };
    let m = run(
        p,
        PolicySpec::Threshold(n),
        st.horizon_slots,
        st.seed,
        st.burn_in_slots,
    )
    .map_err(|e| e.to_string())?;
    let cost = avg_penalty(p, n);
    let occ = active_fraction(p, n);
    let synced = stationary(p, n).pi0();
    if (m.avg_aoii - cost).abs() > 5.0 * m.se_aoii.max(1e-12) {
        return Err(format!("penalty {} vs {cost}", m.avg_aoii));
    }
    if (m.tx_fraction - occ).abs() > 5.0 * m.se_tx.max(1e-12) {
        return Err(format!("occupancy {} vs {occ}", m.tx_fraction));
    }
    if (1.0 - m.error_rate - synced).abs() > 5.0 * m.se_error.max(1e-12) {
        return Err(format!("synced mass {} vs {synced}", 1.0 - m.error_rate));
    }
    Ok(format!(
        "threshold {n}, {} slots, three metrics within 5 SE",
        m.horizon
    ))
}

/// Cross-check the closed forms, the dynamic program, the optimizer, and
/// the simulator against one another. One line per check; exit 4 if any
/// fails. The hidden fault flag corrupts one comparison on purpose.
pub fn cmd_validate(st: &Settings, inject_fault: bool) -> Result<(), CliError> {
    let grid = validation_grid();
    let p = params(st)?;
    let dp_params = if p.p_remain() > p.p_transition() {
        p
    } else {
        SystemParams::new(8, 0.8, 0.8).unwrap()
    };

    let mut report = Report::new();
    report.record(
        "transition kernel matches the slot analysis",
        check_kernel(&grid, inject_fault),
    );
    report.record(
        "closed-form law matches direct series summation",
        check_series(&grid),
    );
    report.record(
        "occupancy falls, cost and price rise with the threshold",
        check_monotone(&grid),
    );
    report.record(
        "jumpy sources solve to the silent policy",
        check_silent_regime(&grid, st.alpha),
    );
    report.record(
        "priced dynamic program agrees with the closed-form argmin",
        check_dynamic_program(&dp_params),
    );
    report.record(
        "constrained solution meets the budget and certifies",
        check_budget_and_certificate(&p, st.alpha),
    );
    report.record(
        "simulation agrees with the closed forms",
        check_simulation(&p, st),
    );

    if report.failures > 0 {
        return Err(CliError::Check(format!(
            "{} of {} checks failed",
            report.failures, report.total
        )));
    }
    println!("all {} checks passed", report.total);
    Ok(())
}
