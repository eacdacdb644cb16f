use passport_core::analysis::{
    bang_bang_report, comparison_test, convexity_report, dominance_report, domain_sensitivity_report,
    obstacle_residual_report, regularity_report, ConvergenceStudy, PropertyReport,
};
use passport_core::mc::{estimate_price, McEstimate, PolicyTable, SimSpec};
use passport_core::solver::{build_grid, solve, solve_european, terminal_condition, Grid};
use passport_core::{JumpSpec, Solution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Prepared;
use crate::CliError;

/// A finished document and whether it records failed checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub file_name: &'static str,
    pub body: Vec<u8>,
    pub failed: bool,
}

fn json_document<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut body = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    body.push(b'\n');
    Ok(body)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceRecord {
    #[serde(rename = "V")]
    pub value: f64,
    pub u: f64,
    pub t: f64,
    #[serde(rename = "S")]
    pub spot: f64,
    #[serde(rename = "X")]
    pub account: f64,
    pub grid_fingerprint: String,
}

pub fn price_records(prep: &Prepared, solution: &Solution) -> Result<Vec<PriceRecord>, CliError> {
    let c = prep.bound.value();
    prep.points
        .iter()
        .map(|p| {
            Ok(PriceRecord {
                value: solution.price_with_bound(p.t, p.spot, p.account, prep.bound)?,
                u: solution.value_at(p.t, p.account / (c * p.spot))?,
                t: p.t,
                spot: p.spot,
                account: p.account,
                grid_fingerprint: solution.grid.fingerprint(),
            })
        })
        .collect()
}

/// One record for a single `(S, X)` query, a list for ratio queries.
pub fn price(prep: &Prepared) -> Result<Output, CliError> {
    let solution = solve(&prep.model, &prep.grid, &prep.solver)?;
    let records = price_records(prep, &solution)?;
    let body = if records.len() == 1 {
        json_document(&records[0])?
    } else {
        json_document(&records)?
    };
    Ok(Output {
        file_name: "price.json",
        body,
        failed: false,
    })
}

pub fn surface(prep: &Prepared) -> Result<Output, CliError> {
    let solution = solve(&prep.model, &prep.grid, &prep.solver)?;
    let mut body = Vec::new();
    solution
        .write_csv(&mut body)
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(Output {
        file_name: "surface.csv",
        body,
        failed: false,
    })
}

#[derive(Debug, Clone, Serialize)]
struct CrossCheck {
    l0: f64,
    u_pde: f64,
    #[serde(flatten)]
    estimate: McEstimate,
}

#[derive(Debug, Clone, Serialize)]
struct VerifyDocument {
    passed: bool,
    model_hash: String,
    grid_fingerprint: String,
    reports: Vec<PropertyReport>,
    mc_cross_check: Vec<CrossCheck>,
}

const SHIFT: f64 = 0.1;
const RANDOM_PAIRS: usize = 3;
const MC_FLOOR: f64 = 5e-3;
const ODE_TOL: f64 = 2e-3;

/// Three grids ending at (or near) the configured one: quarter and half
/// resolution when the sizes divide by four, otherwise two refinements.
fn convergence_grids(grid: &Grid) -> Result<Vec<Grid>, CliError> {
    let base = if grid.nx.is_multiple_of(4) && grid.nt.is_multiple_of(4) && grid.nx >= 32 {
        build_grid(grid.x_min, grid.x_max, grid.nx / 4, grid.nt / 4, grid.maturity)?
    } else {
        grid.clone()
    };
    let mid = base.refined();
    let fine = mid.refined();
    Ok(vec![base, mid, fine])
}

fn terminal_report(solution: &Solution) -> PropertyReport {
    let g = &solution.grid;
    let worst = (0..=g.nx)
        .map(|i| (solution.u[g.nt][i] - g.x(i).max(0.0)).abs())
        .fold(0.0, f64::max);
    PropertyReport::new("terminal_condition", worst, 0.0)
}

fn random_comparisons(prep: &Prepared, seed: u64) -> Result<PropertyReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let payoff = terminal_condition(&prep.grid);
    let mut worst: Option<PropertyReport> = None;
    for _ in 0..RANDOM_PAIRS {
        let phi1: Vec<f64> = payoff.iter().map(|p| p + 0.3 * rng.gen::<f64>()).collect();
        let phi2: Vec<f64> = phi1.iter().map(|p| p + 0.3 * rng.gen::<f64>()).collect();
        let r = comparison_test(&prep.model, &prep.grid, &prep.solver, &phi1, &phi2)?;
        if worst.as_ref().is_none_or(|w| r.statistic > w.statistic) {
            worst = Some(r);
        }
    }
    let mut r = worst.expect("at least one pair");
    r.name = "comparison_random".into();
    Ok(r)
}

/// Deterministic-control value when there is neither diffusion nor jumps:
/// with `q ≡ -1`, `1 + L` grows at the drift rate `c`, and the payoff is
/// discounted at `a`.
fn ode_oracle(prep: &Prepared, solution: &Solution) -> Result<Option<PropertyReport>, CliError> {
    if prep.model.sigma != 0.0 || prep.model.jumps != JumpSpec::None {
        return Ok(None);
    }
    let tau = prep.model.maturity;
    let c = prep.solver.drift_variant.rate(prep.model.a);
    let mut report = PropertyReport::new("ode_oracle", 0.0, ODE_TOL);
    let mut worst = 0.0f64;
    for x in [-0.5, 0.5, 1.0] {
        if !prep.grid.contains(x) {
            continue;
        }
        let exact = (-prep.model.a * tau).exp() * ((1.0 + x) * (c * tau).exp() - 1.0).max(0.0);
        let err = (solution.value_at(0.0, x)? - exact).abs();
        worst = worst.max(err);
        report = report.with(&format!("error[{x}]"), err);
    }
    report.statistic = worst;
    report.passed = worst <= ODE_TOL;
    Ok(Some(report))
}

pub fn verify(prep: &Prepared) -> Result<Output, CliError> {
    let (model, grid, cfg) = (&prep.model, &prep.grid, &prep.solver);
    let solution = solve(model, grid, cfg)?;
    let european = solve_european(model, grid, cfg)?;
    let refined = solve(model, &grid.refined(), cfg)?;

    let mut reports = vec![
        terminal_report(&solution),
        convexity_report(&solution),
        regularity_report(&solution, Some(&refined)),
    ];
    let phi1 = terminal_condition(grid);
    let phi2: Vec<f64> = phi1.iter().map(|p| p + SHIFT).collect();
    let mut shift = comparison_test(model, grid, cfg, &phi1, &phi2)?;
    shift.name = "comparison_shift".into();
    reports.push(shift);
    reports.push(random_comparisons(prep, prep.mc.seed)?);
    reports.push(dominance_report(&solution, &european)?);
    reports.push(obstacle_residual_report(&solution, model, cfg)?);
    reports.push(bang_bang_report(&solution, model, cfg, (grid.nt / 50).max(1))?);

    let probes: Vec<f64> = [-1.0, 0.0, 1.0].into_iter().filter(|x| grid.contains(*x)).collect();
    let study = ConvergenceStudy::run(model, cfg, &convergence_grids(grid)?, &probes)?;
    reports.push(study.order_report());
    reports.push(study.unique_limit_report());
    reports.push(domain_sensitivity_report(model, grid, cfg, 1.0)?);
    if let Some(r) = ode_oracle(prep, &solution)? {
        reports.push(r);
    }

    let policy = PolicyTable::from_solution(&solution);
    let mut cross = Vec::new();
    for &l0 in &prep.mc.l0 {
        let mut spec = SimSpec::new(0.0, l0, prep.mc.n_steps);
        spec.drift_variant = cfg.drift_variant;
        let estimate = estimate_price(model, &policy, &spec, prep.mc.n_paths, prep.mc.seed)?;
        let u_pde = solution.value_at(0.0, l0)?;
        let tol = (2.0 * estimate.ci95).max(MC_FLOOR);
        reports.push(
            PropertyReport::new(format!("mc_cross_check[{l0}]"), (u_pde - estimate.mean).abs(), tol)
                .with("u_pde", u_pde)
                .with("mc_mean", estimate.mean)
                .with("ci95", estimate.ci95),
        );
        cross.push(CrossCheck { l0, u_pde, estimate });
    }

    let passed = reports.iter().all(|r| r.passed);
    let doc = VerifyDocument {
        passed,
        model_hash: solution.model_hash.clone(),
        grid_fingerprint: grid.fingerprint(),
        reports,
        mc_cross_check: cross,
    };
    Ok(Output {
        file_name: "verify.json",
        body: json_document(&doc)?,
        failed: !passed,
    })
}
