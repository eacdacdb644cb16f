//! Executable property checks on solved surfaces.
//!
//! Every check yields a [`PropertyReport`] whose verdict is
//! `statistic ≤ tolerance`. The checks target the discrete scheme: they test
//! that it is monotone, convexity preserving and convergent, which is what
//! the corresponding statements about the continuous value function predict
//! for a consistent monotone approximation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy::MarketModel;
use crate::solver::{self, Grid, Scheme, Solution, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub passed: bool,
    pub statistic: f64,
    pub tolerance: f64,
    pub worst_slice: Option<usize>,
    pub worst_node: Option<usize>,
    pub details: BTreeMap<String, f64>,
}

impl PropertyReport {
    pub fn new(name: impl Into<String>, statistic: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            // NaN statistics fail.
            passed: statistic <= tolerance,
            statistic,
            tolerance,
            worst_slice: None,
            worst_node: None,
            details: BTreeMap::new(),
        }
    }

    pub fn at(mut self, slice: Option<usize>, node: Option<usize>) -> Self {
        self.worst_slice = slice;
        self.worst_node = node;
        self
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

/// Running maximum that remembers where it was attained.
#[derive(Debug, Clone, Copy)]
struct Worst {
    value: f64,
    slice: Option<usize>,
    node: Option<usize>,
}

impl Worst {
    fn new(initial: f64) -> Self {
        Self {
            value: initial,
            slice: None,
            node: None,
        }
    }

    fn update(&mut self, value: f64, slice: usize, node: usize) {
        if value > self.value || (value.is_nan() && !self.value.is_nan()) {
            *self = Self {
                value,
                slice: Some(slice),
                node: Some(node),
            };
        }
    }

    fn merge(self, other: Self) -> Self {
        if other.value > self.value || (other.value.is_nan() && !self.value.is_nan()) {
            other
        } else {
            self
        }
    }

    fn report(self, name: &str, tolerance: f64) -> PropertyReport {
        PropertyReport::new(name, self.value, tolerance).at(self.slice, self.node)
    }
}

pub const CONVEXITY_TOL: f64 = 1e-8;
pub const COMPARISON_TOL: f64 = 1e-12;
pub const DOMINANCE_TOL: f64 = 1e-12;
pub const BANG_BANG_TOL: f64 = 1e-9;
pub const MIN_ORDER: f64 = 0.8;
pub const DOMAIN_TOL: f64 = 1e-4;
pub const OBSTACLE_TOL: f64 = 1e-8;
pub const REFINEMENT_DRIFT: f64 = 2.0;

fn convexity_of_rows(rows: &[Vec<f64>]) -> Worst {
    let mut worst = Worst::new(0.0);
    for (n, row) in rows.iter().enumerate() {
        for i in 1..row.len().saturating_sub(1) {
            let d2 = row[i + 1] - 2.0 * row[i] + row[i - 1];
            worst.update(-d2 / (1.0 + row[i].abs()), n, i);
        }
    }
    worst
}

/// Largest normalized negative second difference `-(u_{i+1} - 2u_i + u_{i-1}) / (1 + |u_i|)`.
pub fn convexity_report(solution: &Solution) -> PropertyReport {
    convexity_of_rows(&solution.u).report("convexity", CONVEXITY_TOL)
}

/// Empirical modulus constants of a solved surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityConstants {
    /// `max |u(t, x_{i+1}) - u(t, x_i)| / h`.
    pub lipschitz_x: f64,
    /// `max |u(t + kΔt, x) - u(t, x)| / √(kΔt)` over dyadic `k`.
    pub holder_t: f64,
    /// `max |Δu| / (√Δt + Δx)` over dyadic space-time offsets.
    pub combined: f64,
}

const OFFSETS: [usize; 4] = [0, 1, 4, 16];

pub fn regularity_constants(solution: &Solution) -> RegularityConstants {
    let g = &solution.grid;
    let u = &solution.u;
    let mut lipschitz_x = 0.0f64;
    for row in u {
        for w in row.windows(2) {
            lipschitz_x = lipschitz_x.max((w[1] - w[0]).abs() / g.h);
        }
    }
    let mut holder_t = 0.0f64;
    let mut k = 1;
    while k <= g.nt {
        let scale = 1.0 / (k as f64 * g.dt).sqrt();
        for n in 0..=(g.nt - k) {
            for i in 0..=g.nx {
                holder_t = holder_t.max((u[n + k][i] - u[n][i]).abs() * scale);
            }
        }
        k *= 2;
    }
    let mut combined = 0.0f64;
    for &kt in &OFFSETS {
        for &kx in &OFFSETS {
            if (kt == 0 && kx == 0) || kt > g.nt || kx > g.nx {
                continue;
            }
            let scale = 1.0 / ((kt as f64 * g.dt).sqrt() + kx as f64 * g.h);
            for n in 0..=(g.nt - kt) {
                for i in 0..=(g.nx - kx) {
                    combined = combined.max((u[n + kt][i + kx] - u[n][i]).abs() * scale);
                }
            }
        }
    }
    RegularityConstants {
        lipschitz_x,
        holder_t,
        combined,
    }
}

/// Regularity constants of `solution`. With a `refined` surface the verdict is
/// refinement stability: every constant changes by less than a factor of 2.
/// Without one, the constants only need to be finite.
pub fn regularity_report(solution: &Solution, refined: Option<&Solution>) -> PropertyReport {
    let c = regularity_constants(solution);
    let base = |r: PropertyReport| {
        r.with("lipschitz_x", c.lipschitz_x)
            .with("holder_t", c.holder_t)
            .with("combined", c.combined)
    };
    match refined {
        None => {
            let worst = c.lipschitz_x.max(c.holder_t).max(c.combined);
            let stat = if worst.is_finite() { worst } else { f64::NAN };
            base(PropertyReport::new("regularity", stat, f64::MAX))
        }
        Some(fine) => {
            let f = regularity_constants(fine);
            let drift = |a: f64, b: f64| if a == b { 1.0 } else { a.max(b) / a.min(b) };
            let stat = drift(c.lipschitz_x, f.lipschitz_x)
                .max(drift(c.holder_t, f.holder_t))
                .max(drift(c.combined, f.combined));
            base(PropertyReport::new("regularity", stat, REFINEMENT_DRIFT))
                .with("refined_lipschitz_x", f.lipschitz_x)
                .with("refined_holder_t", f.holder_t)
                .with("refined_combined", f.combined)
        }
    }
}

/// Solves from `phi1 ≤ phi2` and measures `max(u₁ - u₂)`. When `phi2 - phi1`
/// is a constant `c`, the statistic also covers `u₂ - u₁ ≤ c`.
pub fn comparison_test(
    model: &MarketModel,
    grid: &Grid,
    config: &SolverConfig,
    phi1: &[f64],
    phi2: &[f64],
) -> Result<PropertyReport> {
    if phi1.len() != grid.nx + 1 || phi2.len() != grid.nx + 1 {
        return Err(Error::InvalidArgument("terminal rows do not match the grid".into()));
    }
    if let Some(i) = (0..phi1.len()).find(|&i| !(phi1[i] <= phi2[i])) {
        return Err(Error::InvalidArgument(format!(
            "comparison precondition violated: phi1 > phi2 at node {i}"
        )));
    }
    let gaps: Vec<f64> = phi1.iter().zip(phi2).map(|(a, b)| b - a).collect();
    let shift = gaps
        .iter()
        .all(|g| (g - gaps[0]).abs() <= 1e-15 * (1.0 + gaps[0].abs()))
        .then_some(gaps[0]);

    let s1 = solver::solve_from_terminal(model, grid, config, phi1, true)?;
    let s2 = solver::solve_from_terminal(model, grid, config, phi2, true)?;
    let mut order = Worst::new(f64::NEG_INFINITY);
    let mut bound = Worst::new(f64::NEG_INFINITY);
    let mut max_gap = f64::NEG_INFINITY;
    let mut min_gap = f64::INFINITY;
    for (n, (r1, r2)) in s1.u.iter().zip(&s2.u).enumerate() {
        for (i, (a, b)) in r1.iter().zip(r2).enumerate() {
            order.update(a - b, n, i);
            max_gap = max_gap.max(b - a);
            min_gap = min_gap.min(b - a);
            if let Some(c) = shift {
                bound.update(b - a - c, n, i);
            }
        }
    }
    let worst = order.merge(bound);
    let mut report = worst
        .report("comparison", COMPARISON_TOL)
        .with("max_u1_minus_u2", order.value)
        .with("max_u2_minus_u1", max_gap)
        .with("min_u2_minus_u1", min_gap)
        .with("unconverged_steps", (s1.unconverged_steps + s2.unconverged_steps) as f64);
    if let Some(c) = shift {
        report = report.with("shift", c);
    }
    Ok(report)
}

/// `u_Am ≥ u_Eu` and `u_Am ≥ x⁺` at every node.
pub fn dominance_report(american: &Solution, european: &Solution) -> Result<PropertyReport> {
    if american.grid != european.grid {
        return Err(Error::InvalidArgument("solutions live on different grids".into()));
    }
    let g = &american.grid;
    let mut over_eu = Worst::new(f64::NEG_INFINITY);
    let mut below_payoff = Worst::new(f64::NEG_INFINITY);
    for (n, (ra, re)) in american.u.iter().zip(&european.u).enumerate() {
        for i in 0..=g.nx {
            over_eu.update(re[i] - ra[i], n, i);
            below_payoff.update(g.x(i).max(0.0) - ra[i], n, i);
        }
    }
    Ok(over_eu
        .merge(below_payoff)
        .report("american_dominance", DOMINANCE_TOL)
        .with("max_european_excess", over_eu.value)
        .with("max_payoff_excess", below_payoff.value))
}

/// Compares the optimized Hamiltonian over 21 equispaced controls with the
/// two-point set `{-1, 1}` on every `stride`-th slice. A convex surface makes
/// the Hamiltonian convex in `q`, so the extremes suffice; nonconvex input
/// shows up as a failing statistic.
pub fn bang_bang_report(
    solution: &Solution,
    model: &MarketModel,
    config: &SolverConfig,
    stride: usize,
) -> Result<PropertyReport> {
    let scheme = Scheme::new(model, &solution.grid, config)?;
    let dense = SolverConfig::uniform_candidates(21);
    let ends = [-1.0, 1.0];
    let nt = solution.grid.nt;
    let stride = stride.max(1);
    let mut worst = Worst::new(f64::NEG_INFINITY);
    for n in (0..nt).step_by(stride) {
        let (u, v) = (&solution.u[n], &solution.u[n + 1]);
        let (_, h21) = scheme.optimize_over(&dense, u, v);
        let (_, h2) = scheme.optimize_over(&ends, u, v);
        for i in 1..solution.grid.nx {
            worst.update(h21[i] - h2[i], n, i);
        }
    }
    let nonconvex = convexity_of_rows(&solution.u).value;
    Ok(worst
        .report("bang_bang", BANG_BANG_TOL)
        .with("input_nonconvexity", nonconvex))
}

/// Discrete variational inequality at every interior node and step:
/// `min(R, u - x)` with `R = (u_n - u_{n+1})/Δt - max_q H_q + a u_n`, where the
/// Hamiltonian takes its local part at `u_n` and its jump part at `u_{n+1}`.
/// Projection after the implicit solve makes `R` slightly positive where the
/// obstacle binds, so the statistic there is `u - x`, which is zero.
pub fn obstacle_residual_report(
    solution: &Solution,
    model: &MarketModel,
    config: &SolverConfig,
) -> Result<PropertyReport> {
    let scheme = Scheme::new(model, &solution.grid, config)?;
    let g = &solution.grid;
    let a = scheme.discount_rate();
    let rows: Vec<Worst> = crate::par_map(g.nt, |n| {
        let (u, v) = (&solution.u[n], &solution.u[n + 1]);
        let (_, h) = scheme.optimize_over(scheme.candidates(), u, v);
        let mut worst = Worst::new(0.0);
        for i in 1..g.nx {
            let residual = (u[i] - v[i]) / g.dt - h[i] + a * u[i];
            let gap = u[i] - g.x(i);
            let value = if solution.american { residual.min(gap) } else { residual };
            worst.update(value.abs() / (1.0 + u[i].abs()), n, i);
        }
        worst
    });
    let worst = rows.into_iter().fold(Worst::new(0.0), Worst::merge);
    Ok(worst.report("obstacle_residual", OBSTACLE_TOL))
}

/// Values `u(0, x)` at probe points on a sequence of successively finer grids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub probes: Vec<f64>,
    pub fingerprints: Vec<String>,
    /// `values[k][p]` on grid `k` at probe `p`.
    pub values: Vec<Vec<f64>>,
}

impl ConvergenceStudy {
    pub fn run(model: &MarketModel, config: &SolverConfig, grids: &[Grid], probes: &[f64]) -> Result<Self> {
        if grids.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "a convergence study needs at least 3 grids, got {}",
                grids.len()
            )));
        }
        if probes.is_empty() {
            return Err(Error::InvalidArgument("no probe points".into()));
        }
        for w in grids.windows(2) {
            if w[0] == w[1] || w[0].fingerprint() == w[1].fingerprint() {
                return Err(Error::InvalidArgument("degenerate sequence: identical grids".into()));
            }
            if w[1].nx <= w[0].nx {
                return Err(Error::InvalidArgument("grids must be successively finer".into()));
            }
        }
        let values = crate::par_map(grids.len(), |k| -> Result<Vec<f64>> {
            let sol = solver::solve(model, &grids[k], config)?;
            probes.iter().map(|&x| sol.value_at(0.0, x)).collect()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            probes: probes.to_vec(),
            fingerprints: grids.iter().map(Grid::fingerprint).collect(),
            values,
        })
    }

    /// Successive-difference ratio `|v_{k+2} - v_{k+1}| / |v_{k+1} - v_k|`,
    /// worst over probes and consecutive triples. Order `p` gives `2^{-p}`,
    /// so the tolerance is `2^{-0.8}`.
    pub fn order_report(&self) -> PropertyReport {
        let mut worst = Worst::new(0.0);
        let mut min_order = f64::INFINITY;
        for k in 0..self.values.len() - 2 {
            for p in 0..self.probes.len() {
                let d1 = (self.values[k + 1][p] - self.values[k][p]).abs();
                let d2 = (self.values[k + 2][p] - self.values[k + 1][p]).abs();
                let ratio = if d2 == 0.0 { 0.0 } else { d2 / d1 };
                worst.update(ratio, k, p);
                min_order = min_order.min(-ratio.log2());
            }
        }
        let mut report = worst
            .report("convergence_order", (-MIN_ORDER).exp2())
            .with("min_order", min_order);
        for (p, x) in self.probes.iter().enumerate() {
            report = report.with(&format!("u_finest[{x}]"), self.values[self.values.len() - 1][p]);
        }
        report
    }

    /// Extrapolates the last three grids with the measured ratio and checks
    /// that the limit lies within twice the finest-pair difference of the
    /// finest value.
    pub fn unique_limit_report(&self) -> PropertyReport {
        let m = self.values.len();
        let mut worst = Worst::new(0.0);
        for p in 0..self.probes.len() {
            let (v0, v1, v2) = (self.values[m - 3][p], self.values[m - 2][p], self.values[m - 1][p]);
            let (d1, d2) = (v1 - v0, v2 - v1);
            let stat = if d2 == 0.0 {
                0.0
            } else {
                let r = d2 / d1;
                let limit = v2 + d2 * r / (1.0 - r);
                (limit - v2).abs() / d2.abs()
            };
            worst.update(stat, m - 1, p);
        }
        worst.report("unique_limit", 2.0)
    }

    /// Errors against a known limit must halve per refinement within ±20%.
    pub fn reference_report<F: Fn(f64) -> f64>(&self, reference: F) -> PropertyReport {
        let mut worst = Worst::new(0.0);
        for k in 0..self.values.len() - 1 {
            for (p, &x) in self.probes.iter().enumerate() {
                let e0 = (self.values[k][p] - reference(x)).abs();
                let e1 = (self.values[k + 1][p] - reference(x)).abs();
                worst.update((e0 / e1 / 2.0 - 1.0).abs(), k, p);
            }
        }
        let mut report = worst.report("reference_error_halving", 0.2);
        for (p, &x) in self.probes.iter().enumerate() {
            let e = self.values[self.values.len() - 1][p] - reference(x);
            report = report.with(&format!("finest_error[{x}]"), e);
        }
        report
    }
}

pub fn convergence_report(
    model: &MarketModel,
    config: &SolverConfig,
    grids: &[Grid],
    probes: &[f64],
) -> Result<PropertyReport> {
    Ok(ConvergenceStudy::run(model, config, grids, probes)?.order_report())
}

/// Change of the surface on `|x| ≤ window` when the domain is doubled at the
/// same resolution.
pub fn domain_sensitivity_report(
    model: &MarketModel,
    grid: &Grid,
    config: &SolverConfig,
    window: f64,
) -> Result<PropertyReport> {
    let wide = grid.widened(2);
    let (a, b) = crate::par_join(
        || solver::solve(model, grid, config),
        || solver::solve(model, &wide, config),
    );
    let (a, b) = (a?, b?);
    let offset = wide.zero_index - grid.zero_index;
    let mut worst = Worst::new(0.0);
    for n in 0..=grid.nt {
        for i in 0..=grid.nx {
            if grid.x(i).abs() <= window {
                worst.update((a.u[n][i] - b.u[n][i + offset]).abs(), n, i);
            }
        }
    }
    Ok(worst.report("domain_sensitivity", DOMAIN_TOL).with("window", window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::JumpSpec;
    use crate::solver::{build_grid, terminal_condition};

    fn merton() -> MarketModel {
        MarketModel {
            r: 0.05,
            a: 0.02,
            sigma: 0.2,
            jumps: JumpSpec::Merton {
                lambda: 0.5,
                mu_j: 0.0,
                delta: 0.1,
            },
            maturity: 1.0,
        }
    }

    fn small_solution() -> Solution {
        let g = build_grid(-4.0, 4.0, 64, 32, 1.0).unwrap();
        solver::solve(&merton(), &g, &SolverConfig::default()).unwrap()
    }

    #[test]
    fn terminal_slice_is_convex() {
        let g = build_grid(-4.0, 4.0, 64, 32, 1.0).unwrap();
        assert_eq!(convexity_of_rows(&[terminal_condition(&g)]).value, 0.0);
    }

    #[test]
    fn corrupted_node_is_flagged() {
        let mut sol = small_solution();
        assert!(convexity_report(&sol).passed);
        sol.u[5][20] -= 1e-3;
        let r = convexity_report(&sol);
        assert!(!r.passed);
        assert_eq!(r.worst_slice, Some(5));
        // Lowering a node bends its neighbours the wrong way.
        assert!(matches!(r.worst_node, Some(19) | Some(21)));
        assert!((r.statistic - 1e-3 / (1.0 + sol.u[5][19].abs())).abs() < 1e-4);
    }

    #[test]
    fn terminal_lipschitz_is_one() {
        let mut sol = small_solution();
        let last = sol.u[sol.grid.nt].clone();
        for row in sol.u.iter_mut() {
            row.clone_from(&last);
        }
        let c = regularity_constants(&sol);
        assert!((c.lipschitz_x - 1.0).abs() < 1e-12);
        assert_eq!(c.holder_t, 0.0);
    }

    #[test]
    fn comparison_precondition_and_identity() {
        let g = build_grid(-4.0, 4.0, 32, 16, 1.0).unwrap();
        let phi = terminal_condition(&g);
        let cfg = SolverConfig::default();
        let same = comparison_test(&merton(), &g, &cfg, &phi, &phi).unwrap();
        assert!(same.passed);
        assert_eq!(same.statistic, 0.0);
        let mut lower = phi.clone();
        lower[10] += 1.0;
        assert!(comparison_test(&merton(), &g, &cfg, &lower, &phi).is_err());
    }

    #[test]
    fn shifted_terminal_stays_within_shift() {
        let g = build_grid(-4.0, 4.0, 64, 32, 1.0).unwrap();
        let phi1 = terminal_condition(&g);
        let phi2: Vec<f64> = phi1.iter().map(|v| v + 0.1).collect();
        let r = comparison_test(&merton(), &g, &SolverConfig::default(), &phi1, &phi2).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.details["max_u2_minus_u1"] <= 0.1 + 1e-12);
        assert!(r.details["min_u2_minus_u1"] >= -1e-12);
    }

    #[test]
    fn identical_grids_are_rejected() {
        let g = build_grid(-4.0, 4.0, 32, 16, 1.0).unwrap();
        let grids = [g.clone(), g.clone(), g.refined()];
        assert!(ConvergenceStudy::run(&merton(), &SolverConfig::default(), &grids, &[0.0]).is_err());
        assert!(ConvergenceStudy::run(&merton(), &SolverConfig::default(), &grids[1..], &[0.0]).is_err());
    }

    #[test]
    fn bang_bang_holds_on_small_solve() {
        let sol = small_solution();
        let r = bang_bang_report(&sol, &merton(), &SolverConfig::default(), 4).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn obstacle_residual_vanishes() {
        let sol = small_solution();
        let r = obstacle_residual_report(&sol, &merton(), &SolverConfig::default()).unwrap();
        assert!(r.passed, "{r:?}");
        let mut bad = sol.clone();
        bad.u[3][30] += 1e-4;
        assert!(!obstacle_residual_report(&bad, &merton(), &SolverConfig::default()).unwrap().passed);
    }

    #[test]
    fn reports_are_reproducible() {
        let a = regularity_report(&small_solution(), None);
        let b = regularity_report(&small_solution(), None);
        assert_eq!(a, b);
        assert!(a.passed);
    }

    #[test]
    fn order_report_reads_ratios() {
        let study = ConvergenceStudy {
            probes: vec![0.0],
            fingerprints: vec![],
            values: vec![vec![1.0], vec![1.5], vec![1.75]],
        };
        let r = study.order_report();
        assert!((r.statistic - 0.5).abs() < 1e-15);
        assert!((r.details["min_order"] - 1.0).abs() < 1e-15);
        let u = study.unique_limit_report();
        assert!((u.statistic - 1.0).abs() < 1e-12);
        assert!(u.passed);
    }
}
