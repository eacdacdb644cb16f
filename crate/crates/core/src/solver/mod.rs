//! Backward solver for the reduced passport-option obstacle problem.

mod config;
mod grid;
mod scheme;

use std::io::{self, Write};

pub use config::SolverConfig;
pub use grid::{build_grid, Grid};
pub use scheme::{interpolate_extended, jump_integral, Scheme, StepOutcome, CFL_LIMIT};

use crate::error::{Error, Result};
use crate::levy::MarketModel;
use crate::reduction::{normalize_constraint, reassemble, ControlBound};

/// Solved value surface `u(t_n, x_i)` with the optimal control and the
/// exercise indicator on the same grid.
#[derive(Debug, Clone)]
pub struct Solution {
    pub grid: Grid,
    /// `u[n][i]`, `n = 0..=nt`, `i = 0..=nx`.
    pub u: Vec<Vec<f64>>,
    pub q_star: Vec<Vec<f64>>,
    pub exercise: Vec<Vec<bool>>,
    pub american: bool,
    pub model_hash: String,
    /// Linear solves used by policy iteration in step `n -> n+1`.
    pub policy_iterations: Vec<usize>,
    pub unconverged_steps: usize,
}

/// Terminal payoff row `u(T, x) = x⁺`.
pub fn terminal_condition(grid: &Grid) -> Vec<f64> {
    (0..=grid.nx).map(|i| grid.x(i).max(0.0)).collect()
}

pub fn time_step(
    v: &[f64],
    grid: &Grid,
    model: &MarketModel,
    config: &SolverConfig,
) -> Result<Vec<f64>> {
    Ok(Scheme::new(model, grid, config)?.time_step(v, true)?.u)
}

/// American value surface.
pub fn solve(model: &MarketModel, grid: &Grid, config: &SolverConfig) -> Result<Solution> {
    let scheme = Scheme::new(model, grid, config)?;
    solve_with_scheme(&scheme, model, &terminal_condition(grid), true)
}

/// Same scheme with the obstacle projection switched off.
pub fn solve_european(model: &MarketModel, grid: &Grid, config: &SolverConfig) -> Result<Solution> {
    let scheme = Scheme::new(model, grid, config)?;
    solve_with_scheme(&scheme, model, &terminal_condition(grid), false)
}

/// Solve from arbitrary terminal data; used by comparison checks.
pub fn solve_from_terminal(
    model: &MarketModel,
    grid: &Grid,
    config: &SolverConfig,
    terminal: &[f64],
    american: bool,
) -> Result<Solution> {
    if terminal.len() != grid.nx + 1 {
        return Err(Error::InvalidArgument(format!(
            "terminal row has {} entries, grid has {}",
            terminal.len(),
            grid.nx + 1
        )));
    }
    let scheme = Scheme::new(model, grid, config)?;
    solve_with_scheme(&scheme, model, terminal, american)
}

/// American surface for position bound `|q| ≤ C`, solved directly with
/// scaled controls rather than through the spot rescaling.
pub fn solve_with_bound(
    model: &MarketModel,
    grid: &Grid,
    config: &SolverConfig,
    bound: ControlBound,
) -> Result<Solution> {
    let scheme = Scheme::with_bound(model, grid, config, bound)?;
    solve_with_scheme(&scheme, model, &terminal_condition(grid), true)
}

pub fn solve_with_scheme(
    scheme: &Scheme,
    model: &MarketModel,
    terminal: &[f64],
    american: bool,
) -> Result<Solution> {
    let grid = scheme.grid().clone();
    let nt = grid.nt;
    let mut u = vec![Vec::new(); nt + 1];
    let mut q_star = vec![Vec::new(); nt + 1];
    let mut policy_iterations = vec![0; nt];
    let mut unconverged_steps = 0;

    u[nt] = terminal.to_vec();
    q_star[nt] = scheme.optimize_control(terminal).0;
    for n in (0..nt).rev() {
        let step = scheme.time_step(&u[n + 1], american)?;
        if step.u.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfDomain(format!("non-finite values at time step {n}")));
        }
        policy_iterations[n] = step.iterations;
        if !step.converged {
            unconverged_steps += 1;
        }
        u[n] = step.u;
        q_star[n] = step.q;
    }

    let tol = scheme.config().exercise_tol;
    let exercise = u
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(i, &v)| v - grid.x(i) <= tol)
                .collect()
        })
        .collect();

    let model_hash = grid::short_digest(format!("{model:?}|{:?}", scheme.config()).as_bytes());
    Ok(Solution {
        grid,
        u,
        q_star,
        exercise,
        american,
        model_hash,
        policy_iterations,
        unconverged_steps,
    })
}

impl Solution {
    /// Bilinear interpolation of `u` at `(t, x)`. At `t = T` the payoff `x⁺`
    /// is returned exactly.
    pub fn value_at(&self, t: f64, x: f64) -> Result<f64> {
        let g = &self.grid;
        if !(t.is_finite() && (0.0..=g.maturity).contains(&t)) {
            return Err(Error::OutOfDomain(format!("t = {t} outside [0, {}]", g.maturity)));
        }
        if !x.is_finite() || !g.contains(x) {
            return Err(Error::OutOfDomain(format!(
                "ratio X/S = {x} outside [{}, {}]",
                g.x_min, g.x_max
            )));
        }
        if t == g.maturity {
            return Ok(x.max(0.0));
        }
        let pos = t / g.dt;
        let n0 = (pos.floor() as usize).min(g.nt - 1);
        let ft = (pos - n0 as f64).clamp(0.0, 1.0);
        let a = interpolate_extended(&self.u[n0], g, x);
        if ft == 0.0 {
            return Ok(a);
        }
        let b = interpolate_extended(&self.u[n0 + 1], g, x);
        Ok((1.0 - ft) * a + ft * b)
    }

    /// Option price `V(t, S, X) = S · u(t, X/S)`.
    pub fn price_at(&self, t: f64, spot: f64, account: f64) -> Result<f64> {
        if !(spot.is_finite() && spot > 0.0) {
            return Err(Error::InvalidArgument(format!("spot must be positive, got {spot}")));
        }
        let u = self.value_at(t, account / spot)?;
        reassemble(spot, u)
    }

    /// Price under position bound `C` from a unit-bound solution.
    pub fn price_with_bound(&self, t: f64, spot: f64, account: f64, bound: ControlBound) -> Result<f64> {
        self.price_at(t, normalize_constraint(bound, spot)?, account)
    }

    /// Writes `t,x,u,q_star,exercise` rows, time-major, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,u,q_star,exercise")?;
        for n in 0..=self.grid.nt {
            let t = self.grid.t(n);
            for i in 0..=self.grid.nx {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{}",
                    t,
                    self.grid.x(i),
                    self.u[n][i],
                    self.q_star[n][i],
                    u8::from(self.exercise[n][i])
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::JumpSpec;

    fn degenerate() -> MarketModel {
        MarketModel {
            r: 0.05,
            a: 0.02,
            sigma: 0.0,
            jumps: JumpSpec::None,
            maturity: 1.0,
        }
    }

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

    #[test]
    fn terminal_row_is_positive_part() {
        let g = build_grid(-4.0, 4.0, 16, 4, 1.0).unwrap();
        let row = terminal_condition(&g);
        assert_eq!(row[g.node_index(1.5).unwrap()], 1.5);
        assert_eq!(row[g.node_index(-2.0).unwrap()], 0.0);
        assert_eq!(row[g.zero_index], 0.0);
    }

    #[test]
    fn degenerate_model_matches_ode_value() {
        let g = build_grid(-4.0, 4.0, 200, 200, 1.0).unwrap();
        let sol = solve(&degenerate(), &g, &SolverConfig::default()).unwrap();
        let expected = 1.5 - (-0.02f64).exp();
        assert!((sol.value_at(0.0, 0.5).unwrap() - expected).abs() < 2e-3);
    }

    #[test]
    fn price_at_contract() {
        let g = build_grid(-4.0, 4.0, 64, 32, 1.0).unwrap();
        let sol = solve(&merton(), &g, &SolverConfig::default()).unwrap();
        assert_eq!(sol.price_at(1.0, 100.0, 37.0).unwrap(), 37.0);
        assert_eq!(sol.price_at(1.0, 100.0, -37.0).unwrap(), 0.0);
        let a = sol.price_at(0.3, 80.0, 13.0).unwrap();
        let b = sol.price_at(0.3, 160.0, 26.0).unwrap();
        assert_eq!(b, 2.0 * a);
        assert!(sol.price_at(0.0, 10.0, 50.0).is_err());
        assert!(sol.price_at(0.0, 0.0, 1.0).is_err());
        assert!(sol.price_at(1.5, 10.0, 1.0).is_err());
    }

    #[test]
    fn csv_has_header_and_one_row_per_node() {
        let g = build_grid(-4.0, 4.0, 8, 2, 1.0).unwrap();
        let sol = solve(&merton(), &g, &SolverConfig::default()).unwrap();
        let mut buf = Vec::new();
        sol.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x,u,q_star,exercise");
        assert_eq!(lines.len(), 1 + 3 * 9);
        assert!(!text.contains('\r'));
        let last: Vec<&str> = lines[lines.len() - 1].split(',').collect();
        assert_eq!(last[0].parse::<f64>().unwrap(), 1.0);
        assert_eq!(last[1].parse::<f64>().unwrap(), 4.0);
        assert_eq!(last[2].parse::<f64>().unwrap(), 4.0);
        assert_eq!(last[4], "1");
    }

    #[test]
    fn american_dominates_european() {
        let g = build_grid(-4.0, 4.0, 64, 64, 1.0).unwrap();
        let am = solve(&merton(), &g, &SolverConfig::default()).unwrap();
        let eu = solve_european(&merton(), &g, &SolverConfig::default()).unwrap();
        for (ra, re) in am.u.iter().zip(&eu.u) {
            for (a, e) in ra.iter().zip(re) {
                assert!(*a >= e - 1e-12);
            }
        }
    }

    #[test]
    fn solves_are_deterministic() {
        let g = build_grid(-4.0, 4.0, 64, 32, 1.0).unwrap();
        let a = solve(&merton(), &g, &SolverConfig::default()).unwrap();
        let b = solve(&merton(), &g, &SolverConfig::default()).unwrap();
        assert_eq!(a.u, b.u);
        assert_eq!(a.model_hash, b.model_hash);
    }
}
