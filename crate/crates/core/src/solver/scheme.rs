//! Monotone IMEX discretization of the obstacle problem
//!
//! `min{-∂ₜu - sup_q 𝓛^q u + a u, u - x} = 0`,
//! `𝓛^q u = σ²(q-x)²/2 u_xx - c(q-x) u_x + ∫[u(x+ζ) - u(x) - ζ u_x] ν̃(dz)`.
//!
//! The compensator part of the jump integral, `-(q-x) u_x ∫(1-e^{-z}) ν̃(dz)`,
//! is a drift and is merged into the local drift. The drift is centrally
//! differenced where diffusion dominates it on the cell (`D ≥ |b| h / 2`) and
//! upwinded elsewhere, so every off-diagonal weight of the discrete operator
//! is non-negative. The
//! remaining jump term `∫[u(x+ζ) - u(x)] ν̃(dz)` is evaluated on the previous
//! time level by linear interpolation.

use crate::error::{Error, Result};
use crate::levy::{tilt, validate_model, DiscreteMeasure, MarketModel};
use crate::reduction::{zeta, ControlBound};
use crate::solver::{Grid, SolverConfig};
use crate::tridiag;

pub const CFL_LIMIT: f64 = 0.9;

/// Where a jump from node `i` lands.
#[derive(Debug, Clone, Copy)]
enum Dest {
    Below,
    Inside { lo: u32, frac: f64 },
    Above { excess: f64 },
}

#[derive(Debug, Clone)]
pub struct Scheme {
    grid: Grid,
    a: f64,
    sigma: f64,
    drift_rate: f64,
    measure: DiscreteMeasure,
    /// `Σ w_k (1 - e^{-z_k})` on the discrete measure.
    kappa: f64,
    candidates: Vec<f64>,
    stencils: Vec<Vec<Dest>>,
    config: SolverConfig,
}

/// Result of one backward step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub u: Vec<f64>,
    pub q: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Scheme {
    pub fn new(model: &MarketModel, grid: &Grid, config: &SolverConfig) -> Result<Self> {
        Self::with_bound(model, grid, config, ControlBound::default())
    }

    /// Scheme for the problem with position bound `|q| ≤ C`: the configured
    /// candidates are scaled by `C`.
    pub fn with_bound(
        model: &MarketModel,
        grid: &Grid,
        config: &SolverConfig,
        bound: ControlBound,
    ) -> Result<Self> {
        validate_model(model).into_result()?;
        config.validate()?;
        let tilted = tilt(&model.jumps)?;
        let lambda_tilde = tilted.lambda_tilde();
        if config.cfl_guard && lambda_tilde > 0.0 {
            let value = grid.dt * (lambda_tilde + model.a);
            if value > CFL_LIMIT {
                return Err(Error::Cfl {
                    value,
                    limit: CFL_LIMIT,
                });
            }
        }
        let measure = tilted.discretize(config.jump_quadrature_nodes);
        let kappa = measure.integrate(|z| -(-z).exp_m1());
        let candidates: Vec<f64> = config.q_candidates.iter().map(|q| q * bound.value()).collect();
        let mut scheme = Self {
            grid: grid.clone(),
            a: model.a,
            sigma: model.sigma,
            drift_rate: config.drift_variant.rate(model.a),
            measure,
            kappa,
            candidates,
            stencils: Vec::new(),
            config: config.clone(),
        };
        scheme.stencils = scheme
            .candidates
            .iter()
            .map(|&q| scheme.build_stencil(q))
            .collect();
        Ok(scheme)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn candidates(&self) -> &[f64] {
        &self.candidates
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn discount_rate(&self) -> f64 {
        self.a
    }

    fn build_stencil(&self, q: f64) -> Vec<Dest> {
        let mut out = Vec::with_capacity((self.grid.nx + 1) * self.measure.nodes.len());
        for i in 0..=self.grid.nx {
            let x = self.grid.x(i);
            for &(z, _) in &self.measure.nodes {
                out.push(self.destination(x + zeta(q, x, z)));
            }
        }
        out
    }

    fn destination(&self, y: f64) -> Dest {
        if y < self.grid.x_min {
            Dest::Below
        } else if y > self.grid.x_max {
            Dest::Above {
                excess: y - self.grid.x_max,
            }
        } else {
            let (lo, frac) = self.grid.locate(y).expect("inside grid");
            Dest::Inside { lo: lo as u32, frac }
        }
    }

    #[inline]
    fn eval(&self, u: &[f64], d: Dest) -> f64 {
        match d {
            Dest::Below => 0.0,
            Dest::Above { excess } => u[self.grid.nx] + excess,
            Dest::Inside { lo, frac } => {
                let lo = lo as usize;
                if frac == 0.0 {
                    u[lo]
                } else {
                    u[lo] * (1.0 - frac) + u[lo + 1] * frac
                }
            }
        }
    }

    /// Non-negative weights `(left, right)` with
    /// `(A^q u)_i = left (u_{i-1} - u_i) + right (u_{i+1} - u_i)`.
    #[inline]
    fn local_weights(&self, q: f64, i: usize) -> (f64, f64) {
        let x = self.grid.x(i);
        let h = self.grid.h;
        let diff = 0.5 * self.sigma * self.sigma * (q - x) * (q - x) / (h * h);
        let drift = -(self.drift_rate + self.kappa) * (q - x);
        if diff * h >= 0.5 * drift.abs() {
            let half = 0.5 * drift / h;
            (diff - half, diff + half)
        } else {
            (diff + (-drift).max(0.0) / h, diff + drift.max(0.0) / h)
        }
    }

    #[inline]
    fn local_apply(&self, q: f64, u: &[f64], i: usize) -> f64 {
        let (l, r) = self.local_weights(q, i);
        l * (u[i - 1] - u[i]) + r * (u[i + 1] - u[i])
    }

    /// `Σ_k w_k [u(x_i + ζ_k) - u(x_i)]` for an arbitrary control.
    fn jump_at(&self, q: f64, u: &[f64], i: usize) -> f64 {
        let x = self.grid.x(i);
        self.measure
            .nodes
            .iter()
            .map(|&(z, w)| w * (self.eval(u, self.destination(x + zeta(q, x, z))) - u[i]))
            .sum()
    }

    fn jump_candidate(&self, c: usize, u: &[f64], i: usize) -> f64 {
        let k = self.measure.nodes.len();
        self.stencils[c][i * k..(i + 1) * k]
            .iter()
            .zip(&self.measure.nodes)
            .map(|(&d, &(_, w))| w * (self.eval(u, d) - u[i]))
            .sum()
    }

    /// Jump term on every interior node for every candidate.
    fn jump_rows(&self, v: &[f64]) -> Vec<Vec<f64>> {
        let n = self.grid.nx + 1;
        if self.measure.nodes.is_empty() {
            return vec![vec![0.0; n]; self.candidates.len()];
        }
        (0..self.candidates.len())
            .map(|c| {
                crate::par_map(n, |i| {
                    if i == 0 || i == n - 1 {
                        0.0
                    } else {
                        self.jump_candidate(c, v, i)
                    }
                })
            })
            .collect()
    }

    /// Discrete Hamiltonian at node `i` for control `q`: local part applied to
    /// `u`, jump part applied to `v` (the previous time level in a step).
    pub fn hamiltonian(&self, q: f64, u: &[f64], v: &[f64], i: usize) -> f64 {
        self.local_apply(q, u, i) + self.jump_at(q, v, i)
    }

    /// `𝓛^q u - a u` on interior nodes; boundary entries are 0.
    pub fn generator_apply(&self, u: &[f64], q: f64) -> Vec<f64> {
        let n = self.grid.nx + 1;
        crate::par_map(n, |i| {
            if i == 0 || i == n - 1 {
                0.0
            } else {
                self.hamiltonian(q, u, u, i) - self.a * u[i]
            }
        })
    }

    /// Pointwise maximization of the generator over the configured candidates.
    /// Returns the argmax row and the optimized generator row; ties go to the
    /// larger control.
    pub fn optimize_control(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (q, h) = self.optimize_over(&self.candidates, u, u);
        let g = h.iter().zip(u).map(|(h, u)| h - self.a * u).collect::<Vec<_>>();
        let mut g = g;
        g[0] = 0.0;
        let last = g.len() - 1;
        g[last] = 0.0;
        (q, g)
    }

    /// Maximizes `hamiltonian(q, u, v, i)` over `qs` at each interior node.
    /// Boundary entries copy their interior neighbour.
    pub fn optimize_over(&self, qs: &[f64], u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.nx + 1;
        let best: Vec<(f64, f64)> = crate::par_map(n, |i| {
            if i == 0 || i == n - 1 {
                return (f64::NAN, f64::NAN);
            }
            let values: Vec<f64> = qs.iter().map(|&q| self.hamiltonian(q, u, v, i)).collect();
            let idx = argmax_toward_larger(qs, &values);
            (qs[idx], values[idx])
        });
        let mut q: Vec<f64> = best.iter().map(|b| b.0).collect();
        let mut h: Vec<f64> = best.iter().map(|b| b.1).collect();
        fill_boundary(&mut q);
        fill_boundary(&mut h);
        (q, h)
    }

    /// One backward step from `v = u(t_{n+1})` to `u(t_n)` by policy iteration,
    /// followed by projection onto `u ≥ x` when `american`.
    pub fn time_step(&self, v: &[f64], american: bool) -> Result<StepOutcome> {
        let n = self.grid.nx + 1;
        assert_eq!(v.len(), n, "row length does not match grid");
        let dt = self.grid.dt;
        let jumps = self.jump_rows(v);

        let mut u = v.to_vec();
        let mut policy = vec![usize::MAX; n];
        let mut iterations = 0;
        let mut converged = false;
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];

        while iterations < self.config.policy_max_iters {
            let improved: Vec<usize> = crate::par_map(n, |i| {
                if i == 0 || i == n - 1 {
                    return 0;
                }
                let values: Vec<f64> = self
                    .candidates
                    .iter()
                    .enumerate()
                    .map(|(c, &q)| self.local_apply(q, &u, i) + jumps[c][i])
                    .collect();
                argmax_toward_larger(&self.candidates, &values)
            });
            if improved == policy {
                converged = true;
                break;
            }
            policy = improved;

            diag[0] = 1.0;
            upper[0] = 0.0;
            rhs[0] = 0.0;
            lower[n - 1] = -1.0;
            diag[n - 1] = 1.0;
            rhs[n - 1] = self.grid.h;
            for i in 1..n - 1 {
                let c = policy[i];
                let (l, r) = self.local_weights(self.candidates[c], i);
                lower[i] = -dt * l;
                upper[i] = -dt * r;
                diag[i] = 1.0 + dt * (self.a + l + r);
                rhs[i] = v[i] + dt * jumps[c][i];
            }
            let next = tridiag::solve(&lower, &diag, &upper, &rhs)?;
            iterations += 1;
            let change = next
                .iter()
                .zip(&u)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            u = next;
            if change < self.config.policy_tol {
                converged = true;
                break;
            }
        }

        if american {
            for (i, ui) in u.iter_mut().enumerate() {
                *ui = ui.max(self.grid.x(i));
            }
        }
        let mut q: Vec<f64> = policy
            .iter()
            .map(|&c| self.candidates.get(c).copied().unwrap_or(f64::NAN))
            .collect();
        fill_boundary(&mut q);
        Ok(StepOutcome {
            u,
            q,
            iterations,
            converged,
        })
    }
}

/// Index of the maximum; among values within rounding of the maximum the one
/// with the largest control wins.
fn argmax_toward_larger(qs: &[f64], values: &[f64]) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-13 * (1.0 + max.abs());
    let mut best = None;
    for (k, (&q, &v)) in qs.iter().zip(values).enumerate() {
        if v >= max - tol && best.is_none_or(|b: usize| q > qs[b]) {
            best = Some(k);
        }
    }
    best.unwrap_or(0)
}

fn fill_boundary(row: &mut [f64]) {
    let n = row.len();
    if n >= 3 {
        row[0] = row[1];
        row[n - 1] = row[n - 2];
    }
}

/// Compensated jump integral at node `i`:
/// `Σ_k w_k [u(x_i + ζ_k) - u(x_i) - ζ_k Dₓu(x_i)]` with `Dₓ` the central
/// difference (one-sided at the ends). Off-grid destinations use 0 below
/// `x_min` and slope-one extrapolation above `x_max`.
pub fn jump_integral(u: &[f64], grid: &Grid, measure: &DiscreteMeasure, q: f64, i: usize) -> f64 {
    let nx = grid.nx;
    let x = grid.x(i);
    let du = if i == 0 {
        (u[1] - u[0]) / grid.h
    } else if i == nx {
        (u[nx] - u[nx - 1]) / grid.h
    } else {
        (u[i + 1] - u[i - 1]) / (2.0 * grid.h)
    };
    measure
        .nodes
        .iter()
        .map(|&(z, w)| {
            let d = zeta(q, x, z);
            w * (interpolate_extended(u, grid, x + d) - u[i] - d * du)
        })
        .sum()
}

/// Linear interpolation of a grid row with 0 below the grid and slope-one
/// extrapolation above it.
pub fn interpolate_extended(u: &[f64], grid: &Grid, y: f64) -> f64 {
    if y < grid.x_min {
        0.0
    } else if y > grid.x_max {
        u[grid.nx] + (y - grid.x_max)
    } else {
        let (lo, frac) = grid.locate(y).expect("inside grid");
        if frac == 0.0 {
            u[lo]
        } else {
            u[lo] * (1.0 - frac) + u[lo + 1] * frac
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{JumpAtom, JumpSpec};
    use crate::solver::build_grid;

    fn model(sigma: f64, jumps: JumpSpec) -> MarketModel {
        MarketModel {
            r: 0.05,
            a: 0.02,
            sigma,
            jumps,
            maturity: 1.0,
        }
    }

    #[test]
    fn constant_row_gives_pure_discounting() {
        let g = build_grid(-4.0, 4.0, 80, 10, 1.0).unwrap();
        let s = Scheme::new(&model(0.2, JumpSpec::None), &g, &SolverConfig::default()).unwrap();
        let u = vec![0.7; g.nx + 1];
        for q in [-1.0, 0.0, 1.0] {
            let gen = s.generator_apply(&u, q);
            for v in &gen[1..g.nx] {
                assert!((v + 0.02 * 0.7).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn quadratic_generator_at_origin() {
        let g = build_grid(-4.0, 4.0, 80, 10, 1.0).unwrap();
        let s = Scheme::new(&model(0.2, JumpSpec::None), &g, &SolverConfig::default()).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
        let gen = s.generator_apply(&u, 1.0);
        let i0 = g.zero_index;
        // σ²(q-x)²/2 · 2 - a(q-x)·u_x - a u with u_x(0) = 0.
        assert!((gen[i0] - 0.04).abs() < 1e-12, "{}", gen[i0]);
        // σ = 0 leaves no diffusion to absorb a centred drift: upwinding kicks in
        // and the first difference of x² at 0 is ±h.
        let s0 = Scheme::new(&model(0.0, JumpSpec::None), &g, &SolverConfig::default()).unwrap();
        let gen0 = s0.generator_apply(&u, 1.0);
        assert!((gen0[i0] - 0.02 * g.h).abs() < 1e-12, "{}", gen0[i0]);
    }

    #[test]
    fn affine_row_is_exact_under_upwinding() {
        let g = build_grid(-4.0, 4.0, 80, 10, 1.0).unwrap();
        let s = Scheme::new(&model(0.2, JumpSpec::None), &g, &SolverConfig::default()).unwrap();
        let u = g.nodes();
        for q in [-1.0, 0.3, 1.0] {
            let gen = s.generator_apply(&u, q);
            for i in 1..g.nx {
                let x = g.x(i);
                assert!((gen[i] - (-0.02 * (q - x) - 0.02 * x)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn tie_breaks_toward_plus_one() {
        let g = build_grid(-4.0, 4.0, 80, 10, 1.0).unwrap();
        let s = Scheme::new(&model(0.2, JumpSpec::None), &g, &SolverConfig::default()).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
        let (q, _) = s.optimize_control(&u);
        assert_eq!(q[g.zero_index], 1.0);
    }

    #[test]
    fn affine_increasing_row_prefers_short_position() {
        let g = build_grid(-4.0, 4.0, 80, 10, 1.0).unwrap();
        let s = Scheme::new(&model(0.0, JumpSpec::None), &g, &SolverConfig::default()).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|x| 0.3 + 0.8 * x).collect();
        let (q, _) = s.optimize_control(&u);
        assert!(q[1..g.nx].iter().all(|&q| q == -1.0));
    }

    #[test]
    fn jump_integral_vanishes_at_the_control_level_and_without_jumps() {
        let g = build_grid(-4.0, 4.0, 80, 10, 1.0).unwrap();
        let t = tilt(&JumpSpec::Merton {
            lambda: 0.5,
            mu_j: 0.0,
            delta: 0.1,
        })
        .unwrap();
        let m = t.discretize(64);
        let u: Vec<f64> = g.nodes().iter().map(|x| x.max(0.0) + 0.1 * x * x).collect();
        let i = g.node_index(0.5).unwrap();
        assert_eq!(jump_integral(&u, &g, &m, 0.5, i), 0.0);
        assert_eq!(jump_integral(&u, &g, &DiscreteMeasure::default(), 1.0, i), 0.0);
    }

    #[test]
    fn cfl_guard_rejects_large_steps() {
        let g = build_grid(-4.0, 4.0, 80, 1, 1.0).unwrap();
        let m = model(
            0.2,
            JumpSpec::Tabulated {
                atoms: vec![JumpAtom { z: 0.1, weight: 2.0 }],
            },
        );
        assert!(matches!(
            Scheme::new(&m, &g, &SolverConfig::default()),
            Err(Error::Cfl { .. })
        ));
        let cfg = SolverConfig {
            cfl_guard: false,
            ..SolverConfig::default()
        };
        assert!(Scheme::new(&m, &g, &cfg).is_ok());
    }

    #[test]
    fn pure_discounting_step() {
        let g = build_grid(-4.0, 4.0, 80, 10, 1.0).unwrap();
        let s = Scheme::new(&model(0.0, JumpSpec::None), &g, &SolverConfig::default()).unwrap();
        let c = 5.0;
        let v = vec![c; g.nx + 1];
        let out = s.time_step(&v, true).unwrap();
        let expected = c / (1.0 + 0.02 * g.dt);
        // σ = 0 and constant data: interior nodes away from the boundaries
        // see only the discount.
        for i in 10..g.nx - 10 {
            assert!((out.u[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_lifts_to_the_obstacle() {
        let g = build_grid(-4.0, 4.0, 80, 10, 1.0).unwrap();
        let s = Scheme::new(&model(0.2, JumpSpec::None), &g, &SolverConfig::default()).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| x.max(0.0)).collect();
        let out = s.time_step(&v, true).unwrap();
        for i in 0..=g.nx {
            assert!(out.u[i] >= g.x(i));
        }
        assert!(out.u[g.nx] >= g.x_max);
    }
}
