//! Browser bindings: solve and inspect value slices, cross-check a price by
//! simulation, and plot the jump measure before and after the tilt.

use passport_core::levy::{tilt, validate_model};
use passport_core::mc::{estimate_price, PolicyTable, SimSpec};
use passport_core::solver::build_grid;
use passport_core::{solve, JumpSpec, MarketModel, Solution, SolverConfig};
use wasm_bindgen::prelude::*;

type Result<T> = std::result::Result<T, passport_core::Error>;

#[wasm_bindgen]
pub struct Demo {
    model: MarketModel,
    x_min: f64,
    x_max: f64,
    solution: Option<Solution>,
}

/// Monte Carlo estimate next to the solver value at the same start.
#[wasm_bindgen]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCheck {
    pub mc_mean: f64,
    pub ci95: f64,
    pub u_pde: f64,
}

impl Demo {
    pub fn from_model(model: MarketModel) -> Result<Self> {
        validate_model(&model).into_result()?;
        Ok(Self {
            model,
            x_min: -3.0,
            x_max: 3.0,
            solution: None,
        })
    }

    pub fn model(&self) -> &MarketModel {
        &self.model
    }

    fn set_jumps(&mut self, jumps: JumpSpec) -> Result<()> {
        let model = MarketModel { jumps, ..self.model.clone() };
        validate_model(&model).into_result()?;
        self.model = model;
        self.solution = None;
        Ok(())
    }

    /// Enough steps for the explicit jump term to stay stable.
    fn time_steps(&self, requested: usize) -> Result<usize> {
        let lt = tilt(&self.model.jumps)?.lambda_tilde();
        let needed = (self.model.maturity * (lt + self.model.a) / 0.85).ceil() as usize;
        Ok(requested.max(needed).max(1))
    }

    pub fn try_solve(&mut self, nx: usize, nt: usize) -> Result<()> {
        let nt = self.time_steps(nt)?;
        let grid = build_grid(self.x_min, self.x_max, nx, nt, self.model.maturity)?;
        self.solution = Some(solve(&self.model, &grid, &SolverConfig::default())?);
        Ok(())
    }

    fn solved(&self) -> Result<&Solution> {
        self.solution
            .as_ref()
            .ok_or_else(|| passport_core::Error::InvalidArgument("call solve first".into()))
    }

    fn slice_index(&self, t: f64) -> Result<usize> {
        let g = &self.solved()?.grid;
        Ok(((t / g.dt).round().max(0.0) as usize).min(g.nt))
    }

    pub fn try_cross_check(&self, l0: f64, n_paths: usize, n_steps: usize, seed: u64) -> Result<CrossCheck> {
        let solution = self.solved()?;
        let policy = PolicyTable::from_solution(solution);
        let est = estimate_price(&self.model, &policy, &SimSpec::new(0.0, l0, n_steps), n_paths, seed)?;
        Ok(CrossCheck {
            mc_mean: est.mean,
            ci95: est.ci95,
            u_pde: solution.value_at(0.0, l0)?,
        })
    }

    /// `ν` density at each `z`, followed by `ν̃ = e^z ν`. Tabulated measures
    /// are atoms and have no density; they come back as zeros.
    pub fn densities(&self, zs: &[f64]) -> Vec<f64> {
        let nu: Vec<f64> = zs.iter().map(|&z| density(&self.model.jumps, z)).collect();
        let tilted = zs.iter().zip(&nu).map(|(z, d)| z.exp() * d);
        nu.iter().copied().chain(tilted).collect()
    }
}

fn density(jumps: &JumpSpec, z: f64) -> f64 {
    match *jumps {
        JumpSpec::Merton { lambda, mu_j, delta } => {
            let s = (z - mu_j) / delta;
            lambda * (-0.5 * s * s).exp() / (delta * (2.0 * std::f64::consts::PI).sqrt())
        }
        JumpSpec::Kou {
            lambda,
            p,
            eta1,
            eta2,
        } => {
            if z >= 0.0 {
                lambda * p * eta1 * (-eta1 * z).exp()
            } else {
                lambda * (1.0 - p) * eta2 * (eta2 * z).exp()
            }
        }
        JumpSpec::None | JumpSpec::Tabulated { .. } => 0.0,
    }
}

fn js(e: passport_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(r: f64, a: f64, sigma: f64, maturity: f64) -> std::result::Result<Demo, JsError> {
        Demo::from_model(MarketModel {
            r,
            a,
            sigma,
            jumps: JumpSpec::None,
            maturity,
        })
        .map_err(js)
    }

    pub fn set_no_jumps(&mut self) {
        self.model.jumps = JumpSpec::None;
        self.solution = None;
    }

    pub fn set_merton(&mut self, lambda: f64, mu_j: f64, delta: f64) -> std::result::Result<(), JsError> {
        self.set_jumps(JumpSpec::Merton { lambda, mu_j, delta }).map_err(js)
    }

    pub fn set_kou(&mut self, lambda: f64, p: f64, eta1: f64, eta2: f64) -> std::result::Result<(), JsError> {
        self.set_jumps(JumpSpec::Kou {
            lambda,
            p,
            eta1,
            eta2,
        })
        .map_err(js)
    }

    pub fn solve(&mut self, nx: usize, nt: usize) -> std::result::Result<(), JsError> {
        self.try_solve(nx, nt).map_err(js)
    }

    pub fn nodes(&self) -> std::result::Result<Vec<f64>, JsError> {
        Ok(self.solved().map_err(js)?.grid.nodes())
    }

    /// `u(t, ·)` on the nearest time slice.
    pub fn slice(&self, t: f64) -> std::result::Result<Vec<f64>, JsError> {
        let n = self.slice_index(t).map_err(js)?;
        Ok(self.solved().map_err(js)?.u[n].clone())
    }

    /// Optimal control on the nearest time slice.
    pub fn controls(&self, t: f64) -> std::result::Result<Vec<f64>, JsError> {
        let n = self.slice_index(t).map_err(js)?;
        Ok(self.solved().map_err(js)?.q_star[n].clone())
    }

    /// `V(0, S, X)` with unit control bound.
    pub fn price(&self, spot: f64, account: f64) -> std::result::Result<f64, JsError> {
        self.solved().map_err(js)?.price_at(0.0, spot, account).map_err(js)
    }

    pub fn cross_check(
        &self,
        l0: f64,
        n_paths: usize,
        n_steps: usize,
        seed: u64,
    ) -> std::result::Result<CrossCheck, JsError> {
        self.try_cross_check(l0, n_paths, n_steps, seed).map_err(js)
    }

    pub fn jump_densities(&self, z_min: f64, z_max: f64, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let zs: Vec<f64> = (0..n)
            .map(|k| z_min + (z_max - z_min) * k as f64 / (n - 1) as f64)
            .collect();
        self.densities(&zs)
    }

    /// `λ̃ - λ`, which must equal the compensator `∫(e^z - 1) ν(dz)`.
    pub fn tilt_gap(&self) -> std::result::Result<f64, JsError> {
        let lt = tilt(&self.model.jumps).map_err(js)?.lambda_tilde();
        Ok(lt - self.model.jumps.intensity())
    }
}
