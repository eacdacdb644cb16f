//! Run configuration: a TOML file with `model`, `grid`, `solver`, `mc` and
//! `query` tables. Unknown keys anywhere are rejected.

use passport_core::levy::validate_model;
use passport_core::reduction::{ControlBound, DriftVariant};
use passport_core::solver::{build_grid, Scheme};
use passport_core::{Grid, JumpAtom, JumpSpec, MarketModel, SolverConfig};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelBlock,
    pub grid: GridBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub mc: McBlock,
    #[serde(default)]
    pub query: QueryBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub r: f64,
    pub a: f64,
    pub sigma: f64,
    #[serde(rename = "T", alias = "maturity")]
    pub maturity: f64,
    #[serde(default)]
    pub jumps: JumpsBlock,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpsBlock {
    #[default]
    None,
    Merton {
        lambda: f64,
        #[serde(alias = "muJ")]
        mu_j: f64,
        delta: f64,
    },
    Kou {
        lambda: f64,
        p: f64,
        eta1: f64,
        eta2: f64,
    },
    Tabulated {
        atoms: Vec<AtomBlock>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomBlock {
    pub z: f64,
    #[serde(alias = "w")]
    pub weight: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub x_min: f64,
    pub x_max: f64,
    #[serde(alias = "Nx")]
    pub nx: usize,
    #[serde(alias = "Nt")]
    pub nt: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub q_candidates: Option<Vec<f64>>,
    pub policy_max_iters: Option<usize>,
    pub policy_tol: Option<f64>,
    pub jump_quadrature_nodes: Option<usize>,
    pub drift_variant: Option<DriftVariant>,
    pub cfl_guard: Option<bool>,
    pub exercise_tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Starting ratios for the solver/MC cross-check in `verify`.
    #[serde(default = "default_l0")]
    pub l0: Vec<f64>,
}

fn default_paths() -> usize {
    100_000
}

fn default_steps() -> usize {
    250
}

fn default_l0() -> Vec<f64> {
    vec![-0.5, 0.0, 0.5]
}

impl Default for McBlock {
    fn default() -> Self {
        Self {
            n_paths: default_paths(),
            n_steps: default_steps(),
            seed: 0,
            l0: default_l0(),
        }
    }
}

/// Either one `(spot, account)` pair or a list of ratios `X/S` (priced with
/// `S = 1`), all at time `t`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryBlock {
    #[serde(default)]
    pub t: f64,
    #[serde(alias = "S")]
    pub spot: Option<f64>,
    #[serde(alias = "X")]
    pub account: Option<f64>,
    #[serde(alias = "x")]
    pub ratios: Option<Vec<f64>>,
    #[serde(default = "default_bound")]
    pub control_bound: f64,
}

fn default_bound() -> f64 {
    1.0
}

impl Default for QueryBlock {
    fn default() -> Self {
        Self {
            t: 0.0,
            spot: None,
            account: None,
            ratios: None,
            control_bound: default_bound(),
        }
    }
}

/// A priced point: `V(t, S, X)` with the unit-bound ratio it maps to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryPoint {
    pub t: f64,
    pub spot: f64,
    pub account: f64,
}

/// Validated inputs ready for the core library.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub model: MarketModel,
    pub grid: Grid,
    pub solver: SolverConfig,
    pub mc: McBlock,
    pub bound: ControlBound,
    pub points: Vec<QueryPoint>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn prepare(&self) -> Result<Prepared, CliError> {
        let jumps = match &self.model.jumps {
            JumpsBlock::None => JumpSpec::None,
            JumpsBlock::Merton { lambda, mu_j, delta } => JumpSpec::Merton {
                lambda: *lambda,
                mu_j: *mu_j,
                delta: *delta,
            },
            JumpsBlock::Kou { lambda, p, eta1, eta2 } => JumpSpec::Kou {
                lambda: *lambda,
                p: *p,
                eta1: *eta1,
                eta2: *eta2,
            },
            JumpsBlock::Tabulated { atoms } => JumpSpec::Tabulated {
                atoms: atoms
                    .iter()
                    .map(|a| JumpAtom {
                        z: a.z,
                        weight: a.weight,
                    })
                    .collect(),
            },
        };
        let model = MarketModel {
            r: self.model.r,
            a: self.model.a,
            sigma: self.model.sigma,
            jumps,
            maturity: self.model.maturity,
        };
        validate_model(&model)
            .into_result()
            .map_err(|e| CliError::Config(e.to_string()))?;

        let grid = build_grid(self.grid.x_min, self.grid.x_max, self.grid.nx, self.grid.nt, model.maturity)
            .map_err(|e| CliError::Config(e.to_string()))?;

        let d = SolverConfig::default();
        let s = &self.solver;
        let solver = SolverConfig {
            q_candidates: s.q_candidates.clone().unwrap_or(d.q_candidates),
            policy_max_iters: s.policy_max_iters.unwrap_or(d.policy_max_iters),
            policy_tol: s.policy_tol.unwrap_or(d.policy_tol),
            jump_quadrature_nodes: s.jump_quadrature_nodes.unwrap_or(d.jump_quadrature_nodes),
            drift_variant: s.drift_variant.unwrap_or(d.drift_variant),
            cfl_guard: s.cfl_guard.unwrap_or(d.cfl_guard),
            exercise_tol: s.exercise_tol.unwrap_or(d.exercise_tol),
        };
        // Builds the operator once so that step-size and quadrature problems
        // surface as configuration errors.
        Scheme::new(&model, &grid, &solver).map_err(|e| CliError::Config(e.to_string()))?;

        if self.mc.n_paths < passport_core::mc::MIN_PATHS {
            return Err(CliError::Config(format!(
                "mc.n_paths must be at least {}",
                passport_core::mc::MIN_PATHS
            )));
        }
        if self.mc.n_steps == 0 {
            return Err(CliError::Config("mc.n_steps must be positive".into()));
        }
        if let Some(l) = self.mc.l0.iter().find(|l| !grid.contains(**l)) {
            return Err(CliError::Config(format!("mc.l0 entry {l} outside the grid")));
        }

        let q = &self.query;
        let bound = ControlBound::new(q.control_bound).map_err(|e| CliError::Config(e.to_string()))?;
        if !(q.t.is_finite() && (0.0..=model.maturity).contains(&q.t)) {
            return Err(CliError::Config(format!("query.t = {} outside [0, T]", q.t)));
        }
        let points = match (q.spot, q.account, &q.ratios) {
            (Some(spot), Some(account), None) => vec![QueryPoint { t: q.t, spot, account }],
            (None, None, Some(ratios)) => ratios
                .iter()
                .map(|&x| QueryPoint {
                    t: q.t,
                    spot: 1.0,
                    account: x,
                })
                .collect(),
            (None, None, None) => vec![QueryPoint {
                t: q.t,
                spot: 1.0,
                account: 0.0,
            }],
            _ => {
                return Err(CliError::Config(
                    "query takes either spot and account together, or ratios".into(),
                ))
            }
        };
        for p in &points {
            if !(p.spot.is_finite() && p.spot > 0.0) {
                return Err(CliError::Config(format!("query spot {} must be positive", p.spot)));
            }
            let x = p.account / (p.spot * bound.value());
            if !grid.contains(x) {
                return Err(CliError::Config(format!(
                    "query ratio X/(C·S) = {x} outside [{}, {}]",
                    grid.x_min, grid.x_max
                )));
            }
        }

        Ok(Prepared {
            model,
            grid,
            solver,
            mc: self.mc.clone(),
            bound,
            points,
        })
    }
}
