use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduction::DriftVariant;

/// Scheme parameters. Boundary handling is fixed: `u = 0` at `x_min` and
/// `∂ₓu = 1` at `x_max`; the obstacle is enforced by projection after each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub q_candidates: Vec<f64>,
    pub policy_max_iters: usize,
    pub policy_tol: f64,
    pub jump_quadrature_nodes: usize,
    pub drift_variant: DriftVariant,
    pub cfl_guard: bool,
    /// Nodes with `u - x <= exercise_tol` are flagged as exercise.
    pub exercise_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            q_candidates: vec![-1.0, 1.0],
            policy_max_iters: 20,
            policy_tol: 1e-9,
            jump_quadrature_nodes: 128,
            drift_variant: DriftVariant::WithA,
            cfl_guard: true,
            exercise_tol: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q_candidates.is_empty() {
            return Err(Error::InvalidConfig("q_candidates is empty".into()));
        }
        if let Some(q) = self.q_candidates.iter().find(|q| !(q.is_finite() && q.abs() <= 1.0)) {
            return Err(Error::InvalidConfig(format!("control candidate {q} outside [-1, 1]")));
        }
        if self.jump_quadrature_nodes < 8 {
            return Err(Error::InvalidConfig(format!(
                "jump_quadrature_nodes = {} < 8",
                self.jump_quadrature_nodes
            )));
        }
        if self.policy_max_iters == 0 {
            return Err(Error::InvalidConfig("policy_max_iters must be positive".into()));
        }
        if !(self.policy_tol.is_finite() && self.policy_tol > 0.0) {
            return Err(Error::InvalidConfig("policy_tol must be positive".into()));
        }
        if !(self.exercise_tol.is_finite() && self.exercise_tol >= 0.0) {
            return Err(Error::InvalidConfig("exercise_tol must be non-negative".into()));
        }
        Ok(())
    }

    /// Evenly spaced candidates on `[-1, 1]` (`n >= 2`), for bang-bang checks.
    pub fn uniform_candidates(n: usize) -> Vec<f64> {
        (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range_controls_and_coarse_quadrature() {
        let c = SolverConfig {
            q_candidates: vec![-1.5, 1.0],
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
        let mut c = SolverConfig::default();
        c.q_candidates.clear();
        assert!(c.validate().is_err());
        let c = SolverConfig {
            jump_quadrature_nodes: 4,
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn uniform_candidates_include_the_extremes() {
        let q = SolverConfig::uniform_candidates(21);
        assert_eq!(q.len(), 21);
        assert_eq!(q[0], -1.0);
        assert_eq!(q[20], 1.0);
        assert_eq!(q[10], 0.0);
    }
}
