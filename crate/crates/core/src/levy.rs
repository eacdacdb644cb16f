//! Exponential-Lévy market model with finite-activity jumps.
//!
//! The asset follows `dS/S = (r - a) dt + σ dW + ∫(e^z - 1)(J - ν dz dt)`.
//! After the change of numéraire to the asset itself, jumps are governed by the
//! exponentially tilted measure `ν̃(dz) = e^z ν(dz)`; [`tilt`] builds it in closed
//! form for every supported family.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_integrate, GaussLegendre};

/// ln(1e14): tails are cut where a density drops below 1e-14 of its peak.
const TAIL_LOG_RATIO: f64 = 32.236_191_301_916_64;

/// A point mass of the Lévy measure: log-jump `z` with intensity `weight` per year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpAtom {
    pub z: f64,
    pub weight: f64,
}

/// Finite-activity Lévy measure of the log-price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum JumpSpec {
    None,
    /// Gaussian log-jumps `N(mu_j, delta²)` arriving at rate `lambda`.
    Merton { lambda: f64, mu_j: f64, delta: f64 },
    /// Double-exponential log-jumps: up with probability `p` and rate `eta1`,
    /// down with rate `eta2`.
    Kou {
        lambda: f64,
        p: f64,
        eta1: f64,
        eta2: f64,
    },
    Tabulated { atoms: Vec<JumpAtom> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketModel {
    pub r: f64,
    /// Dividend yield; also the discount rate of the reduced problem.
    pub a: f64,
    pub sigma: f64,
    pub jumps: JumpSpec,
    pub maturity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub condition: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.condition)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: &str, condition: &str) {
        self.violations.push(Violation {
            field: field.to_string(),
            condition: condition.to_string(),
        });
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidModel(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_model(model: &MarketModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !model.r.is_finite() {
        report.push("r", "not finite");
    }
    if !(model.a.is_finite() && model.a > 0.0) {
        report.push("a", "dividend yield must be positive");
    }
    if !model.sigma.is_finite() {
        report.push("sigma", "not finite");
    } else if model.sigma < 0.0 {
        report.push("sigma", "sigma negative");
    }
    if !(model.maturity.is_finite() && model.maturity > 0.0) {
        report.push("maturity", "maturity must be positive");
    }
    report.violations.extend(model.jumps.validate().violations);
    report
}

impl JumpSpec {
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let positive = |x: f64| x.is_finite() && x > 0.0;
        match *self {
            JumpSpec::None => {}
            JumpSpec::Merton { lambda, mu_j, delta } => {
                if !positive(lambda) {
                    report.push("jumps.lambda", "intensity must be positive");
                }
                if !mu_j.is_finite() {
                    report.push("jumps.mu_j", "not finite");
                }
                if !positive(delta) {
                    report.push("jumps.delta", "log-jump std must be positive");
                }
            }
            JumpSpec::Kou {
                lambda,
                p,
                eta1,
                eta2,
            } => {
                if !positive(lambda) {
                    report.push("jumps.lambda", "intensity must be positive");
                }
                if !(0.0..=1.0).contains(&p) {
                    report.push("jumps.p", "probability outside [0, 1]");
                }
                if !eta1.is_finite() || eta1 <= 1.0 {
                    report.push("jumps.eta1", "exponential moment divergent (eta1 must exceed 1)");
                }
                if !positive(eta2) {
                    report.push("jumps.eta2", "decay rate must be positive");
                }
            }
            JumpSpec::Tabulated { ref atoms } => {
                if atoms.is_empty() {
                    report.push("jumps.atoms", "no atoms");
                }
                for (i, atom) in atoms.iter().enumerate() {
                    if !atom.z.is_finite() {
                        report.push(&format!("jumps.atoms[{i}].z"), "not finite");
                    }
                    if !positive(atom.weight) {
                        report.push(&format!("jumps.atoms[{i}].weight"), "weight must be positive");
                    }
                }
            }
        }
        report
    }

    /// Total intensity `λ = ∫ν(dz)`.
    pub fn intensity(&self) -> f64 {
        match self {
            JumpSpec::None => 0.0,
            JumpSpec::Merton { lambda, .. } | JumpSpec::Kou { lambda, .. } => *lambda,
            JumpSpec::Tabulated { atoms } => atoms.iter().map(|a| a.weight).sum(),
        }
    }

    fn parts(&self) -> Vec<Part> {
        match *self {
            JumpSpec::None => Vec::new(),
            JumpSpec::Merton { lambda, mu_j, delta } => vec![Part::Gaussian {
                mass: lambda,
                mean: mu_j,
                std: delta,
            }],
            JumpSpec::Kou {
                lambda,
                p,
                eta1,
                eta2,
            } => kou_parts(lambda * p, eta1, lambda * (1.0 - p), eta2),
            JumpSpec::Tabulated { ref atoms } => vec![Part::Atoms(atoms.clone())],
        }
    }

    /// `∫ g(z) ν(dz)` by adaptive Gauss–Legendre on the truncated support.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        integrate_parts(&self.parts(), &g)
    }
}

/// Jump compensator `κ = ∫(e^z - 1) ν(dz)`, in closed form.
pub fn compensator(jumps: &JumpSpec) -> f64 {
    match *jumps {
        JumpSpec::None => 0.0,
        JumpSpec::Merton { lambda, mu_j, delta } => lambda * (mu_j + 0.5 * delta * delta).exp_m1(),
        JumpSpec::Kou {
            lambda,
            p,
            eta1,
            eta2,
        } => lambda * (p * eta1 / (eta1 - 1.0) + (1.0 - p) * eta2 / (eta2 + 1.0) - 1.0),
        JumpSpec::Tabulated { ref atoms } => atoms.iter().map(|a| a.weight * a.z.exp_m1()).sum(),
    }
}

/// The tilted jump measure `ν̃ = e^z ν` that drives the ratio process under the
/// asset numéraire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TiltedJumps {
    None,
    Merton {
        intensity: f64,
        mean: f64,
        std: f64,
    },
    /// Mixture of an up-exponential (weight `up_weight`, rate `up_rate`) and a
    /// down-exponential; weights are intensities per year.
    Kou {
        up_weight: f64,
        up_rate: f64,
        down_weight: f64,
        down_rate: f64,
    },
    Tabulated {
        atoms: Vec<JumpAtom>,
    },
}

pub fn tilt(jumps: &JumpSpec) -> Result<TiltedJumps> {
    jumps.validate().into_result()?;
    Ok(match *jumps {
        JumpSpec::None => TiltedJumps::None,
        JumpSpec::Merton { lambda, mu_j, delta } => TiltedJumps::Merton {
            intensity: lambda * (mu_j + 0.5 * delta * delta).exp(),
            mean: mu_j + delta * delta,
            std: delta,
        },
        JumpSpec::Kou {
            lambda,
            p,
            eta1,
            eta2,
        } => TiltedJumps::Kou {
            up_weight: lambda * p * eta1 / (eta1 - 1.0),
            up_rate: eta1 - 1.0,
            down_weight: lambda * (1.0 - p) * eta2 / (eta2 + 1.0),
            down_rate: eta2 + 1.0,
        },
        JumpSpec::Tabulated { ref atoms } => TiltedJumps::Tabulated {
            atoms: atoms
                .iter()
                .map(|a| JumpAtom {
                    z: a.z,
                    weight: a.weight * a.z.exp(),
                })
                .collect(),
        },
    })
}

impl TiltedJumps {
    /// Total intensity `λ̃ = ∫ e^z ν(dz)`.
    pub fn lambda_tilde(&self) -> f64 {
        match self {
            TiltedJumps::None => 0.0,
            TiltedJumps::Merton { intensity, .. } => *intensity,
            TiltedJumps::Kou {
                up_weight,
                down_weight,
                ..
            } => up_weight + down_weight,
            TiltedJumps::Tabulated { atoms } => atoms.iter().map(|a| a.weight).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lambda_tilde() <= 0.0
    }

    fn parts(&self) -> Vec<Part> {
        match *self {
            TiltedJumps::None => Vec::new(),
            TiltedJumps::Merton {
                intensity,
                mean,
                std,
            } => vec![Part::Gaussian {
                mass: intensity,
                mean,
                std,
            }],
            TiltedJumps::Kou {
                up_weight,
                up_rate,
                down_weight,
                down_rate,
            } => kou_parts(up_weight, up_rate, down_weight, down_rate),
            TiltedJumps::Tabulated { ref atoms } => vec![Part::Atoms(atoms.clone())],
        }
    }

    /// `∫ g(z) ν̃(dz)` by adaptive Gauss–Legendre on the truncated support.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        integrate_parts(&self.parts(), &g)
    }

    /// Fixed-node discretization used by the PIDE solver: `nodes` Gauss–Legendre
    /// points spread over the continuous parts, atoms passed through unchanged.
    pub fn discretize(&self, nodes: usize) -> DiscreteMeasure {
        let parts = self.parts();
        let continuous = parts
            .iter()
            .filter(|p| !matches!(p, Part::Atoms(_)))
            .count()
            .max(1);
        let per_part = (nodes / continuous).max(1);
        let rule = GaussLegendre::new(per_part);
        let mut out = Vec::new();
        for part in &parts {
            match part {
                Part::Atoms(atoms) => out.extend(atoms.iter().map(|a| (a.z, a.weight))),
                _ => {
                    let (lo, hi) = part.support(false);
                    out.extend(rule.mapped(lo, hi).map(|(z, w)| (z, w * part.density(z))));
                }
            }
        }
        DiscreteMeasure { nodes: out }
    }
}

/// Draws a log-jump size from the normalized tilted measure.
pub fn sample_jump<R: Rng + ?Sized>(tilted: &TiltedJumps, rng: &mut R) -> Result<f64> {
    match tilted {
        TiltedJumps::None => Err(Error::EmptyJumps),
        TiltedJumps::Merton { mean, std, .. } => {
            let n: f64 = StandardNormal.sample(rng);
            Ok(mean + std * n)
        }
        TiltedJumps::Kou {
            up_weight,
            up_rate,
            down_weight,
            down_rate,
        } => {
            let total = up_weight + down_weight;
            if total <= 0.0 {
                return Err(Error::EmptyJumps);
            }
            let u: f64 = rng.gen();
            let e: f64 = Exp1.sample(rng);
            if u * total < *up_weight {
                Ok(e / up_rate)
            } else {
                Ok(-e / down_rate)
            }
        }
        TiltedJumps::Tabulated { atoms } => {
            let total: f64 = atoms.iter().map(|a| a.weight).sum();
            if atoms.is_empty() || total <= 0.0 {
                return Err(Error::EmptyJumps);
            }
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            for atom in atoms {
                acc += atom.weight;
                if target < acc {
                    return Ok(atom.z);
                }
            }
            Ok(atoms[atoms.len() - 1].z)
        }
    }
}

/// Weighted point set `(z_k, w_k)` approximating a jump measure.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiscreteMeasure {
    pub nodes: Vec<(f64, f64)>,
}

impl DiscreteMeasure {
    pub fn total_mass(&self) -> f64 {
        self.nodes.iter().map(|&(_, w)| w).sum()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes.iter().map(|&(z, w)| w * g(z)).sum()
    }
}

/// Folds atoms with `|z| < eps` into extra diffusion variance `Σ w z²`.
/// Only tabulated measures carry separable small atoms; other families are
/// returned unchanged.
pub fn fold_small_jumps(model: &MarketModel, eps: f64) -> MarketModel {
    let mut out = model.clone();
    if let JumpSpec::Tabulated { atoms } = &model.jumps {
        let (small, large): (Vec<JumpAtom>, Vec<JumpAtom>) =
            atoms.iter().partition(|a| a.z.abs() < eps);
        let extra: f64 = small.iter().map(|a| a.weight * a.z * a.z).sum();
        out.sigma = (model.sigma * model.sigma + extra).sqrt();
        out.jumps = if large.is_empty() {
            JumpSpec::None
        } else {
            JumpSpec::Tabulated { atoms: large }
        };
    }
    out
}

#[derive(Debug, Clone)]
enum Part {
    Gaussian { mass: f64, mean: f64, std: f64 },
    /// `mass · rate · e^{-rate z}` on `z > 0`.
    ExpUp { mass: f64, rate: f64 },
    /// `mass · rate · e^{rate z}` on `z < 0`.
    ExpDown { mass: f64, rate: f64 },
    Atoms(Vec<JumpAtom>),
}

fn kou_parts(up_mass: f64, up_rate: f64, down_mass: f64, down_rate: f64) -> Vec<Part> {
    let mut parts = Vec::new();
    if up_mass > 0.0 {
        parts.push(Part::ExpUp {
            mass: up_mass,
            rate: up_rate,
        });
    }
    if down_mass > 0.0 {
        parts.push(Part::ExpDown {
            mass: down_mass,
            rate: down_rate,
        });
    }
    parts
}

impl Part {
    fn density(&self, z: f64) -> f64 {
        match *self {
            Part::Gaussian { mass, mean, std } => {
                let d = (z - mean) / std;
                mass * (-0.5 * d * d).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
            }
            Part::ExpUp { mass, rate } if z >= 0.0 => mass * rate * (-rate * z).exp(),
            Part::ExpDown { mass, rate } if z <= 0.0 => mass * rate * (rate * z).exp(),
            _ => 0.0,
        }
    }

    /// Truncated support. With `growth` the cut accounts for an `e^{|z|}`
    /// envelope on the integrand.
    fn support(&self, growth: bool) -> (f64, f64) {
        match *self {
            Part::Gaussian { mean, std, .. } => {
                let w = (2.0 * TAIL_LOG_RATIO).sqrt() * std;
                if growth {
                    (mean - w - 1.0 - std * std, mean + w + 1.0 + std * std)
                } else {
                    (mean - w, mean + w)
                }
            }
            Part::ExpUp { rate, .. } => {
                let eff = if growth && rate > 1.0 { rate - 1.0 } else { rate };
                (0.0, TAIL_LOG_RATIO / eff)
            }
            Part::ExpDown { rate, .. } => (-TAIL_LOG_RATIO / rate, 0.0),
            Part::Atoms(_) => (0.0, 0.0),
        }
    }
}

fn integrate_parts<F: Fn(f64) -> f64>(parts: &[Part], g: &F) -> f64 {
    let mut total = 0.0;
    for part in parts {
        match part {
            Part::Atoms(atoms) => total += atoms.iter().map(|a| a.weight * g(a.z)).sum::<f64>(),
            _ => {
                let (lo, hi) = part.support(true);
                let scale = match *part {
                    Part::Gaussian { mass, .. }
                    | Part::ExpUp { mass, .. }
                    | Part::ExpDown { mass, .. } => mass,
                    Part::Atoms(_) => 1.0,
                };
                total += adaptive_integrate(|z| g(z) * part.density(z), lo, hi, 1e-14 * scale.max(1e-300));
            }
        }
    }
    total
}
