//! Change of numéraire to the asset: the option price factors as
//! `V(t, S, X) = S · u(t, X/S)`, and the ratio `L = X/S` follows
//!
//! `dL = (q - L)(-a dt + σ dW^Q + ∫(1 - e^{-z})(J - ν̃ dz dt))`
//!
//! under the asset measure `Q`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{MarketModel, TiltedJumps};

/// Which drift coefficient multiplies `(q - x)` in the ratio dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftVariant {
    /// `-a (q - x)`, as derived from Itô's formula under `Q`.
    #[default]
    WithA,
    /// `-(q - x)`, the operator exactly as printed without the rate factor.
    PaperLiteral,
}

impl DriftVariant {
    pub fn rate(self, a: f64) -> f64 {
        match self {
            DriftVariant::WithA => a,
            DriftVariant::PaperLiteral => 1.0,
        }
    }
}

/// Displacement of `L` when the log-price jumps by `z` while holding `q`.
#[inline]
pub fn zeta(q: f64, x: f64, z: f64) -> f64 {
    (q - x) * -(-z).exp_m1()
}

/// Coefficients of the ratio SDE under `Q`.
#[derive(Debug, Clone)]
pub struct ReducedDynamics {
    pub a: f64,
    pub sigma: f64,
    pub drift_variant: DriftVariant,
    pub tilted: TiltedJumps,
    /// `∫(1 - e^{-z}) ν̃(dz)`, equal to the compensator `∫(e^z - 1) ν(dz)`.
    pub kappa: f64,
}

impl ReducedDynamics {
    pub fn new(model: &MarketModel, drift_variant: DriftVariant) -> Result<Self> {
        let tilted = crate::levy::tilt(&model.jumps)?;
        Ok(Self {
            a: model.a,
            sigma: model.sigma,
            drift_variant,
            kappa: crate::levy::compensator(&model.jumps),
            tilted,
        })
    }

    pub fn drift(&self, q: f64, l: f64) -> f64 {
        -self.drift_variant.rate(self.a) * (q - l)
    }

    pub fn diffusion(&self, q: f64, l: f64) -> f64 {
        self.sigma * (q - l)
    }

    pub fn jump_target(&self, q: f64, l: f64, z: f64) -> f64 {
        l + zeta(q, l, z)
    }
}

/// Bound `C` on the absolute position `|q_t| ≤ C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlBound(f64);

impl ControlBound {
    pub fn new(c: f64) -> Result<Self> {
        if c.is_finite() && c > 0.0 {
            Ok(Self(c))
        } else {
            Err(Error::InvalidArgument(format!("control bound must be positive, got {c}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for ControlBound {
    fn default() -> Self {
        Self(1.0)
    }
}

/// Spot at which the unit-bound problem reproduces the bound-`C` price:
/// `V_C(t, S, X) = V_1(t, C·S, X)`.
pub fn normalize_constraint(bound: ControlBound, spot: f64) -> Result<f64> {
    check_spot(spot)?;
    Ok(bound.value() * spot)
}

/// `V = S · u`.
pub fn reassemble(spot: f64, u_value: f64) -> Result<f64> {
    check_spot(spot)?;
    Ok(spot * u_value)
}

fn check_spot(spot: f64) -> Result<()> {
    if spot.is_finite() && spot > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("spot must be positive, got {spot}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zeta_examples() {
        assert_eq!(zeta(0.3, -1.2, 0.0), 0.0);
        assert_eq!(zeta(0.7, 0.7, 1.3), 0.0);
        assert!((zeta(1.0, 0.0, 2f64.ln()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn normalize_and_reassemble() {
        assert_eq!(normalize_constraint(ControlBound::new(1.0).unwrap(), 100.0).unwrap(), 100.0);
        assert_eq!(normalize_constraint(ControlBound::new(2.0).unwrap(), 100.0).unwrap(), 200.0);
        assert!(ControlBound::new(0.0).is_err());
        assert!(ControlBound::new(-1.0).is_err());
        assert_eq!(reassemble(100.0, 0.1).unwrap(), 10.0);
        assert_eq!(reassemble(1.0, 0.37).unwrap(), 0.37);
        assert!(reassemble(0.0, 0.1).is_err());
        assert!(reassemble(-5.0, 0.1).is_err());
    }

    #[test]
    fn terminal_reassembly_is_account_positive_part() {
        for (s, x) in [(100.0, 30.0), (50.0, -20.0), (2.0, 0.0)] {
            let u = f64::max(x / s, 0.0);
            let v = reassemble(s, u).unwrap();
            assert!((v - f64::max(x, 0.0)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn jump_map_is_affine_in_x(q in -1.0f64..1.0, z in -2.0f64..2.0, x1 in -5.0f64..5.0, x2 in -5.0f64..5.0) {
            let slope = (-z).exp();
            let y1 = x1 + zeta(q, x1, z);
            let y2 = x2 + zeta(q, x2, z);
            // x + ζ = q + (x - q) e^{-z}
            prop_assert!((y1 - (q + (x1 - q) * slope)).abs() <= 1e-12 * (1.0 + y1.abs()));
            prop_assert!(((y1 - y2) - slope * (x1 - x2)).abs() <= 1e-11 * (1.0 + (x1 - x2).abs() * slope));
        }

        #[test]
        fn zeta_is_affine_in_q(q in -1.0f64..1.0, x in -5.0f64..5.0, z in -2.0f64..2.0) {
            let slope = -(-z).exp_m1();
            prop_assert!((zeta(q, x, z) - zeta(0.0, x, z) - slope * q).abs() <= 1e-13 * (1.0 + x.abs()) * (1.0 + slope.abs()));
        }
    }
}
