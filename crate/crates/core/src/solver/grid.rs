use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Uniform space-time grid on `[x_min, x_max] × [0, T]`.
///
/// The builder shifts the window so that `x = 0` (the payoff kink) is a node;
/// nodes are computed as `(i - zero_index) · h`, which makes that node exactly 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub nt: usize,
    pub maturity: f64,
    pub h: f64,
    pub dt: f64,
    pub zero_index: usize,
}

pub fn build_grid(x_min: f64, x_max: f64, nx: usize, nt: usize, maturity: f64) -> Result<Grid> {
    if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
        return Err(Error::InvalidGrid(format!("inverted or non-finite bounds [{x_min}, {x_max}]")));
    }
    if !(x_min < 0.0 && x_max > 0.0) {
        return Err(Error::InvalidGrid(format!("bounds [{x_min}, {x_max}] must straddle 0")));
    }
    if nx < 2 {
        return Err(Error::InvalidGrid(format!("nx = {nx}, need at least 2 intervals")));
    }
    if nt == 0 {
        return Err(Error::InvalidGrid("nt must be positive".into()));
    }
    if !(maturity.is_finite() && maturity > 0.0) {
        return Err(Error::InvalidGrid(format!("maturity {maturity} must be positive")));
    }
    let h = (x_max - x_min) / nx as f64;
    let k = (-x_min / h).round();
    if k < 1.0 || k >= nx as f64 {
        return Err(Error::InvalidGrid("x = 0 does not fall strictly inside the grid".into()));
    }
    let zero_index = k as usize;
    Ok(Grid {
        x_min: -(zero_index as f64) * h,
        x_max: (nx - zero_index) as f64 * h,
        nx,
        nt,
        maturity,
        h,
        dt: maturity / nt as f64,
        zero_index,
    })
}

impl Grid {
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.zero_index as f64) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.nx).map(|i| self.x(i)).collect()
    }

    #[inline]
    pub fn t(&self, n: usize) -> f64 {
        if n == self.nt {
            self.maturity
        } else {
            n as f64 * self.dt
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Cell containing `x` and the fractional position inside it.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if !self.contains(x) {
            return None;
        }
        let pos = x / self.h + self.zero_index as f64;
        let lo = (pos.floor().max(0.0) as usize).min(self.nx - 1);
        Some((lo, (pos - lo as f64).clamp(0.0, 1.0)))
    }

    /// Index of the node nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let pos = (x / self.h + self.zero_index as f64).round();
        pos.clamp(0.0, self.nx as f64) as usize
    }

    /// Index of a node that sits exactly at `x`, if any.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let i = self.nearest(x);
        ((self.x(i) - x).abs() <= 1e-9 * self.h).then_some(i)
    }

    /// Same window, twice the nodes and twice the time steps.
    pub fn refined(&self) -> Grid {
        Grid {
            nx: 2 * self.nx,
            nt: 2 * self.nt,
            h: 0.5 * self.h,
            dt: 0.5 * self.dt,
            zero_index: 2 * self.zero_index,
            ..self.clone()
        }
    }

    /// Same spacing and time steps on a window `factor` times wider.
    pub fn widened(&self, factor: usize) -> Grid {
        Grid {
            nx: factor * self.nx,
            zero_index: factor * self.zero_index,
            x_min: self.x_min * factor as f64,
            x_max: self.x_max * factor as f64,
            ..self.clone()
        }
    }

    pub fn fingerprint(&self) -> String {
        let text = format!(
            "{:?}|{:?}|{}|{}|{:?}",
            self.x_min, self.x_max, self.nx, self.nt, self.maturity
        );
        short_digest(text.as_bytes())
    }
}

pub(crate) fn short_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_nodes() {
        let g = build_grid(-4.0, 4.0, 8, 10, 1.0).unwrap();
        let nodes = g.nodes();
        assert_eq!(nodes, (-4..=4).map(f64::from).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(build_grid(-4.0, 4.0, 0, 10, 1.0).is_err());
        assert!(build_grid(4.0, -4.0, 8, 10, 1.0).is_err());
        assert!(build_grid(1.0, 4.0, 8, 10, 1.0).is_err());
        assert!(build_grid(-4.0, 4.0, 8, 0, 1.0).is_err());
    }

    #[test]
    fn zero_is_snapped_onto_a_node() {
        let g = build_grid(-4.03, 4.0, 9, 10, 1.0).unwrap();
        assert_eq!(g.x(g.zero_index), 0.0);
        assert!((g.x_max - g.x_min - 9.0 * g.h).abs() < 1e-12);
        assert!((g.x_min + 4.03).abs() <= 0.5 * g.h);
    }

    #[test]
    fn locate_and_nearest() {
        let g = build_grid(-4.0, 4.0, 8, 10, 1.0).unwrap();
        assert_eq!(g.locate(0.25), Some((4, 0.25)));
        assert_eq!(g.locate(4.0), Some((7, 1.0)));
        assert_eq!(g.locate(4.5), None);
        assert_eq!(g.nearest(-9.0), 0);
        assert_eq!(g.node_index(1.0), Some(5));
        assert_eq!(g.node_index(1.5), None);
    }
}
