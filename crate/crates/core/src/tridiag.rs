//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solves `A u = rhs` where row `i` of `A` is `lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1]`.
/// `lower[0]` and `upper[n-1]` are ignored. Rows must be weakly diagonally
/// dominant with a strictly dominant row somewhere; the schemes in this crate
/// only produce such M-matrices, so a violation signals a configuration bug.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    for i in 0..n {
        let off = if i > 0 { lower[i].abs() } else { 0.0 } + if i + 1 < n { upper[i].abs() } else { 0.0 };
        if !(diag[i] > 0.0) || diag[i] < off * (1.0 - 1e-12) {
            return Err(Error::NotDiagonallyDominant { row: i });
        }
    }

    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { upper[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        if m == 0.0 {
            return Err(Error::NotDiagonallyDominant { row: i });
        }
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_small_system() {
        // [2 -1 0; -1 2 -1; 0 -1 2] u = [1, 0, 1] => u = [1, 1, 1]
        let u = solve(&[0.0, -1.0, -1.0], &[2.0, 2.0, 2.0], &[-1.0, -1.0, 0.0], &[1.0, 0.0, 1.0]).unwrap();
        for v in u {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_dominant_rows() {
        let err = solve(&[0.0, -3.0], &[1.0, 1.0], &[0.5, 0.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotDiagonallyDominant { row: 1 }));
    }
}
