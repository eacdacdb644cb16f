//! Pricing engine for American passport options under exponential-Lévy
//! dynamics.
//!
//! The two-dimensional price `V(t, S, X)` is reduced to `S · u(t, X/S)`, and
//! `u` solves an HJB variational inequality in the single state `x = X/S`.
//! [`solver`] integrates it backward with a monotone finite-difference scheme
//! and policy iteration; [`mc`] values the same controlled, stopped process by
//! simulation as an independent check; [`analysis`] turns the qualitative
//! properties of the value function (comparison, convexity, regularity,
//! convergence) into executable reports.

pub mod analysis;
pub mod error;
pub mod levy;
pub mod mc;
pub mod quadrature;
pub mod reduction;
pub mod solver;
pub mod tridiag;

pub use error::{Error, Result};
pub use levy::{JumpAtom, JumpSpec, MarketModel, TiltedJumps};
pub use solver::{build_grid, solve, solve_european, Grid, Solution, SolverConfig};

pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

pub(crate) fn par_join<A, B, FA, FB>(fa: FA, fb: FB) -> (A, B)
where
    A: Send,
    B: Send,
    FA: FnOnce() -> A + Send,
    FB: FnOnce() -> B + Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::join(fa, fb)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (fa(), fb())
    }
}
