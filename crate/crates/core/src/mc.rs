//! Monte Carlo valuation of the controlled, stopped ratio process under `Q`.
//!
//! Within a time step the control is frozen, and `Y = L - q` is then a
//! geometric Lévy process: `dY = Y⁻(c dt - σ dW + ∫(e^{-z} - 1) J̃)` with
//! `c = rate + κ`. Each step is sampled exactly, as a lognormal factor times
//! `e^{-Σz}` over a Poisson(λ̃Δ) number of tilted jumps. The only
//! discretization left is the step-wise refresh of the control and the
//! discrete set of stopping dates.
//!
//! Paths are independent. Path `k` draws from a ChaCha8 stream selected by
//! `k` under the root seed, so results do not depend on the thread count, and
//! the batch is reduced in path order with compensated summation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{sample_jump, validate_model, MarketModel};
use crate::reduction::{DriftVariant, ReducedDynamics};
use crate::solver::{Grid, Solution};

pub const MIN_PATHS: usize = 100;

/// How the position `q` is chosen along a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlRule {
    Fixed(f64),
    /// `q = -1` when `L ≥ 0`, `+1` otherwise: short the asset once the
    /// account is in the money, long while it is out.
    SignSwitch,
    /// Nearest-node lookup in a solved `q*` surface.
    Table,
}

/// When a path is stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingRule {
    AtMaturity,
    /// Stop at the first date, i.e. exercise at `t0`.
    Immediately,
    /// First entry into a solved exercise region, or maturity.
    Table,
}

#[derive(Debug, Clone)]
struct Surfaces {
    grid: Grid,
    q_star: Vec<Vec<f64>>,
    exercise: Vec<Vec<bool>>,
}

/// Admissible (control, stopping) pair that a path follows.
#[derive(Debug, Clone)]
pub struct PolicyTable {
    control: ControlRule,
    stopping: StoppingRule,
    surfaces: Option<Surfaces>,
}

impl PolicyTable {
    pub fn fixed(q: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::InvalidArgument(format!("fixed control {q} is not finite")));
        }
        Ok(Self {
            control: ControlRule::Fixed(q),
            stopping: StoppingRule::AtMaturity,
            surfaces: None,
        })
    }

    pub fn sign_switch() -> Self {
        Self {
            control: ControlRule::SignSwitch,
            stopping: StoppingRule::AtMaturity,
            surfaces: None,
        }
    }

    /// Plays back the solver's control and exercise region.
    pub fn from_solution(solution: &Solution) -> Self {
        Self {
            control: ControlRule::Table,
            stopping: StoppingRule::Table,
            surfaces: Some(Surfaces {
                grid: solution.grid.clone(),
                q_star: solution.q_star.clone(),
                exercise: solution.exercise.clone(),
            }),
        }
    }

    /// Replaces the stopping rule. `Table` needs surfaces from a solution.
    pub fn with_stopping(mut self, stopping: StoppingRule) -> Result<Self> {
        if stopping == StoppingRule::Table && self.surfaces.is_none() {
            return Err(Error::InvalidArgument(
                "table stopping needs a solved exercise surface".into(),
            ));
        }
        self.stopping = stopping;
        Ok(self)
    }

    pub fn control_rule(&self) -> ControlRule {
        self.control
    }

    pub fn stopping_rule(&self) -> StoppingRule {
        self.stopping
    }

    fn cell(&self, t: f64, l: f64) -> Option<(&Surfaces, usize, usize)> {
        let s = self.surfaces.as_ref()?;
        let n = ((t / s.grid.dt).round().max(0.0) as usize).min(s.grid.nt);
        Some((s, n, s.grid.nearest(l)))
    }

    pub fn control(&self, t: f64, l: f64) -> f64 {
        match self.control {
            ControlRule::Fixed(q) => q,
            ControlRule::SignSwitch => {
                if l >= 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
            ControlRule::Table => {
                let (s, n, i) = self.cell(t, l).expect("table control without surfaces");
                s.q_star[n][i]
            }
        }
    }

    /// Whether a path at `(t, l)` stops before maturity.
    pub fn stops(&self, t: f64, l: f64) -> bool {
        match self.stopping {
            StoppingRule::AtMaturity => false,
            StoppingRule::Immediately => true,
            StoppingRule::Table => {
                let (s, n, i) = self.cell(t, l).expect("table stopping without surfaces");
                s.exercise[n][i]
            }
        }
    }
}

/// Simulated trajectory of `L` on the step dates.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Control held over `[times[k], times[k+1])`.
    pub controls: Vec<f64>,
}

/// Per-path discounted payoffs `e^{-a(τ-t0)} L_τ⁺` and stopping times.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    pub n_paths: usize,
    pub payoffs: Vec<f64>,
    pub taus: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci95: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Exercise dates whose regression was rank deficient; a constant
    /// continuation estimate was used there.
    pub degenerate_dates: usize,
}

/// Simulation settings shared by the estimators.
#[derive(Debug, Clone, Copy)]
pub struct SimSpec {
    pub t0: f64,
    pub l0: f64,
    pub n_steps: usize,
    pub drift_variant: DriftVariant,
}

impl SimSpec {
    pub fn new(t0: f64, l0: f64, n_steps: usize) -> Self {
        Self {
            t0,
            l0,
            n_steps,
            drift_variant: DriftVariant::default(),
        }
    }
}

/// Path-level sampler with the step constants precomputed.
struct Stepper {
    dt: f64,
    drift_log: f64,
    vol: f64,
    poisson: Option<Poisson<f64>>,
    dynamics: ReducedDynamics,
    discount: f64,
}

impl Stepper {
    fn new(model: &MarketModel, spec: &SimSpec) -> Result<Self> {
        check_model(model)?;
        if spec.n_steps == 0 {
            return Err(Error::InvalidArgument("n_steps must be positive".into()));
        }
        if !(spec.t0.is_finite() && spec.t0 >= 0.0 && spec.t0 < model.maturity) {
            return Err(Error::OutOfDomain(format!(
                "t0 = {} outside [0, {})",
                spec.t0, model.maturity
            )));
        }
        if !spec.l0.is_finite() {
            return Err(Error::InvalidArgument(format!("l0 = {} is not finite", spec.l0)));
        }
        let dynamics = ReducedDynamics::new(model, spec.drift_variant)?;
        let dt = (model.maturity - spec.t0) / spec.n_steps as f64;
        let rate = spec.drift_variant.rate(model.a) + dynamics.kappa;
        let intensity = dynamics.tilted.lambda_tilde() * dt;
        let poisson = if intensity > 0.0 {
            Some(Poisson::new(intensity).map_err(|e| Error::InvalidArgument(e.to_string()))?)
        } else {
            None
        };
        Ok(Self {
            dt,
            drift_log: (rate - 0.5 * model.sigma * model.sigma) * dt,
            vol: model.sigma * dt.sqrt(),
            poisson,
            dynamics,
            discount: model.a,
        })
    }

    fn step<R: Rng>(&self, l: f64, q: f64, rng: &mut R) -> Result<f64> {
        let w: f64 = StandardNormal.sample(rng);
        let mut log_factor = self.drift_log - self.vol * w;
        if let Some(p) = &self.poisson {
            let count = p.sample(rng) as u64;
            for _ in 0..count {
                log_factor -= sample_jump(&self.dynamics.tilted, rng)?;
            }
        }
        Ok(q + (l - q) * log_factor.exp())
    }
}

/// The simulator accepts `a = 0`, which the solver does not; it keeps
/// martingale diagnostics possible.
fn check_model(model: &MarketModel) -> Result<()> {
    let mut report = validate_model(model);
    if model.a == 0.0 {
        report.violations.retain(|v| v.field != "a");
    }
    report.into_result()
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Full trajectory from `(t0, l0)` to maturity, ignoring the stopping rule.
pub fn simulate_path<R: Rng>(
    model: &MarketModel,
    policy: &PolicyTable,
    spec: &SimSpec,
    rng: &mut R,
) -> Result<Path> {
    let stepper = Stepper::new(model, spec)?;
    let mut times = Vec::with_capacity(spec.n_steps + 1);
    let mut values = Vec::with_capacity(spec.n_steps + 1);
    let mut controls = Vec::with_capacity(spec.n_steps);
    let mut l = spec.l0;
    times.push(spec.t0);
    values.push(l);
    for k in 0..spec.n_steps {
        let t = spec.t0 + k as f64 * stepper.dt;
        let q = policy.control(t, l);
        l = stepper.step(l, q, rng)?;
        controls.push(q);
        times.push(if k + 1 == spec.n_steps {
            model.maturity
        } else {
            t + stepper.dt
        });
        values.push(l);
    }
    Ok(Path {
        times,
        values,
        controls,
    })
}

/// Path `index` of the batch with root `seed`.
pub fn simulate_indexed_path(
    model: &MarketModel,
    policy: &PolicyTable,
    spec: &SimSpec,
    seed: u64,
    index: usize,
) -> Result<Path> {
    simulate_path(model, policy, spec, &mut path_rng(seed, index))
}

fn stopped_path(
    stepper: &Stepper,
    policy: &PolicyTable,
    spec: &SimSpec,
    maturity: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let mut l = spec.l0;
    for k in 0..spec.n_steps {
        let t = spec.t0 + k as f64 * stepper.dt;
        if policy.stops(t, l) {
            return Ok(((-stepper.discount * (t - spec.t0)).exp() * l.max(0.0), t));
        }
        l = stepper.step(l, policy.control(t, l), rng)?;
    }
    let payoff = (-stepper.discount * (maturity - spec.t0)).exp() * l.max(0.0);
    Ok((payoff, maturity))
}

pub fn simulate_batch(
    model: &MarketModel,
    policy: &PolicyTable,
    spec: &SimSpec,
    n_paths: usize,
    seed: u64,
) -> Result<PathBatch> {
    if n_paths < MIN_PATHS {
        return Err(Error::InvalidArgument(format!(
            "n_paths must be at least {MIN_PATHS}, got {n_paths}"
        )));
    }
    let stepper = Stepper::new(model, spec)?;
    let results = crate::par_map(n_paths, |k| {
        stopped_path(&stepper, policy, spec, model.maturity, &mut path_rng(seed, k))
    });
    let mut payoffs = Vec::with_capacity(n_paths);
    let mut taus = Vec::with_capacity(n_paths);
    for r in results {
        let (p, tau) = r?;
        payoffs.push(p);
        taus.push(tau);
    }
    Ok(PathBatch {
        n_paths,
        payoffs,
        taus,
        seed,
    })
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Sample mean and standard error of the mean.
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(xs.iter().copied()) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}

impl PathBatch {
    pub fn summary(&self, n_steps: usize) -> McEstimate {
        let (mean, std_error) = mean_and_std_error(&self.payoffs);
        McEstimate {
            mean,
            std_error,
            ci95: 1.96 * std_error,
            n_paths: self.n_paths,
            n_steps,
            seed: self.seed,
        }
    }
}

/// Mean discounted stopped payoff under `policy`. For any admissible policy
/// this is a lower bound for `u(t0, l0)` up to discretization bias.
pub fn estimate_price(
    model: &MarketModel,
    policy: &PolicyTable,
    spec: &SimSpec,
    n_paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    Ok(simulate_batch(model, policy, spec, n_paths, seed)?.summary(spec.n_steps))
}

/// Regression-based stopping (least squares on a polynomial basis in `L`),
/// with the control taken from `policy`. Every step date after `t0` is an
/// exercise date; at `t0` the estimate is `max(l0⁺, continuation)`.
pub fn ls_stop_estimate(
    model: &MarketModel,
    policy: &PolicyTable,
    spec: &SimSpec,
    n_paths: usize,
    basis_degree: usize,
    seed: u64,
) -> Result<LsEstimate> {
    if !(2..=6).contains(&basis_degree) {
        return Err(Error::InvalidArgument(format!(
            "basis_degree must be in [2, 6], got {basis_degree}"
        )));
    }
    if n_paths < MIN_PATHS {
        return Err(Error::InvalidArgument(format!(
            "n_paths must be at least {MIN_PATHS}, got {n_paths}"
        )));
    }
    let stepper = Stepper::new(model, spec)?;
    let paths = crate::par_map(n_paths, |k| -> Result<Vec<f64>> {
        let mut rng = path_rng(seed, k);
        let mut l = spec.l0;
        let mut out = Vec::with_capacity(spec.n_steps + 1);
        out.push(l);
        for j in 0..spec.n_steps {
            let t = spec.t0 + j as f64 * stepper.dt;
            l = stepper.step(l, policy.control(t, l), &mut rng)?;
            out.push(l);
        }
        Ok(out)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let dt = stepper.dt;
    let a = stepper.discount;
    let n = spec.n_steps;
    // Cash flow per path, valued at the date in `when`.
    let mut cash: Vec<f64> = paths.iter().map(|p| p[n].max(0.0)).collect();
    let mut when = vec![n; n_paths];
    let mut degenerate_dates = 0;

    for k in (1..n).rev() {
        let itm: Vec<usize> = (0..n_paths).filter(|&p| paths[p][k] > 0.0).collect();
        if itm.is_empty() {
            continue;
        }
        let xs: Vec<f64> = itm.iter().map(|&p| paths[p][k]).collect();
        let ys: Vec<f64> = itm
            .iter()
            .map(|&p| (-a * dt * (when[p] - k) as f64).exp() * cash[p])
            .collect();
        let continuation = match regress(&xs, &ys, basis_degree) {
            Some(fit) => fit,
            None => {
                degenerate_dates += 1;
                let m = compensated_sum(ys.iter().copied()) / ys.len() as f64;
                vec![m; ys.len()]
            }
        };
        for (j, &p) in itm.iter().enumerate() {
            if xs[j] > continuation[j] {
                cash[p] = xs[j];
                when[p] = k;
            }
        }
    }

    let discounted: Vec<f64> = (0..n_paths)
        .map(|p| (-a * dt * when[p] as f64).exp() * cash[p])
        .collect();
    let (mean, std_error) = mean_and_std_error(&discounted);
    let immediate = spec.l0.max(0.0);
    if immediate > mean {
        return Ok(LsEstimate {
            mean: immediate,
            std_error: 0.0,
            degenerate_dates,
        });
    }
    Ok(LsEstimate {
        mean,
        std_error,
        degenerate_dates,
    })
}

/// Least-squares fitted values on `1, z, …, z^deg` with `z` the standardized
/// regressor. `None` if the design is rank deficient.
fn regress(xs: &[f64], ys: &[f64], degree: usize) -> Option<Vec<f64>> {
    let m = xs.len();
    let cols = degree + 1;
    if m < 2 * cols {
        return None;
    }
    let (mean, se) = mean_and_std_error(xs);
    let sd = se * (m as f64).sqrt();
    if !(sd > 1e-12 * (1.0 + mean.abs())) {
        return None;
    }
    let design = DMatrix::from_fn(m, cols, |i, j| ((xs[i] - mean) / sd).powi(j as i32));
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return None;
    }
    let coef = svd.solve(&DVector::from_column_slice(ys), 0.0).ok()?;
    Some((design * coef).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::JumpSpec;

    fn deterministic() -> MarketModel {
        MarketModel {
            r: 0.05,
            a: 0.02,
            sigma: 0.0,
            jumps: JumpSpec::None,
            maturity: 1.0,
        }
    }

    #[test]
    fn deterministic_path_follows_ode() {
        let policy = PolicyTable::fixed(-1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let path = simulate_path(&deterministic(), &policy, &SimSpec::new(0.0, 0.5, 100), &mut rng).unwrap();
        let end = *path.values.last().unwrap();
        assert!((end - (1.5 * 0.02f64.exp() - 1.0)).abs() < 1e-12, "{end}");
        assert_eq!(path.times.len(), 101);
        assert_eq!(*path.times.last().unwrap(), 1.0);
    }

    #[test]
    fn path_at_control_level_is_constant() {
        let mut model = deterministic();
        model.sigma = 0.3;
        let policy = PolicyTable::fixed(0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let path = simulate_path(&model, &policy, &SimSpec::new(0.0, 0.25, 50), &mut rng).unwrap();
        assert!(path.values.iter().all(|&v| v == 0.25));
    }

    #[test]
    fn replayed_seed_gives_same_path() {
        let model = MarketModel {
            jumps: JumpSpec::Merton {
                lambda: 2.0,
                mu_j: 0.0,
                delta: 0.2,
            },
            sigma: 0.2,
            ..deterministic()
        };
        let spec = SimSpec::new(0.0, 0.1, 64);
        let policy = PolicyTable::sign_switch();
        let a = simulate_indexed_path(&model, &policy, &spec, 42, 7).unwrap();
        let b = simulate_indexed_path(&model, &policy, &spec, 42, 7).unwrap();
        let c = simulate_indexed_path(&model, &policy, &spec, 42, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn deterministic_estimate_has_zero_variance() {
        let policy = PolicyTable::fixed(-1.0).unwrap();
        let est = estimate_price(&deterministic(), &policy, &SimSpec::new(0.0, 0.5, 50), 200, 3).unwrap();
        assert!((est.mean - (1.5 - (-0.02f64).exp())).abs() < 1e-12);
        assert!(est.std_error < 1e-12);
    }

    #[test]
    fn immediate_exercise_pays_intrinsic() {
        let mut model = deterministic();
        model.sigma = 0.4;
        let policy = PolicyTable::sign_switch().with_stopping(StoppingRule::Immediately).unwrap();
        for l0 in [-0.3, 0.0, 0.7] {
            let est = estimate_price(&model, &policy, &SimSpec::new(0.0, l0, 10), 100, 5).unwrap();
            assert_eq!(est.mean, l0.max(0.0));
            assert_eq!(est.std_error, 0.0);
        }
    }

    #[test]
    fn preconditions_are_enforced() {
        let policy = PolicyTable::fixed(0.0).unwrap();
        let spec = SimSpec::new(0.0, 0.0, 10);
        assert!(estimate_price(&deterministic(), &policy, &spec, 99, 0).is_err());
        assert!(ls_stop_estimate(&deterministic(), &policy, &spec, 200, 1, 0).is_err());
        assert!(ls_stop_estimate(&deterministic(), &policy, &spec, 200, 7, 0).is_err());
        assert!(PolicyTable::sign_switch().with_stopping(StoppingRule::Table).is_err());
        assert!(estimate_price(&deterministic(), &policy, &SimSpec::new(1.0, 0.0, 10), 100, 0).is_err());
    }

    #[test]
    fn compensated_sum_is_order_insensitive() {
        let xs: Vec<f64> = (0..10_000).map(|i| ((i * 7919) % 1000) as f64 * 1e-3 + 1e8).collect();
        let mut rev = xs.clone();
        rev.reverse();
        let a = compensated_sum(xs.iter().copied());
        let b = compensated_sum(rev);
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn degenerate_regression_is_reported() {
        let policy = PolicyTable::fixed(-1.0).unwrap();
        let est = ls_stop_estimate(&deterministic(), &policy, &SimSpec::new(0.0, 0.5, 20), 200, 3, 1).unwrap();
        assert_eq!(est.degenerate_dates, 19);
        assert!((est.mean - (1.5 - (-0.02f64).exp())).abs() < 1e-3);
    }
}
