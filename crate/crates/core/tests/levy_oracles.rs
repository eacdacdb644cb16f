use passport_core::levy::{compensator, sample_jump, tilt, validate_model};
use passport_core::mc::{estimate_price, PolicyTable, SimSpec};
use passport_core::{JumpAtom, JumpSpec, MarketModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal as NormalDist, Poisson, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

/// Composite Simpson on `[lo, hi]` with `n` (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + k as f64 * h);
    }
    s * h / 3.0
}

fn merton_density(lambda: f64, mu: f64, delta: f64) -> impl Fn(f64) -> f64 {
    move |z| {
        let u = (z - mu) / delta;
        lambda * (-0.5 * u * u).exp() / (delta * (2.0 * std::f64::consts::PI).sqrt())
    }
}


fn merton() -> JumpSpec {
    JumpSpec::Merton {
        lambda: 0.5,
        mu_j: -0.05,
        delta: 0.1,
    }
}

fn kou() -> JumpSpec {
    JumpSpec::Kou {
        lambda: 1.0,
        p: 0.4,
        eta1: 10.0,
        eta2: 5.0,
    }
}

fn tabulated() -> JumpSpec {
    JumpSpec::Tabulated {
        atoms: vec![
            JumpAtom { z: -0.2, weight: 0.3 },
            JumpAtom { z: 0.05, weight: 1.2 },
            JumpAtom { z: 0.15, weight: 0.1 },
        ],
    }
}

/// Reference `∫ g ν` by quadrature of the density.
fn reference_integral(spec: &JumpSpec, g: &dyn Fn(f64) -> f64) -> f64 {
    match spec {
        JumpSpec::Merton { lambda, mu_j, delta } => {
            let d = merton_density(*lambda, *mu_j, *delta);
            simpson(|z| g(z) * d(z), mu_j - 14.0 * delta, mu_j + 14.0 * delta, 20_000)
        }
        JumpSpec::Kou { lambda, p, eta1, eta2 } => {
            // Each half line separately: the density jumps at 0.
            let down = |z: f64| lambda * (1.0 - p) * eta2 * (eta2 * z).exp();
            let up = |z: f64| lambda * p * eta1 * (-eta1 * z).exp();
            simpson(|z| g(z) * down(z), -40.0 / eta2, 0.0, 40_000)
                + simpson(|z| g(z) * up(z), 0.0, 40.0 / (eta1 - 1.0), 40_000)
        }
        JumpSpec::Tabulated { atoms } => atoms.iter().map(|a| a.weight * g(a.z)).sum(),
        JumpSpec::None => 0.0,
    }
}

#[test]
fn compensator_matches_quadrature() {
    for spec in [merton(), kou(), tabulated()] {
        let oracle = reference_integral(&spec, &|z: f64| z.exp_m1());
        assert!((compensator(&spec) - oracle).abs() < 1e-9, "{spec:?}");
    }
    assert_eq!(compensator(&JumpSpec::None), 0.0);
}

#[test]
fn merton_compensator_closed_form() {
    let k = compensator(&JumpSpec::Merton {
        lambda: 0.5,
        mu_j: 0.0,
        delta: 0.1,
    });
    assert!((k - 0.5 * (0.005f64.exp() - 1.0)).abs() < 1e-15);
}

#[test]
fn tilted_integrals_match_exponential_weighting() {
    let tests: [&dyn Fn(f64) -> f64; 4] = [
        &|_| 1.0,
        &|z| z,
        &|z| (1.0 - (-z).exp()).powi(2),
        &|z| (z - 0.02).abs().min(0.3),
    ];
    for spec in [merton(), kou(), tabulated()] {
        let t = tilt(&spec).unwrap();
        for g in tests {
            let lhs = t.integrate(g);
            let rhs = reference_integral(&spec, &|z| g(z) * z.exp());
            assert!((lhs - rhs).abs() < 1e-8, "{spec:?}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn tilted_mass_minus_mass_is_compensator() {
    for spec in [merton(), kou(), tabulated()] {
        let t = tilt(&spec).unwrap();
        let diff = t.lambda_tilde() - spec.intensity();
        assert!((diff - compensator(&spec)).abs() < 1e-12, "{spec:?}");
    }
}

#[test]
fn discretized_measure_reproduces_moments() {
    for spec in [merton(), kou(), tabulated()] {
        let t = tilt(&spec).unwrap();
        let m = t.discretize(128);
        let mass = reference_integral(&spec, &|z| z.exp());
        let first = reference_integral(&spec, &|z| z * z.exp());
        let second = reference_integral(&spec, &|z| -(-z).exp_m1() * z.exp());
        assert!((m.total_mass() - mass).abs() < 1e-10, "{spec:?}");
        assert!((m.integrate(|z| z) - first).abs() < 1e-10, "{spec:?}");
        assert!((m.integrate(|z| -(-z).exp_m1()) - second).abs() < 1e-10, "{spec:?}");
    }
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

const KS_DRAWS: usize = 20_000;
/// 1% critical value of the one-sample KS statistic.
fn ks_critical() -> f64 {
    1.63 / (KS_DRAWS as f64).sqrt()
}

#[test]
fn tilted_merton_samples_pass_ks() {
    let (mu, delta) = (-0.05, 0.1);
    let t = tilt(&merton()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let xs: Vec<f64> = (0..KS_DRAWS).map(|_| sample_jump(&t, &mut rng).unwrap()).collect();
    let target = Normal::new(mu + delta * delta, delta).unwrap();
    let d = ks_statistic(xs.clone(), |x| target.cdf(x));
    assert!(d < ks_critical(), "KS {d}");
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!((mean - (mu + delta * delta)).abs() < 4.0 * delta / (KS_DRAWS as f64).sqrt());
}

#[test]
fn tilted_kou_samples_pass_ks() {
    let (lambda, p, eta1, eta2): (f64, f64, f64, f64) = (1.0, 0.4, 10.0, 5.0);
    let up = lambda * p * eta1 / (eta1 - 1.0);
    let down = lambda * (1.0 - p) * eta2 / (eta2 + 1.0);
    let p_down = down / (up + down);
    let cdf = |z: f64| {
        if z < 0.0 {
            p_down * ((eta2 + 1.0) * z).exp()
        } else {
            p_down + (1.0 - p_down) * -(-(eta1 - 1.0) * z).exp_m1()
        }
    };
    let t = tilt(&kou()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let xs: Vec<f64> = (0..KS_DRAWS).map(|_| sample_jump(&t, &mut rng).unwrap()).collect();
    let d = ks_statistic(xs, cdf);
    assert!(d < ks_critical(), "KS {d}");
}

#[test]
fn tabulated_sampling_frequencies() {
    let t = tilt(&tabulated()).unwrap();
    let JumpSpec::Tabulated { atoms } = tabulated() else { unreachable!() };
    let w: Vec<f64> = atoms.iter().map(|a| a.weight * a.z.exp()).collect();
    let total: f64 = w.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut counts = [0usize; 3];
    for _ in 0..KS_DRAWS {
        let z = sample_jump(&t, &mut rng).unwrap();
        let k = atoms.iter().position(|a| a.z == z).unwrap();
        counts[k] += 1;
    }
    for k in 0..3 {
        let p = w[k] / total;
        let se = (p * (1.0 - p) / KS_DRAWS as f64).sqrt();
        assert!((counts[k] as f64 / KS_DRAWS as f64 - p).abs() < 4.0 * se);
    }
}

#[test]
fn divergent_kou_moment_is_rejected() {
    let model = MarketModel {
        r: 0.05,
        a: 0.02,
        sigma: 0.2,
        jumps: JumpSpec::Kou {
            lambda: 1.0,
            p: 0.4,
            eta1: 0.5,
            eta2: 5.0,
        },
        maturity: 1.0,
    };
    let report = validate_model(&model);
    assert!(!report.is_ok());
    assert!(report.to_string().contains("exponential moment divergent"));
    assert!(tilt(&model.jumps).is_err());
}

/// Simulates `(S, X)` under the pricing measure with a constant position and
/// compares `E[e^{-rT} X_T⁺] / S_0` with the ratio-process estimator, which
/// works under the asset measure and discounts at the dividend yield.
#[test]
fn measure_change_is_consistent() {
    let (r, a, sigma, lambda, mu, delta) = (0.05, 0.02, 0.25, 0.8, -0.1, 0.15);
    let (t_end, s0, x0, q) = (1.0, 1.0, 0.05, 0.6);
    let model = MarketModel {
        r,
        a,
        sigma,
        jumps: JumpSpec::Merton {
            lambda,
            mu_j: mu,
            delta,
        },
        maturity: t_end,
    };
    let kappa = lambda * ((mu + 0.5 * delta * delta).exp() - 1.0);
    let n = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let jumps = Poisson::new(lambda * t_end).unwrap();
    let size = NormalDist::new(mu, delta).unwrap();
    let payoffs: Vec<f64> = (0..n)
        .map(|_| {
            let w: f64 = StandardNormal.sample(&mut rng);
            let k = jumps.sample(&mut rng) as usize;
            let jump_sum: f64 = (0..k).map(|_| size.sample(&mut rng)).sum();
            let log_s = (r - a - 0.5 * sigma * sigma - kappa) * t_end + sigma * t_end.sqrt() * w + jump_sum;
            let s_t = s0 * log_s.exp();
            // dX = q(dS - rS dt) + rX dt integrates exactly for constant q.
            let x_t = (r * t_end).exp() * (x0 + q * ((-r * t_end).exp() * s_t - s0));
            (-r * t_end).exp() * x_t.max(0.0) / s0
        })
        .collect();
    let mean = payoffs.iter().sum::<f64>() / n as f64;
    let var = payoffs.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();

    let policy = PolicyTable::fixed(q).unwrap();
    let est = estimate_price(&model, &policy, &SimSpec::new(0.0, x0 / s0, 50), n, 5).unwrap();
    let combined = (se * se + est.std_error * est.std_error).sqrt();
    assert!(
        (mean - est.mean).abs() < 4.0 * combined,
        "pricing measure {mean} ± {se}, asset measure {} ± {}",
        est.mean,
        est.std_error
    );
}
