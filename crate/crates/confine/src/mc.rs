//! Stochastic oracle: path sampling for the supported models and confinement
//! / hitting-survival estimators with binomial confidence intervals.
//!
//! Determinism: every path owns the RNG stream keyed by (seed, path index),
//! and the reduction is an integer count, so results are bit-identical for
//! any thread count.

use crate::error::{Error, Result};
use crate::models::{CpDensity, DensitySpec, Domain, LevyModel};
use crate::rng::CounterRng;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    pub n_paths: u64,
    pub dt: f64,
    pub seed: u64,
    /// per-step Brownian-bridge crossing kill (Gaussian models only)
    pub bridge_correction: bool,
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(n_paths: u64, dt: f64, seed: u64) -> Self {
        Self { n_paths, dt, seed, bridge_correction: false, antithetic: false }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MCEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub n_effective: u64,
}

impl MCEstimate {
    fn from_count(survivors: u64, n: u64) -> Self {
        let p = survivors as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        Self {
            p_hat: p,
            stderr: se,
            ci95: (p - 1.96 * se, p + 1.96 * se),
            n_effective: n,
        }
    }
}

/// Work cap: n_paths * steps must stay under this (env LEVY_EXIT_BUDGET).
fn exit_budget() -> u64 {
    std::env::var("LEVY_EXIT_BUDGET")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(4_000_000_000)
}

fn gamma_sample(rng: &mut CounterRng, shape: f64, rate: f64) -> f64 {
    // Marsaglia-Tsang, boosted below shape 1
    if shape < 1.0 {
        let u = rng.uniform();
        return gamma_sample(rng, shape + 1.0, rate) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.normal();
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v3 = v * v * v;
        let u = rng.uniform();
        if u.ln() < 0.5 * x * x + d - d * v3 + d * v3.ln() {
            return d * v3 / rate;
        }
    }
}

/// One increment of the process over `dt`.
pub fn sample_increment(model: &LevyModel, dt: f64, rng: &mut CounterRng) -> Result<f64> {
    match &model.density {
        DensitySpec::None => Ok(model.gamma * dt + (model.a * dt).sqrt() * rng.normal()),
        DensitySpec::Stable { alpha, beta } => {
            let (alpha, beta) = (*alpha, *beta);
            if (alpha - 1.0).abs() < 1e-12 {
                if beta.abs() > 1e-12 {
                    return Err(Error::Unsupported(
                        "sampling for alpha = 1 is limited to beta = 0".into(),
                    ));
                }
                // Cauchy: scale dt
                let u = std::f64::consts::PI * (rng.uniform() - 0.5);
                return Ok(model.gamma * dt + dt * u.tan());
            }
            // Chambers-Mallows-Stuck for the characteristic function
            // exp(-|z|^alpha (1 - i beta sign z tan(pi alpha / 2)))
            let tphalf = (std::f64::consts::FRAC_PI_2 * alpha).tan();
            let b0 = (beta * tphalf).atan() / alpha;
            let s0 = (1.0 + beta * beta * tphalf * tphalf).powf(0.5 / alpha);
            let u = std::f64::consts::PI * (rng.uniform() - 0.5);
            let w = rng.exponential();
            let x = s0 * (alpha * (u + b0)).sin() / u.cos().powf(1.0 / alpha)
                * ((u - alpha * (u + b0)).cos() / w).powf((1.0 - alpha) / alpha);
            Ok(model.gamma * dt + dt.powf(1.0 / alpha) * x)
        }
        DensitySpec::CompoundPoisson { density } => {
            let mass = model.jump_mass()?;
            let count = rng.poisson(mass * dt);
            let mut x = model.gamma * dt;
            for _ in 0..count {
                match density {
                    CpDensity::Laplace { scale, .. } => {
                        let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
                        x += sign * scale * rng.exponential();
                    }
                    CpDensity::Table { .. } => {
                        return Err(Error::Unsupported(
                            "tabulated jump densities have no sampler".into(),
                        ));
                    }
                }
            }
            Ok(x)
        }
        DensitySpec::VarianceGamma { c1, c2, g, m } => {
            // difference of two gamma subordinators
            let up = gamma_sample(rng, c2 * dt, *m);
            let down = gamma_sample(rng, c1 * dt, *g);
            Ok(model.gamma * dt + up - down)
        }
        DensitySpec::DampedStable { .. }
        | DensitySpec::NormalInverseGaussian { .. }
        | DensitySpec::Meixner { .. } => {
            Err(Error::Unsupported(
                "no sampler for this family; it is reachable only through the kernel pipeline".into(),
            ))
        }
        DensitySpec::Custom(_) => Err(Error::Unsupported("no sampler for custom densities".into())),
    }
}

fn check_budget(cfg: &SimConfig, steps: u64) -> Result<()> {
    let budget = exit_budget();
    let work = cfg.n_paths.saturating_mul(steps);
    if work > budget {
        let fit = budget / steps.max(1);
        return Err(Error::Parameter(format!(
            "requested {work} path-steps exceeds LEVY_EXIT_BUDGET = {budget}; \
             at most {fit} paths fit at this dt"
        )));
    }
    Ok(())
}

fn bridge_survives(
    rng: &mut CounterRng,
    x0: f64,
    x1: f64,
    lo: f64,
    hi: f64,
    a_dt: f64,
) -> bool {
    // crossing probability of a Brownian bridge against each boundary
    let p_hi = (-2.0 * (hi - x0) * (hi - x1) / a_dt).exp();
    if rng.uniform() < p_hi {
        return false;
    }
    let p_lo = (-2.0 * (x0 - lo) * (x1 - lo) / a_dt).exp();
    rng.uniform() >= p_lo
}

/// Fraction of paths from 0 that stay inside the domain up to time t.
pub fn estimate_survival(
    model: &LevyModel,
    domain: &Domain,
    t: f64,
    cfg: &SimConfig,
) -> Result<MCEstimate> {
    if t <= 0.0 || cfg.dt <= 0.0 || cfg.n_paths == 0 {
        return Err(Error::Parameter("survival estimate needs t, dt, n_paths > 0".into()));
    }
    if !domain.contains(0.0) {
        return Err(Error::Domain("paths start at 0, which must lie in the domain".into()));
    }
    let steps = (t / cfg.dt).ceil() as u64;
    check_budget(cfg, steps)?;
    let bridge = cfg.bridge_correction && matches!(model.density, DensitySpec::None);
    let single = domain.single().ok();
    if cfg.bridge_correction && (single.is_none() || !matches!(model.density, DensitySpec::None)) {
        return Err(Error::Unsupported(
            "bridge correction applies to Gaussian models on a single interval".into(),
        ));
    }
    // probe sampler support once, off the hot path
    sample_increment(model, cfg.dt, &mut CounterRng::new(cfg.seed, u64::MAX))?;

    let survivors: u64 = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let (stream, flip) = if cfg.antithetic {
                (path / 2, path % 2 == 1)
            } else {
                (path, false)
            };
            let mut rng = CounterRng::new(cfg.seed, stream ^ if flip { 1 << 63 } else { 0 });
            let mut x = 0.0f64;
            for _ in 0..steps {
                let mut inc = sample_increment(model, cfg.dt, &mut rng).unwrap_or(f64::NAN);
                if flip {
                    inc = -inc;
                }
                let next = x + inc;
                if !domain.contains(next) {
                    return 0u64;
                }
                if bridge {
                    let (lo, hi) = single.unwrap();
                    if !bridge_survives(&mut rng, x, next, lo, hi, model.a * cfg.dt) {
                        return 0u64;
                    }
                }
                x = next;
            }
            1u64
        })
        .sum();
    Ok(MCEstimate::from_count(survivors, cfg.n_paths))
}

/// Fraction of paths from 0 that never reach the one-sided barrier a.
pub fn estimate_hitting_survival(
    model: &LevyModel,
    a: f64,
    t: f64,
    cfg: &SimConfig,
) -> Result<MCEstimate> {
    if a <= 0.0 || t <= 0.0 {
        return Err(Error::Parameter("barrier and horizon must be positive".into()));
    }
    let steps = (t / cfg.dt).ceil() as u64;
    check_budget(cfg, steps)?;
    let bridge = cfg.bridge_correction && matches!(model.density, DensitySpec::None);
    sample_increment(model, cfg.dt, &mut CounterRng::new(cfg.seed, u64::MAX))?;

    let survivors: u64 = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = CounterRng::new(cfg.seed, path);
            let mut x = 0.0f64;
            for _ in 0..steps {
                let inc = sample_increment(model, cfg.dt, &mut rng).unwrap_or(f64::NAN);
                let next = x + inc;
                if !(next < a) {
                    return 0u64;
                }
                if bridge {
                    let p_hit = (-2.0 * (a - x) * (a - next) / (model.a * cfg.dt)).exp();
                    if rng.uniform() < p_hit {
                        return 0u64;
                    }
                }
                x = next;
            }
            1u64
        })
        .sum();
    Ok(MCEstimate::from_count(survivors, cfg.n_paths))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiener;

    #[test]
    fn gaussian_increment_moments() {
        let model = LevyModel::gaussian(2.0, 0.5);
        let mut rng = CounterRng::new(9, 0);
        let dt = 0.3;
        let n = 100_000;
        let (mut s, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let x = sample_increment(&model, dt, &mut rng).unwrap();
            s += x;
            sq += x * x;
        }
        let mean = s / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!((mean - 0.15).abs() < 4.0 * (0.6f64 / n as f64).sqrt());
        assert!((var - 0.6).abs() < 0.02);
    }

    #[test]
    fn stable_sampler_matches_characteristic_function() {
        // empirical characteristic function at z = 1 against e^{-dt}
        let model = LevyModel::stable(1.5, 0.0);
        let dt = 1.0;
        let n = 200_000;
        let mut rng = CounterRng::new(4, 0);
        let (mut cr, mut ci) = (0.0, 0.0);
        for _ in 0..n {
            let x = sample_increment(&model, dt, &mut rng).unwrap();
            cr += x.cos();
            ci += x.sin();
        }
        let (cr, ci) = (cr / n as f64, ci / n as f64);
        let se = (0.5 / n as f64).sqrt();
        assert!((cr - (-1.0f64).exp()).abs() < 4.0 * se, "re = {cr}");
        assert!(ci.abs() < 4.0 * se, "im = {ci}");
        // skewed case: compare against the closed-form exponent
        let model = LevyModel::stable(1.3, 0.6);
        let lam = model.characteristic_exponent(1.0).unwrap();
        let expect = (-lam).exp();
        let mut rng = CounterRng::new(5, 0);
        let (mut cr, mut ci) = (0.0, 0.0);
        for _ in 0..n {
            let x = sample_increment(&model, dt, &mut rng).unwrap();
            cr += x.cos();
            ci += x.sin();
        }
        assert!((cr / n as f64 - expect.re).abs() < 5.0 * se);
        assert!((ci / n as f64 - expect.im).abs() < 5.0 * se);
    }

    #[test]
    fn compound_poisson_jump_rate() {
        let model = LevyModel {
            a: 0.0,
            gamma: 0.0,
            density: DensitySpec::CompoundPoisson {
                density: CpDensity::Laplace { scale: 1.0, height: 1.0 },
            },
        };
        // mean number of jumps per unit time is the mass M = 2; increments
        // are centered, so the variance identifies activity indirectly
        let mut rng = CounterRng::new(8, 0);
        let n = 50_000;
        let dt = 0.05;
        let mut s = 0.0;
        for _ in 0..n {
            let x = sample_increment(&model, dt, &mut rng).unwrap();
            s += x * x;
        }
        // var of one Laplace jump is 2 scale^2; E[x^2] = M dt * 2
        let var = s / n as f64;
        assert!((var - 2.0 * dt * 2.0).abs() < 0.02, "var = {var}");
    }

    #[test]
    fn immediate_horizon_survives() {
        let model = LevyModel::stable(1.0, 0.0);
        let domain = Domain::interval(-1.0, 1.0).unwrap();
        let cfg = SimConfig::new(500, 0.01, 3);
        let est = estimate_survival(&model, &domain, 0.01, &cfg).unwrap();
        assert!(est.p_hat > 0.95);
    }

    #[test]
    fn determinism_across_runs() {
        let model = LevyModel::gaussian(1.0, 0.0);
        let domain = Domain::interval(-1.0, 1.0).unwrap();
        let mut cfg = SimConfig::new(4_000, 0.01, 77);
        cfg.bridge_correction = true;
        let a = estimate_survival(&model, &domain, 0.5, &cfg).unwrap();
        let b = estimate_survival(&model, &domain, 0.5, &cfg).unwrap();
        assert_eq!(a.p_hat, b.p_hat);
        let mut cfg2 = cfg;
        cfg2.seed = 78;
        let c = estimate_survival(&model, &domain, 0.5, &cfg2).unwrap();
        assert_ne!(a.p_hat, c.p_hat);
    }

    #[test]
    fn gaussian_survival_matches_oracle_loosely() {
        let model = LevyModel::gaussian(1.0, 0.0);
        let domain = Domain::interval(-1.0, 1.0).unwrap();
        let mut cfg = SimConfig::new(40_000, 0.005, 123);
        cfg.bridge_correction = true;
        let est = estimate_survival(&model, &domain, 1.0, &cfg).unwrap();
        let exact = wiener::p2(1.0, 1.0, 1.0, 1e-12);
        assert!(
            (est.p_hat - exact).abs() < 4.0 * est.stderr + 1e-3,
            "mc {} vs oracle {exact}",
            est.p_hat
        );
    }

    #[test]
    fn hitting_survival_matches_oracle_loosely() {
        let model = LevyModel::gaussian(1.0, 0.0);
        let mut cfg = SimConfig::new(40_000, 0.002, 9);
        cfg.bridge_correction = true;
        let est = estimate_hitting_survival(&model, 1.0, 1.0, &cfg).unwrap();
        let exact = wiener::first_hitting_survival(1.0, 1.0);
        assert!(
            (est.p_hat - exact).abs() < 4.0 * est.stderr + 2e-3,
            "mc {} vs oracle {exact}",
            est.p_hat
        );
    }

    #[test]
    fn budget_is_enforced() {
        let model = LevyModel::gaussian(1.0, 0.0);
        let domain = Domain::interval(-1.0, 1.0).unwrap();
        let cfg = SimConfig::new(u64::MAX / 4, 1e-6, 1);
        let err = estimate_survival(&model, &domain, 1.0, &cfg).unwrap_err();
        assert!(err.to_string().contains("LEVY_EXIT_BUDGET"));
    }

    #[test]
    fn stderr_shrinks_with_paths() {
        let model = LevyModel::gaussian(1.0, 0.0);
        let domain = Domain::interval(-1.0, 1.0).unwrap();
        let small = estimate_survival(&model, &domain, 1.0, &SimConfig::new(2_000, 0.01, 5)).unwrap();
        let large = estimate_survival(&model, &domain, 1.0, &SimConfig::new(8_000, 0.01, 5)).unwrap();
        assert!(large.stderr < small.stderr);
    }
}
