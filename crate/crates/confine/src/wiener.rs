//! Closed-form confinement probabilities for the Wiener process on [-b, a]:
//! the sine eigenseries, its Poisson-resummed Gaussian-integral form, the
//! long-time asymptotic, and the one-sided first-hitting survival. These are
//! the primary ground truth for the spectral and Monte Carlo layers.

use statrs::function::erf::erfc;

/// sqrt(2/pi) int_x^infinity e^{-u^2/2} du
fn gauss_tail(x: f64) -> f64 {
    erfc(x / std::f64::consts::SQRT_2)
}

/// Eigenvalue mu_n = (n pi / (a+b))^2 / 2 and the normalized sine mode.
pub fn wiener_eigendata(n: usize, a: f64, b: f64) -> (f64, impl Fn(f64) -> f64) {
    let span = a + b;
    let mu = (n as f64 * std::f64::consts::PI / span).powi(2) / 2.0;
    let g = move |x: f64| {
        (2.0 / span).sqrt() * (n as f64 * std::f64::consts::PI * (x + b) / span).sin()
    };
    (mu, g)
}

/// Confinement probability by the eigenseries, truncated when the sine-free
/// envelope of the next term drops below `tol` (the sine factor can vanish
/// accidentally, so it is excluded from the bound). Returns the value and a
/// convergence flag.
pub fn p2_series_checked(a: f64, b: f64, t: f64, tol: f64) -> (f64, bool) {
    let span = a + b;
    let mut sum = 0.0;
    for m in 0..200_000u64 {
        let n = (2 * m + 1) as f64;
        let envelope = 4.0 / (n * std::f64::consts::PI) * (-t * (n * std::f64::consts::PI / span).powi(2) / 2.0).exp();
        if envelope < tol {
            return (sum, true);
        }
        sum += envelope * (n * b * std::f64::consts::PI / span).sin();
    }
    (sum, false)
}

pub fn p2_series(a: f64, b: f64, t: f64, tol: f64) -> f64 {
    p2_series_checked(a, b, t, tol).0
}

/// Poisson-resummed form: reflection-principle Gaussian integrals with image
/// offsets A_m = 2m(a+b)+a, B_m = 2m(a+b)-a, C_m = m(a+b)+a, D_m = m(a+b)-a.
pub fn p2_resummed(a: f64, b: f64, t: f64, tol: f64) -> f64 {
    let span = a + b;
    let st = t.sqrt();
    // sqrt(2/pi) int_p^q e^{-u^2/2} du
    let seg = |p: f64, q: f64| gauss_tail(p / st) - gauss_tail(q / st);
    let mut p = 1.0 - gauss_tail(a / st);
    let mut small_streak = 0;
    for m in 1..200_000u64 {
        let mf = m as f64;
        let (am, bm) = (2.0 * mf * span + a, 2.0 * mf * span - a);
        let (cm, dm) = (mf * span + a, mf * span - a);
        let ab_term = 2.0 * seg(bm, am);
        let cd_term = seg(dm, cm);
        p += ab_term - cd_term;
        if ab_term.abs() < tol / 10.0 && cd_term.abs() < tol / 10.0 {
            small_streak += 1;
            if small_streak >= 2 {
                break;
            }
        } else {
            small_streak = 0;
        }
    }
    p
}

/// Crossover wrapper: eigenseries for moderate and large t, resummed form
/// for small t where the series converges slowly.
pub fn p2(a: f64, b: f64, t: f64, tol: f64) -> f64 {
    if t / ((a + b) * (a + b)) >= 0.2 {
        p2_series(a, b, t, tol)
    } else {
        p2_resummed(a, b, t, tol)
    }
}

/// One-sided survival P(T_a > t) for the standard Wiener process.
pub fn first_hitting_survival(a: f64, t: f64) -> f64 {
    1.0 - gauss_tail(a / t.sqrt())
}

/// Leading long-time behavior (4/pi) sin(a pi/(a+b)) e^{-t pi^2 / (2 (a+b)^2)}.
pub fn p2_asymptotic(a: f64, b: f64, t: f64) -> f64 {
    let span = a + b;
    4.0 / std::f64::consts::PI
        * (a * std::f64::consts::PI / span).sin()
        * (-t * (std::f64::consts::PI / span).powi(2) / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::norm_cdf;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_series_leading_term() {
        // a = b = 1, t = 3: dominated by the first term (4/pi) e^{-3 pi^2 / 8}
        let v = p2_series(1.0, 1.0, 3.0, 1e-12);
        let lead = 4.0 / std::f64::consts::PI * (-3.0 * std::f64::consts::PI.powi(2) / 8.0).exp();
        assert!((v - lead).abs() < 1e-10);
        assert!((v - 0.0314).abs() < 1e-4);
    }

    #[test]
    fn two_formulas_agree_on_grid() {
        for &a in &[0.5, 1.0, 2.0] {
            for &b in &[0.5, 1.0, 2.0] {
                for &t in &[0.1, 1.0, 5.0] {
                    let s = p2_series(a, b, t, 1e-13);
                    let r = p2_resummed(a, b, t, 1e-13);
                    assert!((s - r).abs() < 1e-9, "a={a} b={b} t={t}: {s} vs {r}");
                    assert!((0.0..=1.0 + 1e-12).contains(&s));
                }
            }
        }
    }

    #[test]
    fn hitting_limit_of_wide_interval() {
        let wide = p2_resummed(1.0, 50.0, 1.0, 1e-14);
        let hit = first_hitting_survival(1.0, 1.0);
        assert!((wide - hit).abs() < 1e-12);
        assert_relative_eq!(hit, 2.0 * norm_cdf(1.0) - 1.0, epsilon = 1e-12);
        assert!((hit - 0.682689).abs() < 1e-6);
    }

    #[test]
    fn limits_and_monotonicity() {
        // t -> 0: certain confinement
        assert!((p2(1.0, 1.0, 1e-4, 1e-12) - 1.0).abs() < 1e-12);
        // decreasing in t
        let mut prev = 1.0;
        for i in 1..30 {
            let v = p2(1.0, 1.0, 0.2 * i as f64, 1e-12);
            assert!(v < prev);
            prev = v;
        }
        // increasing in each half-width
        assert!(p2(1.5, 1.0, 1.0, 1e-12) > p2(1.0, 1.0, 1.0, 1e-12));
        assert!(p2(1.0, 1.5, 1.0, 1e-12) > p2(1.0, 1.0, 1.0, 1e-12));
        // widening b approaches the hitting survival from below
        let hit = first_hitting_survival(1.0, 1.0);
        let mut prev = 0.0;
        for &b in &[1.0, 2.0, 4.0, 8.0] {
            let v = p2(1.0, b, 1.0, 1e-13);
            assert!(v > prev && v <= hit + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn asymptotic_regime() {
        let t = 20.0;
        let exact = p2_series(1.0, 1.0, t, 1e-16);
        assert_relative_eq!(p2_asymptotic(1.0, 1.0, t), exact, max_relative = 1e-6);
    }

    #[test]
    fn eigendata_closed_forms() {
        let (mu1, g1) = wiener_eigendata(1, 1.0, 1.0);
        assert_relative_eq!(mu1, std::f64::consts::PI.powi(2) / 8.0, epsilon = 1e-14);
        assert!(g1(-1.0).abs() < 1e-12 && g1(1.0).abs() < 1e-12);
        // unit norm
        let n = 20_000;
        let h = 2.0 / n as f64;
        let norm: f64 = (0..n)
            .map(|i| {
                let x = -1.0 + (i as f64 + 0.5) * h;
                g1(x) * g1(x) * h
            })
            .sum();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-6);
    }
}
