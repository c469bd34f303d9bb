//! Quadrature building blocks: Gauss–Legendre rules, adaptive Simpson,
//! tanh-sinh for endpoint singularities, and geometrically graded panels.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre polynomial (nodes are symmetric; only half are
/// iterated).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(z) and P_n'(z) by recurrence
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (
        x.iter().map(|&t| c + h * t).collect(),
        w.iter().map(|&t| h * t).collect(),
    )
}

/// Fixed-order Gauss–Legendre integral of `f` over `[a, b]`.
pub fn fixed_gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre_on(n, a, b);
    x.iter().zip(&w).map(|(&xi, &wi)| wi * f(xi)).sum()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> (f64, bool) {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 {
        return (left + right + delta / 15.0, delta.abs() <= 15.0 * tol);
    }
    // the first few levels are always subdivided: peaked or oscillatory
    // integrands can look converged on coarse symmetric nodes; the floor
    // keeps repeated tolerance halving from chasing roundoff
    let tol_eff = tol.max(1e-15 * (left.abs() + right.abs()));
    if delta.abs() <= 15.0 * tol_eff && depth <= 42 {
        return (left + right + delta / 15.0, true);
    }
    let (lv, lok) = adaptive_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    let (rv, rok) = adaptive_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    (lv + rv, lok && rok)
}

/// Adaptive Simpson integration on a finite interval; errors with the partial
/// estimate when the recursion depth budget is exhausted before reaching
/// `tol`.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, context: &str) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    let (v, ok) = adaptive_rec(f, a, m, b, fa, fm, fb, whole, tol, 48);
    if ok {
        Ok(v)
    } else {
        Err(Error::Quadrature {
            context: context.to_string(),
            partial: v,
        })
    }
}

/// Tanh-sinh (double exponential) rule on `(a, b)`. Tolerates integrable
/// singularities at either endpoint since the abscissae approach the ends
/// double-exponentially while the weights vanish.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let h = 0.5 * (b - a);
    // offsets from the nearest endpoint are formed without cancellation:
    // 1 - tanh(u) = 2 / (e^{2u} + 1), so nodes approach the ends down to
    // the underflow threshold instead of saturating at machine epsilon
    let g = |t: f64| {
        let u = 0.5 * std::f64::consts::PI * t.abs().sinh();
        let off = 2.0 / ((2.0 * u).exp() + 1.0);
        let sech = 2.0 / (u.exp() + (-u).exp());
        let x = if t >= 0.0 { b - h * off } else { a + h * off };
        let dx = h * 0.5 * std::f64::consts::PI * t.abs().cosh() * sech * sech;
        (x, dx)
    };
    let mut step = 1.0;
    let mut sum = {
        let (x, dx) = g(0.0);
        f(x) * dx
    };
    // integer abscissae of the coarsest level
    let mut k = 1.0;
    while k <= 6.5 {
        for sign in [-1.0, 1.0] {
            let (x, dx) = g(sign * k);
            if x > a && x < b && dx.is_finite() {
                let v = f(x) * dx;
                if v.is_finite() {
                    sum += v;
                }
            }
        }
        k += 1.0;
    }
    let mut prev;
    for _level in 0..12 {
        prev = sum * step;
        // add the new midpoints of the current spacing
        let mut k = 1.0_f64;
        let half = step * 0.5;
        loop {
            let t = half * (2.0 * k - 1.0);
            if t > 6.5 {
                break;
            }
            for sign in [-1.0, 1.0] {
                let (x, dx) = g(sign * t);
                if x > a && x < b && dx.is_finite() {
                    let v = f(x) * dx;
                    if v.is_finite() {
                        sum += v;
                    }
                }
            }
            k += 1.0;
        }
        step = half;
        let cur = sum * step;
        if _level > 2 && (cur - prev).abs() <= tol * (1.0 + cur.abs()) {
            return cur;
        }
    }
    sum * step
}

/// Integral over `[a, b]` of an integrand with an integrable singularity at
/// one endpoint: geometric panels shrink toward the singular end (ratio 0.2),
/// fixed-order Gauss on each panel.
pub fn graded_toward<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, singular_end: f64, order: usize) -> f64 {
    const LEVELS: usize = 14;
    const RATIO: f64 = 0.2;
    let mut total = 0.0;
    if (singular_end - a).abs() < (singular_end - b).abs() {
        // singularity at the left end
        let mut hi = b;
        for _ in 0..LEVELS {
            let mid = a + (hi - a) * RATIO;
            total += fixed_gauss(f, mid, hi, order);
            hi = mid;
        }
        total += fixed_gauss(f, a, hi, order);
    } else {
        let mut lo = a;
        for _ in 0..LEVELS {
            let mid = b - (b - lo) * RATIO;
            total += fixed_gauss(f, lo, mid, order);
            lo = mid;
        }
        total += fixed_gauss(f, lo, b, order);
    }
    total
}

/// Semi-infinite integral `\int_a^\infty f`, via the rational substitution
/// `y = a + u/(1-u)` with tanh-sinh on `u \in (0, 1)`: power-law decay of
/// `f` turns into an integrable endpoint singularity at `u = 1`, which the
/// double-exponential rule absorbs.
pub fn semi_infinite<F: Fn(f64) -> f64>(f: &F, a: f64, tol: f64, _context: &str) -> Result<f64> {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let y = a + u / (1.0 - u);
        let jac = 1.0 / ((1.0 - u) * (1.0 - u));
        let v = f(y) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    Ok(tanh_sinh(&g, 0.0, 1.0, tol))
}
