//! Quasi-potential kernels Phi(x, y): the closed forms for stable and
//! Wiener processes, the shift reduction from [-b, a] to a symmetric
//! interval, grid-backed kernels, and the difference-majorant check.

use crate::error::{Error, Result};
use crate::quad;
use statrs::function::gamma::gamma;

#[derive(Clone, Debug, PartialEq)]
pub enum KernelKind {
    StableCase1 { alpha: f64, beta: f64, mu: f64, rho: f64, c_alpha: f64 },
    StableOneSided { alpha: f64, beta: f64 },
    Cauchy,
    WienerGreen,
    GridBacked,
}

impl KernelKind {
    pub fn label(&self) -> &'static str {
        match self {
            KernelKind::StableCase1 { .. } => "stable",
            KernelKind::StableOneSided { .. } => "stable-one-sided",
            KernelKind::Cauchy => "cauchy",
            KernelKind::WienerGreen => "wiener-green",
            KernelKind::GridBacked => "grid",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiagonalSingularity {
    None,
    Log,
    /// integrable blow-up |x - y|^{-exponent}
    Power { exponent: f64 },
}

#[derive(Clone)]
enum Backing {
    Closed,
    Grid {
        xs: Vec<f64>,
        /// row-major n x n values
        phi: Vec<f64>,
        conditioning: f64,
    },
}

/// Kernel of the quasi-potential operator B on the interval `[-b, a]`
/// (symmetric intervals have `b == a`).
#[derive(Clone)]
pub struct QuasiPotentialKernel {
    /// (b, a) with domain [-b, a]
    pub neg: f64,
    pub pos: f64,
    pub kind: KernelKind,
    pub diagonal: DiagonalSingularity,
    backing: Backing,
}

/// Solves sin(pi rho) = ((1-beta)/(1+beta)) sin(pi (mu - rho)) on the
/// bracket that keeps 0 < mu - rho < 1.
pub fn solve_rho(mu: f64, beta: f64) -> Result<f64> {
    if beta.abs() >= 1.0 {
        return Err(Error::Parameter("rho equation requires |beta| < 1".into()));
    }
    let ratio = (1.0 - beta) / (1.0 + beta);
    let f = |rho: f64| (std::f64::consts::PI * rho).sin() - ratio * (std::f64::consts::PI * (mu - rho)).sin();
    let (mut lo, mut hi) = ((mu - 1.0).max(0.0), mu.min(1.0));
    // nudge off the bracket ends where f can vanish degenerately
    let eps = 1e-12 * (hi - lo);
    lo += eps;
    hi -= eps;
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if flo * fhi > 0.0 {
        return Err(Error::Parameter(format!(
            "no bracketed root for rho with mu = {mu}, beta = {beta}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) * flo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn case1_constant(alpha: f64, beta: f64, mu: f64, rho: f64) -> f64 {
    (std::f64::consts::PI * rho).sin()
        / ((std::f64::consts::FRAC_PI_2 * alpha).sin()
            * (1.0 - beta)
            * gamma(1.0 - rho)
            * gamma(1.0 + rho - mu))
}

/// Two-sided stable kernel, 0 < alpha < 2, alpha != 1, -1 < beta < 1.
pub fn stable_kernel_case1(alpha: f64, beta: f64, a: f64, x: f64, y: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0 && (alpha - 1.0).abs() > 1e-12) {
        return Err(Error::Parameter(format!("alpha = {alpha} outside (0,2) \\ {{1}}")));
    }
    if beta.abs() >= 1.0 {
        return Err(Error::Parameter("two-sided kernel requires |beta| < 1".into()));
    }
    if x.abs() > a + 1e-12 || y.abs() > a + 1e-12 {
        return Err(Error::Domain("point outside [-a, a]".into()));
    }
    let mu = 2.0 - alpha;
    let rho = solve_rho(mu, beta)?;
    let c_alpha = case1_constant(alpha, beta, mu, rho);
    Ok(case1_eval(a, x, y, mu, rho, c_alpha))
}

fn case1_eval(a: f64, x: f64, y: f64, mu: f64, rho: f64, c_alpha: f64) -> f64 {
    let d = a * (x - y);
    let zlo = d.abs();
    let zhi = a * a - x * y;
    if zhi - zlo <= 1e-15 * a * a {
        return 0.0;
    }
    // endpoint exponent of the integrand at z = zlo
    let sigma = if d >= 0.0 { mu - rho } else { rho };
    let f = |z: f64| (z * z - d * d).powf(-rho) * (z - d).powf(2.0 * rho - mu);
    // absorb the (z - zlo)^{-sigma} blow-up
    let w_up = (zhi - zlo).powf(1.0 - sigma);
    let integral = quad::fixed_gauss(
        &|w: f64| {
            let excess = w.powf(1.0 / (1.0 - sigma));
            let z = zlo + excess;
            f(z) * excess / (w * (1.0 - sigma))
        },
        0.0,
        w_up,
        64,
    );
    c_alpha * (2.0 * a).powf(mu - 1.0) * integral
}

/// One-sided stable kernel, 1 < alpha < 2, beta = +/-1.
pub fn stable_kernel_onesided(alpha: f64, beta: f64, a: f64, x: f64, y: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Parameter("one-sided kernel requires 1 < alpha < 2".into()));
    }
    if (beta - 1.0).abs() > 1e-12 && (beta + 1.0).abs() > 1e-12 {
        return Err(Error::Parameter("one-sided kernel requires beta = +1 or -1".into()));
    }
    let (x, y) = if beta > 0.0 { (x, y) } else { (-x, -y) };
    let pre = (std::f64::consts::FRAC_PI_2 * alpha).cos() / ((2.0 * a).powf(alpha - 1.0) * gamma(alpha));
    // |x - y| + y - x = 2 max(y - x, 0); the max form cannot round negative
    // (the literal sum can, and a negative base under powf yields NaN)
    let first = (2.0 * a * (y - x).max(0.0)).powf(alpha - 1.0);
    let second = (a - x).powf(alpha - 1.0) * (a + y).powf(alpha - 1.0);
    Ok(pre * (first - second))
}

/// Symmetric Cauchy kernel on [-a, a]; diverges logarithmically at x = y.
pub fn cauchy_kernel(a: f64, x: f64, y: f64) -> f64 {
    if x == y {
        return f64::INFINITY;
    }
    let root = ((a * a - x * x) * (a * a - y * y)).max(0.0).sqrt();
    // (a^2 - xy + root) / (a^2 - xy - root) equals its own square after
    // multiplying through by the numerator, since (a^2 - xy)^2 - root^2 =
    // a^2 (x - y)^2; the rewritten form avoids the catastrophic cancellation
    // of the direct denominator near the diagonal
    let num = a * a - x * y + root;
    0.5 * (num / (a * (x - y).abs())).ln()
}

/// Green's function of -(1/2) d^2/dx^2 on [-b, a] with zero boundary data.
pub fn wiener_green(a: f64, b: f64, x: f64, t: f64) -> f64 {
    let scale = 2.0 / (a + b);
    if t <= x {
        scale * (t + b) * (a - x)
    } else {
        scale * (a - t) * (b + x)
    }
}

/// Reduction data for a non-symmetric interval [-b, a]: half-width c and
/// shift delta with Phi(x, y, -b, a) = Phi_sym(x + delta, y + delta, c).
pub fn shift_to_symmetric(b: f64, a: f64) -> (f64, f64) {
    ((a + b) / 2.0, (b - a) / 2.0)
}

impl QuasiPotentialKernel {
    pub fn wiener(a: f64, b: f64) -> Self {
        Self {
            neg: b,
            pos: a,
            kind: KernelKind::WienerGreen,
            diagonal: DiagonalSingularity::None,
            backing: Backing::Closed,
        }
    }

    pub fn cauchy(a: f64) -> Self {
        Self {
            neg: a,
            pos: a,
            kind: KernelKind::Cauchy,
            diagonal: DiagonalSingularity::Log,
            backing: Backing::Closed,
        }
    }

    /// Routes (alpha, beta) to the supported closed forms on [-a, a].
    pub fn stable(alpha: f64, beta: f64, a: f64) -> Result<Self> {
        if (alpha - 2.0).abs() < 1e-12 {
            return Ok(Self::wiener(a, a));
        }
        if (alpha - 1.0).abs() < 1e-12 {
            if beta.abs() < 1e-12 {
                return Ok(Self::cauchy(a));
            }
            return Err(Error::Unsupported(
                "alpha = 1 with beta != 0 has no closed-form kernel".into(),
            ));
        }
        if beta.abs() < 1.0 - 1e-12 {
            let mu = 2.0 - alpha;
            let rho = solve_rho(mu, beta)?;
            let c_alpha = case1_constant(alpha, beta, mu, rho);
            let diagonal = if alpha < 1.0 {
                DiagonalSingularity::Power { exponent: 1.0 - alpha }
            } else {
                DiagonalSingularity::None
            };
            return Ok(Self {
                neg: a,
                pos: a,
                kind: KernelKind::StableCase1 { alpha, beta, mu, rho, c_alpha },
                diagonal,
                backing: Backing::Closed,
            });
        }
        if beta.abs() > 1.0 - 1e-12 && alpha > 1.0 {
            return Ok(Self {
                neg: a,
                pos: a,
                kind: KernelKind::StableOneSided { alpha, beta: beta.signum() },
                diagonal: DiagonalSingularity::None,
                backing: Backing::Closed,
            });
        }
        Err(Error::Unsupported(format!(
            "no kernel for alpha = {alpha}, beta = {beta}: supported are \
             0<alpha<2 with |beta|<1 (alpha != 1), 1<alpha<2 with beta = +/-1, \
             and alpha = 1 with beta = 0"
        )))
    }

    pub fn from_grid(c: f64, xs: Vec<f64>, phi: Vec<f64>, conditioning: f64) -> Result<Self> {
        let n = xs.len();
        if n < 2 || phi.len() != n * n {
            return Err(Error::Grid("grid kernel needs n nodes and n*n values".into()));
        }
        Ok(Self {
            neg: c,
            pos: c,
            kind: KernelKind::GridBacked,
            diagonal: DiagonalSingularity::Log,
            backing: Backing::Grid { xs, phi, conditioning },
        })
    }

    pub fn conditioning(&self) -> Option<f64> {
        match &self.backing {
            Backing::Grid { conditioning, .. } => Some(*conditioning),
            Backing::Closed => None,
        }
    }

    pub fn grid_data(&self) -> Option<(&[f64], &[f64])> {
        match &self.backing {
            Backing::Grid { xs, phi, .. } => Some((xs, phi)),
            Backing::Closed => None,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (-self.neg, self.pos)
    }

    /// Symmetric half-width and the shift applied before closed-form
    /// evaluation.
    fn reduction(&self) -> (f64, f64) {
        shift_to_symmetric(self.neg, self.pos)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match (&self.kind, &self.backing) {
            (KernelKind::WienerGreen, _) => wiener_green(self.pos, self.neg, x, y),
            (KernelKind::Cauchy, _) => {
                let (c, d) = self.reduction();
                cauchy_kernel(c, x + d, y + d)
            }
            (KernelKind::StableCase1 { mu, rho, c_alpha, .. }, _) => {
                let (c, d) = self.reduction();
                case1_eval(c, x + d, y + d, *mu, *rho, *c_alpha)
            }
            (KernelKind::StableOneSided { alpha, beta }, _) => {
                let (c, d) = self.reduction();
                stable_kernel_onesided(*alpha, *beta, c, x + d, y + d).unwrap_or(0.0)
            }
            (KernelKind::GridBacked, Backing::Grid { xs, phi, .. }) => {
                bilinear(xs, phi, x, y)
            }
            (KernelKind::GridBacked, Backing::Closed) => unreachable!(),
        }
    }

    /// Accurate row integral over the domain; exact for the Wiener Green's
    /// function, singularity-aware quadrature otherwise.
    pub fn row_integral(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if let KernelKind::WienerGreen = self.kind {
            return Ok((self.pos - x) * (x + self.neg));
        }
        // a deeply graded node can round exactly onto the diagonal (the
        // innermost panels shrink below one ulp of x near the interval ends);
        // the rule's weight there is below machine precision, so a zero in
        // place of the singular value is exact to within roundoff
        let f = |y: f64| if y == x { 0.0 } else { self.eval(x, y) };
        let mut v = 0.0;
        for (a, b) in [(lo, x), (x, hi)] {
            if b - a < 1e-14 {
                continue;
            }
            // graded toward the diagonal for every closed form: even the
            // bounded kernels are kinked there (the one-sided form has a
            // square-root kink that defeats adaptive error certification),
            // and the grid-backed kernel is merely piecewise linear
            v += quad::graded_toward(&f, a, b, x, 16);
        }
        Ok(v)
    }
}

fn bilinear(xs: &[f64], phi: &[f64], x: f64, y: f64) -> f64 {
    let n = xs.len();
    let locate = |t: f64| -> (usize, f64) {
        if t <= xs[0] {
            return (0, 0.0);
        }
        if t >= xs[n - 1] {
            return (n - 2, 1.0);
        }
        let i = xs.partition_point(|&v| v < t).max(1) - 1;
        let i = i.min(n - 2);
        ((i), (t - xs[i]) / (xs[i + 1] - xs[i]))
    };
    let (i, u) = locate(x);
    let (j, v) = locate(y);
    let p = |r: usize, c: usize| phi[r * n + c];
    p(i, j) * (1.0 - u) * (1.0 - v)
        + p(i + 1, j) * u * (1.0 - v)
        + p(i, j + 1) * (1.0 - u) * v
        + p(i + 1, j + 1) * u * v
}

#[derive(Debug, Clone)]
pub struct MajorantReport {
    pub checked: usize,
    pub violations: Vec<(f64, f64, f64, f64)>,
}

impl MajorantReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Builds a difference majorant phi(d) by sweeping the kernel at each
/// separation and checks |Phi(x,y)| <= phi(x-y) at random probes.
pub fn majorant_check(kernel: &QuasiPotentialKernel, n_probes: usize) -> MajorantReport {
    let (lo, hi) = kernel.domain();
    let span = hi - lo;
    // majorant profile over separations, maximized along each diagonal:
    // coarse sweep, then grid refinement around the best point so the
    // discrete maximum is a genuine upper bound up to a small slack
    let profile = |d: f64| -> f64 {
        // x with x and x - d both inside the domain
        let x_lo = lo.max(lo + d);
        let x_hi = hi.min(hi + d);
        if x_hi <= x_lo {
            return 0.0;
        }
        let m = 128usize;
        let mut best = 0.0f64;
        let mut best_x = x_lo;
        for i in 0..=m {
            let x = x_lo + (x_hi - x_lo) * i as f64 / m as f64;
            let v = kernel.eval(x, x - d).abs();
            if v > best {
                best = v;
                best_x = x;
            }
        }
        let mut half = (x_hi - x_lo) / m as f64;
        for _ in 0..4 {
            let a = (best_x - half).max(x_lo);
            let b = (best_x + half).min(x_hi);
            for i in 0..=32 {
                let x = a + (b - a) * i as f64 / 32.0;
                let v = kernel.eval(x, x - d).abs();
                if v > best {
                    best = v;
                    best_x = x;
                }
            }
            half /= 16.0;
        }
        best * (1.0 + 1e-8)
    };
    let mut violations = Vec::new();
    let mut rng = crate::rng::CounterRng::new(0x6d61_6a6f, 0);
    for _ in 0..n_probes {
        let x = lo + span * rng.uniform();
        let y = lo + span * rng.uniform();
        if (x - y).abs() < 1e-3 * span {
            continue;
        }
        let v = kernel.eval(x, y).abs();
        let bound = profile(x - y);
        if v > bound {
            violations.push((x, y, v, bound));
        }
    }
    MajorantReport { checked: n_probes, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rho_symmetric_case() {
        // beta = 0 makes the equation symmetric: rho = mu / 2
        for alpha in [0.5, 1.5, 1.9] {
            let mu = 2.0 - alpha;
            assert_relative_eq!(solve_rho(mu, 0.0).unwrap(), mu / 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn cauchy_reference_value_and_symmetry() {
        let v = cauchy_kernel(1.0, 0.0, 0.5);
        let exact = 0.25 * ((1.0 + 0.75f64.sqrt()) / (1.0 - 0.75f64.sqrt())).ln();
        assert_relative_eq!(v, exact, epsilon = 1e-14);
        assert!((exact - 0.65848).abs() < 1e-5);
        assert_eq!(cauchy_kernel(1.0, 0.0, 1.0), 0.0);
        for (x, y) in [(0.3, -0.6), (0.9, 0.1), (-0.2, -0.8)] {
            assert_relative_eq!(cauchy_kernel(1.0, x, y), cauchy_kernel(1.0, y, x), epsilon = 1e-13);
            assert_relative_eq!(
                cauchy_kernel(1.0, x, y),
                cauchy_kernel(1.0, -x, -y),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn wiener_green_values_and_ode() {
        assert_relative_eq!(wiener_green(1.0, 1.0, 0.0, 0.0), 1.0, epsilon = 1e-15);
        assert_eq!(wiener_green(1.0, 1.0, 1.0, 0.3), 0.0);
        // solving -(1/2) y'' = 1 gives y = a^2 - x^2 on [-a, a]
        let a = 1.0;
        for x in [-0.7, 0.0, 0.4] {
            let v = quad::adaptive(&|t: f64| wiener_green(a, a, x, t), -a, a, 1e-12, "ode").unwrap();
            assert_relative_eq!(v, a * a - x * x, epsilon = 1e-9);
        }
    }

    #[test]
    fn one_sided_values() {
        // x = a kills both terms
        assert_relative_eq!(
            stable_kernel_onesided(1.5, 1.0, 1.0, 1.0, 0.3).unwrap(),
            0.0,
            epsilon = 1e-13
        );
        // center value: cos(3 pi / 4) / (sqrt(2) Gamma(1.5)) * (0 - 1)
        let v = stable_kernel_onesided(1.5, 1.0, 1.0, 0.0, 0.0).unwrap();
        let exact = -(std::f64::consts::FRAC_PI_2 * 1.5).cos() / (2.0f64.sqrt() * gamma(1.5));
        assert_relative_eq!(v, exact, epsilon = 1e-13);
        assert!((v - 0.5642).abs() < 1e-4);
        assert!(v > 0.0);
        // mirror symmetry between the two orientations
        for (x, y) in [(0.2, -0.5), (-0.7, 0.1)] {
            assert_relative_eq!(
                stable_kernel_onesided(1.5, -1.0, 1.0, x, y).unwrap(),
                stable_kernel_onesided(1.5, 1.0, 1.0, -x, -y).unwrap(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn case1_symmetry_positivity_boundary() {
        for (x, y) in [(0.0, 0.3), (0.5, -0.4), (-0.8, 0.2)] {
            let v = stable_kernel_case1(1.5, 0.0, 1.0, x, y).unwrap();
            let w = stable_kernel_case1(1.5, 0.0, 1.0, y, x).unwrap();
            assert!(v > 0.0);
            assert_relative_eq!(v, w, max_relative = 1e-9);
        }
        assert_relative_eq!(
            stable_kernel_case1(1.5, 0.0, 1.0, 1.0, 0.2).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        // skewed case stays nonnegative
        for (x, y) in [(0.1, 0.6), (-0.5, 0.5)] {
            assert!(stable_kernel_case1(1.3, 0.4, 1.0, x, y).unwrap() >= 0.0);
        }
    }

    #[test]
    fn case1_scaling_self_consistency() {
        // Phi_a(x, y) = a^{alpha-1} Phi_1(x/a, y/a); `a` enters the formula in
        // several places so this exercises the evaluation nontrivially
        let (alpha, beta) = (1.5, 0.3);
        for (a, x, y) in [(2.0, 0.6, -0.9), (0.5, 0.1, 0.3)] {
            let lhs = stable_kernel_case1(alpha, beta, a, x, y).unwrap();
            let rhs = a.powf(alpha - 1.0) * stable_kernel_case1(alpha, beta, 1.0, x / a, y / a).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-9);
        }
    }

    #[test]
    fn routing_rejects_unsupported() {
        assert!(QuasiPotentialKernel::stable(1.0, 0.5, 1.0).is_err());
        assert!(QuasiPotentialKernel::stable(0.7, 1.0, 1.0).is_err());
        assert!(QuasiPotentialKernel::stable(1.5, 0.0, 1.0).is_ok());
        assert!(QuasiPotentialKernel::stable(1.5, 1.0, 1.0).is_ok());
        assert!(QuasiPotentialKernel::stable(1.0, 0.0, 1.0).is_ok());
        assert!(QuasiPotentialKernel::stable(2.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn shift_covariance_wiener() {
        // direct [-3, 1] Green's function equals the shifted symmetric one
        let k = QuasiPotentialKernel::wiener(1.0, 3.0);
        let (c, d) = shift_to_symmetric(3.0, 1.0);
        assert_eq!((c, d), (2.0, 1.0));
        let mut rng = crate::rng::CounterRng::new(11, 0);
        for _ in 0..20 {
            let x = -3.0 + 4.0 * rng.uniform();
            let y = -3.0 + 4.0 * rng.uniform();
            assert_relative_eq!(
                k.eval(x, y),
                wiener_green(c, c, x + d, y + d),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn row_integrals() {
        let k = QuasiPotentialKernel::wiener(1.0, 1.0);
        assert_relative_eq!(k.row_integral(0.3).unwrap(), (1.0 - 0.3) * 1.3, epsilon = 1e-13);
        let k = QuasiPotentialKernel::cauchy(1.0);
        let direct = quad::graded_toward(&|y: f64| cauchy_kernel(1.0, 0.4, y), -1.0, 0.4, 0.4, 16)
            + quad::graded_toward(&|y: f64| cauchy_kernel(1.0, 0.4, y), 0.4, 1.0, 0.4, 16);
        assert_relative_eq!(k.row_integral(0.4).unwrap(), direct, max_relative = 1e-10);
    }

    #[test]
    fn grid_backed_round_trip() {
        // grid sampling of a closed form interpolates back to it
        let base = QuasiPotentialKernel::wiener(1.0, 1.0);
        let n = 201;
        let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let mut phi = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                phi[i * n + j] = base.eval(xs[i], xs[j]);
            }
        }
        let grid = QuasiPotentialKernel::from_grid(1.0, xs, phi, 1.0).unwrap();
        for (x, y) in [(0.123, -0.456), (0.9, 0.2), (-0.3, -0.31)] {
            assert!((grid.eval(x, y) - base.eval(x, y)).abs() < 5e-4);
        }
    }

    #[test]
    fn majorant_reports() {
        let rep = majorant_check(&QuasiPotentialKernel::wiener(1.0, 1.0), 200);
        assert!(rep.ok());
        let rep = majorant_check(&QuasiPotentialKernel::cauchy(1.0), 0);
        assert!(rep.ok() && rep.checked == 0);
    }
}
