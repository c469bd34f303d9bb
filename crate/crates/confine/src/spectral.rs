//! Nystrom discretization of the quasi-potential operator B, its spectrum
//! with bi-orthogonal eigenfunctions, survival probabilities p(t, Delta),
//! the resolvent, scaling relations, and regularity diagnostics.

use crate::eig;
use crate::error::{Error, Result};
use crate::quad;
use crate::quasipotential::QuasiPotentialKernel;
use crate::rng::CounterRng;
use crate::sampled::SampledFunction;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[derive(Clone)]
pub struct NystromSystem {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// row-major n x n matrix approximating B with a diagonal correction
    pub matrix: Vec<f64>,
    pub kernel: QuasiPotentialKernel,
}

/// Gauss-Legendre Nystrom matrix. Off-diagonal entries are plain
/// kernel-times-weight; the diagonal absorbs the singular (or merely kinked)
/// diagonal of the kernel through exact row integrals:
/// (Bf)(x_i) ~ sum_j w_j Phi_ij (f_j - f_i) + f_i * int Phi(x_i, y) dy.
pub fn assemble(kernel: &QuasiPotentialKernel, n: usize) -> Result<NystromSystem> {
    if n < 16 {
        return Err(Error::Grid("assembly needs n >= 16".into()));
    }
    let (lo, hi) = kernel.domain();
    let (nodes, weights) = quad::gauss_legendre_on(n, lo, hi);
    let mut matrix = vec![0.0; n * n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let v = weights[j] * kernel.eval(nodes[i], nodes[j]);
            if !v.is_finite() {
                return Err(Error::Numerical(format!(
                    "kernel evaluation failed at ({}, {})",
                    nodes[i], nodes[j]
                )));
            }
            matrix[i * n + j] = v;
            row_sum += v;
        }
        let diag = kernel.row_integral(nodes[i])? - row_sum;
        if !diag.is_finite() {
            return Err(Error::Numerical(format!(
                "row integral non-finite at node {}",
                nodes[i]
            )));
        }
        matrix[i * n + i] = diag;
    }
    Ok(NystromSystem {
        nodes,
        weights,
        matrix,
        kernel: kernel.clone(),
    })
}

#[derive(Clone)]
pub struct SpectralDecomposition {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// sorted by descending modulus; lambda_1 first
    pub eigenvalues: Vec<Complex64>,
    /// right eigenfunctions g_k sampled at the nodes
    pub right: Vec<Vec<Complex64>>,
    /// left eigenfunctions h_k, normalized to (g_k, h_k) = 1
    pub left: Vec<Vec<Complex64>>,
    kernel: QuasiPotentialKernel,
}

/// Bilinear (unconjugated) pairing sum w_i f_i g_i: the natural duality for a
/// real operator, where left and right eigenvectors of the *same* eigenvalue
/// pair up even when eigenvalues come in complex-conjugate pairs.
fn inner(w: &[f64], f: &[Complex64], g: &[Complex64]) -> Complex64 {
    w.iter()
        .zip(f.iter().zip(g))
        .map(|(&w, (&f, &g))| w * f * g)
        .sum()
}

/// Top-k eigenpairs of the discretized operator, with left eigenfunctions
/// from the transposed system and bi-orthonormal scaling.
pub fn eigensystem(sys: &NystromSystem, k: usize) -> Result<SpectralDecomposition> {
    let n = sys.nodes.len();
    if k > n {
        return Err(Error::Parameter(format!("requested {k} eigenpairs from an n = {n} system")));
    }
    let right_raw = eig::eigen(&sys.matrix, n);
    let mut at = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            at[i * n + j] = sys.matrix[j * n + i];
        }
    }
    let left_raw = eig::eigen(&at, n);

    // order right eigenpairs by descending modulus
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        right_raw.values[b]
            .norm()
            .partial_cmp(&right_raw.values[a].norm())
            .unwrap()
    });

    let mut eigenvalues = Vec::with_capacity(k);
    let mut right = Vec::with_capacity(k);
    let mut left = Vec::with_capacity(k);
    let mut used = vec![false; n];
    for &idx in order.iter().take(k) {
        let lam = right_raw.values[idx];
        let g = right_raw.vectors[idx].clone();
        // nearest unused left eigenvalue
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if used[j] {
                continue;
            }
            let d = (left_raw.values[j] - lam).norm();
            if d < best_d {
                best_d = d;
                best = Some(j);
            }
        }
        let j = best.ok_or_else(|| Error::Numerical("left/right eigenvalue pairing failed".into()))?;
        if best_d > 1e-6 * lam.norm().max(1e-12) {
            return Err(Error::Numerical(format!(
                "left and right spectra disagree near {lam}: gap {best_d}"
            )));
        }
        used[j] = true;
        let mut h = left_raw.vectors[j].clone();
        // transpose eigenvectors approximate w_i h(x_i): the weighted adjoint
        // is D^{-1} M^T D with D = diag(w), so the function samples of the
        // left eigenfunction are the transpose eigenvector divided by the
        // weights
        for (v, &w) in h.iter_mut().zip(&sys.weights) {
            *v /= w;
        }
        let c = inner(&sys.weights, &g, &h);
        if c.norm() < 1e-12 {
            return Err(Error::Numerical(format!(
                "normalization breakdown at eigenvalue {lam}: (g, h) ~ 0 (defective pair?)"
            )));
        }
        // scale so that sum w_i g_i h_i = 1
        for v in h.iter_mut() {
            *v /= c;
        }
        eigenvalues.push(lam);
        right.push(g);
        left.push(h);
    }

    // sign-fix the leading pair: integrals of g_1 and h_1 positive
    if !eigenvalues.is_empty() {
        let int_g: Complex64 = sys
            .weights
            .iter()
            .zip(&right[0])
            .map(|(&w, &g)| w * g)
            .sum();
        if int_g.re < 0.0 {
            for v in right[0].iter_mut() {
                *v = -*v;
            }
            for v in left[0].iter_mut() {
                *v = -*v;
            }
        }
    }

    Ok(SpectralDecomposition {
        nodes: sys.nodes.clone(),
        weights: sys.weights.clone(),
        eigenvalues,
        right,
        left,
        kernel: sys.kernel.clone(),
    })
}

impl SpectralDecomposition {
    /// Leading eigenvalue, asserted real and positive.
    pub fn lambda1(&self) -> Result<f64> {
        let l = self.eigenvalues[0];
        if l.im.abs() > 1e-10 * l.norm().max(1e-12) || l.re <= 0.0 {
            return Err(Error::Numerical(format!("leading eigenvalue {l} is not real positive")));
        }
        Ok(l.re)
    }

    /// Nystrom natural extension of g_k off the nodes, with singularity
    /// subtraction: lambda g(x) = sum w_j K(x, x_j) (g_j - g(x)) + g(x) R(x)
    /// solved for g(x), where R is the exact row integral. This cancels the
    /// quadrature error the kernel's diagonal kink or singularity would
    /// otherwise inject.
    pub fn g_at(&self, k: usize, x: f64) -> Complex64 {
        let lam = self.eigenvalues[k];
        let mut acc = Complex64::new(0.0, 0.0);
        let mut s = 0.0;
        for (j, (&w, &xj)) in self.weights.iter().zip(&self.nodes).enumerate() {
            let kv = w * self.kernel.eval(x, xj);
            acc += kv * self.right[k][j];
            s += kv;
        }
        match self.kernel.row_integral(x) {
            Ok(r) => acc / (lam + s - r),
            Err(_) => acc / lam,
        }
    }

    pub fn int_h(&self, k: usize) -> Complex64 {
        self.weights
            .iter()
            .zip(&self.left[k])
            .map(|(&w, &h)| w * h)
            .sum()
    }

    /// Integral of h_k over a subinterval, by extension quadrature.
    pub fn int_h_over(&self, k: usize, lo: f64, hi: f64) -> Result<f64> {
        // h_k extension through the adjoint kernel, with the same singularity
        // subtraction as g_at, using the exact column integral of the kernel
        let lam = self.eigenvalues[k];
        let (d_lo, d_hi) = self.kernel.domain();
        let h_at = |x: f64| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut s = 0.0;
            for (j, (&w, &xj)) in self.weights.iter().zip(&self.nodes).enumerate() {
                let kv = w * self.kernel.eval(xj, x);
                acc += kv * self.left[k][j];
                s += kv;
            }
            let f = |y: f64| if y == x { 0.0 } else { self.kernel.eval(y, x) };
            let mut ci = 0.0;
            for (a0, b0) in [(d_lo, x), (x, d_hi)] {
                if b0 - a0 < 1e-14 {
                    continue;
                }
                ci += quad::graded_toward(&f, a0, b0, x, 16);
            }
            acc / (lam + s - ci)
        };
        let re = quad::adaptive(&|x: f64| h_at(x).re, lo, hi, 1e-9, "h integral")?;
        let im = quad::adaptive(&|x: f64| h_at(x).im, lo, hi, 1e-9, "h integral")?;
        if im.abs() > 1e-8 * re.abs().max(1e-12) {
            return Err(Error::Numerical("eigenfunction integral has an imaginary part".into()));
        }
        Ok(re)
    }

    /// Spectral coefficient c_k = g_k(0) int h_k.
    pub fn coefficient(&self, k: usize) -> Complex64 {
        self.g_at(k, 0.0) * self.int_h(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SurvivalMethod {
    SpectralSeries,
    Asymptotic,
    Resolvent,
    Oracle,
    MonteCarlo,
}

impl SurvivalMethod {
    pub fn label(&self) -> &'static str {
        match self {
            SurvivalMethod::SpectralSeries => "series",
            SurvivalMethod::Asymptotic => "asymptotic",
            SurvivalMethod::Resolvent => "resolvent",
            SurvivalMethod::Oracle => "oracle",
            SurvivalMethod::MonteCarlo => "mc",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SurvivalEstimate {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub method: SurvivalMethod,
    pub lambda1: f64,
    pub c1: f64,
    pub warning: Option<String>,
}

/// p(t, Delta) ~ sum_k exp(-t / lambda_k) g_k(0) int h_k, truncated at the
/// eigenvalues with |lambda_k| / lambda_1 > 1e-3 (at most 50 terms).
pub fn survival_series(dec: &SpectralDecomposition, times: &[f64]) -> Result<SurvivalEstimate> {
    let lambda1 = dec.lambda1()?;
    let (lo, hi) = dec.kernel.domain();
    if !(lo < 0.0 && hi > 0.0) {
        return Err(Error::Domain("the series starts the process at 0, which must be interior".into()));
    }
    let mut kmax = 0;
    while kmax < dec.eigenvalues.len()
        && dec.eigenvalues[kmax].norm() > 1e-3 * lambda1
        && kmax < 50
    {
        kmax += 1;
    }
    let coefs: Vec<Complex64> = (0..kmax).map(|k| dec.coefficient(k)).collect();
    let c1 = coefs[0].re;

    let mut values = Vec::with_capacity(times.len());
    let mut errors = Vec::with_capacity(times.len());
    let mut warning = None;
    for &t in times {
        if t <= 0.0 {
            return Err(Error::Parameter("survival series needs t > 0".into()));
        }
        let mut p = Complex64::new(0.0, 0.0);
        for k in 0..kmax {
            p += coefs[k] * (-t / dec.eigenvalues[k]).exp();
        }
        if p.im.abs() > 1e-8 * p.re.abs().max(1e-12) {
            return Err(Error::Numerical(format!(
                "survival value at t = {t} has imaginary part {}",
                p.im
            )));
        }
        // remainder scale from the first dropped eigenvalue
        let rem = if kmax < dec.eigenvalues.len() {
            let ln = dec.eigenvalues[kmax].norm().max(1e-300);
            (-t * dec.eigenvalues[kmax].re / (ln * ln)).exp()
        } else {
            0.0
        };
        if rem > 1e-2 && warning.is_none() {
            warning = Some(format!(
                "truncation bound {rem:.2e} at t = {t}: the series is intended for moderate and large t"
            ));
        }
        values.push(p.re);
        errors.push(rem);
    }
    Ok(SurvivalEstimate {
        times: times.to_vec(),
        values,
        errors,
        method: SurvivalMethod::SpectralSeries,
        lambda1,
        c1,
        warning,
    })
}

/// Long-time law p(t) ~ c_1 exp(-t / lambda_1); requires a simple leading
/// eigenvalue with a spectral gap.
pub fn leading_asymptotics(dec: &SpectralDecomposition) -> Result<(f64, f64)> {
    let lambda1 = dec.lambda1()?;
    if dec.eigenvalues.len() > 1 {
        let l2 = dec.eigenvalues[1].norm();
        if l2 > lambda1 * (1.0 - 1e-8) {
            return Err(Error::Numerical(format!(
                "leading eigenvalue nearly degenerate: |lambda_2| = {l2}, lambda_1 = {lambda1}"
            )));
        }
    }
    let c1 = dec.coefficient(0);
    if c1.im.abs() > 1e-8 * c1.re.abs().max(1e-12) {
        return Err(Error::Numerical("leading coefficient is not real".into()));
    }
    Ok((lambda1, c1.re))
}

pub fn asymptotic_survival(
    dec: &SpectralDecomposition,
    times: &[f64],
) -> Result<SurvivalEstimate> {
    let (lambda1, c1) = leading_asymptotics(dec)?;
    let values: Vec<f64> = times.iter().map(|&t| c1 * (-t / lambda1).exp()).collect();
    Ok(SurvivalEstimate {
        times: times.to_vec(),
        errors: vec![0.0; times.len()],
        values,
        method: SurvivalMethod::Asymptotic,
        lambda1,
        c1,
        warning: None,
    })
}

/// Conditional long-time coefficient g_1(x0) int_{Delta_1} h_1 for paths
/// started at x0 and observed in the subinterval Delta_1.
pub fn conditional_asymptotics(
    dec: &SpectralDecomposition,
    x0: f64,
    sub: (f64, f64),
) -> Result<f64> {
    let (lo, hi) = dec.kernel.domain();
    let (s_lo, s_hi) = sub;
    if !(s_lo >= lo - 1e-12 && s_hi <= hi + 1e-12 && s_lo < s_hi) {
        return Err(Error::Domain("subinterval must sit inside the domain".into()));
    }
    if !(x0 >= s_lo && x0 <= s_hi) {
        return Err(Error::Domain("start point must lie in the subinterval".into()));
    }
    let g = dec.g_at(0, x0);
    if g.im.abs() > 1e-8 * g.re.abs().max(1e-12) {
        return Err(Error::Numerical("leading eigenfunction is not real".into()));
    }
    let ih = dec.int_h_over(0, s_lo, s_hi)?;
    Ok(g.re * ih)
}

/// psi(., s) = (I + s B^*)^{-1} Phi(0, .) on the Nystrom grid.
pub fn resolvent_psi(sys: &NystromSystem, s: f64) -> Result<SampledFunction> {
    if s < 0.0 {
        return Err(Error::Parameter("resolvent parameter must be nonnegative".into()));
    }
    let n = sys.nodes.len();
    // adjoint discretization with its own diagonal correction
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut col_sum = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let v = sys.weights[j] * sys.kernel.eval(sys.nodes[j], sys.nodes[i]);
            a[(i, j)] = v;
            col_sum += v;
        }
        // column integral of the kernel: int Phi(y, x_i) dy
        let (lo, hi) = sys.kernel.domain();
        let xi = sys.nodes[i];
        // zero on the diagonal: a graded node can round onto it, and its
        // quadrature weight is below machine precision there
        let f = |y: f64| if y == xi { 0.0 } else { sys.kernel.eval(y, xi) };
        let mut ci = 0.0;
        for (a0, b0) in [(lo, xi), (xi, hi)] {
            if b0 - a0 < 1e-14 {
                continue;
            }
            ci += quad::graded_toward(&f, a0, b0, xi, 16);
        }
        a[(i, i)] = ci - col_sum;
    }
    let system = DMatrix::<f64>::identity(n, n) + s * a;
    let rhs = DVector::from_fn(n, |i, _| sys.kernel.eval(0.0, sys.nodes[i]));
    let psi = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical(format!("resolvent system singular at s = {s}")))?;
    SampledFunction::new(sys.nodes.clone(), psi.iter().copied().collect(), false)
}

/// lambda_1 on [-a, a] from the unit-interval value: a^alpha lambda_1(1).
pub fn stable_scaling(lambda1_unit: f64, a: f64, alpha: f64) -> Result<f64> {
    if a <= 0.0 || !(0.0..=2.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::Parameter("scaling needs a > 0 and alpha in (0, 2]".into()));
    }
    Ok(a.powf(alpha) * lambda1_unit)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RatioLimit {
    Infinity,
    Zero,
    Finite(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegimeLimit {
    Zero,
    One,
    SurvivalAt(f64),
}

/// Long-time confinement regimes under the scaling t / a(t)^alpha.
pub fn regime_classify(ratio: RatioLimit) -> RegimeLimit {
    match ratio {
        RatioLimit::Infinity => RegimeLimit::Zero,
        RatioLimit::Zero => RegimeLimit::One,
        RatioLimit::Finite(t) => RegimeLimit::SurvivalAt(t),
    }
}

#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub min_kernel_value: f64,
    pub max_boundary_value: f64,
    pub sector_half_angle: f64,
    /// every eigenvalue inside |z - lambda_1/2| <= lambda_1/2 (scale-invariant
    /// reading of the disk bound)
    pub disk_ok: bool,
    /// the literally printed radius-1/2 disk, flagged when it disagrees
    pub disk_printed_ok: bool,
    pub notes: Vec<String>,
}

pub fn regularity_report(
    sys: &NystromSystem,
    dec: &SpectralDecomposition,
    n_trials: usize,
    seed: u64,
) -> Result<RegularityReport> {
    let n = sys.nodes.len();
    let mut min_phi = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            min_phi = min_phi.min(sys.kernel.eval(sys.nodes[i], sys.nodes[j]));
        }
    }
    let (lo, hi) = sys.kernel.domain();
    let mut max_boundary: f64 = 0.0;
    for p in 0..40 {
        let y = lo + (hi - lo) * p as f64 / 39.0;
        max_boundary = max_boundary.max(sys.kernel.eval(lo, y).abs());
        max_boundary = max_boundary.max(sys.kernel.eval(hi, y).abs());
        max_boundary = max_boundary.max(sys.kernel.eval(y, lo).abs());
        max_boundary = max_boundary.max(sys.kernel.eval(y, hi).abs());
    }

    // numerical range over random complex trial vectors
    let mut rng = CounterRng::new(seed, 0);
    let mut half_angle: f64 = 0.0;
    for _ in 0..n_trials {
        let f: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.normal(), rng.normal()))
            .collect();
        let mut form = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut bf = Complex64::new(0.0, 0.0);
            for j in 0..n {
                bf += sys.matrix[i * n + j] * f[j];
            }
            form += sys.weights[i] * bf * f[i].conj();
        }
        if form.norm() > 1e-14 {
            half_angle = half_angle.max(form.arg().abs());
        }
    }

    let lambda1 = dec.lambda1()?;
    let mut disk_ok = true;
    let mut disk_printed_ok = true;
    for l in &dec.eigenvalues {
        let center = Complex64::new(lambda1 / 2.0, 0.0);
        if (l - center).norm() > lambda1 / 2.0 * (1.0 + 1e-6) {
            disk_ok = false;
        }
        if (l - center).norm() > 0.5 + 1e-12 {
            disk_printed_ok = false;
        }
    }
    let mut notes = Vec::new();
    if disk_ok != disk_printed_ok {
        notes.push(
            "radius-lambda_1/2 disk and literal radius-1/2 disk disagree; the \
             scale-invariant version is the one checked"
                .into(),
        );
    }
    if dec.eigenvalues.len() > 1 {
        let gap = lambda1 - dec.eigenvalues[1].norm();
        if gap < 1e-8 * lambda1 {
            notes.push("leading eigenvalue nearly degenerate (possible index > 1)".into());
        }
    }
    Ok(RegularityReport {
        min_kernel_value: min_phi,
        max_boundary_value: max_boundary,
        sector_half_angle: half_angle,
        disk_ok,
        disk_printed_ok,
        notes,
    })
}
