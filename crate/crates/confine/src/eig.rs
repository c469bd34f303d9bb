//! Dense real nonsymmetric eigenproblem: Householder reduction to Hessenberg
//! form followed by the shifted double QR iteration with accumulated
//! transformations and back-substituted eigenvectors (the classic
//! EISPACK/JAMA `orthes` + `hqr2` pair, translated with explicit signed
//! indices so the countdown loops survive `usize`).

use num_complex::Complex64;

pub struct Eigen {
    pub n: usize,
    /// eigenvalues, unsorted (as produced by the QR sweep)
    pub values: Vec<Complex64>,
    /// right eigenvectors, `vectors[k]` pairs with `values[k]`; unnormalized
    pub vectors: Vec<Vec<Complex64>>,
}

struct Work {
    n: usize,
    h: Vec<f64>,
    v: Vec<f64>,
    d: Vec<f64>,
    e: Vec<f64>,
}

impl Work {
    #[inline]
    fn h(&self, i: isize, j: isize) -> f64 {
        self.h[i as usize * self.n + j as usize]
    }
    #[inline]
    fn hs(&mut self, i: isize, j: isize, x: f64) {
        self.h[i as usize * self.n + j as usize] = x;
    }
    #[inline]
    fn v(&self, i: isize, j: isize) -> f64 {
        self.v[i as usize * self.n + j as usize]
    }
    #[inline]
    fn vs(&mut self, i: isize, j: isize, x: f64) {
        self.v[i as usize * self.n + j as usize] = x;
    }
}

fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

fn orthes(w: &mut Work) {
    let n = w.n as isize;
    let low: isize = 0;
    let high = n - 1;
    let mut ort = vec![0.0; w.n];

    let mut m = low + 1;
    while m <= high - 1 {
        let mut scale = 0.0;
        for i in m..=high {
            scale += w.h(i, m - 1).abs();
        }
        if scale != 0.0 {
            let mut hsum = 0.0;
            for i in (m..=high).rev() {
                ort[i as usize] = w.h(i, m - 1) / scale;
                hsum += ort[i as usize] * ort[i as usize];
            }
            let mut g = hsum.sqrt();
            if ort[m as usize] > 0.0 {
                g = -g;
            }
            hsum -= ort[m as usize] * g;
            ort[m as usize] -= g;

            for j in m..n {
                let mut f = 0.0;
                for i in (m..=high).rev() {
                    f += ort[i as usize] * w.h(i, j);
                }
                f /= hsum;
                for i in m..=high {
                    let x = w.h(i, j) - f * ort[i as usize];
                    w.hs(i, j, x);
                }
            }
            for i in 0..=high {
                let mut f = 0.0;
                for j in (m..=high).rev() {
                    f += ort[j as usize] * w.h(i, j);
                }
                f /= hsum;
                for j in m..=high {
                    let x = w.h(i, j) - f * ort[j as usize];
                    w.hs(i, j, x);
                }
            }
            ort[m as usize] *= scale;
            w.hs(m, m - 1, scale * g);
        }
        m += 1;
    }

    for i in 0..n {
        for j in 0..n {
            w.vs(i, j, if i == j { 1.0 } else { 0.0 });
        }
    }
    let mut m = high - 1;
    while m >= low + 1 {
        if w.h(m, m - 1) != 0.0 {
            for i in (m + 1)..=high {
                ort[i as usize] = w.h(i, m - 1);
            }
            for j in m..=high {
                let mut g = 0.0;
                for i in m..=high {
                    g += ort[i as usize] * w.v(i, j);
                }
                g = (g / ort[m as usize]) / w.h(m, m - 1);
                for i in m..=high {
                    let x = w.v(i, j) + g * ort[i as usize];
                    w.vs(i, j, x);
                }
            }
        }
        m -= 1;
    }
}

#[allow(clippy::needless_range_loop)]
fn hqr2(w: &mut Work) {
    let nn = w.n as isize;
    let mut n = nn - 1;
    let low: isize = 0;
    let high = nn - 1;
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut t, mut x, mut y, mut ww);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm += w.h(i, j).abs();
        }
    }

    let mut iter = 0;
    while n >= low {
        // look for a single small sub-diagonal element
        let mut l = n;
        while l > low {
            s = w.h(l - 1, l - 1).abs() + w.h(l, l).abs();
            if s == 0.0 {
                s = norm;
            }
            if w.h(l, l - 1).abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // one root found
            let x = w.h(n, n) + exshift;
            w.hs(n, n, x);
            w.d[n as usize] = x;
            w.e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // two roots found
            ww = w.h(n, n - 1) * w.h(n - 1, n);
            p = (w.h(n - 1, n - 1) - w.h(n, n)) / 2.0;
            q = p * p + ww;
            z = q.abs().sqrt();
            let hx = w.h(n, n) + exshift;
            w.hs(n, n, hx);
            let hy = w.h(n - 1, n - 1) + exshift;
            w.hs(n - 1, n - 1, hy);
            x = hx;

            if q >= 0.0 {
                // real pair
                z = if p >= 0.0 { p + z } else { p - z };
                w.d[(n - 1) as usize] = x + z;
                w.d[n as usize] = w.d[(n - 1) as usize];
                if z != 0.0 {
                    w.d[n as usize] = x - ww / z;
                }
                w.e[(n - 1) as usize] = 0.0;
                w.e[n as usize] = 0.0;
                x = w.h(n, n - 1);
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in (n - 1)..nn {
                    z = w.h(n - 1, j);
                    w.hs(n - 1, j, q * z + p * w.h(n, j));
                    w.hs(n, j, q * w.h(n, j) - p * z);
                }
                for i in 0..=n {
                    z = w.h(i, n - 1);
                    w.hs(i, n - 1, q * z + p * w.h(i, n));
                    w.hs(i, n, q * w.h(i, n) - p * z);
                }
                for i in low..=high {
                    z = w.v(i, n - 1);
                    w.vs(i, n - 1, q * z + p * w.v(i, n));
                    w.vs(i, n, q * w.v(i, n) - p * z);
                }
            } else {
                // complex pair
                w.d[(n - 1) as usize] = x + p;
                w.d[n as usize] = x + p;
                w.e[(n - 1) as usize] = z;
                w.e[n as usize] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // no convergence yet: form shift
            x = w.h(n, n);
            y = 0.0;
            ww = 0.0;
            if l < n {
                y = w.h(n - 1, n - 1);
                ww = w.h(n, n - 1) * w.h(n - 1, n);
            }

            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    let v = w.h(i, i) - x;
                    w.hs(i, i, v);
                }
                s = w.h(n, n - 1).abs() + w.h(n - 1, n - 2).abs();
                x = 0.75 * s;
                y = x;
                ww = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + ww;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - ww / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        let v = w.h(i, i) - s;
                        w.hs(i, i, v);
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    ww = x;
                }
            }
            iter += 1;

            // two consecutive small sub-diagonal elements?
            let mut m = n - 2;
            while m >= l {
                z = w.h(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - ww) / w.h(m + 1, m) + w.h(m, m + 1);
                q = w.h(m + 1, m + 1) - z - r - s;
                r = w.h(m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if w.h(m, m - 1).abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (w.h(m - 1, m - 1).abs() + z.abs() + w.h(m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=n {
                w.hs(i, i - 2, 0.0);
                if i > m + 2 {
                    w.hs(i, i - 3, 0.0);
                }
            }

            // double QR step on rows l..n, columns m..n
            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = w.h(k, k - 1);
                    q = w.h(k + 1, k - 1);
                    r = if notlast { w.h(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        w.hs(k, k - 1, -s * x);
                    } else if l != m {
                        let v = -w.h(k, k - 1);
                        w.hs(k, k - 1, v);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..nn {
                        p = w.h(k, j) + q * w.h(k + 1, j);
                        if notlast {
                            p += r * w.h(k + 2, j);
                            let v = w.h(k + 2, j) - p * z;
                            w.hs(k + 2, j, v);
                        }
                        let v0 = w.h(k, j) - p * x;
                        w.hs(k, j, v0);
                        let v1 = w.h(k + 1, j) - p * y;
                        w.hs(k + 1, j, v1);
                    }
                    for i in 0..=n.min(k + 3) {
                        p = x * w.h(i, k) + y * w.h(i, k + 1);
                        if notlast {
                            p += z * w.h(i, k + 2);
                            let v = w.h(i, k + 2) - p * r;
                            w.hs(i, k + 2, v);
                        }
                        let v0 = w.h(i, k) - p;
                        w.hs(i, k, v0);
                        let v1 = w.h(i, k + 1) - p * q;
                        w.hs(i, k + 1, v1);
                    }
                    for i in low..=high {
                        p = x * w.v(i, k) + y * w.v(i, k + 1);
                        if notlast {
                            p += z * w.v(i, k + 2);
                            let v = w.v(i, k + 2) - p * r;
                            w.vs(i, k + 2, v);
                        }
                        let v0 = w.v(i, k) - p;
                        w.vs(i, k, v0);
                        let v1 = w.v(i, k + 1) - p * q;
                        w.vs(i, k + 1, v1);
                    }
                }
            }
        }
    }

    // back-substitution for the eigenvectors of the triangular form
    if norm == 0.0 {
        return;
    }
    for nb in (0..nn).rev() {
        p = w.d[nb as usize];
        q = w.e[nb as usize];

        if q == 0.0 {
            // real vector
            let mut l = nb;
            w.hs(nb, nb, 1.0);
            for i in (0..nb).rev() {
                ww = w.h(i, i) - p;
                r = 0.0;
                for j in l..=nb {
                    r += w.h(i, j) * w.h(j, nb);
                }
                if w.e[i as usize] < 0.0 {
                    z = ww;
                    s = r;
                } else {
                    l = i;
                    if w.e[i as usize] == 0.0 {
                        if ww != 0.0 {
                            w.hs(i, nb, -r / ww);
                        } else {
                            w.hs(i, nb, -r / (eps * norm));
                        }
                    } else {
                        x = w.h(i, i + 1);
                        y = w.h(i + 1, i);
                        q = (w.d[i as usize] - p) * (w.d[i as usize] - p)
                            + w.e[i as usize] * w.e[i as usize];
                        t = (x * s - z * r) / q;
                        w.hs(i, nb, t);
                        if x.abs() > z.abs() {
                            let v = (-r - ww * t) / x;
                            w.hs(i + 1, nb, v);
                        } else {
                            let v = (-s - y * t) / z;
                            w.hs(i + 1, nb, v);
                        }
                    }
                    t = w.h(i, nb).abs();
                    if (eps * t) * t > 1.0 {
                        for j in i..=nb {
                            let v = w.h(j, nb) / t;
                            w.hs(j, nb, v);
                        }
                    }
                }
            }
        } else if q < 0.0 {
            // complex vector (second member of the pair)
            let mut l = nb - 1;
            if w.h(nb, nb - 1).abs() > w.h(nb - 1, nb).abs() {
                w.hs(nb - 1, nb - 1, q / w.h(nb, nb - 1));
                let v = -(w.h(nb, nb) - p) / w.h(nb, nb - 1);
                w.hs(nb - 1, nb, v);
            } else {
                let (cr, ci) = cdiv(0.0, -w.h(nb - 1, nb), w.h(nb - 1, nb - 1) - p, q);
                w.hs(nb - 1, nb - 1, cr);
                w.hs(nb - 1, nb, ci);
            }
            w.hs(nb, nb - 1, 0.0);
            w.hs(nb, nb, 1.0);
            for i in (0..nb - 1).rev() {
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in l..=nb {
                    ra += w.h(i, j) * w.h(j, nb - 1);
                    sa += w.h(i, j) * w.h(j, nb);
                }
                ww = w.h(i, i) - p;

                if w.e[i as usize] < 0.0 {
                    z = ww;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if w.e[i as usize] == 0.0 {
                        let (cr, ci) = cdiv(-ra, -sa, ww, q);
                        w.hs(i, nb - 1, cr);
                        w.hs(i, nb, ci);
                    } else {
                        x = w.h(i, i + 1);
                        y = w.h(i + 1, i);
                        let mut vr = (w.d[i as usize] - p) * (w.d[i as usize] - p)
                            + w.e[i as usize] * w.e[i as usize]
                            - q * q;
                        let vi = (w.d[i as usize] - p) * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = eps
                                * norm
                                * (ww.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) =
                            cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                        w.hs(i, nb - 1, cr);
                        w.hs(i, nb, ci);
                        if x.abs() > z.abs() + q.abs() {
                            let v0 = (-ra - ww * w.h(i, nb - 1) + q * w.h(i, nb)) / x;
                            let v1 = (-sa - ww * w.h(i, nb) - q * w.h(i, nb - 1)) / x;
                            w.hs(i + 1, nb - 1, v0);
                            w.hs(i + 1, nb, v1);
                        } else {
                            let (cr, ci) = cdiv(
                                -r - y * w.h(i, nb - 1),
                                -s - y * w.h(i, nb),
                                z,
                                q,
                            );
                            w.hs(i + 1, nb - 1, cr);
                            w.hs(i + 1, nb, ci);
                        }
                    }
                    t = w.h(i, nb - 1).abs().max(w.h(i, nb).abs());
                    if (eps * t) * t > 1.0 {
                        for j in i..=nb {
                            let v0 = w.h(j, nb - 1) / t;
                            let v1 = w.h(j, nb) / t;
                            w.hs(j, nb - 1, v0);
                            w.hs(j, nb, v1);
                        }
                    }
                }
            }
        }
    }

    // back transformation
    for j in (low..nn).rev() {
        for i in low..=high {
            z = 0.0;
            for k in low..=j.min(high) {
                z += w.v(i, k) * w.h(k, j);
            }
            w.vs(i, j, z);
        }
    }
}

/// Eigenvalues and right eigenvectors of a dense real matrix (row-major,
/// `n x n`).
pub fn eigen(a: &[f64], n: usize) -> Eigen {
    assert_eq!(a.len(), n * n);
    if n == 1 {
        return Eigen {
            n,
            values: vec![Complex64::new(a[0], 0.0)],
            vectors: vec![vec![Complex64::new(1.0, 0.0)]],
        };
    }
    let mut w = Work {
        n,
        h: a.to_vec(),
        v: vec![0.0; n * n],
        d: vec![0.0; n],
        e: vec![0.0; n],
    };
    orthes(&mut w);
    hqr2(&mut w);

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut j = 0;
    while j < n {
        if w.e[j] == 0.0 {
            values.push(Complex64::new(w.d[j], 0.0));
            vectors.push((0..n).map(|i| Complex64::new(w.v[i * n + j], 0.0)).collect());
            j += 1;
        } else {
            // conjugate pair packed as two adjacent real columns
            let vj: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(w.v[i * n + j], w.v[i * n + j + 1]))
                .collect();
            values.push(Complex64::new(w.d[j], w.e[j]));
            vectors.push(vj.clone());
            values.push(Complex64::new(w.d[j + 1], w.e[j + 1]));
            vectors.push(vj.into_iter().map(|c| c.conj()).collect());
            j += 2;
        }
    }
    Eigen { n, values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[f64], n: usize, lam: Complex64, v: &[Complex64]) -> f64 {
        let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut worst = 0.0_f64;
        for i in 0..n {
            let mut av = Complex64::new(0.0, 0.0);
            for j in 0..n {
                av += a[i * n + j] * v[j];
            }
            worst = worst.max((av - lam * v[i]).norm());
        }
        worst / scale
    }

    #[test]
    fn diagonal_matrix() {
        let a = [3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.5];
        let e = eigen(&a, 3);
        let mut re: Vec<f64> = e.values.iter().map(|c| c.re).collect();
        re.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((re[0] + 1.0).abs() < 1e-12 && (re[1] - 0.5).abs() < 1e-12 && (re[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn complex_pair_rotation() {
        // [[cos, -sin], [sin, cos]] has eigenvalues e^{±i}
        let (c, s) = (1.0_f64.cos(), 1.0_f64.sin());
        let a = [c, -s, s, c];
        let e = eigen(&a, 2);
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            assert!((lam.norm() - 1.0).abs() < 1e-12);
            assert!((lam.re - c).abs() < 1e-12);
            assert!(residual(&a, 2, *lam, v) < 1e-12);
        }
    }

    #[test]
    fn random_matrix_residuals() {
        // deterministic pseudo-random entries
        let n = 24;
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a: Vec<f64> = (0..n * n).map(|_| next()).collect();
        let e = eigen(&a, n);
        assert_eq!(e.values.len(), n);
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            assert!(residual(&a, n, *lam, v) < 1e-9, "residual too large");
        }
        // trace equals eigenvalue sum
        let tr: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let sum: f64 = e.values.iter().map(|c| c.re).sum();
        assert!((tr - sum).abs() < 1e-8);
    }

    #[test]
    fn symmetric_matrix_real_spectrum() {
        let n = 16;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 1.0 / (1.0 + (i as f64 - j as f64).abs());
            }
        }
        let e = eigen(&a, n);
        for lam in &e.values {
            assert!(lam.im.abs() < 1e-10);
        }
    }
}
