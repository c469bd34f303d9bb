//! Small special-function helpers not covered by `statrs`.

/// Modified Bessel function of the third kind `K_1(x)` for `x > 0`.
/// Polynomial approximations from Abramowitz & Stegun 9.8.3/9.8.7/9.8.4/9.8.8
/// (via I_1 for small arguments); absolute error below 1e-7, adequate for the
/// Levy-density integrals it feeds.
pub fn bessel_k1(x: f64) -> f64 {
    assert!(x > 0.0, "K_1 requires a positive argument");
    if x <= 2.0 {
        let t = x / 3.75;
        let t2 = t * t;
        // A&S 9.8.3: x * I_1(x)
        let i1 = x
            * (0.5
                + t2 * (0.87890594
                    + t2 * (0.51498869
                        + t2 * (0.15084934
                            + t2 * (0.02658733 + t2 * (0.00301532 + t2 * 0.00032411))))));
        let y = x * x / 4.0;
        // A&S 9.8.7: x * K_1(x)
        let xk1 = x * (x / 2.0).ln() * i1
            + 1.0
            + y * (0.15443144
                + y * (-0.67278579
                    + y * (-0.18156897
                        + y * (-0.01919402 + y * (-0.00110404 + y * (-0.00004686))))));
        xk1 / x
    } else {
        let y = 2.0 / x;
        // A&S 9.8.8
        let p = 1.25331414
            + y * (0.23498619
                + y * (-0.03655620
                    + y * (0.01504268 + y * (-0.00780353 + y * (0.00325614 + y * (-0.00068245))))));
        p * (-x).exp() / x.sqrt()
    }
}

/// Standard normal cumulative distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
