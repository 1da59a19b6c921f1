//! Special functions backing the significance tests: log-gamma, the
//! regularized incomplete beta function, and the Student-t distribution.
//!
//! The t CDF is evaluated through the incomplete beta continued fraction
//! (Lentz's method), which keeps tiny tail p-values exact instead of
//! underflowing a permutation count.

/// Natural log of the gamma function for positive arguments
/// (Lanczos approximation, ~1e-14 relative accuracy).
pub fn ln_gamma(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    const C: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut sum = 1.000000000190015;
    for (i, &c) in C.iter().enumerate() {
        sum += c / (z + i as f64 + 1.0);
    }
    let tmp = z + 5.5;
    (z + 0.5) * tmp.ln() - tmp + (2.5066282746310005 * sum / z).ln()
}

/// Regularized incomplete beta I_x(a, b) by continued fraction.
pub fn inc_beta(x: f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "shape parameters must be positive");
    assert!((0.0..=1.0).contains(&x), "x must lie in [0, 1]");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    // use the symmetric form on whichever side converges fast
    if x > (a + 1.0) / (a + b + 2.0) {
        return 1.0 - inc_beta(1.0 - x, b, a);
    }
    let front =
        (a * x.ln() + b * (1.0 - x).ln() - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))).exp();
    front * beta_cf(x, a, b) / a
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-30;
    const EPS: f64 = 1e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Student-t cumulative distribution P(T <= t) with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    assert!(df > 0.0);
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let p = 0.5 * inc_beta(df / (df + t * t), 0.5 * df, 0.5);
    if t >= 0.0 {
        1.0 - p
    } else {
        p
    }
}

/// Two-sided p-value of a t statistic: P(|T| >= |t|).
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    assert!(df > 0.0);
    if t.is_infinite() {
        return 0.0;
    }
    inc_beta(df / (df + t * t), 0.5 * df, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-12);
        assert!((ln_gamma(2.0)).abs() < 1e-12);
        // Gamma(5) = 24
        assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-12);
        // Gamma(0.5) = sqrt(pi)
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn inc_beta_edges_and_symmetry() {
        assert_eq!(inc_beta(0.0, 2.0, 3.0), 0.0);
        assert_eq!(inc_beta(1.0, 2.0, 3.0), 1.0);
        // I_x(1, 1) = x
        for &x in &[0.1, 0.35, 0.9] {
            assert!((inc_beta(x, 1.0, 1.0) - x).abs() < 1e-14);
        }
        // symmetry I_x(a, b) = 1 - I_{1-x}(b, a)
        for &(x, a, b) in &[(0.2, 2.5, 1.5), (0.7, 0.5, 3.0)] {
            assert!((inc_beta(x, a, b) - (1.0 - inc_beta(1.0 - x, b, a))).abs() < 1e-12);
        }
    }

    #[test]
    fn t_cdf_matches_reference_values() {
        // frozen from an independent implementation of the t distribution
        let cases = [
            (1.0, 3.0, 0.80449889052211476),
            (2.5, 8.0, 0.98152898114318798),
            (0.5, 28.0, 0.68950897814046974),
            (-1.7, 4.0, 0.08217747063502498),
            (4.2, 10.0, 0.99908565175986619),
        ];
        for (t, df, want) in cases {
            let got = student_t_cdf(t, df);
            assert!((got - want).abs() < 1e-10, "cdf({t}, {df}) = {got}, want {want}");
        }
    }

    #[test]
    fn two_sided_consistency() {
        for &(t, df) in &[(0.3, 5.0), (2.0, 12.0), (-3.5, 7.0)] {
            let direct = student_t_two_sided(t, df);
            let via_cdf = 2.0 * (1.0 - student_t_cdf(t.abs(), df));
            assert!((direct - via_cdf).abs() < 1e-12);
        }
        assert_eq!(student_t_two_sided(f64::INFINITY, 3.0), 0.0);
    }
}
