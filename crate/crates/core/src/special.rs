//! Special functions used by the tail models: the standard normal
//! distribution and the regularized incomplete gamma function.

use core::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

use libm::{erfc, exp, expm1, fabs, lgamma, log, log1p, sqrt};

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    exp(-0.5 * x * x) / sqrt(2.0 * PI)
}

/// Standard normal upper tail `P[Z > x]`, accurate in relative terms deep
/// into the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

pub fn normal_cdf(x: f64) -> f64 {
    normal_sf(-x)
}

/// `ln P[Z > x]`, finite even where [`normal_sf`] underflows.
pub fn ln_normal_sf(x: f64) -> f64 {
    if x < 20.0 {
        log(normal_sf(x))
    } else {
        -LN_2 + ln_gamma_q(0.5, 0.5 * x * x)
    }
}

/// Inverse of [`normal_sf`]: the `x` with `P[Z > x] = tail`.
///
/// Wichura's AS241 rational approximation followed by one Newton step
/// against [`normal_sf`].
pub fn normal_isf(tail: f64) -> f64 {
    debug_assert!(tail > 0.0 && tail < 1.0);
    if tail == 0.5 {
        return 0.0;
    }
    let x = -as241(tail);
    // Newton on sf(x) - tail; the tail side keeps relative accuracy.
    if tail < 0.5 {
        x + (normal_sf(x) - tail) / normal_pdf(x)
    } else {
        x - (normal_cdf(x) - (1.0 - tail)) / normal_pdf(x)
    }
}

/// Inverse of [`normal_cdf`].
pub fn normal_quantile(q: f64) -> f64 {
    if q > 0.5 {
        normal_isf(1.0 - q)
    } else {
        -normal_isf(q)
    }
}

/// Wichura (1988) PPND16: lower-tail normal quantile to about 1e-16.
#[allow(clippy::excessive_precision)]
fn as241(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.3871328727963666080e0,
        1.3314166789178437745e2,
        1.9715909503065514427e3,
        1.3731693765509461125e4,
        4.5921953931549871457e4,
        6.7265770927008700853e4,
        3.3430575583588128105e4,
        2.5090809287301226727e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.2313330701600911252e1,
        6.8718700749205790830e2,
        5.3941960214247511077e3,
        2.1213794301586595867e4,
        3.9307895800092710610e4,
        2.8729085735721942674e4,
        5.2264952788528545610e3,
    ];
    const C: [f64; 8] = [
        1.42343711074968357734e0,
        4.63033784615654529590e0,
        5.76949722146069140550e0,
        3.64784832476320460504e0,
        1.27045825245236838258e0,
        2.41780725177450611770e-1,
        2.27238449892691845833e-2,
        7.74545014278341407640e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.05319162663775882187e0,
        1.67638483018380384940e0,
        6.89767334985100004550e-1,
        1.48103976427480074590e-1,
        1.51986665636164571966e-2,
        5.47593808499534494600e-4,
        1.05075007164441684324e-9,
    ];
    const E: [f64; 8] = [
        6.65790464350110377720e0,
        5.46378491116411436990e0,
        1.78482653991729133580e0,
        2.96560571828504891230e-1,
        2.65321895265761230930e-2,
        1.24266094738807843860e-3,
        2.71155556874348757815e-5,
        2.01033439929228813265e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.99832206555887937690e-1,
        1.36929880922735805310e-1,
        1.48753612908506148525e-2,
        7.86869131145613259100e-4,
        1.84631831751005468180e-5,
        1.42151175831644588870e-7,
        2.04426310338993978564e-15,
    ];
    fn poly(c: &[f64; 8], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    let q = p - 0.5;
    if fabs(q) <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = sqrt(-log(r));
    let v = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -v
    } else {
        v
    }
}

/// `ln Γ(a)` for `a > 0`.
pub fn ln_gamma(a: f64) -> f64 {
    lgamma(a)
}

/// Series for the regularized lower incomplete gamma `P(a, x)`; converges
/// quickly for `x < a + 1`.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if fabs(del) < fabs(sum) * EPS {
            break;
        }
    }
    sum * exp(-x + a * log(x) - ln_gamma(a))
}

/// `ln Q(a, x)` via the Legendre continued fraction (modified Lentz);
/// converges quickly for `x >= a + 1`.
fn ln_gamma_q_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < EPS {
            break;
        }
    }
    -x + a * log(x) - ln_gamma(a) + log(h)
}

/// Regularized lower incomplete gamma function `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        -expm1(ln_gamma_q_cf(a, x))
    }
}

/// Regularized upper incomplete gamma function `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        exp(ln_gamma_q_cf(a, x))
    }
}

/// `ln Q(a, x)`, finite far beyond the point where `Q` underflows.
pub fn ln_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        log1p(-gamma_p_series(a, x))
    } else {
        ln_gamma_q_cf(a, x)
    }
}

/// Solves `Q(a, y) = target` for `y >= 0`, with `target` in `(0, 1]`.
///
/// Safeguarded Newton iteration on `ln Q(a, y) - ln target`, which is
/// decreasing in `y`.
pub fn inverse_gamma_q(a: f64, target: f64) -> f64 {
    debug_assert!(target > 0.0 && target <= 1.0);
    if target >= 1.0 {
        return 0.0;
    }
    let ln_target = log(target);
    let g = |y: f64| ln_gamma_q(a, y) - ln_target;

    let mut lo = 0.0;
    let mut hi = (-ln_target).max(1.0) + a;
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut y = (-ln_target).clamp(lo, hi);
    if y <= lo || y >= hi {
        y = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let gy = g(y);
        if gy > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        // d/dy ln Q = -y^(a-1) e^-y / (Γ(a) Q)
        let dlnq = -exp((a - 1.0) * log(y) - y - ln_gamma(a) - ln_gamma_q(a, y));
        let mut next = y - gy / dlnq;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if fabs(next - y) <= 1e-15 * y.max(1e-300) || hi - lo <= 1e-15 * hi {
            return next;
        }
        y = next;
    }
    y
}
