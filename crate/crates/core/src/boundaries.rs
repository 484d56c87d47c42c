//! Phase-transition boundaries in the `(beta, r)` plane and the sparsity /
//! signal-size parametrizations they are stated in.
//!
//! Sparsity is `s = floor(p^{1 - beta})` and signal magnitude is
//! `(nu r log p)^{1/nu}`. Exact support recovery by thresholding succeeds
//! above [`strong_boundary`] and fails below it for uniformly relatively
//! stable noise.

use libm::{exp, floor, log, pow, sqrt};

use crate::error::{domain, ensure, Result};

/// Floors a positive quantity that is mathematically an integer in common
/// cases (e.g. `10000^{0.5}`) but may land a few ulps below it.
pub(crate) fn floor_count(v: f64) -> usize {
    floor(v * (1.0 + 1e-12)) as usize
}

/// Sparsity and signal-size parameters of one experiment cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalConfig {
    pub p: usize,
    pub beta: f64,
    pub r_low: f64,
    pub r_high: f64,
    pub nu: f64,
}

impl SignalConfig {
    /// A configuration with a single signal magnitude.
    pub fn new(p: usize, beta: f64, r: f64, nu: f64) -> Result<Self> {
        let cfg = SignalConfig {
            p,
            beta,
            r_low: r,
            r_high: r,
            nu,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.p >= 2, "p", self.p as f64, "p >= 2")?;
        ensure(self.beta > 0.0 && self.beta <= 1.0, "beta", self.beta, "0 < beta <= 1")?;
        ensure(self.nu > 0.0, "nu", self.nu, "nu > 0")?;
        ensure(self.r_low > 0.0, "r_low", self.r_low, "r_low > 0")?;
        ensure(
            self.r_high >= self.r_low,
            "r_high",
            self.r_high,
            "r_high >= r_low",
        )
    }

    /// `s = floor(p^{1 - beta})`, at least 1.
    pub fn sparsity(&self) -> usize {
        sparsity(self.p, self.beta)
    }

    pub fn delta_low(&self) -> f64 {
        magnitude(self.nu, self.r_low, self.p as f64)
    }

    pub fn delta_high(&self) -> f64 {
        magnitude(self.nu, self.r_high, self.p as f64)
    }
}

/// `floor(p^{1 - beta})`.
pub fn sparsity(p: usize, beta: f64) -> usize {
    floor_count(pow(p as f64, 1.0 - beta)).clamp(1, p.max(1))
}

fn magnitude(nu: f64, r: f64, p: f64) -> f64 {
    pow(nu * r * log(p), 1.0 / nu)
}

/// Signal magnitude `(nu r log p)^{1/nu}` for signal-strength parameter `r`.
pub fn signal_magnitude(nu: f64, r: f64, p: f64) -> Result<f64> {
    ensure(nu > 0.0, "nu", nu, "nu > 0")?;
    ensure(r > 0.0, "r", r, "r > 0")?;
    ensure(p > 1.0, "p", p, "p > 1")?;
    Ok(magnitude(nu, r, p))
}

fn check_beta(beta: f64) -> Result<()> {
    ensure(beta > 0.0 && beta <= 1.0, "beta", beta, "0 < beta <= 1")
}

/// Strong classification boundary `g(beta) = (1 + (1 - beta)^{1/nu})^nu`.
pub fn strong_boundary(beta: f64, nu: f64) -> Result<f64> {
    check_beta(beta)?;
    ensure(nu > 0.0 && nu.is_finite(), "nu", nu, "nu > 0")?;
    Ok(pow(1.0 + pow(1.0 - beta, 1.0 / nu), nu))
}

/// Gaussian detection boundary, defined for `beta in (1/2, 1]`.
pub fn detection_boundary(beta: f64) -> Result<f64> {
    ensure(beta > 0.5 && beta <= 1.0, "beta", beta, "1/2 < beta <= 1")?;
    if beta >= 0.75 {
        let t = 1.0 - sqrt(1.0 - beta);
        Ok(t * t)
    } else {
        Ok(beta - 0.5)
    }
}

/// Weak classification boundary `h(beta) = beta`.
pub fn weak_boundary(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(beta)
}

/// Recovery boundary `4(1 - beta)` for perfectly correlated block noise.
///
/// Accepts the closed interval `[0, 1]` so the curve can be sampled at its
/// endpoints.
pub fn non_udd_boundary(beta: f64) -> Result<f64> {
    ensure((0.0..=1.0).contains(&beta), "beta", beta, "0 <= beta <= 1")?;
    Ok(4.0 * (1.0 - beta))
}

/// Gaussian reparametrization `beta~ = 2 - (1 + sqrt(1 - beta))^2`, under
/// which the strong boundary becomes `2 - beta~`.
///
/// The image of `(0, 1]` is `(-2, 1]`; values below 0 occur for
/// `beta < 3/4`.
pub fn reparam(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let t = 1.0 + sqrt(1.0 - beta);
    Ok(2.0 - t * t)
}

/// `g~(beta~) = 2 - beta~`.
pub fn reparametrized_boundary(beta_tilde: f64) -> Result<f64> {
    ensure(
        (-2.0..=1.0).contains(&beta_tilde),
        "beta_tilde",
        beta_tilde,
        "-2 <= beta_tilde <= 1",
    )?;
    Ok(2.0 - beta_tilde)
}

/// Sparsity and minimal magnitude of a heavier-or-lighter-than-AGG cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailParams {
    pub s: usize,
    pub delta: f64,
    /// `2 - beta`, the boundary in this parametrization.
    pub boundary: f64,
}

impl TailParams {
    /// Whether `r` lies strictly above the boundary. On the boundary itself
    /// there is no recovery guarantee.
    pub fn above_boundary(&self, r: f64) -> bool {
        r > self.boundary
    }
}

fn check_open_beta(beta: f64) -> Result<()> {
    ensure(beta > 0.0 && beta < 1.0, "beta", beta, "0 < beta < 1")
}

/// Parametrization for tails `log F̄(x) = -(log x)^gamma (c + o(1))`.
pub fn heavier_than_agg_params(p: f64, beta: f64, gamma: f64, r: f64) -> Result<TailParams> {
    ensure(p >= 2.0, "p", p, "p >= 2")?;
    check_open_beta(beta)?;
    ensure(gamma >= 1.0, "gamma", gamma, "gamma >= 1")?;
    ensure(r > 0.0, "r", r, "r > 0")?;
    let lp = log(p);
    let root = pow(lp, 1.0 / gamma);
    let inner = root + log(1.0 - beta);
    if inner <= 0.0 {
        return Err(domain(
            "beta",
            beta,
            "(log p)^(1/gamma) + log(1 - beta) > 0",
        ));
    }
    let k = lp - pow(inner, gamma);
    Ok(TailParams {
        s: floor_count(p * exp(-k)),
        delta: exp(root) * r,
        boundary: 2.0 - beta,
    })
}

/// Parametrization for tails `log F̄(x) = -exp(x^nu L(x))`.
pub fn lighter_than_agg_params(p: f64, beta: f64, nu: f64, r: f64) -> Result<TailParams> {
    ensure(p > core::f64::consts::E, "p", p, "p > e")?;
    check_open_beta(beta)?;
    ensure(nu > 0.0, "nu", nu, "nu > 0")?;
    ensure(r > 0.0, "r", r, "r > 0")?;
    let lp = log(p);
    let k = lp - pow(lp, pow(1.0 - beta, nu));
    Ok(TailParams {
        s: floor_count(p * exp(-k)),
        delta: pow(log(lp), 1.0 / nu) * r,
        boundary: 2.0 - beta,
    })
}
