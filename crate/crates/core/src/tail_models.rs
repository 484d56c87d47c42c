//! Marginal error distributions.
//!
//! Every family is symmetric about zero with unit scale. The generalized
//! Gaussian family has density proportional to `exp(-|x|^nu / nu)`, which
//! gives the standard normal at `nu = 2` and the Laplace law `e^{-|x|}/2`
//! at `nu = 1`.
//!
//! The remaining families are specified by their right tail `T(x)` only.
//! They are realized as "spliced" laws: `F̄(x) = T(x)` exactly for
//! `x >= x0`, where `T(x0) = 1/4`, and the remaining mass 1/2 is spread
//! uniformly on `[-x0, x0]`. Tail asymptotics are therefore identities.

use core::f64::consts::{E, LN_2};

use libm::{exp, expm1, fabs, log, log1p, pow, sqrt};
use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{ensure, Result};
use crate::special::{
    gamma_q, inverse_gamma_q, ln_gamma, ln_gamma_q, ln_normal_sf, normal_isf, normal_sf,
};

const LN_4: f64 = 2.0 * LN_2;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum TailFamily {
    /// Standard normal.
    Gaussian,
    /// Density `e^{-|x|} / 2`.
    Laplace,
    /// Density proportional to `exp(-|x|^nu / nu)`.
    GeneralizedGaussian { nu: f64 },
    /// Spliced law with tail `exp(-x^nu / nu)`.
    AggAsymptotic { nu: f64 },
    /// Spliced law with tail `exp(-c (log x)^gamma)`, `gamma > 1`.
    HeavierThanAgg { gamma: f64, c: f64 },
    /// Spliced law with tail `exp(-exp(x^nu))`.
    LighterThanAgg { nu: f64 },
    /// Spliced law with tail `x^{-tail_index}` on both sides.
    Pareto { tail_index: f64 },
}

impl TailFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TailFamily::Gaussian | TailFamily::Laplace => Ok(()),
            TailFamily::GeneralizedGaussian { nu }
            | TailFamily::AggAsymptotic { nu }
            | TailFamily::LighterThanAgg { nu } => {
                ensure(nu > 0.0 && nu.is_finite(), "nu", nu, "nu > 0")
            }
            TailFamily::HeavierThanAgg { gamma, c } => {
                ensure(gamma > 1.0 && gamma.is_finite(), "gamma", gamma, "gamma > 1")?;
                ensure(c > 0.0 && c.is_finite(), "c", c, "c > 0")
            }
            TailFamily::Pareto { tail_index } => ensure(
                tail_index > 0.0 && tail_index.is_finite(),
                "tail_index",
                tail_index,
                "tail_index > 0",
            ),
        }
    }

    /// Shape `nu` of the AGG tail `log F̄(x) ~ -x^nu / nu`, when the family
    /// has one.
    pub fn agg_shape(&self) -> Option<f64> {
        match *self {
            TailFamily::Gaussian => Some(2.0),
            TailFamily::Laplace => Some(1.0),
            TailFamily::GeneralizedGaussian { nu } | TailFamily::AggAsymptotic { nu } => Some(nu),
            _ => None,
        }
    }

    /// `F̄(x) = P[X > x]`.
    pub fn survival(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0 - self.upper_survival(-x);
        }
        self.upper_survival(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.survival(-x)
    }

    /// `ln F̄(x)`, finite where [`survival`](Self::survival) underflows.
    pub fn ln_survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return log(self.survival(x));
        }
        match *self {
            TailFamily::Gaussian => ln_normal_sf(x),
            TailFamily::Laplace => -LN_2 - x,
            TailFamily::GeneralizedGaussian { nu } => -LN_2 + ln_gamma_q(1.0 / nu, pow(x, nu) / nu),
            _ => {
                let s = Spliced::of(self);
                if x >= s.x0 {
                    s.ln_tail(x)
                } else {
                    log(s.center_survival(x))
                }
            }
        }
    }

    fn upper_survival(&self, x: f64) -> f64 {
        match *self {
            TailFamily::Gaussian => normal_sf(x),
            TailFamily::Laplace => 0.5 * exp(-x),
            TailFamily::GeneralizedGaussian { nu } => {
                0.5 * gamma_q(1.0 / nu, pow(x, nu) / nu)
            }
            _ => {
                let s = Spliced::of(self);
                if x >= s.x0 {
                    exp(s.ln_tail(x))
                } else {
                    s.center_survival(x)
                }
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        exp(self.ln_density(x))
    }

    pub fn ln_density(&self, x: f64) -> f64 {
        let x = fabs(x);
        match *self {
            TailFamily::Gaussian => -0.5 * x * x - 0.5 * log(2.0 * core::f64::consts::PI),
            TailFamily::Laplace => -LN_2 - x,
            TailFamily::GeneralizedGaussian { nu } => {
                // normalizer 2 nu^(1/nu - 1) Γ(1/nu)
                let ln_norm = LN_2 + (1.0 / nu - 1.0) * log(nu) + ln_gamma(1.0 / nu);
                -pow(x, nu) / nu - ln_norm
            }
            _ => {
                let s = Spliced::of(self);
                if x >= s.x0 {
                    s.ln_tail_density(x)
                } else {
                    -log(4.0 * s.x0)
                }
            }
        }
    }

    /// Generalized inverse `F←(q) = inf{x : F(x) >= q}`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        ensure(q > 0.0 && q < 1.0, "q", q, "0 < q < 1")?;
        if q > 0.5 {
            Ok(self.upper_quantile_unchecked(1.0 - q))
        } else {
            Ok(-self.upper_quantile_unchecked(q))
        }
    }

    /// Inverse survival: the `x` with `F̄(x) = tail`, i.e. `F←(1 - tail)`
    /// without the cancellation in `1 - tail`.
    pub fn upper_quantile(&self, tail: f64) -> Result<f64> {
        ensure(tail > 0.0 && tail < 1.0, "tail", tail, "0 < tail < 1")?;
        Ok(self.upper_quantile_unchecked(tail))
    }

    fn upper_quantile_unchecked(&self, tail: f64) -> f64 {
        if tail > 0.5 {
            return -self.upper_quantile_unchecked(1.0 - tail);
        }
        if tail == 0.5 {
            return 0.0;
        }
        match *self {
            TailFamily::Gaussian => normal_isf(tail),
            TailFamily::Laplace => -log(2.0 * tail),
            TailFamily::GeneralizedGaussian { nu } => {
                let y = inverse_gamma_q(1.0 / nu, 2.0 * tail);
                pow(nu * y, 1.0 / nu)
            }
            _ => {
                let s = Spliced::of(self);
                if tail <= 0.25 {
                    s.inverse_tail(log(tail))
                } else {
                    s.x0 * (2.0 - 4.0 * tail)
                }
            }
        }
    }

    /// One draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            TailFamily::Gaussian => rng.sample(StandardNormal),
            TailFamily::Laplace => {
                let m: f64 = rng.sample(Exp1);
                if rng.random::<bool>() {
                    m
                } else {
                    -m
                }
            }
            TailFamily::GeneralizedGaussian { nu } => {
                // |X|^nu / nu ~ Gamma(1/nu, 1)
                let g = Gamma::new(1.0 / nu, 1.0).expect("validated shape");
                let y: f64 = g.sample(rng);
                let m = pow(nu * y, 1.0 / nu);
                if rng.random::<bool>() {
                    m
                } else {
                    -m
                }
            }
            _ => {
                let u: f64 = rng.sample(Open01);
                if u < 0.5 {
                    self.upper_quantile_unchecked(u)
                } else {
                    -self.upper_quantile_unchecked(1.0 - u)
                }
            }
        }
    }

    /// `n` iid draws.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> alloc::vec::Vec<f64> {
        let mut out = alloc::vec![0.0; n];
        self.sample_into(rng, &mut out);
        out
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        if let TailFamily::GeneralizedGaussian { nu } = *self {
            let g = Gamma::new(1.0 / nu, 1.0).expect("validated shape");
            for v in out.iter_mut() {
                let m = pow(nu * g.sample(rng), 1.0 / nu);
                *v = if rng.random::<bool>() { m } else { -m };
            }
            return;
        }
        for v in out.iter_mut() {
            *v = self.draw(rng);
        }
    }
}

/// Right tail of a spliced family: `T(x)` for `x >= x0`, linear survival on
/// `[0, x0)`.
struct Spliced {
    kind: TailKind,
    x0: f64,
}

enum TailKind {
    Agg(f64),
    Heavier { gamma: f64, c: f64 },
    Lighter(f64),
    Pareto(f64),
}

impl Spliced {
    fn of(family: &TailFamily) -> Self {
        let kind = match *family {
            TailFamily::AggAsymptotic { nu } => TailKind::Agg(nu),
            TailFamily::HeavierThanAgg { gamma, c } => TailKind::Heavier { gamma, c },
            TailFamily::LighterThanAgg { nu } => TailKind::Lighter(nu),
            TailFamily::Pareto { tail_index } => TailKind::Pareto(tail_index),
            _ => unreachable!("not a spliced family"),
        };
        let mut s = Spliced { kind, x0: 0.0 };
        s.x0 = s.inverse_tail(-LN_4);
        s
    }

    fn ln_tail(&self, x: f64) -> f64 {
        match self.kind {
            TailKind::Agg(nu) => -pow(x, nu) / nu,
            TailKind::Heavier { gamma, c } => -c * pow(log(x), gamma),
            TailKind::Lighter(nu) => -exp(pow(x, nu)),
            TailKind::Pareto(alpha) => -alpha * log(x),
        }
    }

    fn ln_tail_density(&self, x: f64) -> f64 {
        let lt = self.ln_tail(x);
        match self.kind {
            TailKind::Agg(nu) => lt + (nu - 1.0) * log(x),
            TailKind::Heavier { gamma, c } => {
                lt + log(c * gamma) + (gamma - 1.0) * log(log(x)) - log(x)
            }
            TailKind::Lighter(nu) => lt + pow(x, nu) + log(nu) + (nu - 1.0) * log(x),
            TailKind::Pareto(alpha) => log(alpha) - (alpha + 1.0) * log(x),
        }
    }

    /// Solves `ln T(x) = ln_tail` for `ln_tail <= -ln 4`.
    fn inverse_tail(&self, ln_tail: f64) -> f64 {
        let m = -ln_tail;
        match self.kind {
            TailKind::Agg(nu) => pow(nu * m, 1.0 / nu),
            TailKind::Heavier { gamma, c } => exp(pow(m / c, 1.0 / gamma)),
            TailKind::Lighter(nu) => pow(log(m), 1.0 / nu),
            TailKind::Pareto(alpha) => exp(m / alpha),
        }
    }

    fn center_survival(&self, x: f64) -> f64 {
        0.25 + 0.25 * (self.x0 - x) / self.x0
    }
}

/// `(nu log p)^{1/nu}`, the first-order growth of `F←(1 - 1/p)` for AGG
/// tails.
pub fn asymptotic_quantile(nu: f64, p: f64) -> Result<f64> {
    ensure(nu > 0.0, "nu", nu, "nu > 0")?;
    ensure(p >= 2.0, "p", p, "p >= 2")?;
    Ok(pow(nu * log(p), 1.0 / nu))
}

/// Real branches of the Lambert W function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `W_0`, with `W >= -1` on `[-1/e, inf)`.
    Principal,
    /// `W_{-1}`, with `W <= -1` on `[-1/e, 0)`.
    MinusOne,
}

/// Lambert W: the inverse of `w e^w` on the requested branch, by Halley
/// iteration from a branch-specific starting point.
pub fn lambert_w(branch: Branch, x: f64) -> Result<f64> {
    const BRANCH_POINT: f64 = -1.0 / E;
    match branch {
        Branch::Principal => ensure(
            x >= BRANCH_POINT && x.is_finite(),
            "x",
            x,
            "x >= -1/e on the principal branch",
        )?,
        Branch::MinusOne => ensure(
            (BRANCH_POINT..0.0).contains(&x),
            "x",
            x,
            "-1/e <= x < 0 on the -1 branch",
        )?,
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // Distance to the branch point, with 1/e folded in exactly.
    let near = 2.0 * (E * x + 1.0);
    if near <= 0.0 {
        return Ok(-1.0);
    }
    let mut w = match branch {
        Branch::Principal if x < -0.25 => {
            let p = sqrt(near);
            -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
        }
        Branch::Principal if x < E => log1p(x),
        Branch::Principal => {
            let l = log(x);
            l - log(l)
        }
        Branch::MinusOne if x < -0.25 => {
            let p = sqrt(near);
            -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p
        }
        Branch::MinusOne => {
            let l1 = log(-x);
            let l2 = log(-l1);
            l1 - l2 + l2 / l1
        }
    };
    for _ in 0..64 {
        let ew = exp(w);
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = w - step;
        // Halley can overshoot across -1 close to the branch point.
        let next = match branch {
            Branch::Principal if next < -1.0 => 0.5 * (w - 1.0),
            Branch::MinusOne if next > -1.0 => 0.5 * (w - 1.0),
            _ => next,
        };
        let done = fabs(next - w) <= 4.0 * f64::EPSILON * (1.0 + fabs(next));
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

/// Cancellation-free `1 - (1 - a)^{1/n}` for the Šidák correction.
pub(crate) fn sidak_tail(alpha: f64, n: f64) -> f64 {
    -expm1(log1p(-alpha) / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const GG_HALF: TailFamily = TailFamily::GeneralizedGaussian { nu: 0.5 };

    fn all_families() -> Vec<TailFamily> {
        alloc::vec![
            TailFamily::Gaussian,
            TailFamily::Laplace,
            TailFamily::GeneralizedGaussian { nu: 0.5 },
            TailFamily::GeneralizedGaussian { nu: 1.5 },
            TailFamily::GeneralizedGaussian { nu: 3.0 },
            TailFamily::AggAsymptotic { nu: 2.0 },
            TailFamily::HeavierThanAgg { gamma: 2.0, c: 1.0 },
            TailFamily::LighterThanAgg { nu: 1.0 },
            TailFamily::Pareto { tail_index: 2.0 },
        ]
    }

    #[test]
    fn survival_examples() {
        assert_eq!(TailFamily::Gaussian.survival(0.0), 0.5);
        assert!((TailFamily::Laplace.survival(LN_2) - 0.25).abs() < 1e-15);
        let t = TailFamily::Gaussian.survival(4.2919);
        assert!((t - 8.857_536_557e-6).abs() < 1e-15);
    }

    #[test]
    fn aliases_agree_with_generalized_gaussian() {
        let gg2 = TailFamily::GeneralizedGaussian { nu: 2.0 };
        let gg1 = TailFamily::GeneralizedGaussian { nu: 1.0 };
        for i in -400..=400 {
            let x = i as f64 * 0.02;
            assert!((TailFamily::Gaussian.survival(x) - gg2.survival(x)).abs() < 1e-12, "x={x}");
            assert!((TailFamily::Laplace.survival(x) - gg1.survival(x)).abs() < 1e-12, "x={x}");
            assert!((TailFamily::Gaussian.density(x) - gg2.density(x)).abs() < 1e-12);
            assert!((TailFamily::Laplace.density(x) - gg1.density(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        for fam in all_families() {
            // trapezoid on a wide grid; tails beyond are checked via survival
            let lim = fam.upper_quantile(1e-6).unwrap();
            let n = 400_000;
            let h = 2.0 * lim / n as f64;
            let mut total = 0.0;
            for i in 0..=n {
                let x = -lim + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                total += w * fam.density(x);
            }
            total *= h;
            let want = 1.0 - 2.0 * fam.survival(lim);
            assert!((total - want).abs() < 2e-4, "{fam:?}: {total}");
        }
    }

    #[test]
    fn survival_is_strictly_decreasing() {
        for fam in all_families() {
            let mut prev = 1.0;
            for i in -60..=200 {
                let x = i as f64 * 0.05;
                let s = fam.survival(x);
                assert!((0.0..1.0).contains(&s), "{fam:?} x={x}");
                if s > 0.0 {
                    assert!(s < prev, "{fam:?} x={x}");
                }
                prev = s;
            }
        }
    }

    #[test]
    fn quantile_examples() {
        assert!((TailFamily::Laplace.quantile(0.75).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(TailFamily::Gaussian.quantile(0.5).unwrap(), 0.0);
        assert!(TailFamily::Gaussian.quantile(0.0).is_err());
        assert!(TailFamily::Gaussian.quantile(1.0).is_err());
        assert!(TailFamily::Gaussian.quantile(f64::NAN).is_err());
    }

    #[test]
    fn gg_half_quantile_matches_bisection() {
        // Independent route: bisection on the closed-form survival
        // F̄(x) = (1 + 2 sqrt x) e^{-2 sqrt x} / 2 for x >= 0.
        let sf = |x: f64| 0.5 * (1.0 + 2.0 * sqrt(x)) * exp(-2.0 * sqrt(x));
        let (mut lo, mut hi) = (0.0, 1000.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sf(mid) > 1e-4 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let got = GG_HALF.quantile(1.0 - 1e-4).unwrap();
        assert!((got - lo).abs() < 1e-8 * lo, "{got} vs {lo}");
        assert!((GG_HALF.survival(got) - 1e-4).abs() < 1e-12);
    }

    #[test]
    fn quantile_survival_round_trip() {
        for fam in all_families() {
            for i in 1..999 {
                let q = 0.001 * i as f64;
                let x = fam.quantile(q).unwrap();
                assert!((fam.cdf(x) - q).abs() <= 1e-10, "{fam:?} q={q}");
            }
            for &t in &[1e-3, 1e-8, 1e-20] {
                let x = fam.upper_quantile(t).unwrap();
                assert!(((fam.survival(x) - t) / t).abs() < 1e-9, "{fam:?} t={t}");
            }
        }
    }

    #[test]
    fn asymptotic_quantile_examples() {
        assert!((asymptotic_quantile(2.0, E * E).unwrap() - 2.0).abs() < 1e-15);
        assert!((asymptotic_quantile(1.0, 1000.0).unwrap() - log(1000.0)).abs() < 1e-15);
        assert!(asymptotic_quantile(2.0, 1.5).is_err());
        let mut prev = 0.0;
        for k in [2, 4, 6, 10, 20] {
            let p = libm::pow(10.0, k as f64);
            let ratio = TailFamily::Gaussian.upper_quantile(1.0 / p).unwrap()
                / asymptotic_quantile(2.0, p).unwrap();
            if k == 6 {
                assert!((ratio - 0.904).abs() < 1e-3, "{ratio}");
            }
            assert!(ratio > prev && ratio < 1.0);
            prev = ratio;
        }
    }

    #[test]
    fn asymptotic_family_quantile_is_exact() {
        let fam = TailFamily::AggAsymptotic { nu: 2.0 };
        for &p in &[10.0, 1e4, 1e8] {
            let u = fam.upper_quantile(1.0 / p).unwrap();
            assert!((u - asymptotic_quantile(2.0, p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rapid_variation() {
        let t = 1.2;
        for fam in [
            TailFamily::Gaussian,
            TailFamily::Laplace,
            GG_HALF,
            TailFamily::GeneralizedGaussian { nu: 3.0 },
            TailFamily::AggAsymptotic { nu: 1.5 },
        ] {
            let ratios: Vec<f64> = [5.0, 10.0, 20.0]
                .iter()
                .map(|&x| fam.ln_survival(t * x) - fam.ln_survival(x))
                .collect();
            assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2], "{fam:?}");
        }
        let g = TailFamily::Gaussian;
        assert!(g.survival(24.0) / g.survival(20.0) < 1e-2);
        let pareto = TailFamily::Pareto { tail_index: 2.0 };
        for &x in &[5.0, 10.0, 20.0] {
            let r = pareto.survival(t * x) / pareto.survival(x);
            assert!((r - libm::pow(t, -2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn agg_tail_law() {
        for &nu in &[0.5, 1.0, 2.0] {
            let fam = TailFamily::GeneralizedGaussian { nu };
            let mut prev = f64::INFINITY;
            for &x in &[5.0, 10.0, 20.0, 40.0] {
                let dev = fabs(fam.ln_survival(x) / (-pow(x, nu) / nu) - 1.0);
                assert!(dev < prev, "nu={nu} x={x}");
                prev = dev;
            }
            assert!(prev < 0.25);
        }
    }

    #[test]
    fn lambert_w_examples() {
        assert_eq!(lambert_w(Branch::Principal, 0.0).unwrap(), 0.0);
        assert!((lambert_w(Branch::Principal, E).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lambert_w(Branch::MinusOne, -1.0 / E).unwrap(), -1.0);
        assert!(lambert_w(Branch::Principal, -0.5).is_err());
        assert!(lambert_w(Branch::MinusOne, 0.0).is_err());
        assert!(lambert_w(Branch::MinusOne, 0.1).is_err());
    }

    #[test]
    fn lambert_w_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let u: f64 = rng.random();
            // principal: spread over [-1/e, 1e6] on a log-ish scale
            let x = if u < 0.3 {
                -1.0 / E * rng.random::<f64>()
            } else {
                libm::pow(10.0, -6.0 + 12.0 * rng.random::<f64>())
            };
            let w = lambert_w(Branch::Principal, x).unwrap();
            assert!(w >= -1.0);
            assert!(fabs(w * exp(w) - x) <= 1e-12 * fabs(x).max(1e-300), "x={x} w={w}");

            let x = -1.0 / E * libm::pow(10.0, -300.0 * rng.random::<f64>() * rng.random::<f64>());
            let w = lambert_w(Branch::MinusOne, x).unwrap();
            assert!(w <= -1.0);
            assert!(fabs(w * exp(w) - x) <= 1e-12 * fabs(x), "x={x} w={w}");
        }
    }

    #[test]
    fn sampling_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs = TailFamily::Gaussian.sample(100_000, &mut rng);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.02 && (var - 1.0).abs() < 0.03, "{mean} {var}");

        let pareto = TailFamily::Pareto { tail_index: 2.0 };
        let xs = pareto.sample(100_000, &mut rng);
        let freq = xs.iter().filter(|&&x| x > 10.0).count() as f64 / n;
        let p = pareto.survival(10.0);
        assert!((p - 0.01).abs() < 1e-15);
        assert!((freq - p).abs() < 3.0 * sqrt(p * (1.0 - p) / n), "{freq}");

        for fam in all_families() {
            let one = fam.sample(1, &mut rng);
            assert_eq!(one.len(), 1);
            assert!(one[0].is_finite());
        }
    }

    #[test]
    fn sampling_matches_survival() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        for fam in all_families() {
            let xs = fam.sample(n, &mut rng);
            for &q in &[0.1, 0.5, 0.9, 0.99] {
                let x = fam.quantile(q).unwrap();
                let freq = xs.iter().filter(|&&v| v <= x).count() as f64 / n as f64;
                let se = sqrt(q * (1.0 - q) / n as f64);
                assert!((freq - q).abs() < 4.0 * se, "{fam:?} q={q} freq={freq}");
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(TailFamily::GeneralizedGaussian { nu: 0.0 }.validate().is_err());
        assert!(TailFamily::HeavierThanAgg { gamma: 1.0, c: 1.0 }.validate().is_err());
        assert!(TailFamily::Pareto { tail_index: -1.0 }.validate().is_err());
    }
}
