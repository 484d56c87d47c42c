//! Noise generators: iid draws from any [`TailFamily`] and stationary or
//! structured Gaussian arrays with unit marginal variance.
//!
//! A [`NoiseGenerator`] holds everything that can be precomputed for a
//! dimension (the fGn embedding spectrum, block layout, Cholesky factor).
//! It is immutable after construction and can be shared across threads;
//! randomness always comes from the caller's stream.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, pow, sqrt};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::boundaries::floor_count;
use crate::error::{ensure, Error, Result};
use crate::fft::fft_in_place;
use crate::linalg::{Matrix, PivotedCholesky};
use crate::tail_models::TailFamily;

/// Largest dimension for dense covariance matrices and explicit sampling.
pub const MAX_DENSE_DIM: usize = 2000;

/// Tolerance for negative eigenvalues of the fGn circulant embedding.
const EMBEDDING_TOL: f64 = 1e-9;
/// Tolerance for negative curvature in explicit covariance factorization.
const PSD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    Iid(TailFamily),
    /// Stationary Gaussian AR(1), autocorrelation `rho^k`.
    Ar1 { rho: f64 },
    /// Fractional Gaussian noise with Hurst index `hurst`.
    Fgn { hurst: f64 },
    /// `floor(p^{1-beta})` independent standard normals, each repeated over
    /// a contiguous block.
    BlockEquicorrelated { beta: f64 },
    /// `N(0, sigma)` for a correlation matrix `sigma`.
    ExplicitCovariance(Matrix),
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::Iid(f) => f.validate(),
            NoiseModel::Ar1 { rho } => ensure(fabs(*rho) < 1.0, "rho", *rho, "|rho| < 1"),
            NoiseModel::Fgn { hurst } => {
                ensure(*hurst > 0.0 && *hurst < 1.0, "hurst", *hurst, "0 < hurst < 1")
            }
            NoiseModel::BlockEquicorrelated { beta } => {
                ensure((0.0..=1.0).contains(beta), "beta", *beta, "0 <= beta <= 1")
            }
            NoiseModel::ExplicitCovariance(m) => m.check_correlation(1e-10),
        }
    }
}

/// Autocovariance of unit-variance fGn at lag `k`:
/// `(|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * (pow(k + 1.0, h2) - 2.0 * pow(k, h2) + pow(fabs(k - 1.0), h2))
}

/// Exact sampler for a stationary Gaussian sequence whose autocovariance is
/// embedded in a nonnegative-definite circulant of power-of-two size.
#[derive(Debug, Clone)]
pub struct CirculantEmbedding {
    p: usize,
    /// `sqrt(lambda_k / m)` for each eigenvalue of the circulant.
    scale: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl CirculantEmbedding {
    /// Embeds `acf(0..=n)` in a circulant of size `m = 2n`, where `n` is the
    /// smallest power of two with `n >= p - 1`.
    pub fn new<F: Fn(usize) -> f64>(p: usize, acf: F) -> Result<Self> {
        ensure(p >= 1, "p", p as f64, "p >= 1")?;
        let n = (p.saturating_sub(1)).max(1).next_power_of_two();
        let m = 2 * n;
        let mut re = vec![0.0; m];
        let mut im = vec![0.0; m];
        for k in 0..=n {
            re[k] = acf(k);
        }
        for k in 1..n {
            re[m - k] = re[k];
        }
        fft_in_place(&mut re, &mut im);
        let min = re.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -EMBEDDING_TOL {
            return Err(Error::NegativeEmbedding { eigenvalue: min });
        }
        let eigenvalues: Vec<f64> = re.iter().map(|&l| l.max(0.0)).collect();
        let scale = eigenvalues.iter().map(|&l| sqrt(l / m as f64)).collect();
        Ok(CirculantEmbedding {
            p,
            scale,
            eigenvalues,
        })
    }

    pub fn embedding_size(&self) -> usize {
        self.scale.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Exact covariance at `lag` of the generated sequence,
    /// `(1/m) sum_k lambda_k cos(2 pi k lag / m)`.
    pub fn embedded_autocovariance(&self, lag: usize) -> f64 {
        let m = self.eigenvalues.len();
        let w = 2.0 * core::f64::consts::PI * lag as f64 / m as f64;
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| l * libm::cos(w * k as f64))
            .sum::<f64>()
            / m as f64
    }

    /// Fills `out` (length `p`) with one draw.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let m = self.scale.len();
        let mut re = Vec::with_capacity(m);
        let mut im = Vec::with_capacity(m);
        for &s in &self.scale {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            re.push(s * a);
            im.push(s * b);
        }
        fft_in_place(&mut re, &mut im);
        out[..self.p].copy_from_slice(&re[..self.p]);
    }
}

/// Contiguous block partition of `0..p`: `b - 1` blocks of size
/// `floor(p / b)`, the last absorbing the remainder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    p: usize,
    size: usize,
    count: usize,
}

impl BlockLayout {
    pub fn new(p: usize, beta: f64) -> Result<Self> {
        ensure(p >= 1, "p", p as f64, "p >= 1")?;
        ensure((0.0..=1.0).contains(&beta), "beta", beta, "0 <= beta <= 1")?;
        let count = floor_count(pow(p as f64, 1.0 - beta)).min(p);
        ensure(count >= 1, "blocks", count as f64, "at least one block")?;
        Ok(BlockLayout {
            p,
            size: p / count,
            count,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn block_of(&self, j: usize) -> usize {
        (j / self.size).min(self.count - 1)
    }

    pub fn range(&self, g: usize) -> core::ops::Range<usize> {
        let start = g * self.size;
        let end = if g + 1 == self.count { self.p } else { start + self.size };
        start..end
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Iid(TailFamily),
    Ar1 { rho: f64, innovation: f64 },
    Fgn(CirculantEmbedding),
    Block(BlockLayout),
    Explicit(PivotedCholesky),
}

/// A noise model prepared for dimension `p`.
#[derive(Debug, Clone)]
pub struct NoiseGenerator {
    p: usize,
    kind: Kind,
}

impl NoiseGenerator {
    pub fn new(model: &NoiseModel, p: usize) -> Result<Self> {
        ensure(p >= 1, "p", p as f64, "p >= 1")?;
        model.validate()?;
        let kind = match model {
            NoiseModel::Iid(f) => Kind::Iid(*f),
            NoiseModel::Ar1 { rho } => Kind::Ar1 {
                rho: *rho,
                innovation: sqrt(1.0 - rho * rho),
            },
            NoiseModel::Fgn { hurst } => {
                let h = *hurst;
                Kind::Fgn(CirculantEmbedding::new(p, |k| fgn_autocovariance(h, k))?)
            }
            NoiseModel::BlockEquicorrelated { beta } => Kind::Block(BlockLayout::new(p, *beta)?),
            NoiseModel::ExplicitCovariance(sigma) => {
                if sigma.dim() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        got: sigma.dim(),
                    });
                }
                if p > MAX_DENSE_DIM {
                    return Err(Error::TooLarge {
                        p,
                        max: MAX_DENSE_DIM,
                    });
                }
                Kind::Explicit(PivotedCholesky::new(sigma, PSD_TOL)?)
            }
        };
        Ok(NoiseGenerator { p, kind })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    /// Fills `out` (length `p`) with one noise vector.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        assert_eq!(out.len(), self.p, "output length must equal p");
        match &self.kind {
            Kind::Iid(f) => f.sample_into(rng, out),
            Kind::Ar1 { rho, innovation } => {
                let mut prev: f64 = rng.sample(StandardNormal);
                out[0] = prev;
                for v in out.iter_mut().skip(1) {
                    let z: f64 = rng.sample(StandardNormal);
                    prev = rho * prev + innovation * z;
                    *v = prev;
                }
            }
            Kind::Fgn(emb) => emb.fill(rng, out),
            Kind::Block(layout) => {
                for g in 0..layout.count() {
                    let z: f64 = rng.sample(StandardNormal);
                    out[layout.range(g)].fill(z);
                }
            }
            Kind::Explicit(chol) => {
                let z: Vec<f64> = (0..chol.rank()).map(|_| rng.sample(StandardNormal)).collect();
                chol.mul_into(&z, out);
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        self.fill(rng, &mut out);
        out
    }
}

pub fn sample_iid<R: Rng + ?Sized>(family: &TailFamily, p: usize, rng: &mut R) -> Result<Vec<f64>> {
    Ok(NoiseGenerator::new(&NoiseModel::Iid(*family), p)?.sample(rng))
}

pub fn sample_ar1<R: Rng + ?Sized>(rho: f64, p: usize, rng: &mut R) -> Result<Vec<f64>> {
    Ok(NoiseGenerator::new(&NoiseModel::Ar1 { rho }, p)?.sample(rng))
}

pub fn sample_fgn<R: Rng + ?Sized>(hurst: f64, p: usize, rng: &mut R) -> Result<Vec<f64>> {
    Ok(NoiseGenerator::new(&NoiseModel::Fgn { hurst }, p)?.sample(rng))
}

pub fn sample_block<R: Rng + ?Sized>(p: usize, beta: f64, rng: &mut R) -> Result<Vec<f64>> {
    Ok(NoiseGenerator::new(&NoiseModel::BlockEquicorrelated { beta }, p)?.sample(rng))
}

pub fn sample_explicit<R: Rng + ?Sized>(sigma: &Matrix, rng: &mut R) -> Result<Vec<f64>> {
    let model = NoiseModel::ExplicitCovariance(sigma.clone());
    Ok(NoiseGenerator::new(&model, sigma.dim())?.sample(rng))
}

/// Exact correlation matrix of `model` in dimension `p`.
pub fn covariance_of(model: &NoiseModel, p: usize) -> Result<Matrix> {
    model.validate()?;
    if p > MAX_DENSE_DIM {
        return Err(Error::TooLarge {
            p,
            max: MAX_DENSE_DIM,
        });
    }
    let lag = |i: usize, j: usize| i.abs_diff(j);
    Ok(match model {
        NoiseModel::Iid(_) => Matrix::identity(p),
        NoiseModel::Ar1 { rho } => Matrix::from_fn(p, |i, j| libm::pow(*rho, lag(i, j) as f64)),
        NoiseModel::Fgn { hurst } => {
            let acf: Vec<f64> = (0..p).map(|k| fgn_autocovariance(*hurst, k)).collect();
            Matrix::from_fn(p, |i, j| acf[lag(i, j)])
        }
        NoiseModel::BlockEquicorrelated { beta } => {
            let layout = BlockLayout::new(p, *beta)?;
            Matrix::from_fn(p, |i, j| {
                if layout.block_of(i) == layout.block_of(j) {
                    1.0
                } else {
                    0.0
                }
            })
        }
        NoiseModel::ExplicitCovariance(m) => {
            if m.dim() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: m.dim(),
                });
            }
            m.clone()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lag_corr(x: &[f64], lag: usize) -> f64 {
        let n = x.len() - lag;
        let num: f64 = (0..n).map(|i| x[i] * x[i + lag]).sum();
        let den: f64 = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        num / n as f64 / den
    }

    #[test]
    fn fgn_autocovariance_values() {
        for k in 1..20 {
            assert!(fgn_autocovariance(0.5, k).abs() < 1e-15);
        }
        assert_eq!(fgn_autocovariance(0.75, 0), 1.0);
        assert!((fgn_autocovariance(0.75, 1) - 0.5 * (pow(2.0, 1.5) - 2.0)).abs() < 1e-15);
        assert!((fgn_autocovariance(0.75, 1) - 0.41421356).abs() < 1e-8);
    }

    #[test]
    fn embedding_reproduces_target_covariance() {
        for &h in &[0.1, 0.3, 0.5, 0.75, 0.9, 0.99] {
            for &p in &[1usize, 2, 3, 100, 257, 1000] {
                let emb = CirculantEmbedding::new(p, |k| fgn_autocovariance(h, k)).unwrap();
                assert!(emb.eigenvalues().iter().all(|&l| l >= 0.0));
                for lag in 0..p {
                    let got = emb.embedded_autocovariance(lag);
                    assert!((got - fgn_autocovariance(h, lag)).abs() < 1e-8, "h={h} p={p} lag={lag}");
                }
            }
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(NoiseGenerator::new(&NoiseModel::Ar1 { rho: 1.0 }, 10).is_err());
        assert!(NoiseGenerator::new(&NoiseModel::Fgn { hurst: 1.0 }, 10).is_err());
        assert!(NoiseGenerator::new(&NoiseModel::Fgn { hurst: 0.0 }, 10).is_err());
        assert!(NoiseGenerator::new(&NoiseModel::BlockEquicorrelated { beta: 1.5 }, 10).is_err());
        // a non-embeddable "autocovariance"
        assert!(matches!(
            CirculantEmbedding::new(8, |k| if k == 1 { 0.9 } else if k == 0 { 1.0 } else { -0.9 }),
            Err(Error::NegativeEmbedding { .. })
        ));
        let bad = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_explicit(&bad, &mut rng).is_err());
        assert!(covariance_of(&NoiseModel::Ar1 { rho: 0.5 }, 2001).is_err());
    }

    #[test]
    fn iid_and_ar1_correlations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = sample_iid(&TailFamily::Gaussian, 100_000, &mut rng).unwrap();
        assert!(lag_corr(&x, 1).abs() < 3.0 / sqrt(1e5));
        assert_eq!(sample_iid(&TailFamily::Laplace, 1, &mut rng).unwrap().len(), 1);

        let x = sample_ar1(0.0, 100_000, &mut rng).unwrap();
        assert!(lag_corr(&x, 1).abs() < 3.0 / sqrt(1e5));

        let mut est = 0.0;
        for _ in 0..100 {
            est += lag_corr(&sample_ar1(0.9, 10_000, &mut rng).unwrap(), 1);
        }
        assert!((est / 100.0 - 0.9).abs() < 0.02);

        let x = sample_ar1(-0.5, 200_000, &mut rng).unwrap();
        assert!((lag_corr(&x, 2) - 0.25).abs() < 0.015);
        assert!((lag_corr(&x, 1) + 0.5).abs() < 0.015);
    }

    #[test]
    fn block_structure() {
        let layout = BlockLayout::new(100, 0.5).unwrap();
        assert_eq!(layout.count(), 10);
        for g in 0..10 {
            assert_eq!(layout.range(g).len(), 10);
        }
        let layout = BlockLayout::new(103, 0.5).unwrap();
        assert_eq!(layout.count(), 10);
        assert_eq!(layout.range(9), 90..103);
        assert_eq!(layout.block_of(102), 9);
        assert_eq!(BlockLayout::new(50, 1.0).unwrap().count(), 1);
        assert_eq!(BlockLayout::new(50, 0.0).unwrap().count(), 50);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = sample_block(100, 0.5, &mut rng).unwrap();
        for g in 0..10 {
            let r = layout_range(g);
            assert!(x[r.clone()].iter().all(|&v| v == x[r.start]));
        }
        let x = sample_block(100, 1.0, &mut rng).unwrap();
        assert!(x.iter().all(|&v| v == x[0]));

        fn layout_range(g: usize) -> core::ops::Range<usize> {
            g * 10..(g + 1) * 10
        }
    }

    #[test]
    fn covariance_matrices() {
        let m = covariance_of(&NoiseModel::Ar1 { rho: 0.5 }, 3).unwrap();
        let want = [[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), want[i][j]);
            }
        }
        assert_eq!(covariance_of(&NoiseModel::Iid(TailFamily::Gaussian), 4).unwrap(), Matrix::identity(4));
        let f = covariance_of(&NoiseModel::Fgn { hurst: 0.75 }, 5).unwrap();
        assert!((f.get(0, 1) - 0.41421356).abs() < 1e-8);
        let b = covariance_of(&NoiseModel::BlockEquicorrelated { beta: 0.5 }, 100).unwrap();
        assert_eq!(b.get(0, 9), 1.0);
        assert_eq!(b.get(0, 10), 0.0);
    }

    #[test]
    fn explicit_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ones = Matrix::from_fn(5, |_, _| 1.0);
        let x = sample_explicit(&ones, &mut rng).unwrap();
        assert!(x.iter().all(|&v| (v - x[0]).abs() < 1e-12));
        let x = sample_explicit(&Matrix::identity(3), &mut rng).unwrap();
        assert_eq!(x.len(), 3);
    }
}
