//! Dependence diagnostics for Gaussian noise arrays.
//!
//! * `N_p(delta)`: the largest number of other coordinates any coordinate
//!   has covariance above `delta` with. Uniformly decreasing dependence
//!   means this stays bounded as `p` grows, for every `delta`.
//! * Greedy packings of coordinates with pairwise covariance at most
//!   `delta`.
//! * Exact search for large mutually correlated subsets.
//! * Relative stability of maxima, `max_{j in S} eps(j) / u_{|S|}`.

use alloc::vec;
use alloc::vec::Vec;

use libm::{ceil, log};
use rand::seq::index;
use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::linalg::Matrix;
use crate::noise::{NoiseGenerator, NoiseModel};
use crate::tail_models::TailFamily;

fn check_delta(delta: f64) -> Result<()> {
    ensure(delta > 0.0 && delta < 1.0, "delta", delta, "0 < delta < 1")
}

/// `N_p(delta) = max_j |{k != j : sigma(j, k) > delta}|`.
///
/// The dependence constant of the definition is `N(delta) = 1 + sup_p N_p(delta)`.
pub fn udd_count(sigma: &Matrix, delta: f64) -> Result<usize> {
    check_delta(delta)?;
    let n = sigma.dim();
    Ok((0..n)
        .map(|j| {
            sigma
                .row(j)
                .iter()
                .enumerate()
                .filter(|&(k, &v)| k != j && v > delta)
                .count()
        })
        .max()
        .unwrap_or(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UddProfile {
    pub deltas: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn udd_profile(sigma: &Matrix, deltas: &[f64]) -> Result<UddProfile> {
    let counts = deltas
        .iter()
        .map(|&d| udd_count(sigma, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(UddProfile {
        deltas: deltas.to_vec(),
        counts,
    })
}

/// Greedy packing: repeatedly takes the smallest remaining index and
/// discards every index whose covariance with it exceeds `delta`.
///
/// Members have pairwise covariance at most `delta`, i.e. canonical distance
/// at least `sqrt(2 (1 - delta))`.
pub fn gamma_packing(sigma: &Matrix, delta: f64) -> Result<Vec<usize>> {
    check_delta(delta)?;
    let n = sigma.dim();
    let mut alive = vec![true; n];
    let mut packing = Vec::new();
    for j in 0..n {
        if !alive[j] {
            continue;
        }
        packing.push(j);
        for (i, &v) in sigma.row(j).iter().enumerate() {
            if v > delta {
                alive[i] = false;
            }
        }
        alive[j] = false;
    }
    Ok(packing)
}

/// Guaranteed packing size `floor(q / (N_p(delta) + 1))`.
pub fn packing_lower_bound(sigma: &Matrix, delta: f64) -> Result<usize> {
    Ok(sigma.dim() / (udd_count(sigma, delta)? + 1))
}

/// Fixed-width bitset over graph vertices.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .position(|&w| w != 0)
            .map(|w| w * 64 + self.0[w].trailing_zeros() as usize)
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            core::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + b)
            })
        })
    }
}

/// Branch-and-bound search for a `k`-clique, with a greedy colouring bound.
struct CliqueSearch<'a> {
    adj: &'a [Bits],
    k: usize,
}

impl CliqueSearch<'_> {
    /// Upper bound on the clique size inside `cand`: number of colours in a
    /// greedy sequential colouring.
    fn colour_bound(&self, cand: &Bits) -> usize {
        let mut uncoloured = cand.clone();
        let mut colours = 0;
        while !uncoloured.is_empty() {
            colours += 1;
            let mut avail = uncoloured.clone();
            while let Some(v) = avail.first() {
                uncoloured.remove(v);
                avail.remove(v);
                for (w, a) in avail.0.iter_mut().zip(&self.adj[v].0) {
                    *w &= !a;
                }
            }
        }
        colours
    }

    fn extend(&self, clique: &mut Vec<usize>, cand: Bits) -> bool {
        if clique.len() == self.k {
            return true;
        }
        let need = self.k - clique.len();
        if cand.len() < need || self.colour_bound(&cand) < need {
            return false;
        }
        let mut rest = cand;
        let order: Vec<usize> = rest.iter().collect();
        for v in order {
            if rest.len() < need {
                return false;
            }
            clique.push(v);
            if self.extend(clique, rest.and(&self.adj[v])) {
                return true;
            }
            clique.pop();
            rest.remove(v);
        }
        false
    }
}

/// Searches indices `1..=n` of an `(n + 1) x (n + 1)` correlation matrix for
/// `k` of them with all pairwise correlations above `c^2 / 2`.
///
/// Requires `rho(0, j) > c` for every `j >= 1`. The search is exact: `None`
/// means no such subset exists. Existence is guaranteed once
/// `n >= 2^{2 ceil(2/c^2) + 4}` and `k <= floor(log2 sqrt n)`.
pub fn correlated_subset_search(rho: &Matrix, c: f64, k: usize) -> Result<Option<Vec<usize>>> {
    ensure(c > 0.0 && c < 1.0, "c", c, "0 < c < 1")?;
    let dim = rho.dim();
    ensure(dim >= 2, "dimension", dim as f64, "at least 2")?;
    if (1..dim).any(|j| rho.get(0, j) <= c) {
        return Err(Error::Precondition(
            "every correlation with the first coordinate must exceed c",
        ));
    }
    if k == 0 {
        return Ok(Some(Vec::new()));
    }
    let n = dim - 1;
    let cut = 0.5 * c * c;
    let adj: Vec<Bits> = (0..n)
        .map(|i| {
            let mut b = Bits::new(n);
            for j in 0..n {
                if i != j && rho.get(i + 1, j + 1) > cut {
                    b.insert(j);
                }
            }
            b
        })
        .collect();
    let mut all = Bits::new(n);
    for i in 0..n {
        all.insert(i);
    }
    let search = CliqueSearch { adj: &adj, k };
    let mut clique = Vec::with_capacity(k);
    if search.extend(&mut clique, all) {
        Ok(Some(clique.into_iter().map(|i| i + 1).collect()))
    } else {
        Ok(None)
    }
}

/// Smallest `n` for which a `floor(log2 sqrt n)`-subset is guaranteed:
/// `2^{2 ceil(2/c^2) + 4}`.
pub fn guaranteed_subset_dim(c: f64) -> Result<u128> {
    ensure(c > 0.0 && c < 1.0, "c", c, "0 < c < 1")?;
    let e = 2.0 * ceil(2.0 / (c * c)) + 4.0;
    ensure(e < 127.0, "c", c, "c large enough for the bound to fit in u128")?;
    Ok(1u128 << (e as u32))
}

/// `floor(log2 sqrt n)`.
pub fn ramsey_subset_size(n: u64) -> usize {
    if n == 0 {
        0
    } else {
        (n.ilog2() / 2) as usize
    }
}

/// `C(n, k)`, exact while it fits in `u128`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Ramsey-number bound `R(k, k) <= C(2k - 2, k - 1) <= n` for
/// `k = floor(log2 sqrt n)`.
pub fn ramsey_bound_holds(n: u64) -> bool {
    let k = ramsey_subset_size(n) as u64;
    if k == 0 {
        return true;
    }
    binomial(2 * k - 2, k - 1) <= n as u128
}

/// `c_p = u_{p log p} / u_p - 1`, where `u_q = F←(1 - 1/q)`.
pub fn cp_sequence(family: &TailFamily, p: f64) -> Result<f64> {
    ensure(p > core::f64::consts::E, "p", p, "p > e")?;
    let u_p = family.upper_quantile(1.0 / p)?;
    let u_plogp = family.upper_quantile(1.0 / (p * log(p)))?;
    Ok(u_plogp / u_p - 1.0)
}

/// Summary of a Monte Carlo sample of maxima ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilitySummary {
    pub reps: usize,
    pub mean: f64,
    pub median: f64,
    pub q05: f64,
    pub q25: f64,
    pub q75: f64,
    pub q95: f64,
}

impl StabilitySummary {
    pub fn from_samples(mut xs: Vec<f64>) -> Self {
        assert!(!xs.is_empty(), "need at least one sample");
        xs.sort_by(f64::total_cmp);
        let n = xs.len();
        // linear interpolation between order statistics
        let q = |p: f64| {
            let h = p * (n - 1) as f64;
            let lo = h as usize;
            let hi = (lo + 1).min(n - 1);
            xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
        };
        StabilitySummary {
            reps: n,
            mean: xs.iter().sum::<f64>() / n as f64,
            median: q(0.5),
            q05: q(0.05),
            q25: q(0.25),
            q75: q(0.75),
            q95: q(0.95),
        }
    }
}

/// One replicate of `max_{j in S} eps(j) / u_{|S|}` for a uniformly random
/// subset `S` of size `subset_size`. `buf` must have length `p`.
pub fn stability_trial<R: Rng + ?Sized>(
    gen: &NoiseGenerator,
    quantile: f64,
    subset_size: usize,
    rng: &mut R,
    buf: &mut [f64],
) -> f64 {
    gen.fill(rng, buf);
    let p = buf.len();
    let max = if subset_size == p {
        buf.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        index::sample(rng, p, subset_size)
            .iter()
            .map(|j| buf[j])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    max / quantile
}

/// `u_{|S|} = F←(1 - 1/|S|)`, the normalizer used by [`stability_ratio`].
pub fn subset_quantile(family: &TailFamily, subset_size: usize) -> Result<f64> {
    ensure(subset_size >= 2, "subset_size", subset_size as f64, "subset_size >= 2")?;
    family.upper_quantile(1.0 / subset_size as f64)
}

/// Monte Carlo distribution of `max_{j in S} eps(j) / u_{|S|}` over `reps`
/// independent noise draws.
pub fn stability_ratio<R: Rng + ?Sized>(
    model: &NoiseModel,
    family: &TailFamily,
    p: usize,
    subset_size: usize,
    reps: usize,
    rng: &mut R,
) -> Result<StabilitySummary> {
    ensure(subset_size <= p, "subset_size", subset_size as f64, "subset_size <= p")?;
    ensure(reps >= 1, "reps", reps as f64, "reps >= 1")?;
    let u = subset_quantile(family, subset_size)?;
    let gen = NoiseGenerator::new(model, p)?;
    let mut buf = vec![0.0; p];
    let xs = (0..reps)
        .map(|_| stability_trial(&gen, u, subset_size, rng, &mut buf))
        .collect();
    Ok(StabilitySummary::from_samples(xs))
}

/// As [`stability_ratio`], with the maximum taken over a fixed subset.
pub fn stability_ratio_on<R: Rng + ?Sized>(
    model: &NoiseModel,
    family: &TailFamily,
    p: usize,
    subset: &[usize],
    reps: usize,
    rng: &mut R,
) -> Result<StabilitySummary> {
    ensure(reps >= 1, "reps", reps as f64, "reps >= 1")?;
    if let Some(&j) = subset.iter().find(|&&j| j >= p) {
        return Err(Error::Domain {
            name: "subset index",
            value: j as f64,
            expected: "index < p",
        });
    }
    let u = subset_quantile(family, subset.len())?;
    let gen = NoiseGenerator::new(model, p)?;
    let mut buf = vec![0.0; p];
    let xs = (0..reps)
        .map(|_| {
            gen.fill(rng, &mut buf);
            subset.iter().map(|&j| buf[j]).fold(f64::NEG_INFINITY, f64::max) / u
        })
        .collect();
    Ok(StabilitySummary::from_samples(xs))
}
