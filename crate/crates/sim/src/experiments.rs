//! Monte Carlo harness for exact support recovery over `(beta, r)` grids,
//! and the Pareto experiment without a phase transition.
//!
//! Every trial draws from its own ChaCha8 stream keyed by
//! `(seed, cell, rep)`, so results do not depend on thread count or
//! scheduling.

use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use suprec_core::diagnostics::{cp_sequence, stability_trial, subset_quantile, StabilitySummary};
use suprec_core::boundaries::{
    heavier_than_agg_params, lighter_than_agg_params, signal_magnitude, sparsity,
};
use suprec_core::linalg::Matrix;
use suprec_core::procedures::{metrics, oracle_top_s, universal_threshold};
use suprec_core::{NoiseGenerator, NoiseModel, Procedure, RecoveryMetrics, Rule, TailFamily};

use crate::error::{Error, Result};

/// Error law of a grid. Dependent models have standard normal marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    /// Independent draws from the grid's `family`.
    #[default]
    Iid,
    Ar1 { rho: f64 },
    Fgn { hurst: f64 },
    /// Block-equicorrelated noise; the cell's `beta` is used when unset.
    Block {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
    },
    /// Dense correlation matrix given row by row.
    Explicit { matrix: Vec<Vec<f64>> },
}

impl NoiseSpec {
    fn model(&self, family: TailFamily, beta: f64) -> Result<NoiseModel> {
        Ok(match self {
            NoiseSpec::Iid => NoiseModel::Iid(family),
            NoiseSpec::Ar1 { rho } => NoiseModel::Ar1 { rho: *rho },
            NoiseSpec::Fgn { hurst } => NoiseModel::Fgn { hurst: *hurst },
            NoiseSpec::Block { beta: b } => NoiseModel::BlockEquicorrelated { beta: b.unwrap_or(beta) },
            NoiseSpec::Explicit { matrix } => NoiseModel::ExplicitCovariance(
                Matrix::from_rows(matrix).map_err(Error::Invalid)?,
            ),
        })
    }
}

/// Support estimator of a grid, resolved per cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcedureSpec {
    /// Fixed threshold from [`universal_threshold`].
    Universal {
        #[serde(default = "one")]
        c: f64,
    },
    /// Fixed threshold `sqrt(2 (1 - beta) log p)`, tuned to block noise.
    /// The cell's `beta` is used when unset.
    BlockUniversal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
    },
    Bonferroni { alpha: f64 },
    Sidak { alpha: f64 },
    Holm { alpha: f64 },
    Hochberg { alpha: f64 },
    Fixed { t: f64 },
    /// Top `s` observations, with `s` known.
    Oracle,
    /// Top `s` likelihood ratios at the cell's signal size.
    LikelihoodRatio,
}

fn one() -> f64 {
    1.0
}

impl Default for ProcedureSpec {
    fn default() -> Self {
        ProcedureSpec::Universal { c: 1.0 }
    }
}

impl ProcedureSpec {
    fn resolve(&self, family: TailFamily, p: usize, beta: f64, s: usize, delta: f64) -> Result<Procedure> {
        let rule = match *self {
            ProcedureSpec::Universal { c } => Rule::FixedThreshold {
                t: universal_threshold(&family, p as f64, c)?,
            },
            ProcedureSpec::BlockUniversal { beta: b } => {
                let b = b.unwrap_or(beta);
                if !(0.0..=1.0).contains(&b) {
                    return Err(Error::Invalid(suprec_core::Error::Domain {
                        name: "beta",
                        value: b,
                        expected: "0 <= beta <= 1",
                    }));
                }
                Rule::FixedThreshold {
                    t: (2.0 * (1.0 - b) * (p as f64).ln()).sqrt(),
                }
            }
            ProcedureSpec::Bonferroni { alpha } => Rule::Bonferroni { alpha },
            ProcedureSpec::Sidak { alpha } => Rule::Sidak { alpha },
            ProcedureSpec::Holm { alpha } => Rule::Holm { alpha },
            ProcedureSpec::Hochberg { alpha } => Rule::Hochberg { alpha },
            ProcedureSpec::Fixed { t } => Rule::FixedThreshold { t },
            ProcedureSpec::Oracle => Rule::OracleTopS { s },
            ProcedureSpec::LikelihoodRatio => Rule::LikelihoodRatioTopS { s, shift: delta },
        };
        Ok(Procedure::new(rule, family)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SignalPlacement {
    /// A uniformly random support of size `s` in every replicate.
    #[default]
    UniformRandom,
    /// Support `{0, .., s - 1}`.
    FixedPrefix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub p: usize,
    pub beta_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub reps: usize,
    pub family: TailFamily,
    pub noise: NoiseSpec,
    pub procedure: ProcedureSpec,
    pub seed: u64,
    pub signal_placement: SignalPlacement,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            p: 10_000,
            beta_grid: (1..=19).map(|i| i as f64 * 0.05).collect(),
            r_grid: (0..30).map(|i| 0.1 + 0.2 * i as f64).collect(),
            reps: 1000,
            family: TailFamily::Gaussian,
            noise: NoiseSpec::Iid,
            procedure: ProcedureSpec::default(),
            seed: 0,
            signal_placement: SignalPlacement::UniformRandom,
        }
    }
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl GridSpec {
    pub fn cells(&self) -> usize {
        self.beta_grid.len() * self.r_grid.len()
    }

    /// `(beta, r)` of cell `i`; cells run over `r` fastest.
    pub fn cell(&self, i: usize) -> (f64, f64) {
        let n = self.r_grid.len();
        (self.beta_grid[i / n], self.r_grid[i % n])
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 3 {
            return Err(config(format!("p must be at least 3, got {}", self.p)));
        }
        if self.reps == 0 {
            return Err(config("reps must be at least 1"));
        }
        if self.beta_grid.is_empty() || self.r_grid.is_empty() {
            return Err(config("beta_grid and r_grid must be nonempty"));
        }
        if let Some(b) = self.beta_grid.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
            return Err(config(format!("beta must lie in (0, 1], got {b}")));
        }
        if let Some(r) = self.r_grid.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(config(format!("r must be positive and finite, got {r}")));
        }
        self.family.validate()?;
        if !matches!(self.noise, NoiseSpec::Iid) && self.family != TailFamily::Gaussian {
            return Err(config(
                "dependent noise models have Gaussian marginals; family must be gaussian",
            ));
        }
        for i in 0..self.cells() {
            self.setup(i)?;
        }
        Ok(())
    }

    /// Everything a trial of cell `i` needs, built once per cell.
    pub fn setup(&self, i: usize) -> Result<CellSetup> {
        let (beta, r) = self.cell(i);
        let (s, delta) = signal_size(&self.family, self.p, beta, r)?;
        let noise = self.noise.model(self.family, beta)?;
        let generator = NoiseGenerator::new(&noise, self.p)?;
        let procedure = self.procedure.resolve(self.family, self.p, beta, s, delta)?;
        Ok(CellSetup {
            p: self.p,
            s,
            delta,
            generator,
            procedure,
            placement: self.signal_placement,
        })
    }
}

/// Sparsity and signal size of a cell.
///
/// AGG families use `s = floor(p^{1-beta})` and
/// `Delta = (nu r log p)^{1/nu}`; the heavier and lighter families use their
/// own parametrizations, and Pareto noise uses `Delta = r p^{1/alpha}`.
pub fn signal_size(family: &TailFamily, p: usize, beta: f64, r: f64) -> Result<(usize, f64)> {
    let pf = p as f64;
    match *family {
        TailFamily::HeavierThanAgg { gamma, .. } => {
            let t = heavier_than_agg_params(pf, beta, gamma, r)?;
            check_sparsity(t.s, p)?;
            Ok((t.s, t.delta))
        }
        TailFamily::LighterThanAgg { nu } => {
            let t = lighter_than_agg_params(pf, beta, nu, r)?;
            check_sparsity(t.s, p)?;
            Ok((t.s, t.delta))
        }
        TailFamily::Pareto { tail_index } => Ok((sparsity(p, beta), r * pf.powf(1.0 / tail_index))),
        _ => {
            let nu = family.agg_shape().expect("AGG family");
            Ok((sparsity(p, beta), signal_magnitude(nu, r, pf)?))
        }
    }
}

fn check_sparsity(s: usize, p: usize) -> Result<()> {
    if s == 0 || s > p {
        return Err(config(format!("cell has sparsity {s}, outside 1..={p}")));
    }
    Ok(())
}

pub struct CellSetup {
    pub p: usize,
    pub s: usize,
    pub delta: f64,
    pub generator: NoiseGenerator,
    pub procedure: Procedure,
    pub placement: SignalPlacement,
}

impl CellSetup {
    /// One replicate: place the signal, add noise, estimate, score. `buf`
    /// must have length `p`.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut [f64]) -> Result<RecoveryMetrics> {
        let support: Vec<usize> = match self.placement {
            SignalPlacement::FixedPrefix => (0..self.s).collect(),
            SignalPlacement::UniformRandom => {
                let mut v = index::sample(rng, self.p, self.s).into_vec();
                v.sort_unstable();
                v
            }
        };
        self.generator.fill(rng, buf);
        for &j in &support {
            buf[j] += self.delta;
        }
        let est = self.procedure.apply(buf).map_err(Error::Runtime)?;
        Ok(metrics(&est, &support))
    }
}

/// Stream for replicate `rep` of cell `cell`.
pub fn trial_rng(seed: u64, cell: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((cell << 32) | (rep & 0xffff_ffff));
    rng
}

/// A single trial outside any grid, using stream `(seed, 0, 0)`.
#[allow(clippy::too_many_arguments)]
pub fn run_trial(
    p: usize,
    beta: f64,
    r: f64,
    family: TailFamily,
    noise: &NoiseSpec,
    procedure: ProcedureSpec,
    placement: SignalPlacement,
    seed: u64,
) -> Result<RecoveryMetrics> {
    let spec = GridSpec {
        p,
        beta_grid: vec![beta],
        r_grid: vec![r],
        reps: 1,
        family,
        noise: noise.clone(),
        procedure,
        seed,
        signal_placement: placement,
    };
    spec.validate()?;
    let cell = spec.setup(0)?;
    let mut buf = vec![0.0; p];
    cell.trial(&mut trial_rng(seed, 0, 0), &mut buf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellResult {
    pub beta: f64,
    pub r: f64,
    pub s: usize,
    pub delta: f64,
    pub exact: usize,
    pub false_inclusions: usize,
    pub prob_exact: f64,
    pub stderr: f64,
    pub fwer: f64,
    pub mean_fdp: f64,
    pub mean_fnp: f64,
    pub mean_hamming: f64,
    pub reps: usize,
}

impl CellResult {
    fn aggregate(beta: f64, r: f64, cell: &CellSetup, ms: &[RecoveryMetrics]) -> Self {
        let n = ms.len() as f64;
        let exact = ms.iter().filter(|m| m.exact).count();
        let false_inclusions = ms.iter().filter(|m| m.false_inclusion).count();
        let prob = exact as f64 / n;
        CellResult {
            beta,
            r,
            s: cell.s,
            delta: cell.delta,
            exact,
            false_inclusions,
            prob_exact: prob,
            stderr: (prob * (1.0 - prob) / n).sqrt(),
            fwer: false_inclusions as f64 / n,
            mean_fdp: ms.iter().map(|m| m.fdp).sum::<f64>() / n,
            mean_fnp: ms.iter().map(|m| m.fnp).sum::<f64>() / n,
            mean_hamming: ms.iter().map(|m| m.hamming as f64).sum::<f64>() / n,
            reps: ms.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub cells: Vec<CellResult>,
}

pub const CSV_HEADER: &str = "beta,r,prob_exact,stderr,fwer,mean_fdp,mean_fnp,mean_hamming,reps";

impl GridResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                fmt_sig(c.beta),
                fmt_sig(c.r),
                fmt_sig(c.prob_exact),
                fmt_sig(c.stderr),
                fmt_sig(c.fwer),
                fmt_sig(c.mean_fdp),
                fmt_sig(c.mean_fnp),
                fmt_sig(c.mean_hamming),
                c.reps
            );
        }
        out
    }

    pub fn find(&self, beta: f64, r: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.beta == beta && c.r == r)
    }
}

/// Decimal text with 6 significant digits, trailing zeros removed
/// (C's `%g`).
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        return format!("{mant}e{exp}");
    }
    let s = format!("{:.*}", (5 - exp) as usize, v);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Runs a validated grid. `progress` is called with `(done, total)` after
/// each cell. `parallelism = None` uses every available worker.
pub fn run_grid(
    spec: &GridSpec,
    parallelism: Option<usize>,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<GridResult> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = parallelism {
        if n == 0 {
            return Err(config("parallelism must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Thread(e.to_string()))?;
    pool.install(|| {
        let total = spec.cells();
        let mut cells = Vec::with_capacity(total);
        for i in 0..total {
            let (beta, r) = spec.cell(i);
            let setup = spec.setup(i)?;
            let ms = (0..spec.reps)
                .into_par_iter()
                .map_init(
                    || vec![0.0; spec.p],
                    |buf, rep| setup.trial(&mut trial_rng(spec.seed, i as u64, rep as u64), buf),
                )
                .collect::<Result<Vec<_>>>()?;
            cells.push(CellResult::aggregate(beta, r, &setup, &ms));
            if let Some(f) = progress {
                f(i + 1, total);
            }
        }
        Ok(GridResult { cells })
    })
}

/// Bonferroni level whose threshold is the universal threshold:
/// `alpha(p) = p F̄(t_p)`.
pub fn bonferroni_alpha_schedule(family: &TailFamily, p: f64, c: f64) -> Result<f64> {
    let t = universal_threshold(family, p, c)?;
    Ok(p * family.survival(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParetoSpec {
    pub p: usize,
    pub alpha_tail: f64,
    /// Fraction of coordinates carrying signal.
    pub f: f64,
    pub r: f64,
    pub reps: usize,
    /// Draws for the Fréchet side; `reps` when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_reps: Option<usize>,
    pub seed: u64,
}

impl ParetoSpec {
    pub fn sparsity(&self) -> usize {
        (self.f * self.p as f64).round() as usize
    }

    pub fn delta(&self) -> f64 {
        self.r * (self.p as f64).powf(1.0 / self.alpha_tail)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_tail > 0.0 && self.alpha_tail.is_finite()) {
            return Err(config(format!("alpha_tail must be positive, got {}", self.alpha_tail)));
        }
        if !(self.f > 0.0 && self.f < 1.0) {
            return Err(config(format!("f must lie in (0, 1), got {}", self.f)));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(config(format!("r must be positive, got {}", self.r)));
        }
        if self.reps == 0 || self.limit_reps == Some(0) {
            return Err(config("reps must be at least 1"));
        }
        let s = self.sparsity();
        if s == 0 || s >= self.p {
            return Err(config(format!("round(f p) = {s} must lie in 1..p")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParetoResult {
    pub s: usize,
    pub delta: f64,
    pub empirical: f64,
    pub empirical_stderr: f64,
    pub limit: f64,
    pub limit_stderr: f64,
}

/// Exact-recovery probability of the oracle under two-sided Pareto noise,
/// next to the limit
/// `P[(1 - f)^{1/alpha} Y1 + f^{1/alpha} Y2 < r]` for independent
/// `alpha`-Fréchet `Y1`, `Y2`.
pub fn pareto_experiment(spec: &ParetoSpec, parallelism: Option<usize>) -> Result<ParetoResult> {
    spec.validate()?;
    let family = TailFamily::Pareto { tail_index: spec.alpha_tail };
    let (p, s, delta) = (spec.p, spec.sparsity(), spec.delta());
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = parallelism {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Thread(e.to_string()))?;
    let (hits, limit_hits, limit_reps) = pool.install(|| {
        let hits = (0..spec.reps)
            .into_par_iter()
            .map_init(
                || vec![0.0; p],
                |buf, rep| {
                    let mut rng = trial_rng(spec.seed, 0, rep as u64);
                    // iid noise is exchangeable, so the support can be fixed
                    family.sample_into(&mut rng, buf);
                    for v in &mut buf[..s] {
                        *v += delta;
                    }
                    let est = oracle_top_s(buf, s).map_err(Error::Runtime)?;
                    Ok(est.selected.len() == s && est.selected.iter().enumerate().all(|(i, &j)| i == j))
                },
            )
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .filter(|&b| b)
            .count();
        let limit_reps = spec.limit_reps.unwrap_or(spec.reps);
        let (a, b) = ((1.0 - spec.f).powf(1.0 / spec.alpha_tail), spec.f.powf(1.0 / spec.alpha_tail));
        let limit_hits = (0..limit_reps)
            .into_par_iter()
            .filter(|&rep| {
                let mut rng = trial_rng(spec.seed, 1, rep as u64);
                let y1 = frechet(&mut rng, spec.alpha_tail);
                let y2 = frechet(&mut rng, spec.alpha_tail);
                a * y1 + b * y2 < spec.r
            })
            .count();
        Ok::<_, Error>((hits, limit_hits, limit_reps))
    })?;
    let (emp, lim) = (hits as f64 / spec.reps as f64, limit_hits as f64 / limit_reps as f64);
    Ok(ParetoResult {
        s,
        delta,
        empirical: emp,
        empirical_stderr: (emp * (1.0 - emp) / spec.reps as f64).sqrt(),
        limit: lim,
        limit_stderr: (lim * (1.0 - lim) / limit_reps as f64).sqrt(),
    })
}

/// `(-log U)^{-1/alpha}`, with `U` uniform on `(0, 1)`.
fn frechet<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    (-u.ln()).powf(-1.0 / alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityResult {
    pub p: usize,
    pub subset_size: usize,
    pub u: f64,
    pub c_p: f64,
    /// Fraction of replicates with ratio above `1 + c_p`.
    pub exceed: f64,
    pub exceed_stderr: f64,
    #[serde(flatten)]
    pub summary: Summary,
}

/// Serializable copy of [`StabilitySummary`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub reps: usize,
    pub mean: f64,
    pub median: f64,
    pub q05: f64,
    pub q25: f64,
    pub q75: f64,
    pub q95: f64,
}

impl From<StabilitySummary> for Summary {
    fn from(s: StabilitySummary) -> Self {
        Summary {
            reps: s.reps,
            mean: s.mean,
            median: s.median,
            q05: s.q05,
            q25: s.q25,
            q75: s.q75,
            q95: s.q95,
        }
    }
}

/// Parallel version of [`suprec_core::diagnostics::stability_ratio`]:
/// replicate `rep` draws from stream `(seed, 0, rep)`.
pub fn stability_experiment(
    model: &NoiseModel,
    family: &TailFamily,
    p: usize,
    subset_size: usize,
    reps: usize,
    seed: u64,
    parallelism: Option<usize>,
) -> Result<StabilityResult> {
    if reps == 0 {
        return Err(config("reps must be at least 1"));
    }
    if subset_size > p {
        return Err(config(format!("subset size {subset_size} exceeds p = {p}")));
    }
    let u = subset_quantile(family, subset_size)?;
    let c_p = cp_sequence(family, subset_size as f64)?;
    let gen = NoiseGenerator::new(model, p)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = parallelism {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Thread(e.to_string()))?;
    let xs: Vec<f64> = pool.install(|| {
        (0..reps)
            .into_par_iter()
            .map_init(
                || vec![0.0; p],
                |buf, rep| stability_trial(&gen, u, subset_size, &mut trial_rng(seed, 0, rep as u64), buf),
            )
            .collect()
    });
    let hits = xs.iter().filter(|&&x| x > 1.0 + c_p).count();
    let exceed = hits as f64 / reps as f64;
    Ok(StabilityResult {
        p,
        subset_size,
        u,
        c_p,
        exceed,
        exceed_stderr: (exceed * (1.0 - exceed) / reps as f64).sqrt(),
        summary: StabilitySummary::from_samples(xs).into(),
    })
}
