//! Support estimators and recovery metrics.
//!
//! Indices are 0-based. Every estimate lists its selected indices in
//! increasing order.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::E;

use libm::{log, sqrt};

use crate::error::{ensure, Error, Result};
use crate::tail_models::{lambert_w, sidak_tail, Branch, TailFamily};

/// Selection rule of a support estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    /// Threshold `F←(1 - alpha/p)`.
    Bonferroni { alpha: f64 },
    /// Threshold `F←((1 - alpha)^{1/p})`.
    Sidak { alpha: f64 },
    /// Step-down on survival p-values.
    Holm { alpha: f64 },
    /// Step-up on survival p-values.
    Hochberg { alpha: f64 },
    /// Selects `x(j) > t`.
    FixedThreshold { t: f64 },
    /// Selects `x(j) >= x_[s]`, the `s`-th largest observation.
    OracleTopS { s: usize },
    /// Top `s` likelihood ratios `f(x - shift) / f(x)` under the marginal
    /// family.
    LikelihoodRatioTopS { s: usize, shift: f64 },
}

/// A rule together with the marginal law used for its quantiles and
/// p-values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Procedure {
    pub rule: Rule,
    pub family: TailFamily,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SupportEstimate {
    pub selected: Vec<usize>,
    /// Threshold the selection is an upper level set of, when there is one.
    pub threshold: Option<f64>,
}

impl SupportEstimate {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.selected.binary_search(&j).is_ok()
    }

    /// Whether every selected index is also selected by `other`.
    pub fn is_subset_of(&self, other: &SupportEstimate) -> bool {
        intersection_len(&self.selected, &other.selected) == self.selected.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryMetrics {
    /// `Ŝ = S`.
    pub exact: bool,
    /// `Ŝ ⊄ S`: the family-wise error event.
    pub false_inclusion: bool,
    /// `|Ŝ \ S| / |Ŝ|`, 0 when nothing is selected.
    pub fdp: f64,
    /// `|S \ Ŝ| / |S|`, 0 when the true support is empty.
    pub fnp: f64,
    /// `|Ŝ \ S| + |S \ Ŝ|`.
    pub hamming: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    ensure(alpha > 0.0 && alpha < 1.0, "alpha", alpha, "0 < alpha < 1")
}

impl Procedure {
    pub fn new(rule: Rule, family: TailFamily) -> Result<Self> {
        family.validate()?;
        match rule {
            Rule::Bonferroni { alpha }
            | Rule::Sidak { alpha }
            | Rule::Holm { alpha }
            | Rule::Hochberg { alpha } => check_alpha(alpha)?,
            Rule::FixedThreshold { t } => ensure(!t.is_nan(), "t", t, "a number")?,
            Rule::OracleTopS { s } | Rule::LikelihoodRatioTopS { s, .. } => {
                ensure(s >= 1, "s", s as f64, "s >= 1")?
            }
        }
        Ok(Procedure { rule, family })
    }

    /// The fixed threshold [`universal_threshold`] for `family` in
    /// dimension `p`.
    pub fn universal(family: TailFamily, p: usize, c: f64) -> Result<Self> {
        let t = universal_threshold(&family, p as f64, c)?;
        Procedure::new(Rule::FixedThreshold { t }, family)
    }

    pub fn apply(&self, x: &[f64]) -> Result<SupportEstimate> {
        let p = x.len();
        match self.rule {
            Rule::Bonferroni { alpha } => {
                let t = bonferroni_threshold(&self.family, p, alpha)?;
                Ok(threshold_select(x, t))
            }
            Rule::Sidak { alpha } => {
                let t = sidak_threshold(&self.family, p, alpha)?;
                Ok(threshold_select(x, t))
            }
            Rule::Holm { alpha } => {
                check_alpha(alpha)?;
                Ok(holm_select(x, &self.family, alpha))
            }
            Rule::Hochberg { alpha } => {
                check_alpha(alpha)?;
                Ok(hochberg_select(x, &self.family, alpha))
            }
            Rule::FixedThreshold { t } => Ok(threshold_select(x, t)),
            Rule::OracleTopS { s } => oracle_top_s(x, s),
            Rule::LikelihoodRatioTopS { s, shift } => {
                let f = self.family;
                likelihood_top_s(x, |v| f.ln_density(v), |v| f.ln_density(v - shift), s)
            }
        }
    }
}

/// Bonferroni threshold `F←(1 - alpha/p)`.
pub fn bonferroni_threshold(family: &TailFamily, p: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    ensure(p >= 1, "p", p as f64, "p >= 1")?;
    family.upper_quantile(alpha / p as f64)
}

/// Šidák threshold `F←((1 - alpha)^{1/p})`; never above Bonferroni's.
pub fn sidak_threshold(family: &TailFamily, p: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    ensure(p >= 1, "p", p as f64, "p >= 1")?;
    family.upper_quantile(sidak_tail(alpha, p as f64))
}

/// Fixed thresholds calibrated so that the Bonferroni FWER decays slowly
/// with `p`:
///
/// * Gaussian: `sqrt(2 log p)`
/// * Laplace: `log p + (log log p) / 2`
/// * generalized Gaussian with `nu = 1/2`:
///   `(W_{-1}(-c / (e p log p)) + 1)^2 / 4`
///
/// `c` is only used by the last one.
pub fn universal_threshold(family: &TailFamily, p: f64, c: f64) -> Result<f64> {
    ensure(p > E, "p", p, "p > e")?;
    let lp = log(p);
    match *family {
        TailFamily::Gaussian => Ok(sqrt(2.0 * lp)),
        TailFamily::GeneralizedGaussian { nu: 2.0 } => Ok(sqrt(2.0 * lp)),
        TailFamily::Laplace => Ok(lp + 0.5 * log(lp)),
        TailFamily::GeneralizedGaussian { nu: 1.0 } => Ok(lp + 0.5 * log(lp)),
        TailFamily::GeneralizedGaussian { nu: 0.5 } => {
            ensure(c > 0.0, "c", c, "c > 0")?;
            let w = lambert_w(Branch::MinusOne, -c / (E * p * lp))?;
            Ok(0.25 * (w + 1.0) * (w + 1.0))
        }
        _ => Err(Error::Precondition(
            "universal thresholds exist for Gaussian, Laplace and GG(1/2) only",
        )),
    }
}

/// Strict exceedances `{j : x(j) > t}`.
pub fn threshold_select(x: &[f64], t: f64) -> SupportEstimate {
    SupportEstimate {
        selected: (0..x.len()).filter(|&j| x[j] > t).collect(),
        threshold: Some(t),
    }
}

/// All `j` with `x(j) >= t`.
fn level_set(x: &[f64], t: f64) -> Vec<usize> {
    (0..x.len()).filter(|&j| x[j] >= t).collect()
}

/// Indices sorted by decreasing `x`.
fn descending_order(x: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    order
}

/// Top-`k` selection from a descending order, threshold `x(j_k)`.
fn top_k(x: &[f64], order: &[usize], k: usize) -> SupportEstimate {
    if k == 0 {
        return SupportEstimate::default();
    }
    let t = x[order[k - 1]];
    SupportEstimate {
        selected: level_set(x, t),
        threshold: Some(t),
    }
}

/// Holm's step-down procedure: `k` is the largest index with
/// `F̄(x(j_i)) <= alpha / (p - i + 1)` for every `i <= k`.
pub fn holm_select(x: &[f64], family: &TailFamily, alpha: f64) -> SupportEstimate {
    let p = x.len();
    let order = descending_order(x);
    let k = order
        .iter()
        .enumerate()
        .take_while(|&(i, &j)| family.survival(x[j]) <= alpha / (p - i) as f64)
        .count();
    top_k(x, &order, k)
}

/// Hochberg's step-up procedure: `k` is the largest index with
/// `F̄(x(j_k)) <= alpha / (p - k + 1)`.
pub fn hochberg_select(x: &[f64], family: &TailFamily, alpha: f64) -> SupportEstimate {
    let p = x.len();
    let order = descending_order(x);
    let k = (0..p)
        .rev()
        .find(|&i| family.survival(x[order[i]]) <= alpha / (p - i) as f64)
        .map_or(0, |i| i + 1);
    top_k(x, &order, k)
}

/// Value of the `s`-th largest entry (1-based), `s` in `1..=len`.
fn kth_largest(values: &[f64], s: usize) -> f64 {
    let mut buf: Vec<f64> = values.to_vec();
    let (_, v, _) = buf.select_nth_unstable_by(s - 1, |a, b| b.total_cmp(a));
    *v
}

/// Oracle procedure `{j : x(j) >= x_[s]}`; ties at `x_[s]` are all kept.
pub fn oracle_top_s(x: &[f64], s: usize) -> Result<SupportEstimate> {
    ensure(s >= 1 && s <= x.len(), "s", s as f64, "1 <= s <= p")?;
    let t = kth_largest(x, s);
    Ok(SupportEstimate {
        selected: level_set(x, t),
        threshold: Some(t),
    })
}

/// Likelihood-ratio procedure: ranks coordinates by
/// `log L(j) = ln_alt(x(j)) - ln_null(x(j))` and keeps the top `s`
/// (ties included).
///
/// The result is generally not a level set of `x`, so no threshold is
/// reported.
pub fn likelihood_top_s<N, A>(x: &[f64], ln_null: N, ln_alt: A, s: usize) -> Result<SupportEstimate>
where
    N: Fn(f64) -> f64,
    A: Fn(f64) -> f64,
{
    ensure(s >= 1 && s <= x.len(), "s", s as f64, "1 <= s <= p")?;
    let llr: Vec<f64> = x.iter().map(|&v| ln_alt(v) - ln_null(v)).collect();
    let t = kth_largest(&llr, s);
    Ok(SupportEstimate {
        selected: (0..x.len())
            .filter(|&j| llr[j].total_cmp(&t) != Ordering::Less)
            .collect(),
        threshold: None,
    })
}

fn intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Compares an estimate with the true support (sorted, distinct indices).
pub fn metrics(est: &SupportEstimate, truth: &[usize]) -> RecoveryMetrics {
    debug_assert!(truth.windows(2).all(|w| w[0] < w[1]));
    let chosen = est.selected.len();
    let hits = intersection_len(&est.selected, truth);
    let false_pos = chosen - hits;
    let missed = truth.len() - hits;
    RecoveryMetrics {
        exact: false_pos == 0 && missed == 0,
        false_inclusion: false_pos > 0,
        fdp: if chosen == 0 { 0.0 } else { false_pos as f64 / chosen as f64 },
        fnp: if truth.is_empty() { 0.0 } else { missed as f64 / truth.len() as f64 },
        hamming: false_pos + missed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    const G: TailFamily = TailFamily::Gaussian;

    fn est(v: &[usize]) -> SupportEstimate {
        SupportEstimate {
            selected: v.to_vec(),
            threshold: None,
        }
    }

    /// Data whose survival values under the Laplace law are exactly `pv`.
    fn laplace_data(pv: &[f64]) -> Vec<f64> {
        pv.iter().map(|&q| TailFamily::Laplace.upper_quantile(q).unwrap()).collect()
    }

    #[test]
    fn bonferroni_examples() {
        let t = bonferroni_threshold(&TailFamily::Laplace, 100, 0.5).unwrap();
        assert!((t - log(100.0)).abs() < 1e-12);
        let p = 10_000usize;
        let t_univ = sqrt(2.0 * log(p as f64));
        let alpha = p as f64 * G.survival(t_univ);
        assert!((alpha - 0.088_562_6).abs() < 1e-6, "{alpha}");
        let t = bonferroni_threshold(&G, p, alpha).unwrap();
        assert!((t - t_univ).abs() < 1e-10);
        assert_eq!(bonferroni_threshold(&G, 1, 0.5).unwrap(), 0.0);
        assert!(bonferroni_threshold(&G, 10, 1.0).is_err());
        assert!(bonferroni_threshold(&G, 0, 0.1).is_err());
    }

    #[test]
    fn sidak_examples() {
        let one = sidak_threshold(&G, 1, 0.05).unwrap();
        assert!((one - G.quantile(0.95).unwrap()).abs() < 1e-12);
        let s = sidak_threshold(&G, 10_000, 0.05).unwrap();
        let b = bonferroni_threshold(&G, 10_000, 0.05).unwrap();
        assert!(s < b);
        let s = sidak_threshold(&G, 100, 1e-8).unwrap();
        let b = bonferroni_threshold(&G, 100, 1e-8).unwrap();
        assert!((s - b).abs() <= 1e-6);
    }

    #[test]
    fn holm_examples() {
        let x = laplace_data(&[0.9, 0.001, 0.02]);
        let h = holm_select(&x, &TailFamily::Laplace, 0.05);
        assert_eq!(h.selected, vec![1, 2]);
        let b = Procedure::new(Rule::Bonferroni { alpha: 0.05 }, TailFamily::Laplace)
            .unwrap()
            .apply(&x)
            .unwrap();
        assert_eq!(b.selected, vec![1]);
        assert!(b.is_subset_of(&h));

        let x = laplace_data(&[0.3, 0.2, 0.9]);
        assert!(holm_select(&x, &TailFamily::Laplace, 0.05).is_empty());
    }

    #[test]
    fn hochberg_examples() {
        let x = laplace_data(&[0.04, 0.03]);
        let hoch = hochberg_select(&x, &TailFamily::Laplace, 0.05);
        assert_eq!(hoch.selected, vec![0, 1]);
        assert!(holm_select(&x, &TailFamily::Laplace, 0.05).is_empty());

        let x = laplace_data(&[0.3, 0.2, 0.9]);
        assert!(hochberg_select(&x, &TailFamily::Laplace, 0.05).is_empty());

        for &v in &[-1.0, 1.0, 2.0, 3.0] {
            let x = [v];
            let b = threshold_select(&x, bonferroni_threshold(&G, 1, 0.05).unwrap());
            assert_eq!(holm_select(&x, &G, 0.05).selected, b.selected);
            assert_eq!(hochberg_select(&x, &G, 0.05).selected, b.selected);
        }
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(oracle_top_s(&[3.0, 1.0, 2.0], 1).unwrap().selected, vec![0]);
        assert_eq!(oracle_top_s(&[2.0, 2.0, 1.0], 1).unwrap().selected, vec![0, 1]);
        assert_eq!(oracle_top_s(&[2.0, 5.0, 1.0], 3).unwrap().selected, vec![0, 1, 2]);
        assert!(oracle_top_s(&[1.0], 0).is_err());
        assert!(oracle_top_s(&[1.0], 2).is_err());
    }

    #[test]
    fn likelihood_examples() {
        let gg = TailFamily::GeneralizedGaussian { nu: 0.5 };
        let proc = Procedure::new(Rule::LikelihoodRatioTopS { s: 1, shift: 1.0 }, gg).unwrap();
        let x = [1.0, 2.0];
        let gap = (gg.ln_density(0.0) - gg.ln_density(1.0)) - (gg.ln_density(1.0) - gg.ln_density(2.0));
        assert!((gap - (4.0 - 2.0 * sqrt(2.0))).abs() < 1e-12);
        assert_eq!(proc.apply(&x).unwrap().selected, vec![0]);
        assert_eq!(oracle_top_s(&x, 1).unwrap().selected, vec![1]);

        let same = likelihood_top_s(&[0.3, -1.0, 4.0], |v| -v * v, |v| -v * v, 1).unwrap();
        assert_eq!(same.selected, vec![0, 1, 2]);
    }

    #[test]
    fn apply_examples() {
        let x = [0.5, -3.0, 7.0];
        let none = Procedure::new(Rule::FixedThreshold { t: f64::INFINITY }, G).unwrap();
        assert!(none.apply(&x).unwrap().is_empty());
        let all = Procedure::new(Rule::FixedThreshold { t: f64::NEG_INFINITY }, G).unwrap();
        assert_eq!(all.apply(&x).unwrap().selected, vec![0, 1, 2]);
        let b = Procedure::new(Rule::Bonferroni { alpha: 0.05 }, G).unwrap();
        let r = b.apply(&[0.0; 10]).unwrap();
        assert!(r.is_empty() && r.threshold.unwrap() > 0.0);
        // strict exceedance
        assert!(threshold_select(&[1.0], 1.0).is_empty());
        assert!(Procedure::new(Rule::Holm { alpha: 0.0 }, G).is_err());
        assert!(Procedure::new(Rule::OracleTopS { s: 0 }, G).is_err());
    }

    #[test]
    fn universal_thresholds() {
        let p = 1e4;
        let lp = log(p);
        assert_eq!(universal_threshold(&G, p, 1.0).unwrap(), sqrt(2.0 * lp));
        assert_eq!(
            universal_threshold(&TailFamily::Laplace, p, 1.0).unwrap(),
            lp + 0.5 * log(lp)
        );
        // (1 + y) e^{-y} = c / (p log p) with y = 2 sqrt t
        let gg = TailFamily::GeneralizedGaussian { nu: 0.5 };
        let t = universal_threshold(&gg, p, 1.0).unwrap();
        let y = 2.0 * sqrt(t);
        assert!(((1.0 + y) * libm::exp(-y) * p * lp - 1.0).abs() < 1e-10);
        assert!(universal_threshold(&TailFamily::Pareto { tail_index: 2.0 }, p, 1.0).is_err());
    }

    #[test]
    fn metrics_examples() {
        let m = metrics(&est(&[1, 2]), &[1, 2]);
        assert!(m.exact && !m.false_inclusion);
        assert_eq!((m.fdp, m.fnp, m.hamming), (0.0, 0.0, 0));
        let m = metrics(&est(&[1]), &[2]);
        assert_eq!((m.fdp, m.fnp, m.hamming), (1.0, 1.0, 2));
        assert!(m.false_inclusion && !m.exact);
        let m = metrics(&est(&[1, 2]), &[2, 3]);
        assert_eq!((m.fdp, m.fnp, m.hamming), (0.5, 0.5, 2));
        let m = metrics(&est(&[]), &[]);
        assert!(m.exact && m.fdp == 0.0 && m.fnp == 0.0);
    }

    fn is_level_set(x: &[f64], e: &SupportEstimate) -> bool {
        e.selected
            .iter()
            .all(|&j| (0..x.len()).all(|k| x[k] <= x[j] || e.contains(k)))
    }

    proptest! {
        #[test]
        fn selections_are_nested(
            x in prop::collection::vec(-3.0f64..6.0, 1..40),
            alpha in 0.01f64..0.5,
        ) {
            let b = threshold_select(&x, bonferroni_threshold(&G, x.len(), alpha).unwrap());
            let s = threshold_select(&x, sidak_threshold(&G, x.len(), alpha).unwrap());
            let holm = holm_select(&x, &G, alpha);
            let hoch = hochberg_select(&x, &G, alpha);
            prop_assert!(b.is_subset_of(&holm));
            prop_assert!(holm.is_subset_of(&hoch));
            prop_assert!(b.is_subset_of(&s));
            for e in [&b, &s, &holm, &hoch] {
                prop_assert!(is_level_set(&x, e));
            }
        }

        #[test]
        fn top_s_is_level_set(x in prop::collection::vec(-3.0f64..3.0, 1..40), s in 1usize..40) {
            let s = s.min(x.len());
            let e = oracle_top_s(&x, s).unwrap();
            prop_assert!(e.len() >= s);
            prop_assert!(is_level_set(&x, &e));
        }

        #[test]
        fn metrics_consistency(
            sel in prop::collection::btree_set(0usize..30, 0..30),
            truth in prop::collection::btree_set(0usize..30, 0..30),
        ) {
            let e = est(&sel.iter().copied().collect::<Vec<_>>());
            let t: Vec<usize> = truth.iter().copied().collect();
            let m = metrics(&e, &t);
            prop_assert_eq!(m.hamming, sel.symmetric_difference(&truth).count());
            prop_assert_eq!(m.exact, sel == truth);
            prop_assert_eq!(m.false_inclusion, !sel.is_subset(&truth));
            if m.exact {
                prop_assert!(m.fdp == 0.0 && m.fnp == 0.0);
            }
        }
    }
}
