//! Property tests for quantiles, dependence diagnostics and the
//! correlated-subset search.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use suprec_core::diagnostics::{
    correlated_subset_search, gamma_packing, guaranteed_subset_dim, packing_lower_bound,
    ramsey_bound_holds, ramsey_subset_size, udd_count,
};
use suprec_core::linalg::Matrix;
use suprec_core::noise::covariance_of;
use suprec_core::{NoiseModel, TailFamily};

fn family() -> impl Strategy<Value = TailFamily> {
    prop_oneof![
        Just(TailFamily::Gaussian),
        Just(TailFamily::Laplace),
        (0.3f64..4.0).prop_map(|nu| TailFamily::GeneralizedGaussian { nu }),
        (0.5f64..3.0).prop_map(|nu| TailFamily::AggAsymptotic { nu }),
        (1.1f64..3.0, 0.5f64..2.0).prop_map(|(gamma, c)| TailFamily::HeavierThanAgg { gamma, c }),
        (0.5f64..3.0).prop_map(|nu| TailFamily::LighterThanAgg { nu }),
        (0.5f64..4.0).prop_map(|tail_index| TailFamily::Pareto { tail_index }),
    ]
}

/// Correlation matrix `D^{-1/2} G G^T D^{-1/2}` from `rank` random factors.
fn random_correlation(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let f: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..rank).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let norms: Vec<f64> = f.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    Matrix::from_fn(n, |i, j| {
        if i == j {
            1.0
        } else {
            f[i].iter().zip(&f[j]).map(|(a, b)| a * b).sum::<f64>() / (norms[i] * norms[j])
        }
    })
}

/// Random member of one of several structured correlation families.
fn structured_matrix(kind: u8, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    match kind % 4 {
        0 => covariance_of(&NoiseModel::Ar1 { rho: rng.random_range(-0.95..0.95) }, n).unwrap(),
        1 => covariance_of(&NoiseModel::Fgn { hurst: rng.random_range(0.05..0.95) }, n).unwrap(),
        2 => covariance_of(&NoiseModel::BlockEquicorrelated { beta: rng.random_range(0.0..1.0) }, n)
            .unwrap(),
        _ => random_correlation(n, rng.random_range(1..6), rng),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn quantile_round_trip(fam in family(), q in 0.001f64..0.999) {
        let x = fam.quantile(q).unwrap();
        prop_assert!((fam.cdf(x) - q).abs() <= 1e-10, "{:?} q={} x={}", fam, q, x);
    }

    #[test]
    fn upper_quantile_round_trip(fam in family(), e in 1.0f64..12.0) {
        let tail = 10f64.powf(-e);
        let x = fam.upper_quantile(tail).unwrap();
        prop_assert!((fam.survival(x) / tail - 1.0).abs() <= 1e-9, "{:?} tail={}", fam, tail);
    }

    #[test]
    fn udd_count_nonincreasing(seed in any::<u64>(), n in 2usize..40, rank in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_correlation(n, rank, &mut rng);
        let mut prev = usize::MAX;
        for i in 1..20 {
            let c = udd_count(&m, i as f64 / 20.0).unwrap();
            prop_assert!(c <= prev && c < n);
            prev = c;
        }
    }
}

#[test]
fn packing_postconditions_on_structured_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for trial in 0..100u8 {
        let n = rng.random_range(5..120);
        let m = structured_matrix(trial, n, &mut rng);
        let delta = rng.random_range(0.05..0.95);
        let pk = gamma_packing(&m, delta).unwrap();
        for (a, &i) in pk.iter().enumerate() {
            for &j in &pk[a + 1..] {
                assert!(m.get(i, j) <= delta, "trial {trial}: ({i},{j})");
            }
        }
        assert!(pk.len() >= packing_lower_bound(&m, delta).unwrap(), "trial {trial}");
        // maximality: every dropped index is within the ball of a member
        for k in (0..n).filter(|k| !pk.contains(k)) {
            assert!(pk.iter().any(|&i| m.get(i, k) > delta), "trial {trial}: {k}");
        }
    }
}

/// Correlation matrix of `(Z_0, a_j Z_0 + sqrt(1 - a_j^2) R_j)` with
/// `a_j > c` and residuals `R_j` from a random low-rank factor model.
fn subset_instance(n: usize, c: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(c + 1e-6..1.0)).collect();
    let resid = random_correlation(n, rng.random_range(2..10), rng);
    Matrix::from_fn(n + 1, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (0, k) | (k, 0) => a[k - 1],
        (i, j) if i == j => 1.0,
        (i, j) => {
            let (ai, aj) = (a[i - 1], a[j - 1]);
            ai * aj + ((1.0 - ai * ai) * (1.0 - aj * aj)).sqrt() * resid.get(i - 1, j - 1)
        }
    })
}

#[test]
fn correlated_subsets_exist_when_all_correlations_exceed_c() {
    let c = 0.9;
    let n = guaranteed_subset_dim(c).unwrap() as usize;
    assert_eq!(n, 1024);
    let k = ramsey_subset_size(n as u64);
    assert_eq!(k, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..50 {
        let rho = subset_instance(n, c, &mut rng);
        let found = correlated_subset_search(&rho, c, k)
            .unwrap()
            .unwrap_or_else(|| panic!("instance {trial}: no subset"));
        assert_eq!(found.len(), k);
        for (a, &i) in found.iter().enumerate() {
            assert!((1..=n).contains(&i));
            for &j in &found[a + 1..] {
                assert!(rho.get(i, j) > c * c / 2.0);
            }
        }
    }
}

#[test]
fn ramsey_bound_over_powers_of_two() {
    for e in 4..=30 {
        assert!(ramsey_bound_holds(1u64 << e), "n = 2^{e}");
    }
}
