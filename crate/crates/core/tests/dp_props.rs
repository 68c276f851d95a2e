mod common;

use common::*;
use proptest::prelude::*;
use sketchlrf::bench::{self, matrix_updates, ExperimentConfig, Order};
use sketchlrf::dp::{self, calibrate, PrivacyLevel, PrivacyParams};
use sketchlrf::linalg::{self, DenseMatrix};
use sketchlrf::lrf::{self, LrfReport};
use sketchlrf::sketch::SketchKind;
use sketchlrf::stream::{SketchState, StateConfig};

const ALPHA: f64 = 0.5;
const DELTA: f64 = 0.1;

fn state(a: &DenseMatrix, k: usize, params: Option<PrivacyParams>, seed: u64) -> SketchState {
    let mut cfg = StateConfig::new(a.rows(), a.cols(), k, ALPHA)
        .seed(seed)
        .kind(SketchKind::Gaussian)
        .calibration(0.85);
    if let Some(p) = params {
        cfg = cfg.private(p);
    }
    let mut st = SketchState::init(&cfg).unwrap();
    st.ingest_all(matrix_updates(a, Order::Random, seed)).unwrap();
    st
}

fn private(st: &SketchState, k: usize, seed: u64) -> LrfReport {
    match st.mode().level().unwrap() {
        PrivacyLevel::Priv1 => dp::private_space_optimal_lrf(st, k, seed).unwrap(),
        PrivacyLevel::Priv2 => dp::private_frobenius_lrf(st, k, seed).unwrap(),
    }
}

fn params(eps: f64, level: PrivacyLevel) -> PrivacyParams {
    PrivacyParams::new(eps, DELTA, level, ALPHA).unwrap()
}

fn level_strategy() -> impl Strategy<Value = PrivacyLevel> {
    prop_oneof![Just(PrivacyLevel::Priv1), Just(PrivacyLevel::Priv2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn calibration_is_pure_and_nonnegative(
        eps in 0.01f64..10.0, delta in 1e-9f64..0.9, alpha in 0.01f64..0.99,
        t in 1usize..500, level in level_strategy(),
    ) {
        let p = PrivacyParams::new(eps, delta, level, alpha).unwrap();
        let a = calibrate(&p, t).unwrap();
        prop_assert_eq!(a, calibrate(&p, t).unwrap());
        prop_assert!(a.rho >= 0.0 && a.rho1 >= 0.0 && a.rho2 >= 0.0 && a.sigma_min >= 0.0);
        match level {
            PrivacyLevel::Priv2 => prop_assert!(a.rho > 0.0 && a.rho1 == 0.0 && a.rho2 == 0.0 && a.sigma_min == 0.0),
            PrivacyLevel::Priv1 => prop_assert!(a.rho == 0.0 && a.rho1 > 0.0 && a.rho2 > 0.0 && a.sigma_min > 0.0),
        }
    }

    #[test]
    fn zero_noise_reproduces_nonprivate_bits(
        (m, n, seed) in (4usize..=14, 4usize..=14, any::<u64>()), level in level_strategy(),
    ) {
        let a = gaussian(m, n, seed);
        let p = params(f64::INFINITY, level);
        let scales = calibrate(&p, 4).unwrap();
        prop_assert_eq!(scales, dp::NoiseScales::zero(level));
        let cfg = StateConfig::new(m, n, 2, ALPHA).seed(seed).dims(3, 4);
        let cfg = cfg.private(p);
        // `lrf::factorize` on a private-mode state runs the matching
        // non-private pipeline on the same operators.
        let mut plain = SketchState::init(&cfg).unwrap();
        let mut noisy = SketchState::init(&cfg).unwrap();
        plain.ingest_all(matrix_updates(&a, Order::RowMajor, 0)).unwrap();
        noisy.ingest_all(matrix_updates(&a, Order::RowMajor, 0)).unwrap();
        let lhs = lrf::factorize(&plain, 2).unwrap().factorization;
        let rhs = private(&noisy, 2, seed ^ 5).factorization;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn augmentation_moves_singular_values_by_at_most_sigma_min(
        (m, n, seed) in (2usize..=10, 2usize..=10, any::<u64>()), eps in 0.5f64..50.0,
    ) {
        let a = gaussian(m, n, seed).scaled(100.0);
        let st = state(&a, 1, Some(params(eps, PrivacyLevel::Priv1)), seed);
        let work = st.work_matrix(&a);
        let base = if st.is_transposed() { a.transpose() } else { a };
        let padded = base.hstack(&DenseMatrix::zeros(base.rows(), base.rows()));
        let s1 = linalg::singular_values(&work).unwrap();
        let s0 = linalg::singular_values(&padded).unwrap();
        for (x, y) in s1.iter().zip(&s0) {
            prop_assert!((x - y).abs() <= st.sigma_min() + 1e-8);
        }
    }
}

#[test]
fn case_two_is_the_transpose_of_case_one() {
    for seed in 0..10 {
        let a = gaussian(6, 10, seed);
        let p = params(2.0, PrivacyLevel::Priv1);
        let wide = state(&a, 2, Some(p), seed);
        let tall = state(&a.transpose(), 2, Some(p), seed);
        assert!(!wide.is_transposed() && tall.is_transposed());
        let f1 = dp::private_space_optimal_lrf(&wide, 2, seed).unwrap().factorization;
        let f2 = dp::private_space_optimal_lrf(&tall, 2, seed).unwrap().factorization;
        let swapped = f1.transposed();
        assert!(f2.u.sub(&swapped.u).max_abs() <= 1e-12);
        assert!(f2.v.sub(&swapped.v).max_abs() <= 1e-12);
        assert!(f2
            .sigma
            .iter()
            .zip(&swapped.sigma)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.max(1.0)));
    }
}

#[test]
fn noise_matrix_moments() {
    let n = dp::gaussian_noise_matrix(200, 500, 1.0, 42).unwrap();
    let count = 1e5;
    let mean = n.as_slice().iter().sum::<f64>() / count;
    assert!(mean.abs() <= 5.0 / count.sqrt());
    let second = n.frobenius_norm().powi(2) / count;
    assert!((0.98..=1.02).contains(&second), "{second}");
    assert_eq!(n, dp::gaussian_noise_matrix(200, 500, 1.0, 42).unwrap());
    assert_ne!(n, dp::gaussian_noise_matrix(200, 500, 1.0, 43).unwrap());
}

#[test]
fn noise_only_output_on_zero_matrix_is_bounded() {
    let a = DenseMatrix::zeros(64, 48);
    for level in [PrivacyLevel::Priv2, PrivacyLevel::Priv1] {
        let p = params(1.0, level);
        let worst = (0..50)
            .map(|seed| {
                let st = state(&a, 1, Some(p), seed);
                let r = private(&st, 1, seed);
                let resid = r.factorization.reconstruct().frobenius_norm();
                let scales = r.noise.unwrap();
                let envelope = match level {
                    PrivacyLevel::Priv2 => dp::frobenius_envelope(64, 48, 1, &p),
                    PrivacyLevel::Priv1 => scales.sigma_min * 64f64.sqrt(),
                };
                resid / envelope
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1.0, "{level:?}: {worst}");
    }
}

fn eps_grid_medians(level: PrivacyLevel) -> Vec<f64> {
    [0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&eps| {
            let mut cfg = ExperimentConfig::new(32, 24, 3, ALPHA);
            cfg.mode = level.into();
            cfg.epsilon = Some(eps);
            cfg.delta = Some(DELTA);
            cfg.trials = 50;
            cfg.seed = 11;
            cfg.regression_kind = SketchKind::Gaussian;
            cfg.affine_kind = SketchKind::Gaussian;
            cfg.c = 0.85;
            bench::run_experiment(&cfg).unwrap().summary.median_residual.unwrap()
        })
        .collect()
}

#[test]
fn median_residual_is_nonincreasing_in_epsilon() {
    for level in [PrivacyLevel::Priv2, PrivacyLevel::Priv1] {
        let med = eps_grid_medians(level);
        assert!(med.windows(2).all(|w| w[1] <= w[0]), "{level:?}: {med:?}");
    }
}

#[test]
fn composition_edge_cases() {
    let (e, d) = dp::compose(&[(0.0, 1e-6); 4], 1e-5).unwrap();
    assert_eq!(e, 0.0);
    assert!((d - (4e-6 + 1e-5)).abs() < 1e-18);
    let (e, _) = dp::compose(&[(0.3, 0.0)], 1e-3).unwrap();
    assert!((e - ((2.0 * 1e3f64.ln()).sqrt() * 0.3 + 2.0 * 0.09)).abs() < 1e-15);
    let (e, d) = dp::compose(&[(0.1, 1e-6); 3], 1e-6).unwrap();
    assert!((e - ((6.0 * 1e6f64.ln()).sqrt() * 0.1 + 0.06)).abs() < 1e-15);
    assert!((e - 0.97046).abs() < 1e-5, "{e}");
    assert!((d - 4e-6).abs() < 1e-18);
    assert!(dp::compose(&[(0.1, 1e-6), (0.2, 1e-6)], 1e-6).is_err());
    assert!(dp::compose(&[(0.1, 1e-6)], 0.0).is_err());
}

#[test]
fn unit_rank_one_difference_has_finite_sketched_norms() {
    let st = state(&gaussian(20, 30, 1), 2, Some(params(1.0, PrivacyLevel::Priv1)), 1);
    let probes = dp::state_probes(&st);
    let r = dp::sensitivity_audit(PrivacyLevel::Priv1, ALPHA, 20, 30, &probes, 10, 3).unwrap();
    assert_eq!(r.probes.len(), probes.len());
    assert!(r.probes.iter().all(|p| p.max.is_finite() && p.max > 0.0));
}
