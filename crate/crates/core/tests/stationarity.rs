mod common;

use common::*;
use nalgebra::DMatrix;
use pgarch::linalg::{norm1, spectral_radius, RenormalizedProduct};
use pgarch::model::{InnovationDist, PGarchSpec};
use pgarch::simulation::{simulate_path, SimConfig};
use pgarch::stationarity::{
    beta_spectral_radius, build_companion, lyapunov_mc, lyapunov_stacked_mc, mean_log_eta_sq,
    moment_delta_search, parch1_stationarity_bound, stationarity_report, Decision, DEFAULT_Z,
};
use rand::RngExt;
use statrs::function::gamma::{digamma, gamma};

const G: InnovationDist = InnovationDist::StandardGaussian;

#[test]
fn gaussian_log_moment_matches_digamma() {
    let oracle = digamma(0.5) + 2f64.ln();
    assert!((oracle - GAUSS_E_LOG_ETA2).abs() < 1e-12);
    let (m, se) = mean_log_eta_sq(G, 0, 0).unwrap();
    assert!((m - oracle).abs() < 1e-9, "{m}");
    assert_eq!(se, 0.0);
}

#[test]
fn student_t_log_moment_within_two_se() {
    // standardized t(6): psi(1/2) - psi(3) + log 4
    let dof = 6.0;
    let oracle = digamma(0.5) - digamma(dof / 2.0) + (dof - 2.0f64).ln();
    assert!((oracle + 1.5).abs() < 1e-12);
    let t6 = InnovationDist::student_t(dof).unwrap();
    let (m, se) = mean_log_eta_sq(t6, 400_000, 12).unwrap();
    assert!((m - oracle).abs() < 2.0 * se, "{m} +- {se}");
    let a = parch1_stationarity_bound(t6, 400_000, 12).unwrap();
    assert!((a.ln() - 1.5).abs() < 2.0 * se);
}

#[test]
fn scalar_equality_for_random_arch_specs() {
    let mut r = rng(31);
    for _ in 0..5 {
        let s = r.random_range(1..=4);
        let alpha: Vec<f64> = (0..s).map(|_| r.random_range(0.1..3.0)).collect();
        let spec = PGarchSpec::parch1(&vec![1.0; s], &alpha).unwrap();
        let oracle: f64 = alpha.iter().map(|a| a.ln()).sum::<f64>() + s as f64 * GAUSS_E_LOG_ETA2;
        let est = lyapunov_mc(&spec, G, 20_000, r.random()).unwrap();
        assert!(
            (est.gamma_hat - oracle).abs() < 3.0 * est.std_error,
            "{alpha:?}: {} +- {} vs {oracle}",
            est.gamma_hat,
            est.std_error
        );
    }
}

#[test]
fn deterministic_matrices_reduce_to_spectral_radius() {
    let spec = PGarchSpec::garch11(&[1.0, 1.0], &[0.3, 0.2], &[0.1, 0.2]).unwrap();
    let a1 = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.3, 0.1]);
    let a2 = DMatrix::from_row_slice(2, 2, &[0.2, 0.2, 0.2, 0.2]);
    let oracle = spectral_radius(&(&a2 * &a1)).ln();
    assert!((oracle - 0.16f64.ln()).abs() < 1e-12);
    let est = lyapunov_mc(&spec, InnovationDist::UnitConstant, 10_000, 1).unwrap();
    assert!((est.gamma_hat - oracle).abs() < 1e-3, "{}", est.gamma_hat);
}

#[test]
fn zero_alpha_growth_is_log_beta() {
    let spec = PGarchSpec::garch11(&[1.0], &[0.0], &[0.5]).unwrap();
    let est = lyapunov_mc(&spec, G, 10_000, 3).unwrap();
    assert!((est.gamma_hat - 0.5f64.ln()).abs() < 3.0 * est.std_error + 1e-3, "{est:?}");
}

#[test]
fn stacked_estimate_does_not_exceed_companion_estimate() {
    let mut r = rng(5);
    let mut specs = vec![theta0()];
    for _ in 0..3 {
        let s = r.random_range(1..=3);
        specs.push(random_spec(&mut r, s, 1, 1));
    }
    for spec in specs {
        let a = lyapunov_mc(&spec, G, 5_000, 77).unwrap();
        let b = lyapunov_stacked_mc(&spec, G, 5_000, 78).unwrap();
        let tol = 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!(b.gamma_hat <= a.gamma_hat + tol, "{} vs {} ({tol})", b.gamma_hat, a.gamma_hat);
    }
}

#[test]
fn explosive_beta_is_never_strictly_negative() {
    let mut r = rng(6);
    for _ in 0..20 {
        let s = r.random_range(1..=3);
        let beta: Vec<f64> = (0..s).map(|_| r.random_range(1.0..1.6)).collect();
        let alpha: Vec<f64> = (0..s).map(|_| r.random_range(0.0..0.5)).collect();
        let spec = PGarchSpec::garch11(&vec![1.0; s], &alpha, &beta).unwrap();
        assert!(beta_spectral_radius(&spec) >= 1.0);
        let rep = stationarity_report(&spec, G, 2_000, r.random(), DEFAULT_Z).unwrap();
        assert_ne!(rep.decision, Decision::StrictlyNegative, "{spec:?}");
        assert!(!rep.necessary_condition);
    }
}

#[test]
fn renormalized_product_matches_dense_product() {
    let mut r = rng(7);
    let spec = random_spec(&mut r, 3, 2, 2);
    for n in [1usize, 5, 20, 50] {
        let mut dense = DMatrix::<f64>::identity(4, 4);
        let mut prod = RenormalizedProduct::identity(4);
        for k in 0..n {
            let e: f64 = r.random_range(0.0..3.0);
            let a = build_companion(&spec, k % 3 + 1, e * e).unwrap().a;
            dense = &a * dense;
            prod.push_left(&a);
        }
        assert!((prod.log_norm() - norm1(&dense).ln()).abs() < 1e-8, "n={n}");
    }
}

/// `E (alpha eta^2)^delta` for Gaussian `eta`.
fn gaussian_power_moment(alpha: f64, delta: f64) -> f64 {
    alpha.powf(delta) * 2f64.powf(delta) * gamma(delta + 0.5) / gamma(0.5)
}

#[test]
fn delta_search_agrees_with_closed_form_moment() {
    let spec = PGarchSpec::parch1(&[1.0], &[0.5]).unwrap();
    let found = moment_delta_search(&spec, G, 20, 50_000, 9).unwrap().expect("delta exists");
    assert!(found.delta > 0.0 && found.delta < 1.0);
    assert_eq!(found.n0, 1);
    let se = (found.upper_bound - found.estimate) / DEFAULT_Z;
    let oracle = gaussian_power_moment(0.5, found.delta);
    assert!(oracle < 1.0);
    assert!((found.estimate - oracle).abs() < 4.0 * se, "{found:?} vs {oracle}");

    let explosive = PGarchSpec::parch1(&[1.0], &[5.0]).unwrap();
    assert!(moment_delta_search(&explosive, G, 5, 20_000, 9).unwrap().is_none());
}

#[test]
fn delta_moment_of_h_is_stable_along_a_long_path() {
    for spec in [PGarchSpec::parch1(&[1.0], &[0.5]).unwrap(), theta0()] {
        let found = moment_delta_search(&spec, G, 20, 20_000, 4).unwrap().expect("delta exists");
        let n_years = 1_000_000 / spec.period;
        let path = simulate_path(&spec, &SimConfig::new(&spec, n_years, 8, G)).unwrap();
        let h = path.h_true.unwrap();
        let half = h.len() / 2;
        let m = |x: &[f64]| x.iter().map(|v| v.powf(found.delta)).sum::<f64>() / x.len() as f64;
        let ratio = m(&h[half..]) / m(&h[..half]);
        assert!((0.9..=1.1).contains(&ratio), "{ratio}");
    }
}

#[test]
fn gaussian_stationarity_bound() {
    let a = parch1_stationarity_bound(G, 0, 0).unwrap();
    assert!((3.555..=3.570).contains(&a));
    assert!((a - 2.0 * 0.577_215_664_901_532_9f64.exp()).abs() < 1e-9);
    // the region for P-ARCH(1) with S seasons is prod alpha_v < a^S
    let inside = PGarchSpec::parch1(&[1.0, 1.0], &[1.5, 0.9 * a * a / 1.5]).unwrap();
    let outside = PGarchSpec::parch1(&[1.0, 1.0], &[1.5, 1.1 * a * a / 1.5]).unwrap();
    let ri = stationarity_report(&inside, G, 100_000, 2, DEFAULT_Z).unwrap();
    let ro = stationarity_report(&outside, G, 100_000, 2, DEFAULT_Z).unwrap();
    assert_eq!(ri.decision, Decision::StrictlyNegative);
    assert_eq!(ro.decision, Decision::NonNegative);
}
