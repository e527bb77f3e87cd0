mod common;

use common::*;
use pgarch::mc::{j_reference, ks_critical_1pct, ks_distance_normal, run_consistency, run_normality};
use pgarch::model::{InnovationDist, PGarchSpec, ParameterSpace};
use pgarch::qmle::FitOptions;
use pgarch::Error;
use rand_distr::{Distribution, StandardNormal};

fn quick() -> FitOptions {
    FitOptions { n_starts: 2, ..Default::default() }
}

#[test]
fn white_noise_rmse_halves_when_sample_quadruples() {
    let spec = PGarchSpec::white_noise(&[1.0, 2.0]).unwrap();
    let rep =
        run_consistency(&spec, InnovationDist::StandardGaussian, &[250, 1000], 400, &quick(), 1).unwrap();
    let cells = &rep.consistency.as_ref().unwrap().cells;
    for name in &rep.parameter_names {
        let ratio = cells[0].rmse[name] / cells[1].rmse[name];
        assert!((1.6..=2.4).contains(&ratio), "{name}: {ratio}");
    }
}

#[test]
fn white_noise_normality() {
    let spec = PGarchSpec::white_noise(&[1.5]).unwrap();
    let rep = run_normality(&spec, InnovationDist::StandardGaussian, 2000, 500, &quick(), 2).unwrap();
    let n = rep.normality.as_ref().unwrap();
    assert_eq!(n.n_used, 500);
    let cov = n.ci_coverage["omega[1]"];
    assert!((0.92..=0.98).contains(&cov), "{cov}");
    assert!(n.ks_distance["omega[1]"] < n.ks_critical_1pct);
    // N Var(omega_hat) = (kappa - 1) omega^2 = 4.5
    assert!((2000.0 * n.empirical_variance["omega[1]"] / 4.5 - 1.0).abs() < 0.2);
    assert!((n.mean_kappa_hat - 3.0).abs() < 0.05);
}

#[test]
fn parch_normality_in_compact_box() {
    let spec = PGarchSpec::parch1(&[1.0, 0.5], &[0.3, 0.5]).unwrap();
    let space = ParameterSpace::compact_parch1(2, 0.05, (-GAUSS_E_LOG_ETA2).exp()).unwrap();
    let opts = FitOptions { space: Some(space), ..quick() };
    let rep = run_normality(&spec, InnovationDist::StandardGaussian, 2000, 300, &opts, 3).unwrap();
    let n = rep.normality.as_ref().unwrap();
    assert!(n.n_used >= 280, "{}", n.n_used);
    assert_eq!(rep.j_cross_block_mass, 0.0);
    for name in &rep.parameter_names {
        let cov = n.ci_coverage[name];
        assert!((0.91..=0.985).contains(&cov), "{name}: {cov}");
        let r = n.sandwich_ratio[name];
        assert!((0.8..=1.25).contains(&r), "{name}: {r}");
    }
    assert!(n.ks_below_critical >= 3);
}

#[test]
fn reports_are_reproducible() {
    let spec = theta0();
    let run =
        || run_normality(&spec, InnovationDist::StandardGaussian, 300, 20, &quick(), 11).unwrap().to_json();
    assert_eq!(run(), run());
    let other =
        run_normality(&spec, InnovationDist::StandardGaussian, 300, 20, &quick(), 12).unwrap().to_json();
    assert_ne!(run(), other);
}

#[test]
fn heavy_tails_warn_or_fail() {
    let spec = theta0();
    let t45 = InnovationDist::student_t(4.5).unwrap();
    let rep = run_normality(&spec, t45, 200, 10, &quick(), 4).unwrap();
    assert!(rep.warnings.iter().any(|w| w.contains("fourth")), "{:?}", rep.warnings);
    let t3 = InnovationDist::student_t(3.0).unwrap();
    assert!(matches!(run_normality(&spec, t3, 200, 10, &quick(), 4), Err(Error::Precondition(_))));
}

#[test]
fn explosive_generating_parameter_is_refused() {
    let spec = PGarchSpec::garch11(&[1.0], &[0.5], &[1.2]).unwrap();
    let e = run_normality(&spec, InnovationDist::StandardGaussian, 200, 10, &quick(), 5).unwrap_err();
    assert!(matches!(e, Error::Precondition(_)), "{e}");
}

#[test]
fn information_for_constant_variance_arch() {
    // alpha = 0, omega = 1: h = 1, dh = (1, y_{t-1}^2), so each season's
    // block is [[1, E eta^2], [E eta^2, E eta^4]] = [[1, 1], [1, 3]]
    let spec = PGarchSpec::parch1(&[1.0, 1.0], &[0.0, 0.0]).unwrap();
    let j = j_reference(&spec, InnovationDist::StandardGaussian, 200_000, 6).unwrap();
    let want = [[1.0, 1.0], [1.0, 3.0]];
    for v in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                let got = j[(2 * v + a, 2 * v + b)];
                assert!((got - want[a][b]).abs() <= 0.02 * want[a][b], "season {v}: {got}");
                assert_eq!(j[(2 * v + a, 2 * (1 - v) + b)], 0.0);
            }
        }
    }
}

#[test]
fn duplicated_seasons_have_matching_blocks() {
    let spec = PGarchSpec::garch11(&[0.5, 0.5], &[0.2, 0.2], &[0.3, 0.3]).unwrap();
    let j = j_reference(&spec, InnovationDist::StandardGaussian, 100_000, 7).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            let (x, y) = (j[(a, b)], j[(3 + a, 3 + b)]);
            assert!((x - y).abs() <= 0.05 * x.abs().max(y.abs()), "{a},{b}: {x} vs {y}");
        }
    }
}

#[test]
fn ks_statistic_behaves() {
    let mut r = rng(8);
    let normal: Vec<f64> = (0..2000).map(|_| StandardNormal.sample(&mut r)).collect();
    assert!(ks_distance_normal(&normal) < ks_critical_1pct(2000));
    let shifted: Vec<f64> = normal.iter().map(|x| x + 0.3).collect();
    assert!(ks_distance_normal(&shifted) > ks_critical_1pct(2000));
}
