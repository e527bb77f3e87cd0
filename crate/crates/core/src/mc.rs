//! Replicated simulate-then-fit experiments.
//!
//! Replication `r` at sample size `N` draws its path from the sub-seed
//! `(seed, N, r)` and its multi-start dispersion from `(seed, N, r, 1)`, so
//! reports do not depend on thread scheduling.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::likelihood::{cross_block_mass, Evaluator, InitScheme};
use crate::model::{InnovationDist, PGarchSpec};
use crate::qmle::{fit, to_rows, FitOptions, FitResult};
use crate::rng::sub_seed;
use crate::simulation::{simulate_path, SimConfig};
use crate::stationarity::{stationarity_report, Decision, DEFAULT_Z};

/// Blocks used by the stationarity precondition.
pub const PRECONDITION_BLOCKS: usize = 20_000;
/// Largest tolerated share of failed replications.
pub const MAX_EXCLUDED_SHARE: f64 = 0.05;
/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959964;

pub type ByName = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCell {
    pub n_years: usize,
    pub n_used: usize,
    pub n_excluded: usize,
    /// Replications with at least one coordinate on a bound of the box.
    pub n_boundary: usize,
    pub bias: ByName,
    pub rmse: ByName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub n_grid: Vec<usize>,
    pub cells: Vec<ConsistencyCell>,
    /// `sqrt(N) (theta_hat - theta0)` at the largest `N`, one row per
    /// replication that was fitted.
    pub scaled_errors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub n_years: usize,
    pub n_used: usize,
    pub n_excluded: usize,
    pub n_boundary: usize,
    pub ci_coverage: ByName,
    pub ks_distance: ByName,
    pub ks_p_value: ByName,
    pub ks_critical_1pct: f64,
    pub ks_below_critical: usize,
    /// Variance of `theta_hat` across replications.
    pub empirical_variance: ByName,
    /// Mean of the estimated `Var(theta_hat)` diagonal.
    pub mean_estimated_variance: ByName,
    /// `empirical_variance / mean_estimated_variance`.
    pub sandwich_ratio: ByName,
    pub mean_kappa_hat: f64,
    pub scaled_errors: Vec<Vec<f64>>,
    /// `(theta_hat - theta0) / se`, one row per used replication.
    pub standardized_errors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub spec0: PGarchSpec,
    pub dist: InnovationDist,
    pub parameter_names: Vec<String>,
    pub theta0: ByName,
    pub replications: usize,
    pub seed: u64,
    pub init: InitScheme,
    pub consistency: Option<ConsistencyReport>,
    pub normality: Option<NormalityReport>,
    /// Mean relative Frobenius mass of the off-diagonal season blocks of
    /// `J_hat` over fitted replications.
    pub j_cross_block_mass: f64,
    pub warnings: Vec<String>,
}

impl MonteCarloReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

fn check_preconditions(spec0: &PGarchSpec, dist: InnovationDist, reps: usize, seed: u64) -> Result<()> {
    spec0.validate()?;
    dist.require_nondegenerate()?;
    if reps < 2 {
        return Err(Error::InvalidArgument("R must be >= 2".into()));
    }
    let report = stationarity_report(spec0, dist, PRECONDITION_BLOCKS, seed, DEFAULT_Z)?;
    if report.decision != Decision::StrictlyNegative {
        return Err(Error::Precondition(format!(
            "stationarity decision for the generating parameter is {:?}, need StrictlyNegative",
            report.decision
        )));
    }
    Ok(())
}

fn named(names: &[String], values: &[f64]) -> ByName {
    names.iter().cloned().zip(values.iter().copied()).collect()
}

/// Simulates and fits replications `0..reps` at `n_years`; `None` marks a
/// failed replication.
fn replicate(
    spec0: &PGarchSpec,
    dist: InnovationDist,
    n_years: usize,
    reps: usize,
    opts: &FitOptions,
    seed: u64,
) -> Vec<Option<FitResult>> {
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let base = sub_seed(seed, &[n_years as u64, r as u64]);
            let cfg = SimConfig::new(spec0, n_years, base, dist);
            let series = simulate_path(spec0, &cfg).ok()?;
            let o = FitOptions { seed: sub_seed(seed, &[n_years as u64, r as u64, 1]), ..opts.clone() };
            fit(&series, spec0.period, spec0.order_q, spec0.order_p, &o).ok()
        })
        .collect()
}

fn check_exclusions(fits: &[Option<FitResult>]) -> Result<usize> {
    let excluded = fits.iter().filter(|f| f.is_none()).count();
    if excluded as f64 > MAX_EXCLUDED_SHARE * fits.len() as f64 {
        return Err(Error::ExcessiveExclusions { excluded, total: fits.len() });
    }
    Ok(excluded)
}

fn mean_cross_mass(fits: &[&FitResult]) -> f64 {
    if fits.is_empty() {
        return f64::NAN;
    }
    fits.iter().map(|f| f.j_cross_block_mass).sum::<f64>() / fits.len() as f64
}

fn base_report(
    spec0: &PGarchSpec,
    dist: InnovationDist,
    reps: usize,
    opts: &FitOptions,
    seed: u64,
) -> MonteCarloReport {
    let names = spec0.param_names();
    let mut warnings = Vec::new();
    warnings.extend(dist.moment_warning());
    MonteCarloReport {
        spec0: spec0.clone(),
        dist,
        theta0: named(&names, &spec0.to_theta()),
        parameter_names: names,
        replications: reps,
        seed,
        init: opts.init,
        consistency: None,
        normality: None,
        j_cross_block_mass: f64::NAN,
        warnings,
    }
}

/// Bias and RMSE of the QMLE per coordinate across a grid of sample sizes.
pub fn run_consistency(
    spec0: &PGarchSpec,
    dist: InnovationDist,
    n_grid: &[usize],
    reps: usize,
    opts: &FitOptions,
    seed: u64,
) -> Result<MonteCarloReport> {
    if n_grid.len() < 2 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n_grid must be strictly increasing with at least 2 entries".into(),
        ));
    }
    opts.check()?;
    check_preconditions(spec0, dist, reps, seed)?;
    let mut report = base_report(spec0, dist, reps, opts, seed);
    let names = &report.parameter_names;
    let theta0 = spec0.to_theta();
    let dim = theta0.len();

    let mut cells = Vec::with_capacity(n_grid.len());
    let mut scaled_errors = Vec::new();
    let mut last_mass = f64::NAN;
    for &n in n_grid {
        let fits = replicate(spec0, dist, n, reps, opts, seed);
        let n_excluded = check_exclusions(&fits)?;
        let used: Vec<&FitResult> = fits.iter().flatten().collect();
        let mut sum = vec![0.0; dim];
        let mut sum_sq = vec![0.0; dim];
        for f in &used {
            for k in 0..dim {
                let e = f.theta[k] - theta0[k];
                sum[k] += e;
                sum_sq[k] += e * e;
            }
        }
        let m = used.len() as f64;
        let bias: Vec<f64> = sum.iter().map(|s| s / m).collect();
        let rmse: Vec<f64> = sum_sq.iter().map(|s| (s / m).sqrt()).collect();
        if n == *n_grid.last().unwrap() {
            let root = (n as f64).sqrt();
            scaled_errors =
                used.iter().map(|f| (0..dim).map(|k| root * (f.theta[k] - theta0[k])).collect()).collect();
            last_mass = mean_cross_mass(&used);
        }
        cells.push(ConsistencyCell {
            n_years: n,
            n_used: used.len(),
            n_excluded,
            n_boundary: used.iter().filter(|f| f.any_boundary()).count(),
            bias: named(names, &bias),
            rmse: named(names, &rmse),
        });
    }
    report.j_cross_block_mass = last_mass;
    report.consistency = Some(ConsistencyReport { n_grid: n_grid.to_vec(), cells, scaled_errors });
    Ok(report)
}

/// Confidence-interval coverage, KS normality and sandwich agreement at a
/// single sample size. Replications with a coordinate on the box boundary
/// or without finite standard errors are excluded from these statistics.
pub fn run_normality(
    spec0: &PGarchSpec,
    dist: InnovationDist,
    n_years: usize,
    reps: usize,
    opts: &FitOptions,
    seed: u64,
) -> Result<MonteCarloReport> {
    if dist.fourth_moment().is_infinite() {
        return Err(Error::Precondition("innovation law has an infinite fourth moment".into()));
    }
    if n_years == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    opts.check()?;
    check_preconditions(spec0, dist, reps, seed)?;
    let mut report = base_report(spec0, dist, reps, opts, seed);
    let names = report.parameter_names.clone();
    let theta0 = spec0.to_theta();
    let dim = theta0.len();

    let fits = replicate(spec0, dist, n_years, reps, opts, seed);
    let n_excluded = check_exclusions(&fits)?;
    let fitted: Vec<&FitResult> = fits.iter().flatten().collect();
    let n_boundary = fitted.iter().filter(|f| f.any_boundary()).count();
    let used: Vec<&FitResult> = fitted
        .iter()
        .copied()
        .filter(|f| !f.any_boundary() && f.std_errors.iter().all(|s| s.is_finite() && *s > 0.0))
        .collect();
    if used.len() < 2 {
        return Err(Error::Precondition(format!(
            "only {} interior replications with finite standard errors",
            used.len()
        )));
    }
    if n_boundary > 0 {
        report
            .warnings
            .push(format!("{n_boundary} replications hit the parameter box boundary and were excluded"));
    }
    let skipped = fitted.len() - n_boundary - used.len();
    if skipped > 0 {
        report.warnings.push(format!("{skipped} replications without finite standard errors were excluded"));
    }

    let m = used.len() as f64;
    let root = (n_years as f64).sqrt();
    let scaled_errors: Vec<Vec<f64>> =
        used.iter().map(|f| (0..dim).map(|k| root * (f.theta[k] - theta0[k])).collect()).collect();
    let standardized: Vec<Vec<f64>> =
        used.iter().map(|f| (0..dim).map(|k| (f.theta[k] - theta0[k]) / f.std_errors[k]).collect()).collect();

    let mut coverage = vec![0.0; dim];
    let mut ks = vec![0.0; dim];
    let mut ks_p = vec![0.0; dim];
    let mut emp_var = vec![0.0; dim];
    let mut est_var = vec![0.0; dim];
    for k in 0..dim {
        let column: Vec<f64> = standardized.iter().map(|row| row[k]).collect();
        coverage[k] = column.iter().filter(|z| z.abs() <= Z95).count() as f64 / m;
        let d = ks_distance_normal(&column);
        ks[k] = d;
        ks_p[k] = ks_p_value(d, column.len());
        let mean = used.iter().map(|f| f.theta[k]).sum::<f64>() / m;
        emp_var[k] = used.iter().map(|f| (f.theta[k] - mean).powi(2)).sum::<f64>() / (m - 1.0);
        est_var[k] = used.iter().map(|f| f.covariance[k][k]).sum::<f64>() / m;
    }
    let critical = ks_critical_1pct(used.len());
    let ratio: Vec<f64> = emp_var.iter().zip(&est_var).map(|(a, b)| a / b).collect();
    report.j_cross_block_mass = mean_cross_mass(&used);
    report.normality = Some(NormalityReport {
        n_years,
        n_used: used.len(),
        n_excluded,
        n_boundary,
        ci_coverage: named(&names, &coverage),
        ks_distance: named(&names, &ks),
        ks_p_value: named(&names, &ks_p),
        ks_critical_1pct: critical,
        ks_below_critical: ks.iter().filter(|d| **d < critical).count(),
        empirical_variance: named(&names, &emp_var),
        mean_estimated_variance: named(&names, &est_var),
        sandwich_ratio: named(&names, &ratio),
        mean_kappa_hat: used.iter().map(|f| f.kappa_hat).sum::<f64>() / m,
        scaled_errors,
        standardized_errors: standardized,
    });
    Ok(report)
}

/// `J_hat` evaluated at the generating parameter on one simulated path of
/// `m_years` years.
pub fn j_reference(
    spec0: &PGarchSpec,
    dist: InnovationDist,
    m_years: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let report = stationarity_report(spec0, dist, PRECONDITION_BLOCKS, seed, DEFAULT_Z)?;
    if report.decision != Decision::StrictlyNegative {
        return Err(Error::Precondition(format!(
            "stationarity decision for the generating parameter is {:?}, need StrictlyNegative",
            report.decision
        )));
    }
    let series = simulate_path(spec0, &SimConfig::new(spec0, m_years, seed, dist))?;
    let ev = Evaluator::new(&series, spec0.order_q, spec0.order_p, InitScheme::OmegaInit)?;
    Ok(ev.evaluate(&spec0.to_theta(), false).j_hat)
}

/// Same as [`j_reference`] as nested rows, with the cross-block mass.
pub fn j_reference_rows(
    spec0: &PGarchSpec,
    dist: InnovationDist,
    m_years: usize,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let j = j_reference(spec0, dist, m_years, seed)?;
    let mass = cross_block_mass(&j, spec0.period);
    Ok((to_rows(&j), mass))
}

/// `sup_x |F_n(x) - Phi(x)|`.
pub fn ks_distance_normal(sample: &[f64]) -> f64 {
    let mut xs: Vec<f64> = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let phi = Normal::standard();
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            let c = phi.cdf(*x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

fn stephens(n: usize) -> f64 {
    let r = (n as f64).sqrt();
    r + 0.12 + 0.11 / r
}

/// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let lambda = stephens(n) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
        if term < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// One-sample KS critical value at level 0.01.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / stephens(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let phi = Normal::standard();
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| phi.inverse_cdf((i as f64 + 0.5) / n as f64)).collect();
        let d = ks_distance_normal(&xs);
        assert!((d - 0.5 / n as f64).abs() < 1e-9, "{d}");
        assert!(ks_p_value(d, n) > 0.999);
    }

    #[test]
    fn ks_critical_matches_p_value() {
        let n = 500;
        let c = ks_critical_1pct(n);
        assert!((ks_p_value(c, n) - 0.01).abs() < 1e-4);
    }

    #[test]
    fn shifted_sample_is_rejected() {
        let phi = Normal::standard();
        let xs: Vec<f64> = (0..500).map(|i| phi.inverse_cdf((i as f64 + 0.5) / 500.0) + 0.5).collect();
        let d = ks_distance_normal(&xs);
        assert!(d > ks_critical_1pct(500));
    }

    #[test]
    fn explosive_generator_is_rejected() {
        let spec = PGarchSpec::parch1(&[1.0, 1.0], &[5.0, 5.0]).unwrap();
        let e =
            run_consistency(&spec, InnovationDist::StandardGaussian, &[20, 40], 4, &FitOptions::default(), 1)
                .unwrap_err();
        assert!(matches!(e, Error::Precondition(_)), "{e}");
    }

    #[test]
    fn grid_must_increase() {
        let spec = PGarchSpec::white_noise(&[1.0]).unwrap();
        let o = FitOptions::default();
        let g = InnovationDist::StandardGaussian;
        assert!(run_consistency(&spec, g, &[100], 4, &o, 1).is_err());
        assert!(run_consistency(&spec, g, &[100, 100], 4, &o, 1).is_err());
        assert!(run_consistency(&spec, InnovationDist::UnitConstant, &[10, 20], 4, &o, 1).is_err());
    }
}
