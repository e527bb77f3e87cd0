//! Random companion matrices and the existence questions for the strictly
//! periodically stationary solution: the top Lyapunov exponent, the
//! necessary spectral-radius condition on the `beta` blocks, and the search
//! for a fractional moment order.
//!
//! All matrix norms are the operator 1-norm. Products over a year are taken
//! in descending season order, `A_S ... A_1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spectral_radius, RenormalizedProduct};
use crate::model::{InnovationDist, InnovationSampler, PGarchSpec};
use crate::quad::adaptive_simpson;
use crate::rng::{rng_from, sub_seed, SimRng};

/// Default one-sided z used for the stationarity decision.
pub const DEFAULT_Z: f64 = 2.58;

/// Default `delta` grid for [`moment_delta_search`].
pub const DELTA_GRID: [f64; 5] = [0.5, 0.25, 0.1, 0.05, 0.01];

/// Default largest block count `n0` tried by [`moment_delta_search`].
pub const DEFAULT_N0_MAX: usize = 20;

/// One realization of the companion recursion `Y_t = A_t Y_{t-1} + B_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionMatrix {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// Realizes `A_t`, `B_t` for season `v` and squared innovation `eta_sq`.
///
/// Layout of the `(q + p)`-square matrix: row 1 is `(alpha eta^2, beta eta^2)`,
/// rows `2..q` shift the `y^2` lags, row `q + 1` is `(alpha, beta)` and rows
/// `q + 2..q + p` shift the `h` lags.
pub fn build_companion(spec: &PGarchSpec, v: usize, eta_sq: f64) -> Result<CompanionMatrix> {
    let (q, p) = (spec.order_q, spec.order_p);
    if p == 0 || q == 0 {
        return Err(Error::Order(format!("companion matrix needs p >= 1 and q >= 1 (got p = {p}, q = {q})")));
    }
    if !(eta_sq >= 0.0) {
        return Err(Error::InvalidArgument(format!("eta^2 must be nonnegative, got {eta_sq}")));
    }
    if !(1..=spec.period).contains(&v) {
        return Err(Error::InvalidArgument(format!("season {v} outside 1..={}", spec.period)));
    }
    let r = p + q;
    let alpha = &spec.alpha[v - 1];
    let beta = &spec.beta[v - 1];
    let omega = spec.omega[v - 1];
    let mut a = DMatrix::zeros(r, r);
    for i in 0..q {
        a[(0, i)] = alpha[i] * eta_sq;
        a[(q, i)] = alpha[i];
    }
    for j in 0..p {
        a[(0, q + j)] = beta[j] * eta_sq;
        a[(q, q + j)] = beta[j];
    }
    for i in 1..q {
        a[(i, i - 1)] = 1.0;
    }
    for j in 1..p {
        a[(q + j, q + j - 1)] = 1.0;
    }
    let mut b = DVector::zeros(r);
    b[0] = omega * eta_sq;
    b[q] = omega;
    Ok(CompanionMatrix { a, b })
}

/// Stacks one year of season matrices into the block form used for the
/// annual (vector) representation. Only the last block column of the
/// returned matrix is nonzero: block `(k, S)` is `A_k ... A_1`, and block
/// `k` of the vector is `sum_{j <= k} (A_k ... A_{j+1}) B_j`.
pub fn stack_blocks(a: &[DMatrix<f64>], b: &[DVector<f64>]) -> (DMatrix<f64>, DVector<f64>) {
    assert_eq!(a.len(), b.len());
    let s = a.len();
    assert!(s >= 1);
    let r = a[0].nrows();
    let mut big_a = DMatrix::zeros(r * s, r * s);
    let mut big_b = DVector::zeros(r * s);
    let mut prod = DMatrix::identity(r, r);
    let mut acc = DVector::zeros(r);
    for k in 0..s {
        prod = &a[k] * &prod;
        acc = &a[k] * &acc + &b[k];
        big_a.view_mut((k * r, (s - 1) * r), (r, r)).copy_from(&prod);
        big_b.rows_mut(k * r, r).copy_from(&acc);
    }
    (big_a, big_b)
}

/// Annual block matrix and vector from one squared innovation per season.
pub fn build_stacked_companion(
    spec: &PGarchSpec,
    eta_sq_by_season: &[f64],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if eta_sq_by_season.len() != spec.period {
        return Err(Error::InvalidArgument(format!(
            "expected {} squared innovations, got {}",
            spec.period,
            eta_sq_by_season.len()
        )));
    }
    let mut a = Vec::with_capacity(spec.period);
    let mut b = Vec::with_capacity(spec.period);
    for (v, &e) in eta_sq_by_season.iter().enumerate() {
        let c = build_companion(spec, v + 1, e)?;
        a.push(c.a);
        b.push(c.b);
    }
    Ok(stack_blocks(&a, &b))
}

/// Matrix recursion used to measure growth for a given `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Full `(q + p)` companion form.
    Companion,
    /// `p = 0`: the `q`-dimensional recursion of the squared process alone
    /// (scalar when `q = 1`).
    Arch,
    /// `q = 0`: `h` evolves deterministically through the `beta` blocks.
    BetaOnly,
}

impl Representation {
    pub fn for_spec(spec: &PGarchSpec) -> Result<Self> {
        match (spec.order_q, spec.order_p) {
            (0, 0) => {
                Err(Error::Degenerate("q = p = 0 has no lag dynamics; the growth exponent is -inf".into()))
            }
            (0, _) => Ok(Self::BetaOnly),
            (_, 0) => {
                if let Some(v) = zero_arch_season(spec) {
                    return Err(Error::Degenerate(format!(
                        "alpha row of season {v} is all zero with p = 0 (log of a zero matrix)"
                    )));
                }
                Ok(Self::Arch)
            }
            _ => Ok(Self::Companion),
        }
    }

    fn is_random(self) -> bool {
        !matches!(self, Self::BetaOnly)
    }

    fn matrix(self, spec: &PGarchSpec, v: usize, eta_sq: f64) -> DMatrix<f64> {
        match self {
            Self::Companion => {
                build_companion(spec, v, eta_sq).expect("orders checked by Representation::for_spec").a
            }
            Self::Arch => {
                let q = spec.order_q;
                let mut a = DMatrix::zeros(q, q);
                for i in 0..q {
                    a[(0, i)] = spec.alpha[v - 1][i] * eta_sq;
                }
                for i in 1..q {
                    a[(i, i - 1)] = 1.0;
                }
                a
            }
            Self::BetaOnly => beta_block(spec, v),
        }
    }
}

/// First season whose scalar ARCH coefficient is zero when `q = 1, p = 0`.
fn zero_arch_season(spec: &PGarchSpec) -> Option<usize> {
    if spec.order_q != 1 || spec.order_p != 0 {
        return None;
    }
    spec.alpha.iter().position(|row| row[0] == 0.0).map(|v| v + 1)
}

/// The `p x p` companion block of the `beta` coefficients of season `v`.
pub fn beta_block(spec: &PGarchSpec, v: usize) -> DMatrix<f64> {
    let p = spec.order_p;
    let mut m = DMatrix::zeros(p, p);
    for j in 0..p {
        m[(0, j)] = spec.beta[v - 1][j];
    }
    for j in 1..p {
        m[(j, j - 1)] = 1.0;
    }
    m
}

/// `rho(beta_S ... beta_1)`. Zero when `p = 0`.
pub fn beta_spectral_radius(spec: &PGarchSpec) -> f64 {
    let p = spec.order_p;
    if p == 0 {
        return 0.0;
    }
    if p == 1 {
        return spec.beta.iter().map(|b| b[0]).product::<f64>().abs();
    }
    let mut prod = DMatrix::identity(p, p);
    for v in 1..=spec.period {
        prod = beta_block(spec, v) * prod;
    }
    spectral_radius(&prod)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    StrictlyNegative,
    NonNegative,
    Inconclusive,
}

impl Decision {
    pub fn from_interval(gamma: f64, se: f64, z: f64) -> Self {
        if gamma + z * se < 0.0 {
            Self::StrictlyNegative
        } else if gamma - z * se >= 0.0 {
            Self::NonNegative
        } else {
            Self::Inconclusive
        }
    }
}

/// Monte Carlo estimate of the top Lyapunov exponent over one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub gamma_hat: f64,
    pub std_error: f64,
    pub n_blocks: usize,
    pub decision: Decision,
    pub z: f64,
    pub representation: Representation,
}

/// Estimates the top Lyapunov exponent with the default `z`.
pub fn lyapunov_mc(
    spec: &PGarchSpec,
    dist: InnovationDist,
    n_blocks: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    lyapunov_mc_with_z(spec, dist, n_blocks, seed, DEFAULT_Z)
}

/// Averages the per-year log growth of the renormalized product
/// `A_{nS} ... A_1`. The standard error uses batch means of the per-year
/// increments.
pub fn lyapunov_mc_with_z(
    spec: &PGarchSpec,
    dist: InnovationDist,
    n_blocks: usize,
    seed: u64,
    z: f64,
) -> Result<LyapunovEstimate> {
    spec.validate()?;
    if n_blocks < 100 {
        return Err(Error::InvalidArgument(format!("n_blocks must be >= 100, got {n_blocks}")));
    }
    let rep = Representation::for_spec(spec)?;
    if !rep.is_random() {
        let gamma = beta_spectral_radius(spec).ln();
        return Ok(LyapunovEstimate {
            gamma_hat: gamma,
            std_error: 0.0,
            n_blocks,
            decision: Decision::from_interval(gamma, 0.0, z),
            z,
            representation: rep,
        });
    }
    let sampler = dist.sampler()?;
    let mut rng = rng_from(seed);
    let increments = growth_increments(spec, rep, &sampler, &mut rng, n_blocks);
    let (gamma, se) = batch_mean_se(&increments);
    Ok(LyapunovEstimate {
        gamma_hat: gamma,
        std_error: se,
        n_blocks,
        decision: Decision::from_interval(gamma, se, z),
        z,
        representation: rep,
    })
}

fn year_matrices(
    spec: &PGarchSpec,
    rep: Representation,
    sampler: &InnovationSampler,
    rng: &mut SimRng,
) -> Vec<DMatrix<f64>> {
    (1..=spec.period)
        .map(|v| {
            let e = sampler.draw(rng);
            rep.matrix(spec, v, e * e)
        })
        .collect()
}

fn growth_increments(
    spec: &PGarchSpec,
    rep: Representation,
    sampler: &InnovationSampler,
    rng: &mut SimRng,
    n_blocks: usize,
) -> Vec<f64> {
    let r = rep.matrix(spec, 1, 1.0).nrows();
    let mut prod = RenormalizedProduct::identity(r);
    (0..n_blocks)
        .map(|_| {
            let year = year_matrices(spec, rep, sampler, rng);
            prod.push_block(year.iter())
        })
        .collect()
}

/// Mean and batch-means standard error.
fn batch_mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    if !mean.is_finite() {
        return (mean, f64::NAN);
    }
    let n_batches = (n / 20).clamp(10, 50).min(n);
    let size = n / n_batches;
    let means: Vec<f64> =
        (0..n_batches).map(|b| x[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let bm = means.iter().sum::<f64>() / n_batches as f64;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (n_batches - 1) as f64;
    (mean, (var / n_batches as f64).sqrt())
}

/// Lyapunov estimate computed from products of the annual block matrices.
/// Used to check `gamma(stacked) <= gamma^S(A)`.
pub fn lyapunov_stacked_mc(
    spec: &PGarchSpec,
    dist: InnovationDist,
    n_blocks: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    spec.validate()?;
    let sampler = dist.sampler()?;
    let mut rng = rng_from(seed);
    let r = spec.order_p + spec.order_q;
    let mut prod = RenormalizedProduct::identity(r * spec.period);
    let mut inc = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        let etas: Vec<f64> = (0..spec.period).map(|_| sampler.draw(&mut rng).powi(2)).collect();
        let (a, _) = build_stacked_companion(spec, &etas)?;
        inc.push(prod.push_left(&a));
    }
    let (gamma, se) = batch_mean_se(&inc);
    Ok(LyapunovEstimate {
        gamma_hat: gamma,
        std_error: se,
        n_blocks,
        decision: Decision::from_interval(gamma, se, DEFAULT_Z),
        z: DEFAULT_Z,
        representation: Representation::Companion,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSearchResult {
    pub delta: f64,
    pub n0: usize,
    /// Monte Carlo estimate of `E ||A_{n0 S} ... A_1||^delta`.
    pub estimate: f64,
    pub upper_bound: f64,
}

/// Searches `delta` in [`DELTA_GRID`] and `n0 = 1..=n0_max` for the first
/// pair whose Monte Carlo upper confidence bound on
/// `E ||A_{n0 S} ... A_1||^delta` is below one. `None` means nothing was
/// found, not that no such pair exists.
pub fn moment_delta_search(
    spec: &PGarchSpec,
    dist: InnovationDist,
    n0_max: usize,
    mc_size: usize,
    seed: u64,
) -> Result<Option<DeltaSearchResult>> {
    spec.validate()?;
    if mc_size < 2 {
        return Err(Error::InvalidArgument("mc_size must be >= 2".into()));
    }
    let rep = Representation::for_spec(spec)?;
    let sampler = dist.sampler()?;
    let r = rep.matrix(spec, 1, 1.0).nrows();
    for n0 in 1..=n0_max {
        let mut rng = rng_from(sub_seed(seed, &[n0 as u64]));
        let log_norms: Vec<f64> = (0..mc_size)
            .map(|_| {
                let mut prod = RenormalizedProduct::identity(r);
                for _ in 0..n0 {
                    let year = year_matrices(spec, rep, &sampler, &mut rng);
                    prod.push_block(year.iter());
                }
                prod.log_norm()
            })
            .collect();
        for &delta in DELTA_GRID.iter() {
            let vals: Vec<f64> = log_norms.iter().map(|l| (delta * l).exp()).collect();
            let (mean, sd) = mean_sd(&vals);
            let ucb = mean + DEFAULT_Z * sd / (mc_size as f64).sqrt();
            if ucb < 1.0 {
                return Ok(Some(DeltaSearchResult { delta, n0, estimate: mean, upper_bound: ucb }));
            }
        }
    }
    Ok(None)
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `E log eta^2` with a standard error (zero when computed exactly).
///
/// Gaussian innovations are integrated numerically; other laws are sampled.
pub fn mean_log_eta_sq(dist: InnovationDist, mc_size: usize, seed: u64) -> Result<(f64, f64)> {
    match dist {
        InnovationDist::StandardGaussian => Ok((gaussian_mean_log_sq(), 0.0)),
        InnovationDist::UnitConstant => Ok((0.0, 0.0)),
        InnovationDist::StandardizedStudentT { .. } => {
            if mc_size < 2 {
                return Err(Error::InvalidArgument("mc_size must be >= 2".into()));
            }
            let sampler = dist.sampler()?;
            let mut rng = rng_from(seed);
            let logs: Vec<f64> = (0..mc_size).map(|_| sampler.draw(&mut rng).powi(2).ln()).collect();
            let (m, sd) = mean_sd(&logs);
            Ok((m, sd / (mc_size as f64).sqrt()))
        }
    }
}

/// `2 * int_0^inf ln(x^2) phi(x) dx`, with `x = s^2` on `[0, 1]` to remove
/// the log singularity.
fn gaussian_mean_log_sq() -> f64 {
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let near = |s: f64| {
        if s == 0.0 {
            0.0
        } else {
            8.0 * s * s.ln() * phi(s * s)
        }
    };
    let far = |x: f64| 2.0 * x.ln() * phi(x);
    let tol = 1e-13;
    2.0 * (adaptive_simpson(&near, 0.0, 1.0, tol)
        + adaptive_simpson(&far, 1.0, 8.0, tol)
        + adaptive_simpson(&far, 8.0, 40.0, tol))
}

/// `a = exp(-E log eta^2)`; a periodic ARCH(1) with `S` seasons is strictly
/// periodically stationary iff `prod_v alpha_v < a^S`.
pub fn parch1_stationarity_bound(dist: InnovationDist, mc_size: usize, seed: u64) -> Result<f64> {
    let (m, _) = mean_log_eta_sq(dist, mc_size, seed)?;
    Ok((-m).exp())
}

/// Mean of `h_t` in season `v` for a first-order model, or `None` when the
/// denominator `1 - prod_v (alpha_v + beta_v)` is not positive.
pub fn unconditional_variance_p11(spec: &PGarchSpec, v: usize) -> Result<Option<f64>> {
    if spec.order_q != 1 || spec.order_p != 1 {
        return Err(Error::Order(format!(
            "unconditional variance formula needs (p, q) = (1, 1), got ({}, {})",
            spec.order_p, spec.order_q
        )));
    }
    if !(1..=spec.period).contains(&v) {
        return Err(Error::InvalidArgument(format!("season {v} outside 1..={}", spec.period)));
    }
    let s = spec.period as i64;
    let v = v as i64;
    let c = |t: i64| spec.alpha_at(t, 1) + spec.beta_at(t, 1);
    let mut num = spec.omega_at(v);
    let mut prod = 1.0;
    for j in 1..s {
        prod *= c(v - j + 1);
        num += prod * spec.omega_at(v - j);
    }
    let total: f64 = (0..s).map(|i| c(v - i)).product();
    let den = 1.0 - total;
    Ok(if den > 0.0 { Some(num / den) } else { None })
}

/// Summary used by the CLI and as a precondition by the Monte Carlo harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub decision: Decision,
    pub lyapunov: Option<LyapunovEstimate>,
    pub beta_spectral_radius: f64,
    /// `rho(prod beta_v) < 1`, necessary for a stationary solution.
    pub necessary_condition: bool,
    /// Per-season mean of `h` for first-order models (`None` entries when it
    /// is not finite).
    pub unconditional_variance: Option<Vec<Option<f64>>>,
    pub note: Option<String>,
}

pub fn stationarity_report(
    spec: &PGarchSpec,
    dist: InnovationDist,
    n_blocks: usize,
    seed: u64,
    z: f64,
) -> Result<StationarityReport> {
    spec.validate()?;
    let rho = beta_spectral_radius(spec);
    let unconditional_variance = if spec.order_p == 1 && spec.order_q == 1 {
        Some((1..=spec.period).map(|v| unconditional_variance_p11(spec, v)).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    let (decision, lyapunov, note) = if spec.order_p == 0 && spec.order_q == 0 {
        (
            Decision::StrictlyNegative,
            None,
            Some("q = p = 0: the series is independent periodic white noise".to_string()),
        )
    } else if let Some(v) = zero_arch_season(spec) {
        (
            Decision::StrictlyNegative,
            None,
            Some(format!("alpha of season {v} is zero: the recursion restarts every period")),
        )
    } else {
        let est = lyapunov_mc_with_z(spec, dist, n_blocks, seed, z)?;
        (est.decision, Some(est), None)
    };
    Ok(StationarityReport {
        decision,
        lyapunov,
        beta_spectral_radius: rho,
        necessary_condition: rho < 1.0,
        unconditional_variance,
        note,
    })
}
