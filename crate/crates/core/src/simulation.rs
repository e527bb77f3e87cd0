//! Sample paths of the periodic GARCH recursion and the truncated
//! moving-average oracle for the stationary state vector.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{season_of_index, InnovationDist, PGarchSpec, Series};
use crate::rng::{rng_from, sub_seed};
use crate::stationarity::build_companion;

/// Default burn-in, in years.
pub const DEFAULT_BURN_IN_YEARS: usize = 50;

const BURN_IN_STREAM: u64 = 0xb0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Number of simulated years `N`; the path has `T = N * S` observations.
    pub n_years: usize,
    /// Discarded leading observations. Must be a multiple of `S`.
    pub burn_in: usize,
    pub seed: u64,
    pub dist: InnovationDist,
}

impl SimConfig {
    pub fn new(spec: &PGarchSpec, n_years: usize, seed: u64, dist: InnovationDist) -> Self {
        Self { n_years, burn_in: DEFAULT_BURN_IN_YEARS * spec.period, seed, dist }
    }
}

/// Runs the recursion for `burn_in + T` steps starting from presample values
/// `y^2 = h = omega` of the matching season, then drops the burn-in.
/// Output observation 1 is season 1.
///
/// Burn-in innovations come from a separate stream, so the innovations of
/// the kept observations depend only on the seed, not on `burn_in`.
pub fn simulate_path(spec: &PGarchSpec, cfg: &SimConfig) -> Result<Series> {
    spec.validate()?;
    let s = spec.period;
    if cfg.n_years == 0 {
        return Err(Error::InvalidArgument("n_years must be >= 1".into()));
    }
    if cfg.burn_in % s != 0 {
        return Err(Error::InvalidArgument(format!(
            "burn_in {} is not a multiple of period {s}",
            cfg.burn_in
        )));
    }
    let sampler = cfg.dist.sampler()?;
    let mut rng = rng_from(cfg.seed);
    let mut burn_rng = rng_from(sub_seed(cfg.seed, &[BURN_IN_STREAM]));
    let (q, p) = (spec.order_q, spec.order_p);
    let total = cfg.burn_in + cfg.n_years * s;
    let keep = cfg.n_years * s;

    // lag buffers, most recent first
    let mut y2_lags: Vec<f64> = (0..q).map(|i| spec.omega_at(-(i as i64))).collect();
    let mut h_lags: Vec<f64> = (0..p).map(|j| spec.omega_at(-(j as i64))).collect();
    let omega_min = spec.omega.iter().copied().fold(f64::INFINITY, f64::min);

    let mut values = Vec::with_capacity(keep);
    let mut h_true = Vec::with_capacity(keep);
    for tau in 1..=total {
        let v = season_of_index(tau as i64, s) - 1;
        let mut h = spec.omega[v];
        for i in 0..q {
            h += spec.alpha[v][i] * y2_lags[i];
        }
        for j in 0..p {
            h += spec.beta[v][j] * h_lags[j];
        }
        debug_assert!(h >= omega_min);
        let eta = if tau > cfg.burn_in { sampler.draw(&mut rng) } else { sampler.draw(&mut burn_rng) };
        let y = h.sqrt() * eta;
        if q > 0 {
            y2_lags.rotate_right(1);
            y2_lags[0] = y * y;
        }
        if p > 0 {
            h_lags.rotate_right(1);
            h_lags[0] = h;
        }
        if tau > cfg.burn_in {
            values.push(y);
            h_true.push(h);
        }
    }
    Series::with_volatility(values, s, h_true)
}

/// One draw of the truncated series `B_v + sum_{k=1}^K (A_v ... A_{v-k+1}) B_{v-k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedState {
    /// `(y_v^2, ..., y_{v-q+1}^2, h_v, ..., h_{v-p+1})`.
    pub state: Vec<f64>,
    /// 1-norm of the last added term.
    pub tail_norm: f64,
    /// `tail_norm < 1e-8 * ||state||_1`.
    pub converged: bool,
}

impl TruncatedState {
    /// `h_v`, the coordinate following the `q` squared-observation lags.
    pub fn h(&self, order_q: usize) -> f64 {
        self.state[order_q]
    }
}

/// Evaluates the truncated stationary-solution series at season `v` on a
/// fresh innovation stream (one `eta` per lag).
pub fn truncated_series_state(
    spec: &PGarchSpec,
    dist: InnovationDist,
    k_max: usize,
    seed: u64,
    v: usize,
) -> Result<TruncatedState> {
    spec.validate()?;
    if k_max == 0 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    if !(1..=spec.period).contains(&v) {
        return Err(Error::InvalidArgument(format!("season {v} outside 1..={}", spec.period)));
    }
    let sampler = dist.sampler()?;
    let mut rng = rng_from(seed);
    let s = spec.period;
    let season = |lag: usize| season_of_index(v as i64 - lag as i64, s);

    let e0 = sampler.draw(&mut rng);
    let mut current = build_companion(spec, v, e0 * e0)?;
    let r = current.a.nrows();
    let mut state: DVector<f64> = current.b.clone();
    let mut prod = DMatrix::<f64>::identity(r, r);
    let mut tail_norm = 0.0;
    for k in 1..=k_max {
        // prod = A_v ... A_{v-k+1}; current holds (A, B) at lag k-1
        prod *= &current.a;
        let e = sampler.draw(&mut rng);
        current = build_companion(spec, season(k), e * e)?;
        let term = &prod * &current.b;
        tail_norm = term.iter().map(|x| x.abs()).sum();
        state += term;
    }
    let total: f64 = state.iter().map(|x| x.abs()).sum();
    Ok(TruncatedState {
        state: state.iter().copied().collect(),
        tail_norm,
        converged: tail_norm < 1e-8 * total,
    })
}

/// Independent replications of [`truncated_series_state`]; replication `i`
/// uses the sub-seed derived from `(seed, i)`.
pub fn truncated_series_replications(
    spec: &PGarchSpec,
    dist: InnovationDist,
    k_max: usize,
    n_reps: usize,
    seed: u64,
    v: usize,
) -> Result<Vec<TruncatedState>> {
    (0..n_reps)
        .into_par_iter()
        .map(|i| truncated_series_state(spec, dist, k_max, sub_seed(seed, &[i as u64]), v))
        .collect()
}
