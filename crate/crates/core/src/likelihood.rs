//! Gaussian quasi-likelihood of the periodic GARCH model conditional on
//! presample values.
//!
//! The criterion minimized by the estimator is
//! `C(theta) = (1/T) sum_t [ y_t^2 / h_t + ln h_t ]`, where `h_t` is produced
//! by the volatility filter
//! `h_t = omega_v + sum_i alpha_{v,i} y_{t-i}^2 + sum_j beta_{v,j} h_{t-j}`
//! with `v = season(t)` and presample values supplied by an [`InitScheme`].
//!
//! Derivatives follow the same recursion:
//! `dh_t = x_t + sum_i alpha_{v,i} d(y_{t-i}^2) + sum_j beta_{v,j} dh_{t-j}`,
//! where `x_t` has `1`, `y_{t-i}^2` and `h_{t-j}` in the own-season `omega`,
//! `alpha` and `beta` coordinates. Presample `y^2` only depends on `theta`
//! under [`InitScheme::OmegaInit`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{omega_index, param_dim, season_of_index, PGarchSpec, Series};

/// Presample values for the volatility filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// `y_t^2 = h_t = omega_{season(t)}` for `t <= 0`.
    #[default]
    OmegaInit,
    /// `y_t^2 = h_t = y_{[S + t]}^2` for `t <= 0`: the earliest in-sample
    /// observation of the same season.
    SampleInit,
}

/// Filter output with first derivatives and the information estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodWork {
    pub h_tilde: Vec<f64>,
    /// `T x dim`, row `t` is `d h_t / d theta` (exact, including presample
    /// dependence).
    pub dh: DMatrix<f64>,
    pub objective: f64,
    /// Gradient of the criterion `C`.
    pub score: Vec<f64>,
    /// `(1/N) sum_t h_t^{-2} dh_t dh_t'` with presample derivatives set to
    /// zero.
    pub j_hat: DMatrix<f64>,
    /// Mean of `(y_t^2 / h_t)^2`.
    pub kappa_hat: f64,
    /// `N = T / S` used in the normalization of `j_hat`.
    pub n_years: f64,
}

/// Shape of the model being evaluated on a fixed series.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Evaluator<'a> {
    pub y: &'a [f64],
    pub period: usize,
    pub order_q: usize,
    pub order_p: usize,
    pub init: InitScheme,
}

pub(crate) struct Evaluation {
    pub objective: f64,
    pub score: Vec<f64>,
    pub j_hat: DMatrix<f64>,
    pub kappa_hat: f64,
    pub h_tilde: Vec<f64>,
    pub dh: Option<DMatrix<f64>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(series: &'a Series, order_q: usize, order_p: usize, init: InitScheme) -> Result<Self> {
        let ev = Self { y: &series.values, period: series.period, order_q, order_p, init };
        ev.check_length()?;
        Ok(ev)
    }

    fn check_length(&self) -> Result<()> {
        let t = self.y.len();
        let d = self.order_p.max(self.order_q);
        if t == 0 || t < d {
            return Err(Error::InsufficientData(format!(
                "series of length {t} is shorter than max(p, q) = {d}"
            )));
        }
        if self.init == InitScheme::SampleInit && d > 0 && t < self.period {
            return Err(Error::InsufficientData(format!(
                "sample-based presample values need at least one full period ({} observations)",
                self.period
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        param_dim(self.period, self.order_q, self.order_p)
    }

    fn max_lag(&self) -> usize {
        self.order_p.max(self.order_q)
    }

    /// Presample value at index `t <= 0` and the season whose `omega` it
    /// equals under `OmegaInit`.
    fn presample(&self, theta: &[f64], t: i64) -> (f64, Option<usize>) {
        let s = self.period;
        match self.init {
            InitScheme::OmegaInit => {
                let v = season_of_index(t, s);
                (theta[omega_index(v, self.order_q, self.order_p)], Some(v))
            }
            InitScheme::SampleInit => {
                let mut k = s as i64 + t;
                while k < 1 {
                    k += s as i64;
                }
                let y = self.y[(k - 1) as usize];
                (y * y, None)
            }
        }
    }

    /// `h_tilde` only.
    pub fn filter(&self, theta: &[f64]) -> Vec<f64> {
        let (q, p) = (self.order_q, self.order_p);
        let d = self.max_lag();
        let t_len = self.y.len();
        let mut y2 = Vec::with_capacity(d + t_len);
        let mut h = Vec::with_capacity(d + t_len);
        for e in 0..d {
            let t = e as i64 + 1 - d as i64;
            let (val, _) = self.presample(theta, t);
            y2.push(val);
            h.push(val);
        }
        let block = 1 + q + p;
        for t in 0..t_len {
            let e = t + d;
            let base = (t % self.period) * block;
            let mut ht = theta[base];
            for i in 1..=q {
                ht += theta[base + i] * y2[e - i];
            }
            for j in 1..=p {
                ht += theta[base + q + j] * h[e - j];
            }
            y2.push(self.y[t] * self.y[t]);
            h.push(ht);
        }
        h.split_off(d)
    }

    pub fn objective(&self, theta: &[f64]) -> f64 {
        let h = self.filter(theta);
        let sum: f64 = h.iter().zip(self.y).map(|(ht, yt)| yt * yt / ht + ht.ln()).sum();
        sum / self.y.len() as f64
    }

    /// Objective, exact gradient, information estimate and fourth moment.
    pub fn evaluate(&self, theta: &[f64], store_dh: bool) -> Evaluation {
        let (q, p) = (self.order_q, self.order_p);
        let s = self.period;
        let d = self.max_lag();
        let dim = self.dim();
        let block = 1 + q + p;
        let t_len = self.y.len();
        let omega_presample = self.init == InitScheme::OmegaInit;

        let mut y2 = Vec::with_capacity(d + t_len);
        let mut h = Vec::with_capacity(d + t_len);
        // exact derivatives of h and presample y^2; `dh0` drops presample terms
        let mut dh = vec![0.0; (d + t_len) * dim];
        let mut dh0 = if omega_presample { vec![0.0; (d + t_len) * dim] } else { Vec::new() };
        let mut dy2_pre = vec![0.0; d * dim];
        for e in 0..d {
            let t = e as i64 + 1 - d as i64;
            let (val, season) = self.presample(theta, t);
            y2.push(val);
            h.push(val);
            if let Some(v) = season {
                let k = omega_index(v, q, p);
                dh[e * dim + k] = 1.0;
                dy2_pre[e * dim + k] = 1.0;
            }
        }

        let mut objective = 0.0;
        let mut kappa = 0.0;
        let mut score = vec![0.0; dim];
        let mut j_hat = DMatrix::<f64>::zeros(dim, dim);
        let mut row = vec![0.0; dim];
        let mut row0 = vec![0.0; dim];

        for t in 0..t_len {
            let e = t + d;
            let base = (t % s) * block;
            let mut ht = theta[base];
            for i in 1..=q {
                ht += theta[base + i] * y2[e - i];
            }
            for j in 1..=p {
                ht += theta[base + q + j] * h[e - j];
            }
            debug_assert!(ht > 0.0);

            row.iter_mut().for_each(|x| *x = 0.0);
            for j in 1..=p {
                let b = theta[base + q + j];
                if b != 0.0 {
                    let src = &dh[(e - j) * dim..(e - j + 1) * dim];
                    for (r, x) in row.iter_mut().zip(src) {
                        *r += b * x;
                    }
                }
            }
            if omega_presample {
                for i in 1..=q {
                    if e - i < d {
                        let a = theta[base + i];
                        let src = &dy2_pre[(e - i) * dim..(e - i + 1) * dim];
                        for (r, x) in row.iter_mut().zip(src) {
                            *r += a * x;
                        }
                    }
                }
            }
            row[base] += 1.0;
            for i in 1..=q {
                row[base + i] += y2[e - i];
            }
            for j in 1..=p {
                row[base + q + j] += h[e - j];
            }
            dh[e * dim..(e + 1) * dim].copy_from_slice(&row);

            let info_row: &[f64] = if omega_presample {
                row0.iter_mut().for_each(|x| *x = 0.0);
                for j in 1..=p {
                    let b = theta[base + q + j];
                    if b != 0.0 && e - j >= d {
                        let src = &dh0[(e - j) * dim..(e - j + 1) * dim];
                        for (r, x) in row0.iter_mut().zip(src) {
                            *r += b * x;
                        }
                    }
                }
                row0[base] += 1.0;
                for i in 1..=q {
                    row0[base + i] += y2[e - i];
                }
                for j in 1..=p {
                    row0[base + q + j] += h[e - j];
                }
                dh0[e * dim..(e + 1) * dim].copy_from_slice(&row0);
                &row0
            } else {
                &row
            };

            let yt2 = self.y[t] * self.y[t];
            let ratio = yt2 / ht;
            objective += ratio + ht.ln();
            kappa += ratio * ratio;
            let w = (1.0 - ratio) / ht;
            for (g, x) in score.iter_mut().zip(&row) {
                *g += w * x;
            }
            let inv2 = 1.0 / (ht * ht);
            for a in 0..dim {
                let xa = info_row[a];
                if xa == 0.0 {
                    continue;
                }
                let xa = xa * inv2;
                for b in a..dim {
                    j_hat[(a, b)] += xa * info_row[b];
                }
            }

            y2.push(yt2);
            h.push(ht);
        }

        let tf = t_len as f64;
        let n_years = tf / s as f64;
        for g in score.iter_mut() {
            *g /= tf;
        }
        for a in 0..dim {
            for b in a..dim {
                let v = j_hat[(a, b)] / n_years;
                j_hat[(a, b)] = v;
                j_hat[(b, a)] = v;
            }
        }
        let dh_mat = store_dh.then(|| DMatrix::from_row_slice(t_len, dim, &dh[d * dim..]));
        Evaluation {
            objective: objective / tf,
            score,
            j_hat,
            kappa_hat: kappa / tf,
            h_tilde: h.split_off(d),
            dh: dh_mat,
        }
    }
}

fn evaluator<'a>(theta: &PGarchSpec, series: &'a Series, init: InitScheme) -> Result<Evaluator<'a>> {
    theta.validate()?;
    if theta.period != series.period {
        return Err(Error::InvalidArgument(format!(
            "spec period {} differs from series period {}",
            theta.period, series.period
        )));
    }
    Evaluator::new(series, theta.order_q, theta.order_p, init)
}

/// Conditional variances `h_tilde_1..h_tilde_T`.
pub fn volatility_filter(theta: &PGarchSpec, series: &Series, init: InitScheme) -> Result<Vec<f64>> {
    let ev = evaluator(theta, series, init)?;
    Ok(ev.filter(&theta.to_theta()))
}

/// `C(theta) = (1/T) sum_t (y_t^2 / h_t + ln h_t)`.
pub fn neg_avg_loglik(theta: &PGarchSpec, series: &Series, init: InitScheme) -> Result<f64> {
    let ev = evaluator(theta, series, init)?;
    Ok(ev.objective(&theta.to_theta()))
}

pub fn score_and_info(theta: &PGarchSpec, series: &Series, init: InitScheme) -> Result<LikelihoodWork> {
    let ev = evaluator(theta, series, init)?;
    let out = ev.evaluate(&theta.to_theta(), true);
    Ok(LikelihoodWork {
        h_tilde: out.h_tilde,
        dh: out.dh.expect("requested"),
        objective: out.objective,
        score: out.score,
        j_hat: out.j_hat,
        kappa_hat: out.kappa_hat,
        n_years: series.len() as f64 / series.period as f64,
    })
}

/// Standardized residuals `y_t / sqrt(h_t)`.
pub fn standardized_residuals(series: &Series, h_tilde: &[f64]) -> Vec<f64> {
    series.values.iter().zip(h_tilde).map(|(y, h)| y / h.sqrt()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaHat {
    pub value: f64,
    /// The sample cannot have unit variance (fourth moment below one).
    pub degenerate: bool,
}

/// Mean of fourth powers of standardized residuals.
pub fn kappa_hat(residuals: &[f64]) -> Result<KappaHat> {
    if residuals.is_empty() {
        return Err(Error::EmptyInput("residuals".into()));
    }
    let value = residuals.iter().map(|r| r.powi(4)).sum::<f64>() / residuals.len() as f64;
    Ok(KappaHat { value, degenerate: value < 1.0 })
}

/// Frobenius mass of the off-diagonal season blocks relative to the whole
/// matrix.
pub fn cross_block_mass(j: &DMatrix<f64>, period: usize) -> f64 {
    let dim = j.nrows();
    let block = dim / period;
    let mut off = 0.0;
    let mut total = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            let x = j[(a, b)] * j[(a, b)];
            total += x;
            if a / block != b / block {
                off += x;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (off / total).sqrt()
    }
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    let ev: DVector<f64> = m.clone().symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}
