#![allow(dead_code)]

use pgarch::model::{InnovationDist, PGarchSpec, Series};
use pgarch::simulation::{simulate_path, SimConfig};
use pgarch::{neg_avg_loglik, InitScheme};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// E log eta^2 for a standard Gaussian: -(Euler gamma) - log 2.
pub const GAUSS_E_LOG_ETA2: f64 = -1.270_362_845_461_478_2;

/// Straight-line volatility filter used as an oracle.
pub fn naive_filter(spec: &PGarchSpec, y: &[f64], init: InitScheme) -> Vec<f64> {
    let s = spec.period as i64;
    let t_len = y.len() as i64;
    let season = |t: i64| (((t - 1) % s + s) % s) as usize;
    let presample = |t: i64| -> (f64, f64) {
        match init {
            InitScheme::OmegaInit => {
                let w = spec.omega[season(t)];
                (w, w)
            }
            InitScheme::SampleInit => {
                let mut k = s + t;
                while k < 1 {
                    k += s;
                }
                let v = y[(k - 1) as usize] * y[(k - 1) as usize];
                (v, v)
            }
        }
    };
    let mut h: Vec<f64> = Vec::new();
    for t in 1..=t_len {
        let v = season(t);
        let mut ht = spec.omega[v];
        for i in 1..=spec.order_q as i64 {
            let lag = t - i;
            let y2 = if lag >= 1 { y[(lag - 1) as usize].powi(2) } else { presample(lag).0 };
            ht += spec.alpha[v][(i - 1) as usize] * y2;
        }
        for j in 1..=spec.order_p as i64 {
            let lag = t - j;
            let hl = if lag >= 1 { h[(lag - 1) as usize] } else { presample(lag).1 };
            ht += spec.beta[v][(j - 1) as usize] * hl;
        }
        h.push(ht);
    }
    h
}

pub fn criterion(theta: &[f64], like: &PGarchSpec, series: &Series, init: InitScheme) -> f64 {
    let spec = PGarchSpec::from_theta(like.period, like.order_q, like.order_p, theta);
    neg_avg_loglik(&spec, series, init).unwrap()
}

/// Central differences with step `1e-6 (1 + |theta_k|)`; second-order
/// one-sided differences for coordinates sitting at zero.
pub fn fd_gradient(spec: &PGarchSpec, series: &Series, init: InitScheme) -> Vec<f64> {
    let theta = spec.to_theta();
    (0..theta.len())
        .map(|k| {
            let h = 1e-6 * (1.0 + theta[k].abs());
            let at = |d: f64| {
                let mut x = theta.clone();
                x[k] += d;
                criterion(&x, spec, series, init)
            };
            if theta[k] == 0.0 {
                (-3.0 * at(0.0) + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h)
            } else {
                (at(h) - at(-h)) / (2.0 * h)
            }
        })
        .collect()
}

/// Max over coordinates of `|a - f| / max(|f|, floor)`.
pub fn max_rel_err(analytic: &[f64], fd: &[f64], floor: f64) -> f64 {
    analytic.iter().zip(fd).map(|(a, f)| (a - f).abs() / f.abs().max(floor)).fold(0.0, f64::max)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random stationary first-order spec; `alpha + beta < 0.9` per season.
pub fn random_spec(r: &mut ChaCha8Rng, period: usize, order_q: usize, order_p: usize) -> PGarchSpec {
    let omega: Vec<f64> = (0..period).map(|_| r.random_range(0.2..2.0)).collect();
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for _ in 0..period {
        let a: f64 = r.random_range(0.05..0.4);
        let b: f64 = r.random_range(0.0..(0.85 - a));
        alpha.push(vec![a / order_q.max(1) as f64; order_q]);
        beta.push(vec![b / order_p.max(1) as f64; order_p]);
    }
    PGarchSpec::new(period, order_q, order_p, omega, alpha, beta).unwrap()
}

pub fn simulate(spec: &PGarchSpec, n_years: usize, seed: u64) -> Series {
    simulate_path(spec, &SimConfig::new(spec, n_years, seed, InnovationDist::StandardGaussian)).unwrap()
}

pub fn theta0() -> PGarchSpec {
    PGarchSpec::garch11(&[0.5, 1.0], &[0.2, 0.3], &[0.3, 0.3]).unwrap()
}

pub fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Mean and batch-means standard error for autocorrelated draws.
pub fn batch_mean_se(x: &[f64], n_batches: usize) -> (f64, f64) {
    let size = x.len() / n_batches;
    let means: Vec<f64> =
        (0..n_batches).map(|b| x[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let (m, se) = mean_se(&means);
    (m, se)
}
