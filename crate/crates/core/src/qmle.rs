//! Quasi-maximum likelihood estimation and the sandwich covariance.
//!
//! The estimator minimizes the conditional criterion over a box. Curvature
//! for the Newton steps is the outer-product information `J_hat / S`, which
//! is the expected Hessian of the per-observation criterion at the truth.

use nalgebra::DMatrix;
use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{kappa_hat, standardized_residuals, Evaluator, InitScheme};
use crate::model::{
    alpha_index, beta_index, omega_index, param_dim, param_names, PGarchSpec, ParameterSpace, Series,
};
use crate::optim::{self, Point, Settings};
use crate::rng::{rng_from, sub_seed};
use crate::stationarity::beta_spectral_radius;

/// Information matrices with a condition number above this are inverted
/// with a pseudo-inverse.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub init: InitScheme,
    /// Box for the parameters; `None` uses [`ParameterSpace::default_for`]
    /// scaled by the mean of `y^2`.
    pub space: Option<ParameterSpace>,
    pub n_starts: usize,
    pub max_iters: usize,
    /// Tolerance on the sup-norm of the projected gradient.
    pub grad_tol: f64,
    /// Reject iterates with `rho(prod beta_v) >= 1 - margin`.
    pub enforce_beta_radius: bool,
    pub margin: f64,
    pub seed: u64,
    /// Fall back to a pseudo-inverse for ill-conditioned information.
    pub allow_pinv: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            init: InitScheme::OmegaInit,
            space: None,
            n_starts: 5,
            max_iters: 200,
            grad_tol: 1e-7,
            enforce_beta_radius: true,
            margin: 1e-3,
            seed: 0,
            allow_pinv: true,
        }
    }
}

impl FitOptions {
    pub fn check(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::InvalidArgument("n_starts must be >= 1".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidArgument("grad_tol must be > 0".into()));
        }
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return Err(Error::InvalidArgument("margin must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub start: Vec<f64>,
    pub start_objective: f64,
    pub objective: f64,
    pub converged: bool,
    pub n_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta_hat: PGarchSpec,
    pub parameter_names: Vec<String>,
    pub theta: Vec<f64>,
    pub objective: f64,
    /// Sup-norm of the criterion gradient at `theta_hat`.
    pub score_norm: f64,
    /// Sup-norm of the projected gradient (the convergence measure).
    pub projected_gradient_norm: f64,
    pub j_hat: Vec<Vec<f64>>,
    pub kappa_hat: f64,
    pub covariance: Vec<Vec<f64>>,
    pub std_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub n_iters: usize,
    /// Coordinates sitting on a bound of the box; normal-theory standard
    /// errors do not apply to them.
    pub boundary_flags: Vec<bool>,
    pub n_years: usize,
    pub j_cross_block_mass: f64,
    pub starts: Vec<StartSummary>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        to_matrix(&self.covariance)
    }

    pub fn j_hat_matrix(&self) -> DMatrix<f64> {
        to_matrix(&self.j_hat)
    }

    pub fn any_boundary(&self) -> bool {
        self.boundary_flags.iter().any(|b| *b)
    }
}

pub(crate) fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub(crate) fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub covariance: DMatrix<f64>,
    pub std_errors: Vec<f64>,
    pub condition_number: f64,
    pub pseudo_inverse: bool,
    pub warnings: Vec<String>,
}

/// `Var(theta_hat) = (kappa - 1) J^{-1} / N` with `J` normalized per year,
/// which equals `(kappa - 1) [sum_t h_t^{-2} dh_t dh_t']^{-1}` over the
/// whole sample.
pub fn asymptotic_covariance(
    j_hat: &DMatrix<f64>,
    kappa_hat: f64,
    n_years: f64,
    allow_pinv: bool,
) -> Result<CovarianceEstimate> {
    if !j_hat.is_square() || j_hat.nrows() == 0 {
        return Err(Error::InvalidArgument("information matrix must be square".into()));
    }
    if !(n_years >= 1.0) {
        return Err(Error::InvalidArgument(format!("N must be >= 1, got {n_years}")));
    }
    if !(kappa_hat > 1.0) {
        return Err(Error::Precondition(format!("fourth-moment estimate {kappa_hat} must exceed 1")));
    }
    let mut warnings = Vec::new();
    if kappa_hat - 1.0 < 1e-8 {
        warnings.push(format!(
            "fourth-moment estimate {kappa_hat} is close to 1; the covariance is nearly degenerate"
        ));
    }
    let dim = j_hat.nrows();
    let sym = (j_hat + j_hat.transpose()) * 0.5;
    // Invert each connected block of the sparsity pattern on its own so
    // that exactly-zero cross blocks stay exactly zero.
    let parts: Vec<(Vec<usize>, nalgebra::SymmetricEigen<f64, nalgebra::Dyn>)> = components(&sym)
        .into_iter()
        .map(|idx| {
            let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| sym[(idx[a], idx[b])]);
            let eig = sub.symmetric_eigen();
            (idx, eig)
        })
        .collect();
    let all = parts.iter().flat_map(|(_, e)| e.eigenvalues.iter().copied());
    let max_ev = all.clone().fold(0.0, f64::max);
    let min_ev = all.fold(f64::INFINITY, f64::min);
    let condition = if min_ev > 0.0 { max_ev / min_ev } else { f64::INFINITY };
    let pseudo = !(condition <= MAX_CONDITION);
    if pseudo {
        if !allow_pinv {
            return Err(Error::SingularInformation { condition });
        }
        warnings.push(format!(
            "information matrix condition number {condition:.3e} exceeds {MAX_CONDITION:e}; using a pseudo-inverse"
        ));
    }
    let cutoff = max_ev / MAX_CONDITION;
    let mut inv = DMatrix::zeros(dim, dim);
    for (idx, eig) in &parts {
        let n = idx.len();
        let mut sub_inv = DMatrix::zeros(n, n);
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if pseudo && lambda <= cutoff {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            sub_inv += (v * v.transpose()) / lambda;
        }
        for a in 0..n {
            for b in 0..n {
                inv[(idx[a], idx[b])] = sub_inv[(a, b)];
            }
        }
    }
    let factor = (kappa_hat - 1.0) / n_years;
    let mut cov = inv * factor;
    for a in 0..dim {
        for b in a + 1..dim {
            let m = 0.5 * (cov[(a, b)] + cov[(b, a)]);
            cov[(a, b)] = m;
            cov[(b, a)] = m;
        }
    }
    let std_errors = (0..dim).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    Ok(CovarianceEstimate {
        covariance: cov,
        std_errors,
        condition_number: condition,
        pseudo_inverse: pseudo,
        warnings,
    })
}

/// Index sets of the connected components of the graph with an edge
/// wherever `m[(a, b)] != 0`.
fn components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![root];
        label[root] = id;
        let mut k = 0;
        while k < members.len() {
            let a = members[k];
            for b in 0..n {
                if label[b] == usize::MAX && (m[(a, b)] != 0.0 || m[(b, a)] != 0.0) {
                    label[b] = id;
                    members.push(b);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Fits a periodic GARCH(p, q) with period `period` to `series`.
pub fn fit(
    series: &Series,
    period: usize,
    order_q: usize,
    order_p: usize,
    opts: &FitOptions,
) -> Result<FitResult> {
    opts.check()?;
    if period == 0 {
        return Err(Error::InvalidArgument("period must be >= 1".into()));
    }
    let t_len = series.len();
    if t_len % period != 0 {
        return Err(Error::DimensionMismatch { len: t_len, period });
    }
    let n_years = t_len / period;
    if n_years < 10 {
        return Err(Error::InsufficientData(format!("need at least 10 years of data, got {n_years}")));
    }
    if let Some(t) = series.values.iter().position(|y| !y.is_finite()) {
        return Err(Error::InvalidArgument(format!("observation {} is not finite", t + 1)));
    }
    if series.values.iter().all(|y| *y == 0.0) {
        return Err(Error::Degenerate("series is identically zero".into()));
    }
    let series = Series { values: series.values.clone(), period, h_true: None };
    let seasonal = series.seasonal_mean_sq();
    let overall = seasonal.iter().sum::<f64>() / period as f64;
    let space = match &opts.space {
        Some(s) => {
            if s.dim() != param_dim(period, order_q, order_p) {
                return Err(Error::InvalidArgument(format!(
                    "parameter space has {} coordinates, model has {}",
                    s.dim(),
                    param_dim(period, order_q, order_p)
                )));
            }
            s.clone()
        }
        None => ParameterSpace::default_for(period, order_q, order_p, overall),
    };
    let ev = Evaluator::new(&series, order_q, order_p, opts.init)?;

    let feasible = |theta: &[f64]| {
        if !opts.enforce_beta_radius || order_p == 0 {
            return true;
        }
        let spec = PGarchSpec::from_theta(period, order_q, order_p, theta);
        beta_spectral_radius(&spec) < 1.0 - opts.margin
    };
    let value = |theta: &[f64]| {
        if !feasible(theta) {
            return None;
        }
        let f = ev.objective(theta);
        f.is_finite().then_some(f)
    };
    let full = |theta: &[f64]| {
        let e = ev.evaluate(theta, false);
        Point { value: e.objective, gradient: e.score, curvature: e.j_hat / period as f64 }
    };
    let settings = Settings { max_iters: opts.max_iters, grad_tol: opts.grad_tol };

    let starts = starting_points(&seasonal, order_q, order_p, &space, opts, &feasible);
    let runs: Vec<Option<(optim::Outcome, StartSummary)>> = starts
        .par_iter()
        .map(|x0| {
            let f0 = value(x0)?;
            let out = optim::minimize(full, value, x0, &space.lower, &space.upper, &settings)?;
            let summary = StartSummary {
                start: x0.clone(),
                start_objective: f0,
                objective: out.value,
                converged: out.converged,
                n_iters: out.n_iters,
            };
            Some((out, summary))
        })
        .collect();

    let summaries: Vec<StartSummary> = runs.iter().flatten().map(|(_, s)| s.clone()).collect();
    let best = runs
        .into_iter()
        .flatten()
        .map(|(o, _)| o)
        .min_by(|a, b| {
            a.value.total_cmp(&b.value).then_with(|| {
                a.x.iter()
                    .zip(&b.x)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        })
        .ok_or(Error::AllStartsFailed { n_starts: starts.len() })?;

    let eval = ev.evaluate(&best.x, false);
    let residuals = standardized_residuals(&series, &eval.h_tilde);
    let kappa = kappa_hat(&residuals)?;
    let mut warnings = Vec::new();
    if kappa.degenerate {
        warnings.push(format!("fourth moment of standardized residuals is {} < 1", kappa.value));
    }
    let dim = best.x.len();
    let (covariance, std_errors) =
        match asymptotic_covariance(&eval.j_hat, kappa.value, n_years as f64, opts.allow_pinv) {
            Ok(c) => {
                warnings.extend(c.warnings);
                (c.covariance, c.std_errors)
            }
            Err(e) => {
                warnings.push(format!("covariance unavailable: {e}"));
                (DMatrix::from_element(dim, dim, f64::NAN), vec![f64::NAN; dim])
            }
        };
    let boundary_flags: Vec<bool> = best
        .x
        .iter()
        .zip(space.lower.iter().zip(&space.upper))
        .map(|(x, (lo, hi))| {
            (x - lo).abs() <= 1e-8 * lo.abs().max(1.0) || (hi - x).abs() <= 1e-8 * hi.abs().max(1.0)
        })
        .collect();
    if !best.converged {
        warnings.push(format!(
            "optimizer stopped after {} iterations with projected gradient {:.3e}",
            best.n_iters, best.projected_gradient_norm
        ));
    }
    let score_norm = eval.score.iter().map(|g| g.abs()).fold(0.0, f64::max);
    let cross = crate::likelihood::cross_block_mass(&eval.j_hat, period);
    Ok(FitResult {
        theta_hat: PGarchSpec::from_theta(period, order_q, order_p, &best.x),
        parameter_names: param_names(period, order_q, order_p),
        theta: best.x,
        objective: eval.objective,
        score_norm,
        projected_gradient_norm: best.projected_gradient_norm,
        j_hat: to_rows(&eval.j_hat),
        kappa_hat: kappa.value,
        covariance: to_rows(&covariance),
        std_errors,
        residuals,
        converged: best.converged,
        n_iters: best.n_iters,
        boundary_flags,
        n_years,
        j_cross_block_mass: cross,
        starts: summaries,
        warnings,
    })
}

/// First start matches moments: `omega_v = m_v (1 - 0.85)` with `alpha`
/// summing to 0.05 and `beta` to 0.8 per season (0.95 intercept share when
/// there are no lags). The rest are drawn log-uniformly around it.
fn starting_points<F: Fn(&[f64]) -> bool>(
    seasonal: &[f64],
    order_q: usize,
    order_p: usize,
    space: &ParameterSpace,
    opts: &FitOptions,
    feasible: &F,
) -> Vec<Vec<f64>> {
    let period = seasonal.len();
    let dim = param_dim(period, order_q, order_p);
    let alpha0 = if order_q > 0 { 0.05 } else { 0.0 };
    let beta0 = if order_p > 0 { 0.8 } else { 0.0 };
    let mut first = vec![0.0; dim];
    for v in 1..=period {
        let m = seasonal[v - 1].max(space.epsilon);
        first[omega_index(v, order_q, order_p)] = m * (1.0 - alpha0 - beta0);
        for i in 1..=order_q {
            first[alpha_index(v, i, order_q, order_p)] = alpha0 / order_q as f64;
        }
        for j in 1..=order_p {
            first[beta_index(v, j, order_q, order_p)] = beta0 / order_p as f64;
        }
    }
    space.project(&mut first);
    make_feasible(&mut first, period, order_q, order_p, feasible);
    let mut out = vec![first];
    for k in 1..opts.n_starts {
        let mut rng = rng_from(sub_seed(opts.seed, &[k as u64]));
        let mut x = vec![0.0; dim];
        for v in 1..=period {
            let m = seasonal[v - 1].max(space.epsilon);
            let u: f64 = rng.random_range(-1.0..1.0);
            x[omega_index(v, order_q, order_p)] = m * 10f64.powf(u);
            for i in 1..=order_q {
                let u: f64 = rng.random_range(-3.0..0.0);
                x[alpha_index(v, i, order_q, order_p)] = 10f64.powf(u) / order_q as f64;
            }
            for j in 1..=order_p {
                let u: f64 = rng.random_range(-3.0..0.0);
                x[beta_index(v, j, order_q, order_p)] = 10f64.powf(u) / order_p as f64;
            }
        }
        space.project(&mut x);
        make_feasible(&mut x, period, order_q, order_p, feasible);
        out.push(x);
    }
    out
}

/// Halves the `beta` coordinates until the point is feasible.
fn make_feasible<F: Fn(&[f64]) -> bool>(
    x: &mut [f64],
    period: usize,
    order_q: usize,
    order_p: usize,
    feasible: &F,
) {
    for _ in 0..60 {
        if feasible(x) {
            return;
        }
        for v in 1..=period {
            for j in 1..=order_p {
                x[beta_index(v, j, order_q, order_p)] *= 0.5;
            }
        }
    }
}
