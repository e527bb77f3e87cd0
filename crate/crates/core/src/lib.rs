//! Periodic GARCH models: stationarity diagnostics, simulation and
//! quasi-maximum likelihood estimation.
//!
//! A P-GARCH(p, q) process with period `S` lets every coefficient depend on
//! the season `v = ((t - 1) mod S) + 1`:
//!
//! ```text
//! y_t = sqrt(h_t) eta_t
//! h_t = omega_v + sum_i alpha_{v,i} y_{t-i}^2 + sum_j beta_{v,j} h_{t-j}
//! ```
//!
//! ```
//! use pgarch::{fit, simulate_path, FitOptions, InnovationDist, PGarchSpec, SimConfig};
//!
//! let spec = PGarchSpec::garch11(&[0.5, 1.0], &[0.1, 0.2], &[0.6, 0.5]).unwrap();
//! let cfg = SimConfig::new(&spec, 300, 7, InnovationDist::StandardGaussian);
//! let series = simulate_path(&spec, &cfg).unwrap();
//! let est = fit(&series, 2, 1, 1, &FitOptions::default()).unwrap();
//! assert_eq!(est.theta.len(), 6);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod likelihood;
pub mod linalg;
pub mod mc;
pub mod model;
mod optim;
pub mod qmle;
mod quad;
pub mod rng;
pub mod simulation;
pub mod stationarity;

pub use error::{Error, Result};
pub use likelihood::{
    kappa_hat, neg_avg_loglik, score_and_info, standardized_residuals, volatility_filter, InitScheme,
    KappaHat, LikelihoodWork,
};
pub use mc::{run_consistency, run_normality, MonteCarloReport};
pub use model::{param_names, season_of, InnovationDist, PGarchSpec, ParameterSpace, Series, Violation};
pub use qmle::{asymptotic_covariance, fit, CovarianceEstimate, FitOptions, FitResult};
pub use simulation::{simulate_path, truncated_series_state, SimConfig, TruncatedState};
pub use stationarity::{
    beta_spectral_radius, build_companion, build_stacked_companion, lyapunov_mc, moment_delta_search,
    stationarity_report, CompanionMatrix, Decision, DeltaSearchResult, LyapunovEstimate, Representation,
    StationarityReport,
};
