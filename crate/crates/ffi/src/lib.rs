//! C ABI over the `pgarch` library.
//!
//! Objects are passed as opaque handles created by `*_new`, `pgarch_simulate`
//! or `pgarch_fit` and released with the matching `*_free`. Every fallible
//! function returns a [`PgarchStatus`]; on failure the message is available
//! from [`pgarch_last_error_message`] on the same thread.
//!
//! Coefficient arrays are season-major: `alpha` holds `period * q` values,
//! `alpha[v * q + i]` being the lag `i + 1` coefficient of season `v + 1`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pgarch::model::{InnovationDist, PGarchSpec, Series};
use pgarch::qmle::{FitOptions, FitResult};
use pgarch::simulation::{simulate_path, SimConfig};
use pgarch::stationarity::{beta_spectral_radius, lyapunov_mc, Decision};
use pgarch::{Error, InitScheme};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgarchStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidSpec = 3,
    Order = 4,
    Degenerate = 5,
    DimensionMismatch = 6,
    InsufficientData = 7,
    EmptyInput = 8,
    SingularInformation = 9,
    AllStartsFailed = 10,
    Precondition = 11,
    ExcessiveExclusions = 12,
    BufferTooSmall = 13,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgarchDistKind {
    Gaussian = 0,
    StudentT = 1,
    Unit = 2,
}

/// Innovation law; `dof` is read only for `StudentT`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PgarchDist {
    pub kind: PgarchDistKind,
    pub dof: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgarchInit {
    Omega = 0,
    Sample = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgarchDecision {
    StrictlyNegative = 0,
    NonNegative = 1,
    Inconclusive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PgarchFitOptions {
    pub init: PgarchInit,
    pub n_starts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PgarchLyapunov {
    pub gamma_hat: f64,
    pub std_error: f64,
    pub decision: PgarchDecision,
}

/// Opaque model specification.
pub struct PgarchSpec(PGarchSpec);

/// Opaque observed or simulated series.
pub struct PgarchSeries(Series);

/// Opaque estimation result.
pub struct PgarchFit(FitResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PgarchStatus {
    match e {
        Error::InvalidSpec(_) => PgarchStatus::InvalidSpec,
        Error::Order(_) => PgarchStatus::Order,
        Error::Degenerate(_) => PgarchStatus::Degenerate,
        Error::DimensionMismatch { .. } => PgarchStatus::DimensionMismatch,
        Error::InsufficientData(_) => PgarchStatus::InsufficientData,
        Error::EmptyInput(_) => PgarchStatus::EmptyInput,
        Error::SingularInformation { .. } => PgarchStatus::SingularInformation,
        Error::AllStartsFailed { .. } => PgarchStatus::AllStartsFailed,
        Error::Precondition(_) => PgarchStatus::Precondition,
        Error::ExcessiveExclusions { .. } => PgarchStatus::ExcessiveExclusions,
        Error::InvalidArgument(_) => PgarchStatus::InvalidArgument,
    }
}

struct Failure(PgarchStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PgarchStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PgarchStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PgarchStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PgarchStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), Failure> {
    if len < src.len() {
        return Err(Failure(
            PgarchStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", src.len()),
        ));
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), out, src.len()) };
    Ok(())
}

fn dist_of(d: PgarchDist) -> Result<InnovationDist, Failure> {
    Ok(match d.kind {
        PgarchDistKind::Gaussian => InnovationDist::StandardGaussian,
        PgarchDistKind::StudentT => InnovationDist::student_t(d.dof)?,
        PgarchDistKind::Unit => InnovationDist::UnitConstant,
    })
}

fn decision_of(d: Decision) -> PgarchDecision {
    match d {
        Decision::StrictlyNegative => PgarchDecision::StrictlyNegative,
        Decision::NonNegative => PgarchDecision::NonNegative,
        Decision::Inconclusive => PgarchDecision::Inconclusive,
    }
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pgarch_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pgarch_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `omega` must point to `period` values, `alpha` to `period * q` and `beta`
/// to `period * p` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pgarch_spec_new(
    period: usize,
    q: usize,
    p: usize,
    omega: *const f64,
    alpha: *const f64,
    beta: *const f64,
    out: *mut *mut PgarchSpec,
) -> PgarchStatus {
    guard(|| {
        if period == 0 {
            return Err(Failure(PgarchStatus::InvalidArgument, "period must be >= 1".into()));
        }
        let omega = unsafe { slice(omega, period, "omega") }?.to_vec();
        let alpha = unsafe { slice(alpha, period * q, "alpha") }?;
        let beta = unsafe { slice(beta, period * p, "beta") }?;
        let alpha = (0..period).map(|v| alpha[v * q..(v + 1) * q].to_vec()).collect();
        let beta = (0..period).map(|v| beta[v * p..(v + 1) * p].to_vec()).collect();
        let spec = PGarchSpec::new(period, q, p, omega, alpha, beta)?;
        unsafe { put(out, Box::into_raw(Box::new(PgarchSpec(spec))), "out") }
    })
}

/// # Safety
/// `spec` must come from [`pgarch_spec_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pgarch_spec_free(spec: *mut PgarchSpec) {
    if !spec.is_null() {
        drop(unsafe { Box::from_raw(spec) });
    }
}

/// Length of the flattened parameter vector, or 0 for a null handle.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgarch_spec_dim(spec: *const PgarchSpec) -> usize {
    unsafe { spec.as_ref() }.map_or(0, |s| s.0.dim())
}

/// # Safety
/// `spec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pgarch_beta_spectral_radius(spec: *const PgarchSpec, out: *mut f64) -> PgarchStatus {
    guard(|| {
        let spec = unsafe { handle(spec, "spec") }?;
        unsafe { put(out, beta_spectral_radius(&spec.0), "out") }
    })
}

/// Monte Carlo estimate of the top Lyapunov exponent over `n_blocks` period
/// blocks.
///
/// # Safety
/// `spec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pgarch_lyapunov(
    spec: *const PgarchSpec,
    dist: PgarchDist,
    n_blocks: usize,
    seed: u64,
    out: *mut PgarchLyapunov,
) -> PgarchStatus {
    guard(|| {
        let spec = unsafe { handle(spec, "spec") }?;
        let est = lyapunov_mc(&spec.0, dist_of(dist)?, n_blocks, seed)?;
        let res = PgarchLyapunov {
            gamma_hat: est.gamma_hat,
            std_error: est.std_error,
            decision: decision_of(est.decision),
        };
        unsafe { put(out, res, "out") }
    })
}

/// Simulates `n_years` years after the default burn-in.
///
/// # Safety
/// `spec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pgarch_simulate(
    spec: *const PgarchSpec,
    dist: PgarchDist,
    n_years: usize,
    seed: u64,
    out: *mut *mut PgarchSeries,
) -> PgarchStatus {
    guard(|| {
        let spec = unsafe { handle(spec, "spec") }?;
        let cfg = SimConfig::new(&spec.0, n_years, seed, dist_of(dist)?);
        let series = simulate_path(&spec.0, &cfg)?;
        unsafe { put(out, Box::into_raw(Box::new(PgarchSeries(series))), "out") }
    })
}

/// Wraps `len` observations whose first value falls in season 1.
///
/// # Safety
/// `values` must point to `len` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn pgarch_series_new(
    values: *const f64,
    len: usize,
    period: usize,
    out: *mut *mut PgarchSeries,
) -> PgarchStatus {
    guard(|| {
        let values = unsafe { slice(values, len, "values") }?.to_vec();
        let series = Series::new(values, period)?;
        unsafe { put(out, Box::into_raw(Box::new(PgarchSeries(series))), "out") }
    })
}

/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgarch_series_len(series: *const PgarchSeries) -> usize {
    unsafe { series.as_ref() }.map_or(0, |s| s.0.len())
}

/// Copies the observations into `out`, which must hold at least
/// `pgarch_series_len` values.
///
/// # Safety
/// `series` must be a live handle and `out` point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn pgarch_series_values(
    series: *const PgarchSeries,
    out: *mut f64,
    len: usize,
) -> PgarchStatus {
    guard(|| {
        let series = unsafe { handle(series, "series") }?;
        unsafe { copy_out(&series.0.values, out, len) }
    })
}

/// Copies the true conditional variances of a simulated series.
///
/// # Safety
/// As [`pgarch_series_values`].
#[no_mangle]
pub unsafe extern "C" fn pgarch_series_volatility(
    series: *const PgarchSeries,
    out: *mut f64,
    len: usize,
) -> PgarchStatus {
    guard(|| {
        let series = unsafe { handle(series, "series") }?;
        let h = series
            .0
            .h_true
            .as_ref()
            .ok_or_else(|| Failure(PgarchStatus::InvalidArgument, "series was not simulated".into()))?;
        unsafe { copy_out(h, out, len) }
    })
}

/// # Safety
/// `series` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pgarch_series_free(series: *mut PgarchSeries) {
    if !series.is_null() {
        drop(unsafe { Box::from_raw(series) });
    }
}

#[no_mangle]
pub extern "C" fn pgarch_fit_options_default() -> PgarchFitOptions {
    let d = FitOptions::default();
    PgarchFitOptions {
        init: PgarchInit::Omega,
        n_starts: d.n_starts,
        max_iters: d.max_iters,
        grad_tol: d.grad_tol,
        seed: d.seed,
    }
}

/// Quasi-maximum likelihood fit of a P-GARCH(p, q) with the series' period.
/// `opts` may be null for defaults.
///
/// # Safety
/// `series` must be a live handle, `opts` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pgarch_fit(
    series: *const PgarchSeries,
    q: usize,
    p: usize,
    opts: *const PgarchFitOptions,
    out: *mut *mut PgarchFit,
) -> PgarchStatus {
    guard(|| {
        let series = unsafe { handle(series, "series") }?;
        let o = unsafe { opts.as_ref() }.copied().unwrap_or_else(|| pgarch_fit_options_default());
        let opts = FitOptions {
            init: match o.init {
                PgarchInit::Omega => InitScheme::OmegaInit,
                PgarchInit::Sample => InitScheme::SampleInit,
            },
            n_starts: o.n_starts,
            max_iters: o.max_iters,
            grad_tol: o.grad_tol,
            seed: o.seed,
            ..FitOptions::default()
        };
        let res = pgarch::qmle::fit(&series.0, series.0.period, q, p, &opts)?;
        unsafe { put(out, Box::into_raw(Box::new(PgarchFit(res))), "out") }
    })
}

/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgarch_fit_dim(fit: *const PgarchFit) -> usize {
    unsafe { fit.as_ref() }.map_or(0, |f| f.0.theta.len())
}

/// # Safety
/// `fit` must be a live handle and `out` point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn pgarch_fit_theta(fit: *const PgarchFit, out: *mut f64, len: usize) -> PgarchStatus {
    guard(|| unsafe { copy_out(&handle(fit, "fit")?.0.theta, out, len) })
}

/// # Safety
/// As [`pgarch_fit_theta`].
#[no_mangle]
pub unsafe extern "C" fn pgarch_fit_std_errors(
    fit: *const PgarchFit,
    out: *mut f64,
    len: usize,
) -> PgarchStatus {
    guard(|| unsafe { copy_out(&handle(fit, "fit")?.0.std_errors, out, len) })
}

/// Row-major `dim x dim` covariance of `theta_hat`.
///
/// # Safety
/// As [`pgarch_fit_theta`].
#[no_mangle]
pub unsafe extern "C" fn pgarch_fit_covariance(
    fit: *const PgarchFit,
    out: *mut f64,
    len: usize,
) -> PgarchStatus {
    guard(|| {
        let flat: Vec<f64> = unsafe { handle(fit, "fit") }?.0.covariance.concat();
        unsafe { copy_out(&flat, out, len) }
    })
}

/// Criterion value at the estimate, or NaN for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgarch_fit_objective(fit: *const PgarchFit) -> f64 {
    unsafe { fit.as_ref() }.map_or(f64::NAN, |f| f.0.objective)
}

/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgarch_fit_kappa_hat(fit: *const PgarchFit) -> f64 {
    unsafe { fit.as_ref() }.map_or(f64::NAN, |f| f.0.kappa_hat)
}

/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgarch_fit_converged(fit: *const PgarchFit) -> bool {
    unsafe { fit.as_ref() }.is_some_and(|f| f.0.converged)
}

/// Full result as JSON; release with [`pgarch_string_free`]. Null on error.
///
/// # Safety
/// `fit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgarch_fit_to_json(fit: *const PgarchFit) -> *mut c_char {
    let mut out = ptr::null_mut();
    guard(|| {
        let fit = unsafe { handle(fit, "fit") }?;
        let json = serde_json::to_string_pretty(&fit.0)
            .map_err(|e| Failure(PgarchStatus::InvalidArgument, e.to_string()))?;
        out = CString::new(json).unwrap_or_default().into_raw();
        Ok(())
    });
    out
}

/// # Safety
/// `fit` must come from [`pgarch_fit`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pgarch_fit_free(fit: *mut PgarchFit) {
    if !fit.is_null() {
        drop(unsafe { Box::from_raw(fit) });
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pgarch_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
