//! Periodic GARCH specification, season indexing, innovation laws and series.
//!
//! Seasons are 1-based: observation `t = 1` belongs to season 1 and
//! `season(t) = ((t - 1) mod S) + 1`. Presample indices `t <= 0` follow the
//! same periodic extension, so `t = 0` is season `S`.
//!
//! The flattened parameter vector is season-major:
//! `(omega_1, alpha_{1,1..q}, beta_{1,1..p}, omega_2, ...)`, giving one
//! contiguous block of `1 + q + p` coordinates per season.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Season of observation `t >= 1` for period `s >= 1`.
pub fn season_of(t: usize, s: usize) -> usize {
    assert!(t >= 1 && s >= 1, "season_of requires t >= 1 and S >= 1");
    (t - 1) % s + 1
}

/// Season of any integer time index, including presample indices `t <= 0`.
pub fn season_of_index(t: i64, s: usize) -> usize {
    assert!(s >= 1);
    ((t - 1).rem_euclid(s as i64) + 1) as usize
}

/// One point of the periodic parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PGarchSpec {
    pub period: usize,
    pub order_q: usize,
    pub order_p: usize,
    /// `omega[v-1]` is the intercept of season `v`.
    pub omega: Vec<f64>,
    /// `alpha[v-1][i-1]` multiplies `y^2_{t-i}` in season `v`.
    pub alpha: Vec<Vec<f64>>,
    /// `beta[v-1][j-1]` multiplies `h_{t-j}` in season `v`.
    pub beta: Vec<Vec<f64>>,
}

/// A single failed constraint on a specification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub coordinate: String,
    pub message: String,
}

impl Violation {
    fn new(coordinate: String, message: String) -> Self {
        Self { coordinate, message }
    }
}

impl PGarchSpec {
    /// Builds a spec and validates it.
    pub fn new(
        period: usize,
        order_q: usize,
        order_p: usize,
        omega: Vec<f64>,
        alpha: Vec<Vec<f64>>,
        beta: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let spec = Self { period, order_q, order_p, omega, alpha, beta };
        spec.validate()?;
        Ok(spec)
    }

    /// First-order spec (`q = 1`, `p = 1`) from per-season scalars.
    pub fn garch11(omega: &[f64], alpha: &[f64], beta: &[f64]) -> Result<Self> {
        Self::new(
            omega.len(),
            1,
            1,
            omega.to_vec(),
            alpha.iter().map(|&a| vec![a]).collect(),
            beta.iter().map(|&b| vec![b]).collect(),
        )
    }

    /// Periodic ARCH(1) spec (`q = 1`, `p = 0`).
    pub fn parch1(omega: &[f64], alpha: &[f64]) -> Result<Self> {
        Self::new(
            omega.len(),
            1,
            0,
            omega.to_vec(),
            alpha.iter().map(|&a| vec![a]).collect(),
            vec![Vec::new(); omega.len()],
        )
    }

    /// Periodic white noise (`q = p = 0`).
    pub fn white_noise(omega: &[f64]) -> Result<Self> {
        Self::new(
            omega.len(),
            0,
            0,
            omega.to_vec(),
            vec![Vec::new(); omega.len()],
            vec![Vec::new(); omega.len()],
        )
    }

    pub fn validate(&self) -> Result<()> {
        let v = validate_spec(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(v))
        }
    }

    /// Number of free coordinates, `S * (1 + q + p)`.
    pub fn dim(&self) -> usize {
        param_dim(self.period, self.order_q, self.order_p)
    }

    pub fn omega_at(&self, t: i64) -> f64 {
        self.omega[season_of_index(t, self.period) - 1]
    }

    /// `alpha_{t,i}` with `i` 1-based.
    pub fn alpha_at(&self, t: i64, i: usize) -> f64 {
        self.alpha[season_of_index(t, self.period) - 1][i - 1]
    }

    /// `beta_{t,j}` with `j` 1-based.
    pub fn beta_at(&self, t: i64, j: usize) -> f64 {
        self.beta[season_of_index(t, self.period) - 1][j - 1]
    }

    /// Season-major flattening of the parameters.
    pub fn to_theta(&self) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.dim());
        for v in 0..self.period {
            theta.push(self.omega[v]);
            theta.extend_from_slice(&self.alpha[v]);
            theta.extend_from_slice(&self.beta[v]);
        }
        theta
    }

    /// Inverse of [`PGarchSpec::to_theta`]. Does not validate.
    pub fn from_theta(period: usize, order_q: usize, order_p: usize, theta: &[f64]) -> Self {
        assert_eq!(theta.len(), param_dim(period, order_q, order_p));
        let block = 1 + order_q + order_p;
        let mut omega = Vec::with_capacity(period);
        let mut alpha = Vec::with_capacity(period);
        let mut beta = Vec::with_capacity(period);
        for chunk in theta.chunks(block) {
            omega.push(chunk[0]);
            alpha.push(chunk[1..1 + order_q].to_vec());
            beta.push(chunk[1 + order_q..].to_vec());
        }
        Self { period, order_q, order_p, omega, alpha, beta }
    }

    pub fn param_names(&self) -> Vec<String> {
        param_names(self.period, self.order_q, self.order_p)
    }
}

pub fn param_dim(period: usize, order_q: usize, order_p: usize) -> usize {
    period * (1 + order_q + order_p)
}

/// Flat index of `omega_v` (`v` 1-based).
pub fn omega_index(v: usize, order_q: usize, order_p: usize) -> usize {
    (v - 1) * (1 + order_q + order_p)
}

/// Flat index of `alpha_{v,i}` (both 1-based).
pub fn alpha_index(v: usize, i: usize, order_q: usize, order_p: usize) -> usize {
    omega_index(v, order_q, order_p) + i
}

/// Flat index of `beta_{v,j}` (both 1-based).
pub fn beta_index(v: usize, j: usize, order_q: usize, order_p: usize) -> usize {
    omega_index(v, order_q, order_p) + order_q + j
}

/// Coordinate names such as `omega[2]`, `alpha[1][1]`, `beta[2][1]`.
pub fn param_names(period: usize, order_q: usize, order_p: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(param_dim(period, order_q, order_p));
    for v in 1..=period {
        names.push(format!("omega[{v}]"));
        names.extend((1..=order_q).map(|i| format!("alpha[{v}][{i}]")));
        names.extend((1..=order_p).map(|j| format!("beta[{v}][{j}]")));
    }
    names
}

/// Checks every sign and shape constraint. Violations are data, not errors.
pub fn validate_spec(spec: &PGarchSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if spec.period == 0 {
        out.push(Violation::new("period".into(), "period must be >= 1".into()));
        return out;
    }
    let s = spec.period;
    if spec.omega.len() != s {
        out.push(Violation::new(
            "omega".into(),
            format!("omega has {} entries, expected {s}", spec.omega.len()),
        ));
    }
    if spec.alpha.len() != s {
        out.push(Violation::new(
            "alpha".into(),
            format!("alpha has {} rows, expected {s}", spec.alpha.len()),
        ));
    }
    if spec.beta.len() != s {
        out.push(Violation::new("beta".into(), format!("beta has {} rows, expected {s}", spec.beta.len())));
    }
    for (v, w) in spec.omega.iter().enumerate() {
        if !(w.is_finite() && *w > 0.0) {
            out.push(Violation::new(format!("omega[{}]", v + 1), format!("omega[{}] must be > 0", v + 1)));
        }
    }
    for (v, row) in spec.alpha.iter().enumerate() {
        if row.len() != spec.order_q {
            out.push(Violation::new(
                format!("alpha[{}]", v + 1),
                format!("alpha[{}] has {} entries, expected q = {}", v + 1, row.len(), spec.order_q),
            ));
        }
        for (i, a) in row.iter().enumerate() {
            if !(a.is_finite() && *a >= 0.0) {
                out.push(Violation::new(
                    format!("alpha[{}][{}]", v + 1, i + 1),
                    format!("alpha[{}][{}] must be ≥ 0", v + 1, i + 1),
                ));
            }
        }
    }
    for (v, row) in spec.beta.iter().enumerate() {
        if row.len() != spec.order_p {
            out.push(Violation::new(
                format!("beta[{}]", v + 1),
                format!("beta[{}] has {} entries, expected p = {}", v + 1, row.len(), spec.order_p),
            ));
        }
        for (j, b) in row.iter().enumerate() {
            if !(b.is_finite() && *b >= 0.0) {
                out.push(Violation::new(
                    format!("beta[{}][{}]", v + 1, j + 1),
                    format!("beta[{}][{}] must be ≥ 0", v + 1, j + 1),
                ));
            }
        }
    }
    out
}

/// Box constraints on the flattened parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub epsilon: f64,
}

impl ParameterSpace {
    pub fn new(
        period: usize,
        order_q: usize,
        order_p: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        let dim = param_dim(period, order_q, order_p);
        if lower.len() != dim || upper.len() != dim {
            return Err(Error::InvalidArgument(format!("parameter space bounds must have {dim} entries")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be > 0".into()));
        }
        let names = param_names(period, order_q, order_p);
        for k in 0..dim {
            if !(lower[k] <= upper[k]) {
                return Err(Error::InvalidArgument(format!(
                    "lower bound exceeds upper bound for {}",
                    names[k]
                )));
            }
        }
        for v in 1..=period {
            let k = omega_index(v, order_q, order_p);
            if lower[k] < epsilon {
                return Err(Error::InvalidArgument(format!("lower bound of omega[{v}] must be >= epsilon")));
            }
        }
        for k in 0..dim {
            if lower[k] < 0.0 {
                return Err(Error::InvalidArgument(format!("lower bound of {} must be >= 0", names[k])));
            }
        }
        Ok(Self { lower, upper, epsilon })
    }

    /// Default fitting box: `omega in [1e-6, 1e6 * scale]`, lag coefficients in `[0, 10]`.
    pub fn default_for(period: usize, order_q: usize, order_p: usize, scale: f64) -> Self {
        let per = |w_lo: f64, w_hi: f64, lag_lo: f64, lag_hi: f64| {
            let mut lo = Vec::new();
            let mut hi = Vec::new();
            for _ in 0..period {
                lo.push(w_lo);
                hi.push(w_hi);
                for _ in 0..order_q + order_p {
                    lo.push(lag_lo);
                    hi.push(lag_hi);
                }
            }
            (lo, hi)
        };
        let eps = 1e-6;
        let (lower, upper) = per(eps, 1e6 * scale.max(eps), 0.0, 10.0);
        Self { lower, upper, epsilon: eps }
    }

    /// `([eps, 1/eps] x [0, 1/eps] x [0, 1 - eps])^S` for first-order P-GARCH.
    pub fn compact_garch11(period: usize, epsilon: f64) -> Result<Self> {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for _ in 0..period {
            lower.extend([epsilon, 0.0, 0.0]);
            upper.extend([1.0 / epsilon, 1.0 / epsilon, 1.0 - epsilon]);
        }
        Self::new(period, 1, 1, lower, upper, epsilon)
    }

    /// `([eps, 1/eps] x [0, a^{1/S} - 1])^S` for periodic ARCH(1), where `a`
    /// is the strict stationarity bound `exp(-E log eta^2)`.
    pub fn compact_parch1(period: usize, epsilon: f64, bound_a: f64) -> Result<Self> {
        let alpha_hi = bound_a.powf(1.0 / period as f64) - 1.0;
        if !(alpha_hi > 0.0) {
            return Err(Error::InvalidArgument(format!("bound a = {bound_a} leaves an empty alpha range")));
        }
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for _ in 0..period {
            lower.extend([epsilon, 0.0]);
            upper.extend([1.0 / epsilon, alpha_hi]);
        }
        Self::new(period, 1, 0, lower, upper, epsilon)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    pub fn project(&self, theta: &mut [f64]) {
        for (x, (lo, hi)) in theta.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *x = x.clamp(*lo, *hi);
        }
    }

    /// Same box with every intercept bound multiplied by `factor`.
    pub fn scale_omega(&self, period: usize, order_q: usize, order_p: usize, factor: f64) -> Self {
        let mut out = self.clone();
        for v in 1..=period {
            let k = omega_index(v, order_q, order_p);
            out.lower[k] *= factor;
            out.upper[k] *= factor;
        }
        out.epsilon = out.epsilon.min(out.lower[0]);
        out
    }
}

/// Law of the i.i.d. innovations, normalized to mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationDist {
    StandardGaussian,
    StandardizedStudentT {
        dof: f64,
    },
    /// `eta^2 = 1` always (random sign). Degenerate; for deterministic tests only.
    UnitConstant,
}

impl InnovationDist {
    pub fn student_t(dof: f64) -> Result<Self> {
        if !(dof > 2.0) {
            return Err(Error::InvalidArgument(format!(
                "Student-t degrees of freedom must exceed 2, got {dof}"
            )));
        }
        Ok(Self::StandardizedStudentT { dof })
    }

    pub fn check(&self) -> Result<()> {
        match *self {
            Self::StandardizedStudentT { dof } if !(dof > 2.0) => {
                Err(Error::InvalidArgument(format!("Student-t degrees of freedom must exceed 2, got {dof}")))
            }
            _ => Ok(()),
        }
    }

    /// Rejects laws with degenerate `eta^2` (identifiability needs a
    /// non-degenerate squared innovation).
    pub fn require_nondegenerate(&self) -> Result<()> {
        self.check()?;
        if matches!(self, Self::UnitConstant) {
            return Err(Error::Precondition(
                "innovation law has degenerate eta^2; estimation requires non-degenerate innovations".into(),
            ));
        }
        Ok(())
    }

    /// `E(eta^4)`; infinite when the Student-t has `dof <= 4`.
    pub fn fourth_moment(&self) -> f64 {
        match *self {
            Self::StandardGaussian => 3.0,
            Self::StandardizedStudentT { dof } => {
                if dof > 4.0 {
                    3.0 * (dof - 2.0) / (dof - 4.0)
                } else {
                    f64::INFINITY
                }
            }
            Self::UnitConstant => 1.0,
        }
    }

    /// Warning text when the law makes the sandwich covariance unreliable.
    pub fn moment_warning(&self) -> Option<String> {
        match *self {
            Self::StandardizedStudentT { dof } if dof <= 4.0 => Some(format!(
                "Student-t with {dof} degrees of freedom has infinite fourth moment; \
                 asymptotic covariance does not exist"
            )),
            Self::StandardizedStudentT { dof } if dof <= 8.0 => Some(format!(
                "Student-t with {dof} degrees of freedom has infinite eighth moment; \
                 the fourth-moment estimate converges slowly"
            )),
            _ => None,
        }
    }

    pub fn sampler(&self) -> Result<InnovationSampler> {
        self.check()?;
        Ok(match *self {
            Self::StandardGaussian => InnovationSampler::Gaussian,
            Self::StandardizedStudentT { dof } => InnovationSampler::StudentT {
                dist: StudentT::new(dof).map_err(|e| Error::InvalidArgument(format!("Student-t: {e}")))?,
                scale: ((dof - 2.0) / dof).sqrt(),
            },
            Self::UnitConstant => InnovationSampler::Unit,
        })
    }
}

/// Prepared sampler for an [`InnovationDist`].
#[derive(Debug, Clone)]
pub enum InnovationSampler {
    Gaussian,
    StudentT { dist: StudentT<f64>, scale: f64 },
    Unit,
}

impl InnovationSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian => StandardNormal.sample(rng),
            Self::StudentT { dist, scale } => scale * dist.sample(rng),
            Self::Unit => {
                if rng.next_u32() & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// An observed or simulated path. Observation 1 is season 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub values: Vec<f64>,
    pub period: usize,
    /// True conditional variances, when the series was simulated.
    pub h_true: Option<Vec<f64>>,
}

impl Series {
    pub fn new(values: Vec<f64>, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidArgument("period must be >= 1".into()));
        }
        Ok(Self { values, period, h_true: None })
    }

    pub fn with_volatility(values: Vec<f64>, period: usize, h_true: Vec<f64>) -> Result<Self> {
        let mut s = Self::new(values, period)?;
        if h_true.len() != s.values.len() {
            return Err(Error::InvalidArgument(format!(
                "h_true has {} entries but the series has {}",
                h_true.len(),
                s.values.len()
            )));
        }
        if let Some(t) = h_true.iter().position(|h| !(*h > 0.0)) {
            return Err(Error::InvalidArgument(format!("h_true[{}] must be > 0", t + 1)));
        }
        s.h_true = Some(h_true);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn season(&self, t: usize) -> usize {
        season_of(t, self.period)
    }

    /// Number of complete years `N`, erroring when `T` is not `N * S`.
    pub fn n_years(&self) -> Result<usize> {
        if self.values.len() % self.period != 0 {
            return Err(Error::DimensionMismatch { len: self.values.len(), period: self.period });
        }
        Ok(self.values.len() / self.period)
    }

    /// Per-season mean of `y^2`.
    pub fn seasonal_mean_sq(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.period];
        let mut counts = vec![0usize; self.period];
        for (t, y) in self.values.iter().enumerate() {
            let v = t % self.period;
            sums[v] += y * y;
            counts[v] += 1;
        }
        sums.iter().zip(&counts).map(|(s, &c)| if c == 0 { f64::NAN } else { s / c as f64 }).collect()
    }
}
