//! Projected Newton-type minimization on a box.
//!
//! Each iteration splits the coordinates into an active set (at a bound with
//! the gradient pointing outward) and a free set, takes a Newton step on the
//! free set with a caller-supplied positive semidefinite curvature matrix,
//! and backtracks along the projected arc until an Armijo condition holds.

use nalgebra::{DMatrix, DVector};

pub(crate) struct Point {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub curvature: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub projected_gradient_norm: f64,
    pub converged: bool,
    pub n_iters: usize,
}

pub(crate) struct Settings {
    pub max_iters: usize,
    pub grad_tol: f64,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(*lo, *hi);
    }
}

/// `||x - P(x - g)||_inf`
pub(crate) fn projected_gradient_norm(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((xi, gi), (lo, hi))| (xi - (xi - gi).clamp(*lo, *hi)).abs())
        .fold(0.0, f64::max)
}

/// Minimizes over `[lower, upper]`. `full` returns value, gradient and
/// curvature; `value` returns the value alone, or `None` when the point is
/// infeasible (outside an implicit constraint set) or non-finite.
pub(crate) fn minimize<F, V>(
    full: F,
    value: V,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    settings: &Settings,
) -> Option<Outcome>
where
    F: Fn(&[f64]) -> Point,
    V: Fn(&[f64]) -> Option<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    value(&x)?;
    let mut pt = full(&x);
    if !pt.value.is_finite() {
        return None;
    }
    let mut iters = 0;
    loop {
        let pg = projected_gradient_norm(&x, &pt.gradient, lower, upper);
        if pg <= settings.grad_tol || iters >= settings.max_iters {
            return Some(Outcome {
                value: pt.value,
                projected_gradient_norm: pg,
                converged: pg <= settings.grad_tol,
                n_iters: iters,
                x,
            });
        }
        iters += 1;

        let eps = pg.min(1e-6);
        let active: Vec<bool> = (0..n)
            .map(|i| {
                (x[i] <= lower[i] + eps && pt.gradient[i] > 0.0)
                    || (x[i] >= upper[i] - eps && pt.gradient[i] < 0.0)
            })
            .collect();
        let direction = newton_direction(&pt, &active);

        let mut accepted = None;
        let mut step = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial: Vec<f64> = x.iter().zip(&direction).map(|(a, d)| a + step * d).collect();
            project(&mut trial, lower, upper);
            if let Some(f) = value(&trial) {
                let decrease: f64 =
                    pt.gradient.iter().zip(trial.iter().zip(&x)).map(|(g, (t, xi))| g * (t - xi)).sum();
                if f.is_finite() && f <= pt.value + ARMIJO * decrease {
                    accepted = Some(trial);
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some(next) => {
                let moved = next.iter().zip(&x).any(|(a, b)| a != b);
                x = next;
                pt = full(&x);
                if !moved {
                    let pg = projected_gradient_norm(&x, &pt.gradient, lower, upper);
                    return Some(Outcome {
                        value: pt.value,
                        projected_gradient_norm: pg,
                        converged: pg <= settings.grad_tol,
                        n_iters: iters,
                        x,
                    });
                }
            }
            None => {
                let pg = projected_gradient_norm(&x, &pt.gradient, lower, upper);
                return Some(Outcome {
                    value: pt.value,
                    projected_gradient_norm: pg,
                    converged: pg <= settings.grad_tol,
                    n_iters: iters,
                    x,
                });
            }
        }
    }
}

/// Newton step on the free coordinates, scaled gradient step on the active
/// ones. Falls back to a diagonal step when the free block is not positive
/// definite.
fn newton_direction(pt: &Point, active: &[bool]) -> Vec<f64> {
    let n = active.len();
    let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
    let diag = |i: usize| {
        let h = pt.curvature[(i, i)];
        if h > 0.0 {
            h
        } else {
            1.0
        }
    };
    let mut d: Vec<f64> = (0..n).map(|i| -pt.gradient[i] / diag(i)).collect();
    if free.is_empty() {
        return d;
    }
    let m = free.len();
    let mut h = DMatrix::from_fn(m, m, |a, b| pt.curvature[(free[a], free[b])]);
    let scale = (0..m).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    for i in 0..m {
        h[(i, i)] += 1e-10 * scale;
    }
    let g = DVector::from_iterator(m, free.iter().map(|&i| -pt.gradient[i]));
    if let Some(chol) = h.cholesky() {
        let step = chol.solve(&g);
        for (k, &i) in free.iter().enumerate() {
            d[i] = step[k];
        }
    }
    d
}
