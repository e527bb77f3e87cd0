//! Dense helpers for the small nonnegative matrices used by the stationarity
//! checks.

use nalgebra::DMatrix;

/// Operator 1-norm: maximum absolute column sum.
pub fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Largest eigenvalue modulus of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    assert!(m.is_square());
    match m.nrows() {
        0 => 0.0,
        1 => m[(0, 0)].abs(),
        2 => {
            let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            let tr = a + d;
            let det = a * d - b * c;
            let disc = tr * tr / 4.0 - det;
            if disc >= 0.0 {
                let r = disc.sqrt();
                (tr / 2.0 + r).abs().max((tr / 2.0 - r).abs())
            } else {
                det.abs().sqrt()
            }
        }
        _ => m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max),
    }
}

/// Running product of matrices kept at unit 1-norm, with the discarded
/// scale accumulated in log space.
#[derive(Debug, Clone)]
pub struct RenormalizedProduct {
    carry: DMatrix<f64>,
    log_scale: f64,
}

impl RenormalizedProduct {
    pub fn identity(n: usize) -> Self {
        Self { carry: DMatrix::identity(n, n), log_scale: 0.0 }
    }

    /// Left-multiplies by `m`, then renormalizes. Returns the log of the
    /// growth factor contributed by this step (`-inf` if the product vanished).
    pub fn push_left(&mut self, m: &DMatrix<f64>) -> f64 {
        self.carry = m * &self.carry;
        self.renormalize()
    }

    /// Left-multiplies by several matrices in order, renormalizing once.
    pub fn push_block<'a, I>(&mut self, ms: I) -> f64
    where
        I: IntoIterator<Item = &'a DMatrix<f64>>,
    {
        for m in ms {
            self.carry = m * &self.carry;
        }
        self.renormalize()
    }

    fn renormalize(&mut self) -> f64 {
        let n = norm1(&self.carry);
        if n > 0.0 && n.is_finite() {
            self.carry /= n;
            let l = n.ln();
            self.log_scale += l;
            l
        } else {
            self.log_scale = f64::NEG_INFINITY;
            f64::NEG_INFINITY
        }
    }

    /// `log` of the 1-norm of the full (unnormalized) product.
    pub fn log_norm(&self) -> f64 {
        self.log_scale
    }

    pub fn carry(&self) -> &DMatrix<f64> {
        &self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_radius_matches_closed_forms() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.3, 1.0, 0.0]);
        let expect = (0.5 + (0.25f64 + 1.2).sqrt()) / 2.0;
        assert!((spectral_radius(&m) - expect).abs() < 1e-12);
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
        assert!((spectral_radius(&rot) - 2.0).abs() < 1e-12);
        let m3 = DMatrix::from_row_slice(3, 3, &[0.2, 0.1, 0.3, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let r = spectral_radius(&m3);
        // Characteristic polynomial x^3 - 0.2x^2 - 0.1x - 0.3 vanishes at r.
        assert!((r.powi(3) - 0.2 * r * r - 0.1 * r - 0.3).abs() < 1e-10);
    }

    #[test]
    fn norm1_is_max_column_sum() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -4.0, 2.0, 1.0]);
        assert_eq!(norm1(&m), 5.0);
    }
}
