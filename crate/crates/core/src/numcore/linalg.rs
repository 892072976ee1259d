//! Cholesky factorization with ridge escalation and multivariate-normal helpers.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::rng::RngStream;
use crate::error::{Error, Result};

/// Ridge multipliers tried in order, each scaled by `trace(S)/M`.
pub const RIDGE_SCHEDULE: [f64; 6] = [0.0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2];

const SYMMETRY_TOL: f64 = 1e-10;

/// Lower-triangular factor `L` of `S + ridge·I = L·Lᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CholeskyFactor {
    lower: Matrix,
    log_determinant: f64,
    ridge_applied: f64,
}

impl CholeskyFactor {
    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    /// `ln |S + ridge·I|`.
    pub fn log_determinant(&self) -> f64 {
        self.log_determinant
    }

    pub fn ridge_applied(&self) -> f64 {
        self.ridge_applied
    }

    pub fn dim(&self) -> usize {
        self.lower.n_rows()
    }

    /// `L·Lᵀ`, i.e. the regularized matrix that was factored.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..=j)
                    .map(|k| self.lower[(i, k)] * self.lower[(j, k)])
                    .sum();
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    /// Solves `L z = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut z = vec![0.0; n];
        for i in 0..n {
            let row = self.lower.row(i);
            let s: f64 = row[..i].iter().zip(&z[..i]).map(|(l, v)| l * v).sum();
            z[i] = (b[i] - s) / row[i];
        }
        Ok(z)
    }

    /// Solves `(L Lᵀ) x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let z = self.solve_lower(b)?;
        let n = self.dim();
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|k| self.lower[(k, i)] * x[k]).sum();
            x[i] = (z[i] - s) / self.lower[(i, i)];
        }
        Ok(x)
    }
}

/// Factors `S + r·I` for the first `r` in the escalation schedule that succeeds.
///
/// Candidates are `base_ridge + m·trace(S)/M` for `m` in [`RIDGE_SCHEDULE`].
/// A zero-trace matrix (all variance collapsed) uses unit scale instead.
pub fn cholesky(s: &Matrix, base_ridge: f64) -> Result<CholeskyFactor> {
    if s.n_rows() != s.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: s.n_rows(),
            got: s.n_cols(),
        });
    }
    if !s.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    if !(base_ridge >= 0.0) {
        return Err(Error::InvalidArgument(
            "base ridge must be non-negative".into(),
        ));
    }
    let m = s.n_rows();
    if m == 0 {
        return Err(Error::EmptyData);
    }
    let mean_diag = s.trace() / m as f64;
    let scale = if mean_diag > 0.0 { mean_diag } else { 1.0 };
    for mult in RIDGE_SCHEDULE {
        let ridge = base_ridge + mult * scale;
        if let Some(f) = try_factor(s, ridge, scale) {
            return Ok(f);
        }
    }
    Err(Error::NotPositiveDefinite {
        max_ridge: base_ridge + RIDGE_SCHEDULE[RIDGE_SCHEDULE.len() - 1] * scale,
    })
}

fn try_factor(s: &Matrix, ridge: f64, scale: f64) -> Option<CholeskyFactor> {
    let n = s.n_rows();
    // pivots below this are treated as numerically singular
    let floor = 1e-13 * scale;
    let mut l = Matrix::zeros(n, n);
    let mut log_det = 0.0;
    for j in 0..n {
        let mut d = s[(j, j)] + ridge;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        log_det += 2.0 * ljj.ln();
        for i in (j + 1)..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / ljj;
        }
    }
    Some(CholeskyFactor {
        lower: l,
        log_determinant: log_det,
        ridge_applied: ridge,
    })
}

/// Squared Mahalanobis distance `(x−μ)ᵀ Σ⁻¹ (x−μ)`.
pub fn mahalanobis_sq(x: &[f64], mean: &[f64], chol: &CholeskyFactor) -> Result<f64> {
    if x.len() != mean.len() {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            got: x.len(),
        });
    }
    let diff: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    let z = chol.solve_lower(&diff)?;
    Ok(z.iter().map(|v| v * v).sum())
}

/// Log density of `N(mean, L Lᵀ)` at `x`.
pub fn mvn_logpdf(x: &[f64], mean: &[f64], chol: &CholeskyFactor) -> Result<f64> {
    let d2 = mahalanobis_sq(x, mean, chol)?;
    let m = mean.len() as f64;
    Ok(-0.5 * m * (2.0 * std::f64::consts::PI).ln() - 0.5 * chol.log_determinant() - 0.5 * d2)
}

/// `mean + L·z` for a caller-supplied standard-normal vector `z`.
pub fn mvn_transform(mean: &[f64], chol: &CholeskyFactor, z: &[f64]) -> Result<Vec<f64>> {
    let n = chol.dim();
    if mean.len() != n || z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if mean.len() != n { mean.len() } else { z.len() },
        });
    }
    let l = chol.lower();
    Ok((0..n)
        .map(|i| {
            mean[i]
                + l.row(i)[..=i]
                    .iter()
                    .zip(z)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
        })
        .collect())
}

/// One draw from `N(mean, L Lᵀ)`.
pub fn mvn_sample(mean: &[f64], chol: &CholeskyFactor, rng: &mut RngStream) -> Result<Vec<f64>> {
    let z: Vec<f64> = (0..mean.len())
        .map(|_| StandardNormal.sample(rng))
        .collect();
    mvn_transform(mean, chol, &z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn identity_factor() {
        let f = cholesky(&Matrix::identity(2), 0.0).unwrap();
        assert_eq!(f.lower(), &Matrix::identity(2));
        assert_eq!(f.log_determinant(), 0.0);
        assert_eq!(f.ridge_applied(), 0.0);
    }

    #[test]
    fn diagonal_factor() {
        let f = cholesky(&Matrix::diag(&[4.0, 9.0]), 0.0).unwrap();
        assert_eq!(f.lower(), &Matrix::diag(&[2.0, 3.0]));
        assert!(close(f.log_determinant(), 36f64.ln(), 1e-14));
    }

    #[test]
    fn reconstructs_correlated() {
        let s = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let f = cholesky(&s, 0.0).unwrap();
        let err = f.reconstruct().sub(&s).unwrap().frobenius_norm();
        assert!(err <= 1e-12);
    }

    #[test]
    fn singular_matrix_gets_ridge() {
        let s = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let f = cholesky(&s, 0.0).unwrap();
        assert!(f.ridge_applied() > 0.0);
        assert!(f.ridge_applied() <= 1e-2);
    }

    #[test]
    fn zero_matrix_uses_unit_scale() {
        let f = cholesky(&Matrix::zeros(3, 3), 0.0).unwrap();
        assert!(f.ridge_applied() > 0.0);
    }

    #[test]
    fn indefinite_matrix_fails() {
        let s = Matrix::from_rows(&[[1.0, 0.0], [0.0, -5.0]]).unwrap();
        assert!(matches!(
            cholesky(&s, 0.0),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn asymmetric_rejected() {
        let s = Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&s, 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn mahalanobis_examples() {
        let eye = cholesky(&Matrix::identity(2), 0.0).unwrap();
        assert_eq!(mahalanobis_sq(&[1.0, 2.0], &[1.0, 2.0], &eye).unwrap(), 0.0);
        assert!(close(
            mahalanobis_sq(&[3.0, 4.0], &[0.0, 0.0], &eye).unwrap(),
            25.0,
            1e-12
        ));
        let two = cholesky(&Matrix::diag(&[2.0, 2.0]), 0.0).unwrap();
        assert!(close(
            mahalanobis_sq(&[2.0, 0.0], &[0.0, 0.0], &two).unwrap(),
            2.0,
            1e-12
        ));
        assert!(matches!(
            mahalanobis_sq(&[1.0], &[0.0, 0.0], &eye),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn logpdf_modes() {
        let one = cholesky(&Matrix::identity(1), 0.0).unwrap();
        let want = -0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!(close(
            mvn_logpdf(&[0.0], &[0.0], &one).unwrap(),
            want,
            1e-15
        ));
        let eye = cholesky(&Matrix::identity(2), 0.0).unwrap();
        let want = -(2.0 * std::f64::consts::PI).ln();
        assert!(close(
            mvn_logpdf(&[1.0, 1.0], &[1.0, 1.0], &eye).unwrap(),
            want,
            1e-15
        ));
    }

    #[test]
    fn solve_inverts() {
        let s = Matrix::from_rows(&[[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]]).unwrap();
        let f = cholesky(&s, 0.0).unwrap();
        let b = [1.0, -2.0, 0.5];
        let x = f.solve(&b).unwrap();
        let back = s.mat_vec(&x).unwrap();
        for (u, v) in back.iter().zip(&b) {
            assert!(close(*u, *v, 1e-12));
        }
    }

    #[test]
    fn zero_draw_returns_mean() {
        let s = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let f = cholesky(&s, 0.0).unwrap();
        assert_eq!(
            mvn_transform(&[3.0, -1.0], &f, &[0.0, 0.0]).unwrap(),
            vec![3.0, -1.0]
        );
    }

    #[test]
    fn sampling_is_deterministic() {
        let f = cholesky(&Matrix::identity(3), 0.0).unwrap();
        let mut a = RngStream::new(11, "mvn");
        let mut b = RngStream::new(11, "mvn");
        let mean = [0.0, 1.0, 2.0];
        assert_eq!(
            mvn_sample(&mean, &f, &mut a).unwrap(),
            mvn_sample(&mean, &f, &mut b).unwrap()
        );
    }
}
