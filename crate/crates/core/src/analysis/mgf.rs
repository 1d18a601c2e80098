//! MGF of a quadratic form `X = sum_f X_f^2` in correlated real Gaussians.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid_input, Error, Result};

/// Tolerance used for the symmetry and positive-semidefiniteness checks,
/// relative to the largest diagonal entry.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// Mean vector and covariance of `[X_1, ..., X_f]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFormStats {
    mu: Vec<f64>,
    // row-major f x f
    sigma: Vec<f64>,
}

impl QuadraticFormStats {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let f = mu.len();
        if f == 0 || sigma.len() != f * f {
            return Err(invalid_input(format!(
                "covariance must be {f} x {f}, got {} entries",
                sigma.len()
            )));
        }
        if mu.iter().chain(&sigma).any(|v| !v.is_finite()) {
            return Err(invalid_input("statistics must be finite"));
        }
        let scale = (0..f).map(|i| sigma[i * f + i].abs()).fold(1.0, f64::max);
        for i in 0..f {
            for j in 0..i {
                if (sigma[i * f + j] - sigma[j * f + i]).abs() > PSD_TOLERANCE * scale {
                    return Err(invalid_input("covariance must be symmetric"));
                }
            }
        }
        let stats = Self { mu, sigma };
        let eig = stats.eigen();
        if eig.eigenvalues.iter().any(|&l| l < -PSD_TOLERANCE * scale) {
            return Err(invalid_input("covariance must be positive semi-definite"));
        }
        Ok(stats)
    }

    /// Independent components with the given means and variances.
    pub fn diagonal(mu: Vec<f64>, variances: &[f64]) -> Result<Self> {
        let f = mu.len();
        let mut sigma = vec![0.0; f * f];
        for (i, v) in variances.iter().enumerate().take(f) {
            sigma[i * f + i] = *v;
        }
        Self::new(mu, sigma)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn sigma_at(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.dim() + j]
    }

    fn eigen(&self) -> SymmetricEigen<f64, nalgebra::Dyn> {
        let f = self.dim();
        let m = DMatrix::from_fn(f, f, |i, j| 0.5 * (self.sigma[i * f + j] + self.sigma[j * f + i]));
        SymmetricEigen::new(m)
    }

    /// Diagonalizes the covariance once for repeated MGF evaluation.
    pub fn prepare(&self) -> PreparedQuadraticForm {
        let eig = self.eigen();
        let mu = DVector::from_column_slice(&self.mu);
        let rotated = eig.eigenvectors.transpose() * mu;
        PreparedQuadraticForm {
            eigenvalues: eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect(),
            mean_sq: rotated.iter().map(|v| v * v).collect(),
        }
    }
}

/// A quadratic form in the eigenbasis of its covariance: independent
/// components with variances `lambda_j` and means `mu'_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedQuadraticForm {
    eigenvalues: Vec<f64>,
    mean_sq: Vec<f64>,
}

impl PreparedQuadraticForm {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `E[X]`.
    pub fn mean(&self) -> f64 {
        self.eigenvalues.iter().sum::<f64>() + self.mean_sq.iter().sum::<f64>()
    }

    /// `prod_j (1 - 2 t lambda_j)^{-1/2} exp(t mu'_j^2 / (1 - 2 t lambda_j))`.
    ///
    /// Zero eigenvalues reduce to the deterministic factor `exp(t mu'_j^2)`,
    /// which is how singular covariances are handled.
    pub fn mgf(&self, t: f64) -> Result<f64> {
        let mut log = 0.0;
        for (&l, &m2) in self.eigenvalues.iter().zip(&self.mean_sq) {
            let a = 1.0 - 2.0 * t * l;
            if !(a > 0.0) {
                return Err(Error::Domain(format!(
                    "I - 2 t Sigma is not positive definite at t = {t}"
                )));
            }
            log += -0.5 * a.ln() + t * m2 / a;
        }
        Ok(log.exp())
    }
}

/// `det(I - 2t Sigma)^{-1/2} exp(-1/2 mu^T [I - (I - 2t Sigma)^{-1}] Sigma^{-1} mu)`.
pub fn mgf_quadratic_gaussian(t: f64, stats: &QuadraticFormStats) -> Result<f64> {
    stats.prepare().mgf(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Direct matrix evaluation for invertible covariances.
    fn direct(t: f64, mu: &[f64], sigma: &[f64]) -> f64 {
        let f = mu.len();
        let s = DMatrix::from_row_slice(f, f, sigma);
        let id = DMatrix::<f64>::identity(f, f);
        let a = &id - &s * (2.0 * t);
        let inner = (&id - a.clone().try_inverse().unwrap()) * s.try_inverse().unwrap();
        let m = DVector::from_column_slice(mu);
        let q = (m.transpose() * inner * &m)[(0, 0)];
        a.determinant().powf(-0.5) * (-0.5 * q).exp()
    }

    #[test]
    fn central_chi_square_one() {
        let s = QuadraticFormStats::diagonal(vec![0.0], &[1.0]).unwrap();
        for t in [-3.0, -1.0, -0.1, 0.0, 0.2] {
            let got = mgf_quadratic_gaussian(t, &s).unwrap();
            assert!((got - (1.0 - 2.0 * t).powf(-0.5)).abs() < 1e-14);
        }
        assert!(mgf_quadratic_gaussian(0.5, &s).is_err());
    }

    #[test]
    fn matches_printed_inverse_form() {
        let mu = [1.0, -0.5, 2.0];
        let sigma = [2.0, 0.3, -0.2, 0.3, 1.0, 0.1, -0.2, 0.1, 0.5];
        let s = QuadraticFormStats::new(mu.to_vec(), sigma.to_vec()).unwrap();
        for t in [-2.0, -0.7, -0.05] {
            let got = mgf_quadratic_gaussian(t, &s).unwrap();
            let want = direct(t, &mu, &sigma);
            assert!((got - want).abs() < 1e-12 * want.max(1e-300), "{got} vs {want}");
        }
    }

    #[test]
    fn singular_covariance_uses_deterministic_offset() {
        // X_2 is the constant 3
        let s = QuadraticFormStats::diagonal(vec![0.0, 3.0], &[1.0, 0.0]).unwrap();
        let t: f64 = -0.4;
        let want = (1.0 - 2.0 * t).powf(-0.5) * (9.0 * t).exp();
        assert!((mgf_quadratic_gaussian(t, &s).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_covariances() {
        assert!(QuadraticFormStats::new(vec![0.0, 0.0], vec![1.0, 2.0, 2.0, 1.0]).is_err());
        assert!(QuadraticFormStats::new(vec![0.0, 0.0], vec![1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(QuadraticFormStats::new(vec![0.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn mean_is_trace_plus_norm() {
        let s = QuadraticFormStats::diagonal(vec![1.0, 2.0], &[0.5, 0.25]).unwrap();
        assert!((s.prepare().mean() - 5.75).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn normalized_positive_and_monotone(
            a in proptest::collection::vec(-2.0f64..2.0, 9),
            mu in proptest::collection::vec(-3.0f64..3.0, 3),
        ) {
            // Sigma = A A^T is PSD
            let m = DMatrix::from_row_slice(3, 3, &a);
            let s = &m * m.transpose();
            let sigma: Vec<f64> = (0..9).map(|k| s[(k / 3, k % 3)]).collect();
            let stats = QuadraticFormStats::new(mu, sigma).unwrap();
            let p = stats.prepare();
            prop_assert!((p.mgf(0.0).unwrap() - 1.0).abs() < 1e-15);
            let mut last = 1.0;
            for i in 1..40 {
                let v = p.mgf(-0.1 * i as f64).unwrap();
                prop_assert!(v > 0.0 || v == 0.0 && last < 1e-250);
                prop_assert!(v <= last * (1.0 + 1e-12));
                last = v;
            }
        }
    }
}
