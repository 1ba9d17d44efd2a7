use crate::error::{check_dim, Error, Result};
use crate::linalg::{cholesky, is_symmetric, Matrix, Vector};
use crate::targets::Target;

/// Multivariate normal `N(mean, Σ)`.
#[derive(Debug, Clone)]
pub struct GaussianTarget {
    mean: Vector,
    covariance: Matrix,
    precision: Matrix,
}

impl GaussianTarget {
    pub fn new(mean: Vector, covariance: Matrix) -> Result<Self> {
        check_dim("gaussian covariance rows", mean.len(), covariance.nrows())?;
        check_dim("gaussian covariance cols", mean.len(), covariance.ncols())?;
        if !is_symmetric(&covariance, 1e-12) {
            return Err(Error::InvalidConfig("covariance is not symmetric".into()));
        }
        let chol = cholesky(&covariance, "gaussian covariance")?;
        let precision = chol.inverse();
        Ok(Self {
            mean,
            covariance,
            precision,
        })
    }

    /// Zero-mean target.
    pub fn centered(covariance: Matrix) -> Result<Self> {
        Self::new(Vector::zeros(covariance.nrows()), covariance)
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn precision(&self) -> &Matrix {
        &self.precision
    }
}

impl Target for GaussianTarget {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn potential(&self, q: &Vector) -> Result<f64> {
        check_dim("gaussian_potential", self.dim(), q.len())?;
        let d = q - &self.mean;
        Ok(0.5 * d.dot(&(&self.precision * &d)))
    }

    fn gradient(&self, q: &Vector) -> Result<Vector> {
        check_dim("gaussian_gradient", self.dim(), q.len())?;
        Ok(&self.precision * (q - &self.mean))
    }

    fn potential_and_gradient(&self, q: &Vector) -> Result<(f64, Vector)> {
        check_dim("gaussian_potential", self.dim(), q.len())?;
        let d = q - &self.mean;
        let g = &self.precision * &d;
        Ok((0.5 * d.dot(&g), g))
    }
}
