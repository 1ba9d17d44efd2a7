//! PCA as the linear, orthonormal special case of an autoencoder.

use super::{AffineLayer, Autoencoder};
use crate::error::{Error, Result};
use crate::linalg::{column_means, sample_covariance, sorted_symmetric_eigen, Matrix, Vector};

/// Eigen-decomposition of a sample covariance.
#[derive(Debug, Clone)]
pub struct PcaDecomposition {
    pub mean: Vector,
    /// Descending.
    pub eigenvalues: Vector,
    /// Eigenvectors as columns, in the order of `eigenvalues`.
    pub components: Matrix,
    n_samples: usize,
}

pub fn pca_decompose(samples: &Matrix) -> Result<PcaDecomposition> {
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pca samples"));
    }
    let cov = sample_covariance(samples)?;
    let (eigenvalues, components) = sorted_symmetric_eigen(&cov)?;
    Ok(PcaDecomposition {
        mean: column_means(samples),
        eigenvalues,
        components,
        n_samples: samples.nrows(),
    })
}

impl PcaDecomposition {
    /// Fraction of total variance carried by the leading `r` components.
    pub fn explained_variance_ratio(&self, r: usize) -> f64 {
        let total: f64 = self.eigenvalues.iter().map(|v| v.max(0.0)).sum();
        let head: f64 = self.eigenvalues.iter().take(r).map(|v| v.max(0.0)).sum();
        if total > 0.0 {
            head / total
        } else {
            1.0
        }
    }

    /// The `r × D` matrix `P_r` of leading eigenvectors, one per row.
    pub fn projection(&self, r: usize) -> Matrix {
        self.components.columns(0, r).transpose()
    }

    /// Encoder `z = P_r (x − μ)`, decoder `x = P_rᵀ z + μ`.
    pub fn autoencoder(&self, r: usize) -> Result<Autoencoder> {
        let d = self.mean.len();
        if r == 0 || r > d || r > self.n_samples {
            return Err(Error::InvalidConfig(format!(
                "PCA rank {r} must be in 1..=min(n = {}, D = {d})",
                self.n_samples
            )));
        }
        let p = self.projection(r);
        let enc_b = -(&p * &self.mean);
        let dec_w = p.transpose();
        Autoencoder::new(
            vec![AffineLayer::new(p, enc_b, super::Activation::Identity)?],
            vec![AffineLayer::new(dec_w, self.mean.clone(), super::Activation::Identity)?],
            None,
        )
    }
}

/// Rank-`r` PCA autoencoder of the rows of `samples`.
pub fn pca_fit(samples: &Matrix, r: usize) -> Result<Autoencoder> {
    pca_decompose(samples)?.autoencoder(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_rank_reconstruction_is_exact() {
        let x = Matrix::from_fn(30, 4, |i, j| ((i * 7 + j * 3) % 11) as f64 - 0.3 * j as f64);
        let ae = pca_fit(&x, 4).unwrap();
        for row in x.row_iter() {
            let v = row.transpose();
            assert!((ae.reconstruct(&v).unwrap() - &v).amax() < 1e-10);
        }
    }

    #[test]
    fn line_data_rank_one() {
        let dir = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        let x = Matrix::from_fn(25, 3, |i, j| (i as f64 * 0.37 - 3.0) * dir[j] + 1.0);
        let ae = pca_fit(&x, 1).unwrap();
        let scale = x.norm_squared() / x.len() as f64;
        let mut mse = 0.0;
        for row in x.row_iter() {
            let v = row.transpose();
            mse += (ae.reconstruct(&v).unwrap() - &v).norm_squared();
        }
        assert!(mse / x.len() as f64 / scale < 1e-20);
    }

    #[test]
    fn rank_bounds() {
        let x = Matrix::from_fn(3, 5, |i, j| (i + j * j) as f64);
        assert!(pca_fit(&x, 4).is_err());
        assert!(pca_fit(&x, 0).is_err());
        assert!(pca_fit(&x, 2).is_ok());
    }
}
