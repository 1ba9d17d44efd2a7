//! Small dense linear-algebra helpers shared by the targets and samplers.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
#[allow(unused_imports)] // inherent f64 math is only there when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Smallest Gramian volume accepted before a Jacobian is declared rank-deficient.
pub const MIN_VOLUME: f64 = 1e-300;

/// `ln(1 + exp(x))` without overflow.
#[inline]
pub fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic sigmoid, evaluated on the side that cannot overflow.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Natural log of the Gramian volume of `j`.
///
/// For a tall matrix this is `ln sqrt(det(JᵀJ))`, for a wide one
/// `ln sqrt(det(JJᵀ))`; either way it is the sum of the logs of the non-zero
/// singular values. Computed from the diagonal of the R factor of a QR
/// decomposition, which avoids squaring the condition number.
pub fn log_gramian_volume(j: &Matrix) -> Result<f64> {
    if j.nrows() == 0 || j.ncols() == 0 {
        return Ok(0.0);
    }
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("gramian_volume"));
    }
    let r = if j.nrows() >= j.ncols() {
        j.clone().qr().r()
    } else {
        j.transpose().qr().r()
    };
    let k = r.nrows().min(r.ncols());
    let diag: Vec<f64> = (0..k).map(|i| r[(i, i)].abs()).collect();
    // numerical rank test relative to the largest pivot
    let largest = diag.iter().fold(0.0f64, |a, b| a.max(*b));
    let tol = largest * j.nrows().max(j.ncols()) as f64 * f64::EPSILON;
    let mut log_vol = 0.0;
    for d in diag {
        if d <= tol {
            return Err(Error::DegenerateVolume(0.0));
        }
        log_vol += d.ln();
    }
    if log_vol < MIN_VOLUME.ln() {
        return Err(Error::DegenerateVolume(log_vol.exp()));
    }
    Ok(log_vol)
}

/// Gramian volume `sqrt(det(JᵀJ))` (tall) or `sqrt(det(JJᵀ))` (wide).
pub fn gramian_volume(j: &Matrix) -> Result<f64> {
    log_gramian_volume(j).map(f64::exp)
}

pub fn cholesky(m: &Matrix, what: &str) -> Result<Cholesky<f64, Dyn>> {
    if !m.is_square() {
        return Err(Error::Factorization(format!(
            "{what}: matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    Cholesky::new(m.clone())
        .ok_or_else(|| Error::Factorization(format!("{what}: matrix is not positive-definite")))
}

pub fn is_symmetric(m: &Matrix, tol: f64) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order. Eigenvector columns are sign-normalised so that their
/// largest-magnitude entry is positive.
pub fn sorted_symmetric_eigen(m: &Matrix) -> Result<(Vector, Matrix)> {
    if !m.is_square() {
        return Err(Error::Factorization(format!(
            "eigendecomposition of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigendecomposition input"));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Factorization("symmetric eigendecomposition did not converge".into()))?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = Vector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        let pivot = col.iter().copied().fold(0.0_f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if pivot < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    Ok((values, vectors))
}

/// Column means of an `n × d` sample matrix (one sample per row).
pub fn column_means(samples: &Matrix) -> Vector {
    let n = samples.nrows().max(1) as f64;
    Vector::from_iterator(samples.ncols(), samples.column_iter().map(|c| c.sum() / n))
}

/// Unbiased sample covariance of an `n × d` sample matrix (one sample per row).
pub fn sample_covariance(samples: &Matrix) -> Result<Matrix> {
    let n = samples.nrows();
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "sample covariance needs at least 2 samples, got {n}"
        )));
    }
    let mean = column_means(samples);
    let mut centered = samples.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    Ok(centered.transpose() * &centered / (n as f64 - 1.0))
}

/// Stack equally sized vectors as the rows of a matrix.
pub fn rows_to_matrix(rows: &[Vector]) -> Matrix {
    let d = rows.first().map_or(0, |r| r.len());
    Matrix::from_fn(rows.len(), d, |i, j| rows[i][j])
}

pub(crate) fn all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}
