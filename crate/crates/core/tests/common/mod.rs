//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the library's linear algebra.
#![allow(dead_code)]

use latentmc_core::{Matrix, Vector};

/// Covariance of the three-dimensional Gaussian illustration.
pub fn reference_sigma() -> Matrix {
    Matrix::from_row_slice(3, 3, &[1.0, 0.95, 0.7, 0.95, 1.0, 0.5, 0.7, 0.5, 1.0])
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(*bi);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvalues are
/// returned in descending order with eigenvectors as the columns of the
/// second value.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let vals = idx.iter().map(|&i| a[i][i]).collect();
    let vecs = (0..n).map(|row| idx.iter().map(|&i| v[row][i]).collect()).collect();
    (vals, vecs)
}

/// Singular values by one-sided (Hestenes) Jacobi rotations.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let a = if m.nrows() >= m.ncols() { to_rows(m) } else { to_rows(&m.transpose()) };
    let rows = a.len();
    let cols = a[0].len();
    let mut u = a;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for r in 0..rows {
                    alpha += u[r][p] * u[r][p];
                    beta += u[r][q] * u[r][q];
                    gamma += u[r][p] * u[r][q];
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let up = u[r][p];
                    let uq = u[r][q];
                    u[r][p] = c * up - s * uq;
                    u[r][q] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..cols).map(|c| (0..rows).map(|r| u[r][c] * u[r][c]).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Central differences with step `h · max(1, |xᵢ|)`.
pub fn fd_gradient(f: impl Fn(&Vector) -> f64, x: &Vector, h: f64) -> Vector {
    Vector::from_iterator(
        x.len(),
        (0..x.len()).map(|i| {
            let step = h * x[i].abs().max(1.0);
            let mut up = x.clone();
            let mut dn = x.clone();
            up[i] += step;
            dn[i] -= step;
            (f(&up) - f(&dn)) / (2.0 * step)
        }),
    )
}

/// Column-wise central-difference Jacobian of `f: R^n → R^m`.
pub fn fd_jacobian(f: impl Fn(&Vector) -> Vector, x: &Vector, h: f64) -> Matrix {
    let m = f(x).len();
    let mut j = Matrix::zeros(m, x.len());
    for i in 0..x.len() {
        let step = h * x[i].abs().max(1.0);
        let mut up = x.clone();
        let mut dn = x.clone();
        up[i] += step;
        dn[i] -= step;
        j.set_column(i, &((f(&up) - f(&dn)) / (2.0 * step)));
    }
    j
}

/// `‖a − b‖ / ‖b‖`, with the denominator floored at `1e-8`.
pub fn rel_err(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm() / b.norm().max(1e-8)
}

pub fn rel_err_vec(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm() / b.norm().max(1e-8)
}

pub fn random_matrix<R: rand::Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    use rand_distr::{Distribution, StandardNormal};
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn random_vector<R: rand::Rng>(n: usize, rng: &mut R) -> Vector {
    use rand_distr::{Distribution, StandardNormal};
    Vector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// Mean and variance of a slice.
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Two-sided one-sample Kolmogorov–Smirnov p-value against `N(0, sd²)`,
/// using the asymptotic Kolmogorov distribution.
pub fn ks_normal_pvalue(samples: &[f64], sd: f64) -> f64 {
    let mut x: Vec<f64> = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, v) in x.iter().enumerate() {
        let f = normal_cdf(v / sd);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..200 {
        let k = k as f64;
        p += 2.0 * (-1f64).powi(k as i32 - 1) * (-2.0 * k * k * lambda * lambda).exp();
    }
    p.clamp(0.0, 1.0)
}

/// Standard normal CDF via the Abramowitz–Stegun erfc approximation
/// (absolute error below 1.5e-7).
pub fn normal_cdf(x: f64) -> f64 {
    let z = x.abs() / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.3275911 * z);
    let poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erfc = poly * (-z * z).exp();
    if x >= 0.0 {
        1.0 - 0.5 * erfc
    } else {
        0.5 * erfc
    }
}
