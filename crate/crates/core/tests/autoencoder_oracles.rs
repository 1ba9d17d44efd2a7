mod common;

use common::*;
use latentmc_core::autoencoder::{
    pca_decompose, pca_fit, reconstruction_mse, train_autoencoder, Architecture, TrainConfig,
};
use latentmc_core::linalg::{gramian_volume, log_gramian_volume, sample_covariance};
use latentmc_core::{Error, Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` rows from `N(0, Σ)` via the oracle's eigendecomposition.
fn gaussian_rows(sigma: &Matrix, n: usize, seed: u64) -> Matrix {
    let (vals, vecs) = jacobi_eigen(&to_rows(sigma));
    let d = vals.len();
    let root = Matrix::from_fn(d, d, |i, j| vecs[i][j] * vals[j].max(0.0).sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = random_matrix(n, d, &mut rng);
    z * root.transpose()
}

#[test]
fn gramian_matches_svd_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let rows = rng.random_range(1..9);
        let cols = rng.random_range(1..9);
        let j = random_matrix(rows, cols, &mut rng);
        let expected: f64 = singular_values(&j).iter().product();
        let got = gramian_volume(&j).unwrap();
        assert!(((got - expected) / expected).abs() < 1e-10, "{rows}x{cols}: {got} vs {expected}");
    }
}

#[test]
fn gramian_examples() {
    let j = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    assert!((gramian_volume(&j).unwrap() - 1.0).abs() < 1e-15);
    let j = Matrix::from_row_slice(3, 2, &[2.0, 0.0, 0.0, 3.0, 0.0, 0.0]);
    assert!((gramian_volume(&j).unwrap() - 6.0).abs() < 1e-14);
    let j = Matrix::from_row_slice(2, 2, &[1e-200, 0.0, 0.0, 1e-200]);
    assert!(matches!(log_gramian_volume(&j), Err(Error::DegenerateVolume(_))));
}

#[test]
fn pca_matches_eigen_oracle_of_sample_covariance() {
    let x = gaussian_rows(&reference_sigma(), 20_000, 1);
    let pca = pca_decompose(&x).unwrap();
    let cov = sample_covariance(&x).unwrap();
    let (vals, vecs) = jacobi_eigen(&to_rows(&cov));
    for i in 0..3 {
        assert!((pca.eigenvalues[i] - vals[i]).abs() < 1e-10 * vals[0]);
        let dot: f64 = (0..3).map(|k| pca.components[(k, i)] * vecs[k][i]).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-8);
    }
    let expected = (vals[0] + vals[1]) / vals.iter().sum::<f64>();
    assert!((pca.explained_variance_ratio(2) - expected).abs() < 1e-12);

    // population values: the trace of Σ is 3
    let (pop, _) = jacobi_eigen(&to_rows(&reference_sigma()));
    assert!((pop.iter().sum::<f64>() - 3.0).abs() < 1e-12);
    let pop_ratio = (pop[0] + pop[1]) / 3.0;
    assert!((pca.explained_variance_ratio(2) - pop_ratio).abs() < 0.01);
}

#[test]
fn pca_rows_are_orthonormal_and_projection_idempotent() {
    let x = gaussian_rows(&reference_sigma(), 500, 2) + Matrix::from_fn(500, 3, |_, j| j as f64);
    for r in 1..=3 {
        let ae = pca_fit(&x, r).unwrap();
        let p = &ae.encoder_layers()[0].weight;
        assert!((p * p.transpose() - Matrix::identity(r, r)).amax() < 1e-10);
        for i in 0..20 {
            let v = x.row(i).transpose();
            let once = ae.reconstruct(&v).unwrap();
            let twice = ae.reconstruct(&once).unwrap();
            assert!((&twice - &once).amax() < 1e-10);
            if r == 3 {
                assert!((&once - &v).amax() < 1e-10);
            }
        }
    }
}

#[test]
fn pca_on_a_line() {
    let dir = Vector::from_vec(vec![1.0, -2.0, 0.5]);
    let x = Matrix::from_fn(40, 3, |i, j| 3.0 + (i as f64 * 0.37).sin() * dir[j]);
    let ae = pca_fit(&x, 1).unwrap();
    let mse = reconstruction_mse(&ae, &x).unwrap();
    let scale = x.norm_squared() / x.len() as f64;
    assert!(mse / scale < 1e-20, "{mse}");
    assert!(pca_fit(&x, 4).is_err());
}

#[test]
fn trained_linear_autoencoder_learns_subspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let basis = random_matrix(3, 8, &mut rng);
    let offset = random_vector(8, &mut rng);
    let coeffs = random_matrix(400, 3, &mut rng);
    let mut x = coeffs * &basis;
    for mut row in x.row_iter_mut() {
        row += offset.transpose();
    }
    let cfg = TrainConfig {
        epochs: 400,
        batch_size: 32,
        learning_rate: 3e-3,
        seed: 5,
        ..Default::default()
    };
    let trained = train_autoencoder(&x, &cfg, &Architecture::linear(3)).unwrap();
    let mse = reconstruction_mse(&trained.autoencoder, &x).unwrap();
    assert!(mse < 1e-6, "final mse {mse:e}");
    // per-point bound from the mean squared error
    let bound = (8.0 * 1e-6 * 10.0f64).sqrt();
    for row in x.row_iter() {
        let v = row.transpose();
        assert!((trained.autoencoder.reconstruct(&v).unwrap() - &v).norm() <= bound);
    }
}

/// Encodings of a trained linear autoencoder are an invertible linear
/// function of the top-2 PCA scores: regressing one on the other leaves
/// almost no residual.
#[test]
fn trained_encoding_spans_principal_subspace() {
    let x = gaussian_rows(&reference_sigma(), 2000, 3);
    let cfg = TrainConfig {
        epochs: 300,
        batch_size: 64,
        learning_rate: 3e-3,
        seed: 9,
        ..Default::default()
    };
    let trained = train_autoencoder(&x, &cfg, &Architecture::linear(2)).unwrap();
    let (_, vecs) = jacobi_eigen(&to_rows(&sample_covariance(&x).unwrap()));
    let means: Vec<f64> = (0..3).map(|j| x.column(j).mean()).collect();
    let n = x.nrows();
    // design: [1, s1, s2] with PCA scores
    let design = Matrix::from_fn(n, 3, |i, k| {
        if k == 0 {
            1.0
        } else {
            (0..3).map(|j| (x[(i, j)] - means[j]) * vecs[j][k - 1]).sum()
        }
    });
    let xtx = to_rows(&(design.transpose() * &design));
    for c in 0..2 {
        let target: Vector = Vector::from_fn(n, |i, _| trained.autoencoder.encode(&x.row(i).transpose()).unwrap()[c]);
        let xty: Vec<f64> = (design.transpose() * &target).iter().copied().collect();
        let beta = Vector::from_vec(solve(&xtx, &xty));
        let resid = &target - &design * beta;
        let centered = target.add_scalar(-target.mean());
        let r2 = 1.0 - resid.norm_squared() / centered.norm_squared();
        assert!(r2 > 0.999, "R² = {r2}");
    }
}

#[test]
fn training_is_bit_reproducible() {
    let x = gaussian_rows(&reference_sigma(), 300, 4);
    let cfg = TrainConfig {
        epochs: 20,
        batch_size: 16,
        seed: 77,
        ..Default::default()
    };
    let a = train_autoencoder(&x, &cfg, &Architecture::tanh(2, 6)).unwrap();
    let b = train_autoencoder(&x, &cfg, &Architecture::tanh(2, 6)).unwrap();
    assert_eq!(a.autoencoder, b.autoencoder);
    assert_eq!(a.loss_history, b.loss_history);
}
