mod common;

use common::*;
use latentmc_core::diagnostics::{cost_report, ess, predictive_accuracy, ChainTrace};
use latentmc_core::{Matrix, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    let innovation = (1.0 - phi * phi).sqrt();
    (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(&mut rng);
            x = phi * x + innovation * e;
            x
        })
        .collect()
}

#[test]
fn ess_of_iid_series() {
    let x = ar1(0.0, 100_000, 1);
    let ratio = ess(&x).unwrap().ess / x.len() as f64;
    assert!((0.9..=1.1).contains(&ratio), "{ratio}");
}

#[test]
fn ess_of_ar1_matches_closed_form() {
    let x = ar1(0.5, 100_000, 2);
    let ratio = ess(&x).unwrap().ess / x.len() as f64;
    let expected = (1.0 - 0.5) / (1.0 + 0.5);
    assert!((ratio - expected).abs() < 0.1 * expected, "{ratio}");
}

#[test]
fn predictive_accuracy_tie_and_separable() {
    let x = Matrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.5, 0.3, -2.0, 0.0, 0.0]);
    let y = Vector::from_vec(vec![1.0, 0.0, 1.0, 1.0]);
    // q = 0 gives probability 0.5 everywhere and predicts 1
    assert_eq!(predictive_accuracy(&[Vector::zeros(2)], &x, &y).unwrap(), 0.75);

    // separable by the sign of the first feature
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs = random_matrix(100, 3, &mut rng);
    let ys = Vector::from_fn(100, |i, _| if xs[(i, 0)] > 0.0 { 1.0 } else { 0.0 });
    let samples: Vec<Vector> = (0..50)
        .map(|_| Vector::from_vec(vec![20.0, 0.0, 0.0]) + random_vector(3, &mut rng) * 0.01)
        .collect();
    assert_eq!(predictive_accuracy(&samples, &xs, &ys).unwrap(), 1.0);
}

fn trace(wall: f64, grads: u64, seed: u64) -> ChainTrace {
    let x = ar1(0.3, 500, seed);
    ChainTrace {
        dim: 1,
        samples: x.iter().map(|v| Vector::from_element(1, *v)).collect(),
        wall_time: wall,
        n_grad_evals: grads,
        ..Default::default()
    }
}

#[test]
fn cost_report_ratios() {
    let a = trace(2.0, 1000, 4);
    let rep = cost_report(&[&a, &a]).unwrap();
    assert!(rep.wall_time_ratio.iter().all(|r| *r == 1.0));
    assert!(rep.per_grad_ratio.iter().all(|r| *r == 1.0));
    let b = trace(0.7, 300, 5);
    let rep = cost_report(&[&a, &b]).unwrap();
    for m in [&rep.wall_time_ratio, &rep.per_grad_ratio] {
        assert!((m[(0, 1)] * m[(1, 0)] - 1.0).abs() < 1e-12);
    }
    assert!((rep.wall_time_ratio[(0, 1)] - 2.0 / 0.7).abs() < 1e-12);
    assert!(cost_report(&[&a]).is_err());
}
