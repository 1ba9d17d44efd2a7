mod common;

use common::*;
use latentmc_core::autoencoder::{Activation, AffineLayer, Autoencoder};
use latentmc_core::linalg::sigmoid;
use latentmc_core::samplers::{latent_grad_k, latent_grad_u, LatentKinetic, LatentPotential, LogisticPullback, MassMatrix};
use latentmc_core::targets::{default_sensors, GaussianTarget, GpGridConfig, GpLinearInverseTarget, LogisticRegressionTarget, Target};
use latentmc_core::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POINTS: usize = 20;

fn layer<R: Rng>(out: usize, inp: usize, act: Activation, bias: bool, rng: &mut R) -> AffineLayer {
    let w = random_matrix(out, inp, rng) / (inp as f64).sqrt();
    let b = if bias { random_vector(out, rng) * 0.3 } else { Vector::zeros(out) };
    AffineLayer::new(w, b, act).unwrap()
}

fn random_tanh_ae<R: Rng>(d: usize, h: usize, r: usize, rng: &mut R) -> Autoencoder {
    Autoencoder::new(
        vec![layer(h, d, Activation::Tanh, true, rng), layer(r, h, Activation::Identity, true, rng)],
        vec![layer(h, r, Activation::Tanh, true, rng), layer(d, h, Activation::Identity, true, rng)],
        None,
    )
    .unwrap()
}

fn random_logistic<R: Rng>(n: usize, d: usize, prior_variance: f64, rng: &mut R) -> LogisticRegressionTarget {
    let x = random_matrix(n, d, rng);
    let y = Vector::from_fn(n, |_, _| if rng.random::<bool>() { 1.0 } else { 0.0 });
    LogisticRegressionTarget::new(x, y, prior_variance).unwrap()
}

fn check_target<T: Target>(t: &T, points: impl Iterator<Item = Vector>) {
    for q in points {
        let g = t.gradient(&q).unwrap();
        let fd = fd_gradient(|x| t.potential(x).unwrap(), &q, 1e-5);
        let err = rel_err_vec(&g, &fd);
        assert!(err < 1e-5, "relative error {err:e} at {q}");
        let (u, g2) = t.potential_and_gradient(&q).unwrap();
        assert_eq!(u, t.potential(&q).unwrap());
        assert_eq!(g, g2);
    }
}

#[test]
fn gaussian_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = GaussianTarget::new(Vector::from_vec(vec![0.5, -1.0, 2.0]), reference_sigma()).unwrap();
    let pts: Vec<Vector> = (0..POINTS).map(|_| random_vector(3, &mut rng) * 2.0).collect();
    check_target(&t, pts.into_iter());
}

#[test]
fn gaussian_potential_matches_linear_solve() {
    let t = GaussianTarget::centered(reference_sigma()).unwrap();
    let q = vec![1.0, 1.0, 1.0];
    let x = solve(&to_rows(&reference_sigma()), &q);
    let expected = 0.5 * q.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
    let got = t.potential(&Vector::from_vec(q)).unwrap();
    assert!((got - expected).abs() < 1e-10 * expected.abs(), "{got} vs {expected}");
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (n, d, s2) in [(10, 4, 1.0), (10, 4, 100.0), (60, 15, 100.0)] {
        let t = random_logistic(n, d, s2, &mut rng);
        let pts: Vec<Vector> = (0..POINTS).map(|_| random_vector(d, &mut rng)).collect();
        check_target(&t, pts.into_iter());
    }
}

#[test]
fn logistic_gradient_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = random_logistic(12, 5, 1.0, &mut rng);
    let g0 = t.gradient(&Vector::zeros(5)).unwrap();
    let expected = -t.design().transpose() * t.labels().map(|y| y - 0.5);
    assert!((g0 - expected).amax() < 1e-14);

    let empty = LogisticRegressionTarget::new(Matrix::zeros(0, 3), Vector::zeros(0), 4.0).unwrap();
    let q = Vector::from_vec(vec![1.0, -2.0, 8.0]);
    assert!((empty.gradient(&q).unwrap() - &q / 4.0).amax() < 1e-15);
}

#[test]
fn gp_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = GpGridConfig { grid_size: 5, ..Default::default() };
    let sensors = default_sensors(5).unwrap();
    let (t, _) = GpLinearInverseTarget::synthesize(cfg, sensors, 10.0, &mut rng).unwrap();
    let pts: Vec<Vector> = (0..POINTS).map(|_| t.prior_sample(&mut rng)).collect();
    check_target(&t, pts.into_iter());
}

#[test]
fn latent_potential_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = random_logistic(30, 8, 100.0, &mut rng);
    let g = GaussianTarget::centered(Matrix::identity(8, 8) * 2.0).unwrap();
    for _ in 0..POINTS {
        let ae = random_tanh_ae(8, 6, 3, &mut rng);
        let z = random_vector(3, &mut rng);
        let a = latent_grad_u(&t, &ae, &z).unwrap();
        let fd = fd_gradient(|z| t.potential(&ae.decode(z).unwrap()).unwrap(), &z, 1e-5);
        assert!(rel_err_vec(&a, &fd) < 1e-5, "{a} vs {fd}");
        let a = latent_grad_u(&g, &ae, &z).unwrap();
        let fd = fd_gradient(|z| g.potential(&ae.decode(z).unwrap()).unwrap(), &z, 1e-5);
        assert!(rel_err_vec(&a, &fd) < 1e-5);
    }
}

#[test]
fn latent_gradient_of_identity_is_ambient_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let t = random_logistic(20, 5, 100.0, &mut rng);
    let ae = Autoencoder::identity(5);
    let z = random_vector(5, &mut rng);
    assert_eq!(latent_grad_u(&t, &ae, &z).unwrap(), t.gradient(&z).unwrap());
}

#[test]
fn latent_kinetic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..POINTS {
        let ae = random_tanh_ae(7, 5, 3, &mut rng);
        let m = Vector::from_fn(7, |_, _| rng.random_range(0.5..2.0));
        for mass in [MassMatrix::Identity, MassMatrix::Diagonal(m.clone())] {
            let p = random_vector(3, &mut rng);
            let k = |p: &Vector| {
                let v = ae.decode_momentum(p).unwrap();
                0.5 * v.dot(&mass.inverse_apply(&v))
            };
            let fd = fd_gradient(k, &p, 1e-5);
            let generic = latent_grad_k(&ae, &p, &mass).unwrap();
            let fast = LatentKinetic::new(&ae, mass.clone()).unwrap().gradient(&p).unwrap();
            assert!(rel_err_vec(&generic, &fd) < 1e-5);
            assert!(rel_err_vec(&fast, &generic) < 1e-12);
        }
    }
}

#[test]
fn latent_kinetic_linear_decoder_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let w = random_matrix(5, 2, &mut rng);
    let ae = Autoencoder::linear(w.transpose(), Vector::zeros(2), w.clone(), Vector::zeros(5)).unwrap();
    let m = Vector::from_vec(vec![1.0, 2.0, 0.5, 3.0, 1.5]);
    let minv = Matrix::from_diagonal(&m.map(|v| 1.0 / v));
    let p = random_vector(2, &mut rng);
    let expected = w.transpose() * minv * &w * &p;
    let got = latent_grad_k(&ae, &p, &MassMatrix::Diagonal(m)).unwrap();
    assert!((got - expected).amax() < 1e-12);
    // zero momentum with zero hidden biases maps to zero
    let ae = random_tanh_ae(5, 4, 2, &mut rng);
    let hidden = ae.decoder_layers()[0].clone();
    let ae0 = Autoencoder::new(
        ae.encoder_layers().to_vec(),
        vec![
            AffineLayer::new(hidden.weight, Vector::zeros(4), Activation::Tanh).unwrap(),
            ae.decoder_layers()[1].clone(),
        ],
        None,
    )
    .unwrap();
    assert_eq!(latent_grad_k(&ae0, &Vector::zeros(2), &MassMatrix::Identity).unwrap(), Vector::zeros(2));
}

#[test]
fn jacobians_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let ae = random_tanh_ae(6, 5, 2, &mut rng);
        let x = random_vector(6, &mut rng);
        let z = random_vector(2, &mut rng);
        let pairs = [
            (ae.encoder_jacobian(&x).unwrap(), fd_jacobian(|v| ae.encode(v).unwrap(), &x, 1e-6)),
            (
                ae.momentum_encoder_jacobian(&x).unwrap(),
                fd_jacobian(|v| ae.encode_momentum(v).unwrap(), &x, 1e-6),
            ),
            (ae.decoder_jacobian(&z).unwrap(), fd_jacobian(|v| ae.decode(v).unwrap(), &z, 1e-6)),
            (
                ae.momentum_decoder_jacobian(&z).unwrap(),
                fd_jacobian(|v| ae.decode_momentum(v).unwrap(), &z, 1e-6),
            ),
        ];
        for (analytic, fd) in pairs {
            let err = rel_err(&analytic, &fd);
            assert!(err < 1e-6, "jacobian relative error {err:e}");
        }
    }
}

#[test]
fn jacobian_special_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let d1 = random_matrix(4, 2, &mut rng);
    let d2 = random_matrix(5, 4, &mut rng);
    let enc = random_matrix(2, 5, &mut rng);
    let ae = Autoencoder::new(
        vec![AffineLayer::new(enc.clone(), Vector::zeros(2), Activation::Tanh).unwrap()],
        vec![
            AffineLayer::new(d1.clone(), Vector::zeros(4), Activation::Tanh).unwrap(),
            AffineLayer::new(d2.clone(), Vector::zeros(5), Activation::Identity).unwrap(),
        ],
        None,
    )
    .unwrap();
    assert!((ae.decoder_jacobian(&Vector::zeros(2)).unwrap() - &d2 * &d1).amax() < 1e-14);
    assert!((ae.encoder_jacobian(&Vector::zeros(5)).unwrap() - &enc).amax() < 1e-14);
    assert_eq!(ae.decode(&Vector::zeros(2)).unwrap(), Vector::zeros(5));
}

/// The hand-derived logistic pull-back: with `a = tanh(D₁z + b₁)`,
/// `∇ = D₁ᵀ diag(1 − a²) [D₂ᵀD₂ a − (XD₂)ᵀ (y − σ(XD₂ a))]` for unit prior
/// variance and no output bias.
#[test]
fn fast_logistic_pullback_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (n, d, h, r) = (40, 20, 8, 4);
    let t = random_logistic(n, d, 1.0, &mut rng);
    let d1 = random_matrix(h, r, &mut rng) * 0.5;
    let b1 = random_vector(h, &mut rng) * 0.2;
    let d2 = random_matrix(d, h, &mut rng) * 0.3;
    let ae = Autoencoder::new(
        vec![AffineLayer::new(random_matrix(r, d, &mut rng), Vector::zeros(r), Activation::Identity).unwrap()],
        vec![
            AffineLayer::new(d1.clone(), b1.clone(), Activation::Tanh).unwrap(),
            AffineLayer::new(d2.clone(), Vector::zeros(d), Activation::Identity).unwrap(),
        ],
        None,
    )
    .unwrap();
    let fast = LogisticPullback::new(&t, &ae).unwrap();
    let xd2 = t.design() * &d2;
    let d2td2 = d2.transpose() * &d2;
    for _ in 0..POINTS {
        let z = random_vector(r, &mut rng);
        let a = (&d1 * &z + &b1).map(f64::tanh);
        let resid = t.labels() - (&xd2 * &a).map(sigmoid);
        let inner = &d2td2 * &a - xd2.transpose() * resid;
        let expected = d1.transpose() * inner.component_mul(&a.map(|v| 1.0 - v * v));
        let got = fast.latent_gradient(&z).unwrap();
        assert!((&got - &expected).amax() < 1e-10 * expected.amax().max(1.0));
        let generic = latent_grad_u(&t, &ae, &z).unwrap();
        assert!((&got - &generic).amax() < 1e-10 * generic.amax().max(1.0));
    }
}
