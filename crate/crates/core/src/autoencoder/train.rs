//! Minibatch training of an autoencoder by backpropagation on mean squared
//! reconstruction error.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 math is only there when std is linked
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Activation, AffineLayer, Autoencoder, Standardization};
use crate::error::{Error, Result};
use crate::linalg::{column_means, Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub const fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
    /// Standardise each coordinate before training. The affine
    /// standardisation is folded back into the first encoder layer and the
    /// last decoder layer afterwards.
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 64,
            learning_rate: 1e-3,
            optimizer: Optimizer::adam(),
            seed: 0,
            standardize: true,
        }
    }
}

/// Layer widths between the ambient and latent layers. The encoder runs
/// `D → hidden[0] → … → r` and the decoder mirrors it; hidden layers use
/// `hidden_activation`, the latent and output layers are linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    pub latent_dim: usize,
    pub hidden_widths: Vec<usize>,
    pub hidden_activation: Activation,
}

impl Architecture {
    /// Input, latent and output layers, all linear.
    pub fn linear(latent_dim: usize) -> Self {
        Self {
            latent_dim,
            hidden_widths: Vec::new(),
            hidden_activation: Activation::Identity,
        }
    }

    /// One tanh hidden layer on each side.
    pub fn tanh(latent_dim: usize, hidden: usize) -> Self {
        Self {
            latent_dim,
            hidden_widths: vec![hidden],
            hidden_activation: Activation::Tanh,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedAutoencoder {
    pub autoencoder: Autoencoder,
    /// Full-data reconstruction MSE (standardised scale) after each epoch.
    pub loss_history: Vec<f64>,
}

struct Param {
    value: Matrix,
    m: Matrix,
    v: Matrix,
}

impl Param {
    fn new(value: Matrix) -> Self {
        let (r, c) = value.shape();
        Self {
            value,
            m: Matrix::zeros(r, c),
            v: Matrix::zeros(r, c),
        }
    }

    fn step(&mut self, grad: &Matrix, lr: f64, opt: Optimizer, t: i32) {
        match opt {
            Optimizer::Sgd => self.value -= grad * lr,
            Optimizer::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for i in 0..grad.len() {
                    let g = grad[i];
                    self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
                    self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
                    let m_hat = self.m[i] / c1;
                    let v_hat = self.v[i] / c2;
                    self.value[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
                }
            }
        }
    }
}

struct Net {
    weights: Vec<Param>,
    biases: Vec<Param>,
    activations: Vec<Activation>,
}

impl Net {
    /// Forward pass over the columns of `x`; returns every layer's output.
    fn forward(&self, x: &Matrix) -> Vec<Matrix> {
        let mut outs = Vec::with_capacity(self.weights.len() + 1);
        outs.push(x.clone());
        for ((w, b), act) in self.weights.iter().zip(&self.biases).zip(&self.activations) {
            let prev = outs.last().expect("input pushed above");
            let mut z = &w.value * prev;
            for mut col in z.column_iter_mut() {
                col += b.value.column(0);
            }
            if *act != Activation::Identity {
                z.apply(|v| *v = act.apply(*v));
            }
            outs.push(z);
        }
        outs
    }

    fn mse(&self, x: &Matrix) -> f64 {
        let outs = self.forward(x);
        let out = outs.last().expect("non-empty network");
        (out - x).norm_squared() / x.len() as f64
    }
}

fn validate(samples: &Matrix, cfg: &TrainConfig, arch: &Architecture) -> Result<()> {
    let (n, d) = samples.shape();
    if n == 0 || d == 0 {
        return Err(Error::InvalidConfig("training set is empty".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training samples"));
    }
    if cfg.epochs == 0 {
        return Err(Error::InvalidConfig("epochs must be positive".into()));
    }
    if cfg.batch_size == 0 || cfg.batch_size > n {
        return Err(Error::InvalidConfig(format!(
            "batch size {} must be in 1..={n}",
            cfg.batch_size
        )));
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::InvalidConfig("learning rate must be positive".into()));
    }
    if arch.latent_dim == 0 || arch.latent_dim >= d {
        return Err(Error::InvalidConfig(format!(
            "latent dimension {} must be in 1..{d}",
            arch.latent_dim
        )));
    }
    if arch.hidden_widths.contains(&0) {
        return Err(Error::InvalidConfig("hidden widths must be positive".into()));
    }
    Ok(())
}

fn standardization_of(samples: &Matrix) -> Standardization {
    let n = samples.nrows() as f64;
    let mean = column_means(samples);
    let scale = Vector::from_iterator(
        samples.ncols(),
        samples.column_iter().zip(mean.iter()).map(|(c, m)| {
            let var = c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            let sd = var.sqrt();
            // constant coordinates are left unscaled
            if sd > 1e-12 * m.abs().max(1.0) {
                sd
            } else {
                1.0
            }
        }),
    );
    Standardization { mean, scale }
}

/// Fit an autoencoder to the rows of `samples` (`n × D`).
///
/// Deterministic given `cfg.seed`: initial weights and the minibatch order
/// are drawn from a ChaCha8 stream seeded with it.
pub fn train_autoencoder(
    samples: &Matrix,
    cfg: &TrainConfig,
    arch: &Architecture,
) -> Result<TrainedAutoencoder> {
    validate(samples, cfg, arch)?;
    let (n, d) = samples.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let std = if cfg.standardize {
        standardization_of(samples)
    } else {
        Standardization {
            mean: Vector::zeros(d),
            scale: Vector::from_element(d, 1.0),
        }
    };
    // one sample per column, standardised
    let mut data = samples.transpose();
    for mut col in data.column_iter_mut() {
        for i in 0..d {
            col[i] = (col[i] - std.mean[i]) / std.scale[i];
        }
    }

    let mut widths = Vec::with_capacity(2 * arch.hidden_widths.len() + 3);
    widths.push(d);
    widths.extend(arch.hidden_widths.iter().copied());
    widths.push(arch.latent_dim);
    widths.extend(arch.hidden_widths.iter().rev().copied());
    widths.push(d);
    let n_layers = widths.len() - 1;
    let n_enc = arch.hidden_widths.len() + 1;

    let mut net = Net {
        weights: Vec::with_capacity(n_layers),
        biases: Vec::with_capacity(n_layers),
        activations: Vec::with_capacity(n_layers),
    };
    for k in 0..n_layers {
        let (fan_in, fan_out) = (widths[k], widths[k + 1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w = Matrix::from_fn(fan_out, fan_in, |_, _| rng.random_range(-limit..limit));
        net.weights.push(Param::new(w));
        net.biases.push(Param::new(Matrix::zeros(fan_out, 1)));
        let is_hidden = k + 1 != n_enc && k + 1 != n_layers;
        net.activations.push(if is_hidden {
            arch.hidden_activation
        } else {
            Activation::Identity
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    let mut t = 0i32;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch = data.select_columns(chunk.iter());
            let outs = net.forward(&batch);
            let out = outs.last().expect("non-empty network");
            let mut grad = (out - &batch) * (2.0 / batch.len() as f64);
            t = t.saturating_add(1);
            for k in (0..n_layers).rev() {
                if net.activations[k] == Activation::Tanh {
                    grad.zip_apply(&outs[k + 1], |g, a| *g *= 1.0 - a * a);
                }
                let dw = &grad * outs[k].transpose();
                let db = Matrix::from_iterator(grad.nrows(), 1, grad.row_iter().map(|r| r.sum()));
                let next = if k > 0 {
                    Some(net.weights[k].value.transpose() * &grad)
                } else {
                    None
                };
                net.weights[k].step(&dw, cfg.learning_rate, cfg.optimizer, t);
                net.biases[k].step(&db, cfg.learning_rate, cfg.optimizer, t);
                if let Some(g) = next {
                    grad = g;
                }
            }
        }
        let loss = net.mse(&data);
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch, loss });
        }
        loss_history.push(loss);
    }

    let mut layers: Vec<AffineLayer> = net
        .weights
        .into_iter()
        .zip(net.biases)
        .zip(net.activations)
        .map(|((w, b), act)| AffineLayer {
            weight: w.value,
            bias: b.value.column(0).clone_owned(),
            activation: act,
        })
        .collect();

    // x_std = (x − μ) / s feeds the first layer: W x_std + b = (W / s) x + (b − W (μ / s)).
    let first = &mut layers[0];
    let shift = first.weight.clone() * std.mean.component_div(&std.scale);
    first.bias -= shift;
    for (j, s) in std.scale.iter().enumerate() {
        first.weight.column_mut(j).unscale_mut(*s);
    }
    // the last layer emits x_std: x = s ∘ (W h + b) + μ.
    let last = &mut layers[n_layers - 1];
    for (i, s) in std.scale.iter().enumerate() {
        last.weight.row_mut(i).scale_mut(*s);
        last.bias[i] = last.bias[i] * s + std.mean[i];
    }

    let decoder = layers.split_off(n_enc);
    let autoencoder = Autoencoder::new(
        layers,
        decoder,
        if cfg.standardize { Some(std) } else { None },
    )?;
    Ok(TrainedAutoencoder {
        autoencoder,
        loss_history,
    })
}

/// Mean squared reconstruction error of `ae` over the rows of `samples`.
pub fn reconstruction_mse(ae: &Autoencoder, samples: &Matrix) -> Result<f64> {
    let mut total = 0.0;
    for row in samples.row_iter() {
        let x = row.transpose();
        total += (ae.reconstruct(&x)? - x).norm_squared();
    }
    Ok(total / samples.len().max(1) as f64)
}
