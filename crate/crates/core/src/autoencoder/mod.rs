//! Encoder `φ: R^D → R^r` and decoder `ψ: R^r → R^D` built from stacks of
//! affine layers, their Jacobians, and the momentum variants used by the
//! latent Hamiltonian dynamics.
//!
//! Positions go through the full affine maps. Momenta go through the
//! bias-free encoder (an odd map when every activation is odd) and through the
//! decoder with its output bias removed, so that `ψ_p(0) = 0` whenever the
//! hidden biases vanish and kinetic energy stays centred.

mod pca;
mod train;

pub use pca::{pca_decompose, pca_fit, PcaDecomposition};
pub use train::{
    reconstruction_mse, train_autoencoder, Architecture, Optimizer, TrainConfig, TrainedAutoencoder,
};

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 math is only there when std is linked
use num_traits::Float;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative evaluated at the pre-activation value.
    #[inline]
    pub fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => {
                let t = pre.tanh();
                1.0 - t * t
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Tanh => "tanh",
        }
    }
}

/// `x ↦ act(W x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineLayer {
    pub weight: Matrix,
    pub bias: Vector,
    pub activation: Activation,
}

impl AffineLayer {
    pub fn new(weight: Matrix, bias: Vector, activation: Activation) -> Result<Self> {
        check_dim("layer bias", weight.nrows(), bias.len())?;
        if weight.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("layer parameters"));
        }
        Ok(Self {
            weight,
            bias,
            activation,
        })
    }

    pub fn linear(weight: Matrix) -> Self {
        let bias = Vector::zeros(weight.nrows());
        Self {
            weight,
            bias,
            activation: Activation::Identity,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn forward(&self, x: &Vector) -> Vector {
        self.forward_with(x, true)
    }

    fn forward_with(&self, x: &Vector, with_bias: bool) -> Vector {
        let mut pre = &self.weight * x;
        if with_bias {
            pre += &self.bias;
        }
        if self.activation != Activation::Identity {
            pre.apply(|v| *v = self.activation.apply(*v));
        }
        pre
    }

    /// `diag(act'(Wx + b)) W`.
    pub fn jacobian(&self, x: &Vector) -> Matrix {
        let mut j = self.weight.clone();
        if self.activation != Activation::Identity {
            let pre = &self.weight * x + &self.bias;
            for (i, p) in pre.iter().enumerate() {
                let d = self.activation.derivative(*p);
                j.row_mut(i).scale_mut(d);
            }
        }
        j
    }
}

/// Which biases participate in a pass through a layer stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Biases {
    All,
    None,
    AllButOutput,
}

impl Biases {
    fn used(self, layer: usize, n_layers: usize) -> bool {
        match self {
            Biases::All => true,
            Biases::None => false,
            Biases::AllButOutput => layer + 1 < n_layers,
        }
    }
}

fn chain_forward(layers: &[AffineLayer], x: &Vector, biases: Biases) -> Vector {
    let n = layers.len();
    let mut h = x.clone();
    for (k, layer) in layers.iter().enumerate() {
        h = layer.forward_with(&h, biases.used(k, n));
    }
    h
}

fn chain_jacobian(layers: &[AffineLayer], x: &Vector, biases: Biases) -> Matrix {
    let n = layers.len();
    let mut h = x.clone();
    let mut jac: Option<Matrix> = None;
    for (k, layer) in layers.iter().enumerate() {
        let mut pre = &layer.weight * &h;
        if biases.used(k, n) {
            pre += &layer.bias;
        }
        let mut local = match &jac {
            None => layer.weight.clone(),
            Some(j) => &layer.weight * j,
        };
        if layer.activation != Activation::Identity {
            for (i, p) in pre.iter().enumerate() {
                local.row_mut(i).scale_mut(layer.activation.derivative(*p));
            }
            pre.apply(|v| *v = layer.activation.apply(*v));
        }
        jac = Some(local);
        h = pre;
    }
    jac.unwrap_or_else(|| Matrix::identity(x.len(), x.len()))
}

/// Per-coordinate standardisation applied to the training data. It is kept
/// for the record only: the maps below already include it.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub mean: Vector,
    pub scale: Vector,
}

/// The decoder written as `ψ(z) = W_out a(W_h z + b_h) + b_out`, available when
/// the stack has one or two layers and a linear output layer.
#[derive(Debug, Clone)]
pub struct ShallowDecoder<'a> {
    pub hidden: Option<&'a AffineLayer>,
    pub output: &'a AffineLayer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    encoder: Vec<AffineLayer>,
    decoder: Vec<AffineLayer>,
    standardization: Option<Standardization>,
}

impl Autoencoder {
    pub fn new(
        encoder: Vec<AffineLayer>,
        decoder: Vec<AffineLayer>,
        standardization: Option<Standardization>,
    ) -> Result<Self> {
        if encoder.is_empty() || decoder.is_empty() {
            return Err(Error::InvalidConfig(
                "encoder and decoder need at least one layer each".into(),
            ));
        }
        for pair in encoder.windows(2).chain(decoder.windows(2)) {
            check_dim("layer chaining", pair[0].out_dim(), pair[1].in_dim())?;
        }
        let ambient = encoder[0].in_dim();
        let latent = encoder[encoder.len() - 1].out_dim();
        check_dim("decoder input", latent, decoder[0].in_dim())?;
        check_dim("decoder output", ambient, decoder[decoder.len() - 1].out_dim())?;
        if latent == 0 || latent > ambient {
            return Err(Error::InvalidConfig(format!(
                "latent dimension {latent} must be in 1..={ambient}"
            )));
        }
        if let Some(s) = &standardization {
            check_dim("standardization mean", ambient, s.mean.len())?;
            check_dim("standardization scale", ambient, s.scale.len())?;
        }
        Ok(Self {
            encoder,
            decoder,
            standardization,
        })
    }

    /// `φ = ψ = I` on `R^d`.
    pub fn identity(d: usize) -> Self {
        Self {
            encoder: vec![AffineLayer::linear(Matrix::identity(d, d))],
            decoder: vec![AffineLayer::linear(Matrix::identity(d, d))],
            standardization: None,
        }
    }

    /// Single-layer linear encoder and decoder.
    pub fn linear(enc_w: Matrix, enc_b: Vector, dec_w: Matrix, dec_b: Vector) -> Result<Self> {
        Self::new(
            vec![AffineLayer::new(enc_w, enc_b, Activation::Identity)?],
            vec![AffineLayer::new(dec_w, dec_b, Activation::Identity)?],
            None,
        )
    }

    pub fn ambient_dim(&self) -> usize {
        self.encoder[0].in_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.decoder[0].in_dim()
    }

    pub fn encoder_layers(&self) -> &[AffineLayer] {
        &self.encoder
    }

    pub fn decoder_layers(&self) -> &[AffineLayer] {
        &self.decoder
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    /// True when every layer is linear, so both Jacobians are constant.
    pub fn is_linear(&self) -> bool {
        self.encoder
            .iter()
            .chain(self.decoder.iter())
            .all(|l| l.activation == Activation::Identity)
    }

    pub fn shallow_decoder(&self) -> Option<ShallowDecoder<'_>> {
        let output = self.decoder.last()?;
        if output.activation != Activation::Identity {
            return None;
        }
        match self.decoder.len() {
            1 => Some(ShallowDecoder {
                hidden: None,
                output,
            }),
            2 => Some(ShallowDecoder {
                hidden: Some(&self.decoder[0]),
                output,
            }),
            _ => None,
        }
    }

    pub fn encode(&self, x: &Vector) -> Result<Vector> {
        check_dim("encode", self.ambient_dim(), x.len())?;
        Ok(chain_forward(&self.encoder, x, Biases::All))
    }

    pub fn decode(&self, z: &Vector) -> Result<Vector> {
        check_dim("decode", self.latent_dim(), z.len())?;
        Ok(chain_forward(&self.decoder, z, Biases::All))
    }

    pub fn reconstruct(&self, x: &Vector) -> Result<Vector> {
        self.decode(&self.encode(x)?)
    }

    /// `∂φ/∂x`, an `r × D` matrix.
    pub fn encoder_jacobian(&self, x: &Vector) -> Result<Matrix> {
        check_dim("encoder_jacobian", self.ambient_dim(), x.len())?;
        Ok(chain_jacobian(&self.encoder, x, Biases::All))
    }

    /// `∂ψ/∂z`, a `D × r` matrix.
    pub fn decoder_jacobian(&self, z: &Vector) -> Result<Matrix> {
        check_dim("decoder_jacobian", self.latent_dim(), z.len())?;
        Ok(chain_jacobian(&self.decoder, z, Biases::All))
    }

    /// `p_h = φ_p(p_v)`: the encoder with all biases removed.
    pub fn encode_momentum(&self, p: &Vector) -> Result<Vector> {
        check_dim("encode_momentum", self.ambient_dim(), p.len())?;
        Ok(chain_forward(&self.encoder, p, Biases::None))
    }

    /// `p_v = ψ_p(p_h)`: the decoder without its output bias.
    pub fn decode_momentum(&self, p: &Vector) -> Result<Vector> {
        check_dim("decode_momentum", self.latent_dim(), p.len())?;
        Ok(chain_forward(&self.decoder, p, Biases::AllButOutput))
    }

    pub fn momentum_encoder_jacobian(&self, p: &Vector) -> Result<Matrix> {
        check_dim("momentum_encoder_jacobian", self.ambient_dim(), p.len())?;
        Ok(chain_jacobian(&self.encoder, p, Biases::None))
    }

    /// The output bias does not enter the Jacobian, so this equals
    /// [`Autoencoder::decoder_jacobian`].
    pub fn momentum_decoder_jacobian(&self, p: &Vector) -> Result<Matrix> {
        check_dim("momentum_decoder_jacobian", self.latent_dim(), p.len())?;
        Ok(chain_jacobian(&self.decoder, p, Biases::AllButOutput))
    }
}
