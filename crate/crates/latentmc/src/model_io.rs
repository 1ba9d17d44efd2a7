//! JSON serialisation of autoencoders.
//!
//! Weights are stored row-major. `serde_json` writes the shortest decimal
//! that parses back to the same double, so finite parameters round-trip
//! exactly.

use std::path::Path;

use latentmc_core::autoencoder::{Activation, AffineLayer, Autoencoder, Standardization};
use latentmc_core::{Matrix, Vector};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, json_err, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub rows: usize,
    pub cols: usize,
    pub activation: String,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationRecord {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderRecord {
    pub ambient_dim: usize,
    pub latent_dim: usize,
    pub encoder: Vec<LayerRecord>,
    pub decoder: Vec<LayerRecord>,
    pub standardization: Option<StandardizationRecord>,
}

fn activation_from_name(name: &str) -> Result<Activation> {
    match name {
        "identity" => Ok(Activation::Identity),
        "tanh" => Ok(Activation::Tanh),
        other => Err(Error::Data(format!("unknown activation `{other}`"))),
    }
}

impl From<&AffineLayer> for LayerRecord {
    fn from(l: &AffineLayer) -> Self {
        Self {
            rows: l.weight.nrows(),
            cols: l.weight.ncols(),
            activation: l.activation.name().to_string(),
            weight: l.weight.transpose().iter().copied().collect(),
            bias: l.bias.iter().copied().collect(),
        }
    }
}

impl LayerRecord {
    fn to_layer(&self) -> Result<AffineLayer> {
        if self.weight.len() != self.rows * self.cols {
            return Err(Error::Data(format!(
                "layer declares {}x{} but has {} weights",
                self.rows,
                self.cols,
                self.weight.len()
            )));
        }
        let w = Matrix::from_row_slice(self.rows, self.cols, &self.weight);
        let b = Vector::from_column_slice(&self.bias);
        Ok(AffineLayer::new(w, b, activation_from_name(&self.activation)?)?)
    }
}

impl From<&Autoencoder> for AutoencoderRecord {
    fn from(ae: &Autoencoder) -> Self {
        Self {
            ambient_dim: ae.ambient_dim(),
            latent_dim: ae.latent_dim(),
            encoder: ae.encoder_layers().iter().map(LayerRecord::from).collect(),
            decoder: ae.decoder_layers().iter().map(LayerRecord::from).collect(),
            standardization: ae.standardization().map(|s| StandardizationRecord {
                mean: s.mean.iter().copied().collect(),
                scale: s.scale.iter().copied().collect(),
            }),
        }
    }
}

impl AutoencoderRecord {
    pub fn to_autoencoder(&self) -> Result<Autoencoder> {
        let encoder = self.encoder.iter().map(LayerRecord::to_layer).collect::<Result<Vec<_>>>()?;
        let decoder = self.decoder.iter().map(LayerRecord::to_layer).collect::<Result<Vec<_>>>()?;
        let standardization = self.standardization.as_ref().map(|s| Standardization {
            mean: Vector::from_column_slice(&s.mean),
            scale: Vector::from_column_slice(&s.scale),
        });
        let ae = Autoencoder::new(encoder, decoder, standardization)?;
        if ae.ambient_dim() != self.ambient_dim || ae.latent_dim() != self.latent_dim {
            return Err(Error::Data(format!(
                "layers give a {}→{} autoencoder but the header says {}→{}",
                ae.ambient_dim(),
                ae.latent_dim(),
                self.ambient_dim,
                self.latent_dim
            )));
        }
        Ok(ae)
    }
}

pub fn autoencoder_to_json(ae: &Autoencoder) -> String {
    serde_json::to_string_pretty(&AutoencoderRecord::from(ae)).expect("records always serialise")
}

pub fn autoencoder_from_json(json: &str) -> Result<Autoencoder> {
    let rec: AutoencoderRecord = serde_json::from_str(json).map_err(json_err("<autoencoder json>"))?;
    rec.to_autoencoder()
}

pub fn save_autoencoder(path: impl AsRef<Path>, ae: &Autoencoder) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, autoencoder_to_json(ae)).map_err(io_err(path))
}

pub fn load_autoencoder(path: impl AsRef<Path>) -> Result<Autoencoder> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let rec: AutoencoderRecord = serde_json::from_str(&text).map_err(json_err(path))?;
    rec.to_autoencoder()
}
