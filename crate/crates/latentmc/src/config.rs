//! Experiment configuration, read from JSON. Every field has a default, so
//! `{"experiment": "logistic_synthetic"}` reproduces the desk-scale study.

use std::fmt;
use std::path::{Path, PathBuf};

use latentmc_core::autoencoder::{Activation, Architecture, Optimizer, TrainConfig};
use latentmc_core::samplers::{ChainSettings, MassMatrix, SamplerConfig};
use latentmc_core::targets::GpGridConfig;
use latentmc_core::{Matrix, Vector};
use serde::{Deserialize, Serialize};

use crate::data::SynthSpec;
use crate::error::{io_err, json_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Gaussian3d,
    LogisticSynthetic,
    LogisticCsv,
    GpInverse,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian3d => "gaussian3d",
            Self::LogisticSynthetic => "logistic_synthetic",
            Self::LogisticCsv => "logistic_csv",
            Self::GpInverse => "gp_inverse",
        }
    }

    pub fn default_latent_dim(self) -> usize {
        match self {
            Experiment::Gaussian3d => 2,
            Experiment::LogisticSynthetic | Experiment::LogisticCsv => 50,
            Experiment::GpInverse => 25,
        }
    }

    pub fn default_methods(self) -> Vec<Method> {
        match self {
            Experiment::GpInverse => vec![Method::Pcn, Method::AePcn],
            _ => vec![Method::Hmc, Method::AeHmc],
        }
    }

    /// The sampler whose warm-up draws train the autoencoder.
    pub fn baseline(self) -> Method {
        match self {
            Experiment::GpInverse => Method::Pcn,
            _ => Method::Hmc,
        }
    }

    fn default_step_size(self) -> f64 {
        match self {
            Experiment::Gaussian3d => 0.2,
            Experiment::LogisticSynthetic | Experiment::LogisticCsv => 0.01,
            Experiment::GpInverse => 0.1,
        }
    }

    /// The synthetic logistic posterior is wide (near-separable data under a
    /// N(0, 10²) prior), so it needs longer trajectories.
    fn default_n_leapfrog(self) -> usize {
        match self {
            Experiment::LogisticSynthetic | Experiment::LogisticCsv => 50,
            _ => 10,
        }
    }

    fn is_logistic(self) -> bool {
        matches!(self, Experiment::LogisticSynthetic | Experiment::LogisticCsv)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Hmc,
    AeHmc,
    Rwm,
    Pcn,
    AePcn,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Hmc => "hmc",
            Method::AeHmc => "ae-hmc",
            Method::Rwm => "rwm",
            Method::Pcn => "pcn",
            Method::AePcn => "ae-pcn",
        }
    }

    pub fn is_autoencoded(self) -> bool {
        matches!(self, Method::AeHmc | Method::AePcn)
    }

    fn needs_gaussian_prior(self) -> bool {
        matches!(self, Method::Pcn | Method::AePcn)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoencoderKind {
    Pca,
    Linear,
    Tanh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutoencoderSettings {
    pub kind: AutoencoderKind,
    pub hidden_width: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// `"adam"` or `"sgd"`.
    pub optimizer: String,
    pub standardize: bool,
}

impl Default for AutoencoderSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            kind: AutoencoderKind::Pca,
            hidden_width: 100,
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            optimizer: "adam".into(),
            standardize: t.standardize,
        }
    }
}

impl AutoencoderSettings {
    pub fn train_config(&self, seed: u64) -> Result<TrainConfig> {
        let optimizer = match self.optimizer.as_str() {
            "adam" => Optimizer::adam(),
            "sgd" => Optimizer::Sgd,
            other => return Err(Error::Config(format!("unknown optimizer `{other}`"))),
        };
        Ok(TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            optimizer,
            seed,
            standardize: self.standardize,
        })
    }

    pub fn architecture(&self, latent_dim: usize) -> Option<Architecture> {
        match self.kind {
            AutoencoderKind::Pca => None,
            AutoencoderKind::Linear => Some(Architecture::linear(latent_dim)),
            AutoencoderKind::Tanh => Some(Architecture {
                latent_dim,
                hidden_widths: vec![self.hidden_width],
                hidden_activation: Activation::Tanh,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSettings {
    /// Initial leapfrog step size; `None` picks a per-experiment default.
    pub step_size: Option<f64>,
    /// Initial step size for the auto-encoded chain; `None` continues from
    /// the baseline's tuned value.
    pub ae_step_size: Option<f64>,
    /// `None` picks a per-experiment default.
    pub n_leapfrog: Option<usize>,
    /// Diagonal of the mass matrix; `None` is the identity.
    pub mass_diag: Option<Vec<f64>>,
    /// `None` means on, except for logistic experiments where it is dropped
    /// for speed.
    pub volume_correction: Option<bool>,
    pub pcn_step: f64,
    pub proposal_sd: f64,
    /// Tune step sizes towards an acceptance rate in [0.6, 0.75] during warm-up.
    pub adapt: bool,
    pub adapt_window: usize,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            step_size: None,
            ae_step_size: None,
            n_leapfrog: None,
            mass_diag: None,
            volume_correction: None,
            pcn_step: 0.5,
            proposal_sd: 0.5,
            adapt: true,
            adapt_window: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianSettings {
    pub covariance: Vec<Vec<f64>>,
    pub mean: Option<Vec<f64>>,
}

impl Default for GaussianSettings {
    fn default() -> Self {
        Self {
            covariance: vec![vec![1.0, 0.95, 0.7], vec![0.95, 1.0, 0.5], vec![0.7, 0.5, 1.0]],
            mean: None,
        }
    }
}

impl GaussianSettings {
    pub fn covariance_matrix(&self) -> Result<Matrix> {
        let n = self.covariance.len();
        if n == 0 || self.covariance.iter().any(|r| r.len() != n) {
            return Err(Error::Config("gaussian covariance must be a non-empty square matrix".into()));
        }
        Ok(Matrix::from_fn(n, n, |i, j| self.covariance[i][j]))
    }

    pub fn mean_vector(&self) -> Vector {
        match &self.mean {
            Some(m) => Vector::from_column_slice(m),
            None => Vector::zeros(self.covariance.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticSettings {
    pub dim: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub block: usize,
    pub rho: f64,
    /// Prior sd of the model, also used to draw the true coefficients.
    pub prior_sd: f64,
    pub train_csv: Option<PathBuf>,
    pub test_csv: Option<PathBuf>,
}

impl Default for LogisticSettings {
    fn default() -> Self {
        let s = SynthSpec::default();
        Self {
            dim: s.dim,
            n_train: s.n_train,
            n_test: s.n_test,
            block: s.block,
            rho: s.rho,
            prior_sd: s.prior_sd,
            train_csv: None,
            test_csv: None,
        }
    }
}

impl LogisticSettings {
    pub fn synth_spec(&self) -> SynthSpec {
        SynthSpec {
            dim: self.dim,
            n_train: self.n_train,
            n_test: self.n_test,
            block: self.block,
            rho: self.rho,
            prior_sd: self.prior_sd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpSettings {
    pub grid_size: usize,
    pub sigma_u: f64,
    pub length_scale: f64,
    pub snr: f64,
    pub jitter: Option<f64>,
    /// Grid node indices observed; `None` uses 25 evenly spread nodes.
    pub sensors: Option<Vec<usize>>,
}

impl Default for GpSettings {
    fn default() -> Self {
        let g = GpGridConfig::default();
        Self {
            grid_size: g.grid_size,
            sigma_u: g.sigma_u,
            length_scale: g.length_scale,
            snr: 10.0,
            jitter: g.jitter,
            sensors: None,
        }
    }
}

impl GpSettings {
    pub fn grid(&self) -> GpGridConfig {
        GpGridConfig {
            grid_size: self.grid_size,
            sigma_u: self.sigma_u,
            length_scale: self.length_scale,
            jitter: self.jitter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Iterations per chain, warm-up included.
    pub n_iter: usize,
    /// Share of `n_iter` spent in warm-up; those draws train the autoencoder.
    pub warmup_fraction: f64,
    pub thin: usize,
    /// `None` runs the experiment's baseline and auto-encoded sampler.
    pub methods: Option<Vec<Method>>,
    pub latent_dim: Option<usize>,
    pub autoencoder: AutoencoderSettings,
    /// Tuning iterations of the auto-encoded chain before it is recorded.
    pub ae_warmup: usize,
    pub sampler: SamplerSettings,
    pub gaussian: GaussianSettings,
    pub logistic: LogisticSettings,
    pub gp: GpSettings,
    /// Coordinates written to trace CSVs; `None` writes all of them.
    pub trace_columns: Option<Vec<usize>>,
    pub interval_level: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Gaussian3d,
            seed: 0,
            output_dir: PathBuf::from("out"),
            n_iter: 2000,
            warmup_fraction: 0.5,
            thin: 1,
            methods: None,
            latent_dim: None,
            autoencoder: AutoencoderSettings::default(),
            ae_warmup: 500,
            sampler: SamplerSettings::default(),
            gaussian: GaussianSettings::default(),
            logistic: LogisticSettings::default(),
            gp: GpSettings::default(),
            trace_columns: None,
            interval_level: 0.95,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_err("<config>"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(json_err(path))
    }

    pub fn methods(&self) -> Vec<Method> {
        let mut m = self.methods.clone().unwrap_or_else(|| self.experiment.default_methods());
        m.sort();
        m.dedup();
        m
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim.unwrap_or_else(|| self.experiment.default_latent_dim())
    }

    pub fn n_warmup(&self) -> usize {
        (self.n_iter as f64 * self.warmup_fraction).round() as usize
    }

    pub fn chain_settings(&self) -> ChainSettings {
        ChainSettings {
            n_iter: self.n_iter,
            n_warmup: self.n_warmup(),
            thin: self.thin,
            adapt: self.sampler.adapt,
            adapt_window: self.sampler.adapt_window,
            keep_warmup: false,
        }
    }

    pub fn volume_correction(&self) -> bool {
        self.sampler
            .volume_correction
            .unwrap_or(!self.experiment.is_logistic())
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            step_size: self.sampler.step_size.unwrap_or(self.experiment.default_step_size()),
            n_leapfrog: self.sampler.n_leapfrog.unwrap_or(self.experiment.default_n_leapfrog()),
            mass: match &self.sampler.mass_diag {
                Some(d) => MassMatrix::Diagonal(Vector::from_column_slice(d)),
                None => MassMatrix::Identity,
            },
            volume_correction: self.volume_correction(),
            pcn_step: self.sampler.pcn_step,
            proposal_sd: self.sampler.proposal_sd,
            seed: self.seed,
        }
    }

    /// Checks that need no data. Dimension checks against the target happen
    /// when it is built.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.warmup_fraction > 0.0 && self.warmup_fraction < 1.0) {
            return bad(format!("warmup_fraction must be in (0, 1), got {}", self.warmup_fraction));
        }
        let n_warmup = self.n_warmup();
        if n_warmup == 0 || n_warmup >= self.n_iter {
            return bad(format!(
                "n_iter = {} with warmup_fraction = {} leaves no warm-up or no sampling iterations",
                self.n_iter, self.warmup_fraction
            ));
        }
        if self.thin == 0 {
            return bad("thin must be positive".into());
        }
        if !(self.interval_level > 0.0 && self.interval_level < 1.0) {
            return bad(format!("interval_level must be in (0, 1), got {}", self.interval_level));
        }
        let methods = self.methods();
        if methods.is_empty() {
            return bad("no methods selected".into());
        }
        let gp = self.experiment == Experiment::GpInverse;
        for m in &methods {
            if m.needs_gaussian_prior() && !gp {
                return bad(format!("{m} needs a Gaussian-prior target; use the gp_inverse experiment"));
            }
        }
        if self.latent_dim() == 0 {
            return bad("latent_dim must be positive".into());
        }
        if self.experiment == Experiment::LogisticCsv && self.logistic.train_csv.is_none() {
            return bad("logistic_csv needs logistic.train_csv".into());
        }
        Ok(())
    }
}
