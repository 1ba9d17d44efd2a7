use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::autoencoder::Autoencoder;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{cholesky, column_means, log_gramian_volume, sample_covariance, Matrix, Vector};
use crate::samplers::{metropolis, SamplerConfig, StepOutcome, TransitionKernel};
use crate::targets::{GaussianPriorTarget, Target};

/// Largest pCN step; `h = 4` gives `ρ = 0`, i.e. independent prior draws.
pub const MAX_PCN_STEP: f64 = 4.0;

/// Autoregression coefficient `ρ = (1 − h/4) / (1 + h/4)`.
pub fn pcn_rho(h: f64) -> f64 {
    (1.0 - h / 4.0) / (1.0 + h / 4.0)
}

fn standard_normal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)))
}

/// Preconditioned Crank–Nicolson for targets with a Gaussian prior.
#[derive(Debug, Clone)]
pub struct PcnKernel<T> {
    pub target: T,
    pub step: f64,
}

impl<T: GaussianPriorTarget> PcnKernel<T> {
    pub fn new(target: T, step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= MAX_PCN_STEP) {
            return Err(Error::InvalidConfig(format!("pcn step must be in (0, 4], got {step}")));
        }
        Ok(Self { target, step })
    }
}

impl<T: GaussianPriorTarget> TransitionKernel for PcnKernel<T> {
    fn dim(&self) -> usize {
        self.target.dim()
    }

    fn step<R: Rng + ?Sized>(&self, q: &Vector, rng: &mut R) -> Result<StepOutcome> {
        check_dim("pcn_step", self.target.dim(), q.len())?;
        let rho = pcn_rho(self.step);
        let z = standard_normal(q.len(), rng);
        let mut proposal = q * rho;
        proposal.gemv(Float::sqrt(1.0 - rho * rho), self.target.prior_factor(), &z, 1.0);
        let phi_start = self.target.misfit(q)?;
        let phi_end = self.target.misfit(&proposal).unwrap_or(f64::INFINITY);
        let mut log_rho = phi_start - phi_end;
        let divergent = log_rho.is_nan();
        if divergent {
            log_rho = f64::NEG_INFINITY;
        }
        let (accepted, uniform) = metropolis(log_rho, rng);
        Ok(StepOutcome {
            position: if accepted { proposal.clone() } else { q.clone() },
            proposal,
            accepted,
            log_rho,
            uniform,
            hamiltonian_start: phi_start,
            hamiltonian_end: phi_end,
            log_volume_factor: 0.0,
            divergent,
            grad_evals: 0,
        })
    }

    fn step_size(&self) -> f64 {
        self.step
    }

    fn set_step_size(&mut self, step: f64) {
        self.step = step.min(MAX_PCN_STEP);
    }
}

/// One pCN transition with step `config.pcn_step`.
pub fn pcn_step<T: GaussianPriorTarget + ?Sized, R: Rng + ?Sized>(
    target: &T,
    q: &Vector,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    PcnKernel::new(target, config.pcn_step)?.step(q, rng)
}

/// Gaussian reference measure `N(m, C)` on the latent space.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentReference {
    mean: Vector,
    factor: Matrix,
    /// Covariance estimation failed and the identity was used instead.
    pub fallback: bool,
}

impl LatentReference {
    pub fn new(mean: Vector, covariance: &Matrix) -> Result<Self> {
        check_dim("latent reference covariance", mean.len(), covariance.nrows())?;
        let factor = cholesky(covariance, "latent reference covariance")?.l();
        Ok(Self {
            mean,
            factor,
            fallback: false,
        })
    }

    pub fn standard(dim: usize) -> Self {
        Self {
            mean: Vector::zeros(dim),
            factor: Matrix::identity(dim, dim),
            fallback: false,
        }
    }

    /// Empirical mean and covariance of the encoded rows of `samples`
    /// (`n × D`); falls back to `N(0, I)` when the covariance is singular or
    /// there are too few samples.
    pub fn from_encodings(ae: &Autoencoder, samples: &Matrix) -> Result<Self> {
        check_dim("latent reference samples", ae.ambient_dim(), samples.ncols())?;
        let r = ae.latent_dim();
        if samples.nrows() <= r {
            return Ok(Self {
                fallback: true,
                ..Self::standard(r)
            });
        }
        let mut enc = Matrix::zeros(samples.nrows(), r);
        for (i, row) in samples.row_iter().enumerate() {
            let z = ae.encode(&row.transpose())?;
            enc.set_row(i, &z.transpose());
        }
        let mean = column_means(&enc);
        let cov = sample_covariance(&enc)?;
        Ok(Self::new(mean, &cov).unwrap_or(Self {
            fallback: true,
            ..Self::standard(r)
        }))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn factor(&self) -> &Matrix {
        &self.factor
    }

    /// `½ (z − m)ᵀ C⁻¹ (z − m)`.
    pub fn quadratic(&self, z: &Vector) -> f64 {
        let w = self
            .factor
            .solve_lower_triangular(&(z - &self.mean))
            .expect("cholesky factor has a positive diagonal");
        0.5 * w.norm_squared()
    }
}

/// pCN in the latent space against the reference `N(m, C)`, corrected by the
/// ambient potential.
#[derive(Debug, Clone)]
pub struct AePcnKernel<'a, T: ?Sized> {
    pub target: &'a T,
    pub ae: &'a Autoencoder,
    pub reference: LatentReference,
    pub step: f64,
    pub volume_correction: bool,
}

impl<'a, T: Target + ?Sized> AePcnKernel<'a, T> {
    pub fn new(target: &'a T, ae: &'a Autoencoder, reference: LatentReference, config: &SamplerConfig) -> Result<Self> {
        check_dim("ae_pcn autoencoder", target.dim(), ae.ambient_dim())?;
        check_dim("ae_pcn reference", ae.latent_dim(), reference.dim())?;
        if !(config.pcn_step > 0.0 && config.pcn_step <= MAX_PCN_STEP) {
            return Err(Error::InvalidConfig(format!(
                "pcn step must be in (0, 4], got {}",
                config.pcn_step
            )));
        }
        Ok(Self {
            target,
            ae,
            reference,
            step: config.pcn_step,
            volume_correction: config.volume_correction,
        })
    }
}

impl<T: Target + ?Sized> TransitionKernel for AePcnKernel<'_, T> {
    fn dim(&self) -> usize {
        self.target.dim()
    }

    fn step<R: Rng + ?Sized>(&self, q: &Vector, rng: &mut R) -> Result<StepOutcome> {
        check_dim("ae_pcn_step", self.target.dim(), q.len())?;
        let rho = pcn_rho(self.step);
        let m = self.reference.mean();
        let q_h = self.ae.encode(q)?;
        let z = standard_normal(q_h.len(), rng);
        let mut q_h_new = m + (&q_h - m) * rho;
        q_h_new.gemv(Float::sqrt(1.0 - rho * rho), self.reference.factor(), &z, 1.0);
        let proposal = self.ae.decode(&q_h_new)?;
        let u_start = self.target.potential(q)?;
        let u_end = self.target.potential(&proposal).unwrap_or(f64::INFINITY);
        let mut divergent = false;
        let mut log_volume_factor = 0.0;
        if self.volume_correction {
            let enc = log_gramian_volume(&self.ae.encoder_jacobian(q)?)?;
            match log_gramian_volume(&self.ae.decoder_jacobian(&q_h_new)?) {
                Ok(dec) => log_volume_factor = enc + dec,
                Err(Error::DegenerateVolume(_)) | Err(Error::NonFinite(_)) => divergent = true,
                Err(e) => return Err(e),
            }
        }
        let mut log_rho = u_start - u_end + self.reference.quadratic(&q_h_new) - self.reference.quadratic(&q_h)
            + log_volume_factor;
        if log_rho.is_nan() || divergent {
            divergent = true;
            log_rho = f64::NEG_INFINITY;
        }
        let (accepted, uniform) = metropolis(log_rho, rng);
        Ok(StepOutcome {
            position: if accepted { proposal.clone() } else { q.clone() },
            proposal,
            accepted,
            log_rho,
            uniform,
            hamiltonian_start: u_start,
            hamiltonian_end: u_end,
            log_volume_factor,
            divergent,
            grad_evals: 0,
        })
    }

    fn step_size(&self) -> f64 {
        self.step
    }

    fn set_step_size(&mut self, step: f64) {
        self.step = step.min(MAX_PCN_STEP);
    }
}

/// One auto-encoded pCN transition.
pub fn ae_pcn_step<T: Target + ?Sized, R: Rng + ?Sized>(
    target: &T,
    ae: &Autoencoder,
    reference: &LatentReference,
    q: &Vector,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    AePcnKernel::new(target, ae, reference.clone(), config)?.step(q, rng)
}
