//! Single-step transition kernels and the chain runner.
//!
//! Every kernel is a pure function of `(state, rng)`: the momentum or
//! proposal noise is drawn first, then one uniform variate for the
//! accept/reject decision, so kernels that share a random stream stay in
//! lock-step.

mod ae_hmc;
mod chain;
mod hmc;
mod latent;
mod leapfrog;
mod pcn;
mod rwm;

pub use ae_hmc::{ae_hmc_step, latent_proposal_map, reversibility_check, AeHmcKernel, LatentProposal};
pub use chain::{run_chain, ChainError, ChainSettings};
pub use hmc::{hmc_step, HmcKernel};
pub use latent::{latent_grad_k, latent_grad_u, LatentKinetic, LatentPotential, LogisticPullback, Pullback};
pub use leapfrog::{leapfrog_ambient, Integration};
pub use pcn::{ae_pcn_step, pcn_rho, pcn_step, AePcnKernel, LatentReference, PcnKernel};
pub use rwm::{rwm_step, RwmKernel};

#[allow(unused_imports)] // inherent f64 math is only there when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;

/// Proposals whose energy error exceeds this are treated as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1000.0;

/// Warm-up tuning steers the acceptance rate into this band.
pub const TARGET_ACCEPTANCE: (f64, f64) = (0.6, 0.75);

/// Momentum covariance `M`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum MassMatrix {
    #[default]
    Identity,
    Diagonal(Vector),
}

impl MassMatrix {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            MassMatrix::Identity => Ok(()),
            MassMatrix::Diagonal(m) => {
                check_dim("mass matrix", dim, m.len())?;
                if m.iter().all(|v| *v > 0.0 && v.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(
                        "mass matrix must be positive-definite".into(),
                    ))
                }
            }
        }
    }

    /// `M⁻¹ p`.
    pub fn inverse_apply(&self, p: &Vector) -> Vector {
        match self {
            MassMatrix::Identity => p.clone(),
            MassMatrix::Diagonal(m) => p.component_div(m),
        }
    }

    /// `p ~ N(0, M)`.
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Vector {
        let z = Vector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(rng)));
        match self {
            MassMatrix::Identity => z,
            MassMatrix::Diagonal(m) => z.zip_map(m, |zi, mi| zi * mi.sqrt()),
        }
    }
}

/// Kinetic energy `½ pᵀ M⁻¹ p`.
pub fn kinetic(p: &Vector, mass: &MassMatrix) -> f64 {
    match mass {
        MassMatrix::Identity => 0.5 * p.dot(p),
        MassMatrix::Diagonal(m) => 0.5 * p.iter().zip(m.iter()).map(|(pi, mi)| pi * pi / mi).sum::<f64>(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Ambient,
    Latent,
}

/// A position/momentum pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub q: Vector,
    pub p: Vector,
    pub space: Space,
}

impl PhaseState {
    pub fn new(q: Vector, p: Vector, space: Space) -> Result<Self> {
        check_dim("phase state momentum", q.len(), p.len())?;
        Ok(Self { q, p, space })
    }

    pub fn ambient(q: Vector, p: Vector) -> Result<Self> {
        Self::new(q, p, Space::Ambient)
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.p.iter()).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Leapfrog step size ε.
    pub step_size: f64,
    /// Leapfrog steps per proposal L.
    pub n_leapfrog: usize,
    pub mass: MassMatrix,
    /// Include the Gramian volume factor in auto-encoded acceptance ratios.
    pub volume_correction: bool,
    /// pCN step h, giving `ρ = (1 − h/4) / (1 + h/4)`.
    pub pcn_step: f64,
    /// Random-walk proposal standard deviation.
    pub proposal_sd: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            step_size: 0.1,
            n_leapfrog: 10,
            mass: MassMatrix::Identity,
            volume_correction: true,
            pcn_step: 0.5,
            proposal_sd: 1.0,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if self.n_leapfrog == 0 {
            return Err(Error::InvalidConfig("need at least one leapfrog step".into()));
        }
        if !(self.pcn_step >= 0.0) || !(self.proposal_sd >= 0.0) {
            return Err(Error::InvalidConfig(
                "pcn step and proposal sd must be non-negative".into(),
            ));
        }
        self.mass.validate(dim)
    }
}

/// Result of one Metropolis–Hastings transition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Chain state after the step: `proposal` if accepted, the input otherwise.
    pub position: Vector,
    pub proposal: Vector,
    pub accepted: bool,
    /// Log acceptance ratio; `-∞` for divergent proposals.
    pub log_rho: f64,
    pub uniform: f64,
    pub hamiltonian_start: f64,
    pub hamiltonian_end: f64,
    /// 0 when the volume correction is off.
    pub log_volume_factor: f64,
    pub divergent: bool,
    pub grad_evals: u64,
}

impl StepOutcome {
    pub fn accept_prob(&self) -> f64 {
        if self.log_rho.is_nan() {
            0.0
        } else {
            self.log_rho.exp().min(1.0)
        }
    }
}

/// Draw the uniform variate and decide `u < min(1, exp(log_rho))`.
pub(crate) fn metropolis<R: Rng + ?Sized>(log_rho: f64, rng: &mut R) -> (bool, f64) {
    let u: f64 = rng.random();
    let accept = !log_rho.is_nan() && u < log_rho.exp().min(1.0);
    (accept, u)
}

/// Multiplicative step-size update used during warm-up.
pub fn tuning_factor(acceptance: f64) -> f64 {
    if acceptance > TARGET_ACCEPTANCE.1 {
        1.1
    } else if acceptance < TARGET_ACCEPTANCE.0 {
        0.9
    } else {
        1.0
    }
}

/// A Markov transition kernel on the ambient space.
pub trait TransitionKernel {
    fn dim(&self) -> usize;

    fn step<R: Rng + ?Sized>(&self, q: &Vector, rng: &mut R) -> Result<StepOutcome>;

    /// The tunable scale: ε for Hamiltonian kernels, h for pCN, the proposal
    /// sd for random-walk Metropolis.
    fn step_size(&self) -> f64;

    fn set_step_size(&mut self, step: f64);

    /// Warm-up adaptation from a window's mean acceptance probability.
    fn adapt(&mut self, acceptance: f64) {
        let s = self.step_size() * tuning_factor(acceptance);
        self.set_step_size(s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinetic_values() {
        assert_eq!(kinetic(&Vector::zeros(3), &MassMatrix::Identity), 0.0);
        assert_eq!(kinetic(&Vector::from_vec(vec![2.0, 0.0]), &MassMatrix::Identity), 2.0);
        let m = MassMatrix::Diagonal(Vector::from_vec(vec![2.0, 0.5, 4.0]));
        let p = Vector::from_vec(vec![1.0, -3.0, 0.5]);
        let expected = 1.0 / 4.0 + 9.0 / 1.0 + 0.25 / 8.0;
        assert!((kinetic(&p, &m) - expected).abs() < 1e-15);
    }

    #[test]
    fn mass_matrix_validation() {
        assert!(MassMatrix::Diagonal(Vector::from_vec(vec![1.0, 0.0])).validate(2).is_err());
        assert!(MassMatrix::Diagonal(Vector::from_vec(vec![1.0])).validate(2).is_err());
        assert!(MassMatrix::Identity.validate(5).is_ok());
    }

    #[test]
    fn config_validation() {
        let mut cfg = SamplerConfig::default();
        assert!(cfg.validate(2).is_ok());
        cfg.n_leapfrog = 0;
        assert!(cfg.validate(2).is_err());
        cfg.n_leapfrog = 1;
        cfg.step_size = 0.0;
        assert!(cfg.validate(2).is_err());
    }

    #[test]
    fn tuning_band() {
        assert_eq!(tuning_factor(0.9), 1.1);
        assert_eq!(tuning_factor(0.3), 0.9);
        assert_eq!(tuning_factor(0.65), 1.0);
    }
}
