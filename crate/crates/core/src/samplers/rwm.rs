use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Result};
use crate::linalg::Vector;
use crate::samplers::{metropolis, SamplerConfig, StepOutcome, TransitionKernel};
use crate::targets::Target;

/// Random-walk Metropolis with isotropic Gaussian proposals.
#[derive(Debug, Clone)]
pub struct RwmKernel<T> {
    pub target: T,
    pub proposal_sd: f64,
}

impl<T: Target> RwmKernel<T> {
    pub fn new(target: T, proposal_sd: f64) -> Self {
        Self {
            target,
            proposal_sd,
        }
    }
}

impl<T: Target> TransitionKernel for RwmKernel<T> {
    fn dim(&self) -> usize {
        self.target.dim()
    }

    fn step<R: Rng + ?Sized>(&self, q: &Vector, rng: &mut R) -> Result<StepOutcome> {
        check_dim("rwm_step", self.target.dim(), q.len())?;
        let noise = Vector::from_iterator(q.len(), (0..q.len()).map(|_| StandardNormal.sample(rng)));
        let proposal = q + noise * self.proposal_sd;
        let u_start = self.target.potential(q)?;
        let u_end = self.target.potential(&proposal).unwrap_or(f64::INFINITY);
        let mut log_rho = u_start - u_end;
        let divergent = !log_rho.is_finite() && log_rho != f64::NEG_INFINITY;
        if log_rho.is_nan() {
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
            log_volume_factor: 0.0,
            divergent,
            grad_evals: 0,
        })
    }

    fn step_size(&self) -> f64 {
        self.proposal_sd
    }

    fn set_step_size(&mut self, step: f64) {
        self.proposal_sd = step;
    }
}

/// One random-walk Metropolis transition with proposal sd `proposal_sd`.
pub fn rwm_step<T: Target + ?Sized, R: Rng + ?Sized>(
    target: &T,
    q: &Vector,
    proposal_sd: f64,
    rng: &mut R,
) -> Result<StepOutcome> {
    RwmKernel::new(target, proposal_sd).step(q, rng)
}

impl<T: Target> RwmKernel<T> {
    pub fn from_config(target: T, config: &SamplerConfig) -> Self {
        Self::new(target, config.proposal_sd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::targets::GaussianTarget;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_sd_never_moves_and_always_accepts() {
        let t = GaussianTarget::centered(Matrix::identity(2, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = Vector::from_vec(vec![1.0, -2.0]);
        for _ in 0..20 {
            let out = rwm_step(&t, &q, 0.0, &mut rng).unwrap();
            assert_eq!(out.position, q);
            assert_eq!(out.log_rho, 0.0);
            assert!(out.accepted);
        }
    }
}
