use rand::Rng;

use crate::error::{check_dim, Result};
use crate::linalg::Vector;
use crate::samplers::leapfrog::integrate;
use crate::samplers::{kinetic, metropolis, MassMatrix, SamplerConfig, StepOutcome, TransitionKernel, DIVERGENCE_THRESHOLD};
use crate::targets::Target;

/// Hamiltonian Monte Carlo in the ambient space.
#[derive(Debug, Clone)]
pub struct HmcKernel<T> {
    pub target: T,
    pub step_size: f64,
    pub n_leapfrog: usize,
    pub mass: MassMatrix,
}

impl<T: Target> HmcKernel<T> {
    pub fn new(target: T, config: &SamplerConfig) -> Result<Self> {
        config.validate(target.dim())?;
        Ok(Self {
            target,
            step_size: config.step_size,
            n_leapfrog: config.n_leapfrog,
            mass: config.mass.clone(),
        })
    }
}

impl<T: Target> TransitionKernel for HmcKernel<T> {
    fn dim(&self) -> usize {
        self.target.dim()
    }

    fn step<R: Rng + ?Sized>(&self, q: &Vector, rng: &mut R) -> Result<StepOutcome> {
        check_dim("hmc_step", self.target.dim(), q.len())?;
        let p = self.mass.sample(q.len(), rng);
        let h_start = self.target.potential(q)? + kinetic(&p, &self.mass);
        let (q_end, p_end, mut divergent, grad_evals) = integrate(
            q,
            &p,
            self.step_size,
            self.n_leapfrog,
            |x| self.target.gradient(x),
            |m| Ok(self.mass.inverse_apply(m)),
        );
        let h_end = if divergent {
            f64::INFINITY
        } else {
            match self.target.potential(&q_end) {
                Ok(u) => u + kinetic(&p_end, &self.mass),
                Err(_) => f64::INFINITY,
            }
        };
        let mut log_rho = h_start - h_end;
        if !log_rho.is_finite() || (h_end - h_start).abs() > DIVERGENCE_THRESHOLD {
            divergent = true;
        }
        if divergent {
            log_rho = f64::NEG_INFINITY;
        }
        let (accepted, uniform) = metropolis(log_rho, rng);
        Ok(StepOutcome {
            position: if accepted { q_end.clone() } else { q.clone() },
            proposal: q_end,
            accepted,
            log_rho,
            uniform,
            hamiltonian_start: h_start,
            hamiltonian_end: h_end,
            log_volume_factor: 0.0,
            divergent,
            grad_evals,
        })
    }

    fn step_size(&self) -> f64 {
        self.step_size
    }

    fn set_step_size(&mut self, step: f64) {
        self.step_size = step;
    }
}

/// One HMC transition from `q`.
pub fn hmc_step<T: Target + ?Sized, R: Rng + ?Sized>(
    target: &T,
    q: &Vector,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    HmcKernel::new(target, config)?.step(q, rng)
}
