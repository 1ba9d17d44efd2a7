use alloc::vec::Vec;
use rand::Rng;

use crate::diagnostics::{ChainTrace, IterationRecord};
use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;
use crate::samplers::TransitionKernel;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSettings {
    /// Total iterations, warm-up included.
    pub n_iter: usize,
    pub n_warmup: usize,
    pub thin: usize,
    /// Tune the kernel's step size during warm-up.
    pub adapt: bool,
    /// Iterations per tuning window.
    pub adapt_window: usize,
    pub keep_warmup: bool,
}

impl Default for ChainSettings {
    fn default() -> Self {
        Self {
            n_iter: 2000,
            n_warmup: 1000,
            thin: 1,
            adapt: true,
            adapt_window: 25,
            keep_warmup: false,
        }
    }
}

impl ChainSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_warmup > self.n_iter {
            return Err(Error::InvalidConfig(format!(
                "warm-up ({}) exceeds total iterations ({})",
                self.n_warmup, self.n_iter
            )));
        }
        if self.thin == 0 || self.adapt_window == 0 {
            return Err(Error::InvalidConfig("thin and adapt_window must be positive".into()));
        }
        Ok(())
    }
}

/// A chain that stopped on an error, with everything recorded before it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainError {
    pub error: Error,
    pub partial: ChainTrace,
}

impl core::fmt::Display for ChainError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "chain stopped after {} iterations: {}", self.partial.records.len(), self.error)
    }
}

impl core::error::Error for ChainError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Run `settings.n_iter` transitions from `q0`.
pub fn run_chain<K: TransitionKernel, R: Rng + ?Sized>(
    kernel: &mut K,
    q0: &Vector,
    settings: &ChainSettings,
    rng: &mut R,
) -> Result<ChainTrace, ChainError> {
    let mut trace = ChainTrace {
        dim: kernel.dim(),
        n_warmup: settings.n_warmup,
        thin: settings.thin.max(1),
        ..Default::default()
    };
    let fail = |error, partial| ChainError { error, partial };
    if let Err(e) = settings.validate().and_then(|_| check_dim("run_chain start", kernel.dim(), q0.len())) {
        return Err(fail(e, trace));
    }
    let mut q = q0.clone();
    let mut window: Vec<f64> = Vec::with_capacity(settings.adapt_window);
    for iter in 0..settings.n_iter {
        let warmup = iter < settings.n_warmup;
        let step_size = kernel.step_size();
        let out = match kernel.step(&q, rng) {
            Ok(o) => o,
            Err(e) => return Err(fail(e, trace)),
        };
        trace.n_grad_evals += out.grad_evals;
        trace.records.push(IterationRecord {
            iter,
            warmup,
            accepted: out.accepted,
            log_rho: out.log_rho,
            uniform: out.uniform,
            hamiltonian_start: out.hamiltonian_start,
            hamiltonian_end: out.hamiltonian_end,
            log_volume_factor: out.log_volume_factor,
            step_size,
            divergent: out.divergent,
        });
        let prob = out.accept_prob();
        q = out.position;
        if warmup {
            if settings.keep_warmup {
                trace.warmup_samples.push(q.clone());
            }
            if settings.adapt {
                window.push(prob);
                if window.len() == settings.adapt_window {
                    let mean = window.iter().sum::<f64>() / window.len() as f64;
                    kernel.adapt(mean);
                    window.clear();
                }
            }
        } else if (iter - settings.n_warmup).is_multiple_of(trace.thin) {
            trace.samples.push(q.clone());
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::samplers::{HmcKernel, SamplerConfig};
    use crate::targets::GaussianTarget;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn warmup_only_chain_is_empty() {
        let t = GaussianTarget::centered(Matrix::identity(2, 2)).unwrap();
        let mut k = HmcKernel::new(&t, &SamplerConfig::default()).unwrap();
        let s = ChainSettings {
            n_iter: 50,
            n_warmup: 50,
            ..Default::default()
        };
        let tr = run_chain(&mut k, &Vector::zeros(2), &s, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(tr.samples.is_empty());
        assert_eq!(tr.records.len(), 50);
    }

    #[test]
    fn thinning_and_record_counts() {
        let t = GaussianTarget::centered(Matrix::identity(2, 2)).unwrap();
        let mut k = HmcKernel::new(&t, &SamplerConfig::default()).unwrap();
        let s = ChainSettings {
            n_iter: 110,
            n_warmup: 10,
            thin: 4,
            keep_warmup: true,
            ..Default::default()
        };
        let tr = run_chain(&mut k, &Vector::zeros(2), &s, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(tr.samples.len(), 25);
        assert_eq!(tr.warmup_samples.len(), 10);
        assert_eq!(tr.n_grad_evals, 110 * 11);
    }

    #[test]
    fn bad_start_reports_partial_trace() {
        let t = GaussianTarget::centered(Matrix::identity(2, 2)).unwrap();
        let mut k = HmcKernel::new(&t, &SamplerConfig::default()).unwrap();
        let err = run_chain(&mut k, &Vector::zeros(3), &ChainSettings::default(), &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap_err();
        assert!(err.partial.records.is_empty());
    }

    #[test]
    fn tuning_moves_step_size_towards_band() {
        let t = GaussianTarget::centered(Matrix::identity(5, 5)).unwrap();
        let cfg = SamplerConfig {
            step_size: 1.9,
            n_leapfrog: 5,
            ..Default::default()
        };
        let mut k = HmcKernel::new(&t, &cfg).unwrap();
        let s = ChainSettings {
            n_iter: 1000,
            n_warmup: 1000,
            ..Default::default()
        };
        let tr = run_chain(&mut k, &Vector::zeros(5), &s, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(k.step_size < 1.9);
        assert!(tr.records.last().unwrap().step_size < 1.9);
    }
}
