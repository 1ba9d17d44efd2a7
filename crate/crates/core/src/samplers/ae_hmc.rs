use rand::Rng;

use crate::autoencoder::Autoencoder;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{log_gramian_volume, Vector};
use crate::samplers::latent::{LatentKinetic, LatentPotential, Pullback};
use crate::samplers::leapfrog::integrate;
use crate::samplers::{
    kinetic, metropolis, PhaseState, SamplerConfig, Space, StepOutcome, TransitionKernel, DIVERGENCE_THRESHOLD,
};
use crate::targets::Target;

/// Deterministic part of an auto-encoded HMC proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentProposal {
    /// Encoded start `(φ(q), φ_p(p))`.
    pub start: PhaseState,
    /// Latent state after the leapfrog steps.
    pub end: PhaseState,
    /// Decoded end `(ψ(q_h), ψ_p(p_h))`.
    pub ambient: PhaseState,
    pub divergent: bool,
    pub grad_evals: u64,
}

/// Encode `(q, p)`, run `n_steps` latent leapfrog steps and decode.
pub fn latent_proposal_map<P: LatentPotential + ?Sized>(
    ae: &Autoencoder,
    potential: &P,
    kinetic: &LatentKinetic<'_>,
    state: &PhaseState,
    step_size: f64,
    n_steps: usize,
) -> Result<LatentProposal> {
    check_dim("latent proposal position", ae.ambient_dim(), state.q.len())?;
    check_dim("latent proposal momentum", ae.ambient_dim(), state.p.len())?;
    let q_h = ae.encode(&state.q)?;
    let p_h = ae.encode_momentum(&state.p)?;
    let (q_end, p_end, divergent, grad_evals) = integrate(
        &q_h,
        &p_h,
        step_size,
        n_steps,
        |z| potential.latent_gradient(z),
        |m| kinetic.gradient(m),
    );
    let ambient = PhaseState {
        q: ae.decode(&q_end)?,
        p: ae.decode_momentum(&p_end)?,
        space: Space::Ambient,
    };
    Ok(LatentProposal {
        divergent: divergent || !ambient.is_finite(),
        start: PhaseState {
            q: q_h,
            p: p_h,
            space: Space::Latent,
        },
        end: PhaseState {
            q: q_end,
            p: p_end,
            space: Space::Latent,
        },
        ambient,
        grad_evals,
    })
}

/// HMC whose trajectories run in the autoencoder's latent space and are
/// corrected in the ambient space.
#[derive(Debug, Clone)]
pub struct AeHmcKernel<'a, T: ?Sized, P> {
    pub target: &'a T,
    pub ae: &'a Autoencoder,
    pub potential: P,
    pub kinetic: LatentKinetic<'a>,
    pub step_size: f64,
    pub n_leapfrog: usize,
    pub volume_correction: bool,
}

impl<'a, T: Target + ?Sized> AeHmcKernel<'a, T, Pullback<'a, T>> {
    pub fn new(target: &'a T, ae: &'a Autoencoder, config: &SamplerConfig) -> Result<Self> {
        let potential = Pullback::new(target, ae)?;
        Self::with_potential(target, ae, potential, config)
    }
}

impl<'a, T: Target + ?Sized, P: LatentPotential> AeHmcKernel<'a, T, P> {
    /// Use a specialised latent gradient such as
    /// [`LogisticPullback`](crate::samplers::LogisticPullback).
    pub fn with_potential(target: &'a T, ae: &'a Autoencoder, potential: P, config: &SamplerConfig) -> Result<Self> {
        config.validate(target.dim())?;
        check_dim("ae_hmc autoencoder", target.dim(), ae.ambient_dim())?;
        check_dim("ae_hmc latent potential", ae.latent_dim(), potential.latent_dim())?;
        Ok(Self {
            target,
            ae,
            potential,
            kinetic: LatentKinetic::new(ae, config.mass.clone())?,
            step_size: config.step_size,
            n_leapfrog: config.n_leapfrog,
            volume_correction: config.volume_correction,
        })
    }

    /// Log of the four Gramian factors. An error at the encoder side is a
    /// property of the current state and propagates; degenerate factors at
    /// the proposal side only reject it.
    fn log_volume(&self, q: &Vector, p: &Vector, prop: &LatentProposal) -> Result<Option<f64>> {
        let enc_q = log_gramian_volume(&self.ae.encoder_jacobian(q)?)?;
        let rest = (|| -> Result<f64> {
            Ok(log_gramian_volume(&self.ae.momentum_encoder_jacobian(p)?)?
                + log_gramian_volume(&self.ae.decoder_jacobian(&prop.end.q)?)?
                + log_gramian_volume(&self.ae.momentum_decoder_jacobian(&prop.end.p)?)?)
        })();
        match rest {
            Ok(v) => Ok(Some(enc_q + v)),
            Err(Error::DegenerateVolume(_)) | Err(Error::NonFinite(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

impl<T: Target + ?Sized, P: LatentPotential> TransitionKernel for AeHmcKernel<'_, T, P> {
    fn dim(&self) -> usize {
        self.target.dim()
    }

    fn step<R: Rng + ?Sized>(&self, q: &Vector, rng: &mut R) -> Result<StepOutcome> {
        check_dim("ae_hmc_step", self.target.dim(), q.len())?;
        let mass = self.kinetic.mass();
        let p = mass.sample(q.len(), rng);
        let state = PhaseState {
            q: q.clone(),
            p,
            space: Space::Ambient,
        };
        let prop = latent_proposal_map(
            self.ae,
            &self.potential,
            &self.kinetic,
            &state,
            self.step_size,
            self.n_leapfrog,
        )?;
        // Kinetic energy of the momentum the latent dynamics carries, K_v(ψ_p(φ_p(p))),
        // so both ends of the trajectory are measured alike. With r < D the
        // part of p off the latent plane would otherwise add ½|p_⊥|² to every
        // log ratio.
        let h_start = self.target.potential(q)? + kinetic(&self.ae.decode_momentum(&prop.start.p)?, mass);
        let mut divergent = prop.divergent;
        let h_end = if divergent {
            f64::INFINITY
        } else {
            match self.target.potential(&prop.ambient.q) {
                Ok(u) => u + kinetic(&prop.ambient.p, mass),
                Err(_) => f64::INFINITY,
            }
        };
        let mut log_volume_factor = 0.0;
        if self.volume_correction && !divergent {
            match self.log_volume(q, &state.p, &prop)? {
                Some(v) => log_volume_factor = v,
                None => divergent = true,
            }
        }
        let mut log_rho = h_start - h_end + log_volume_factor;
        if !log_rho.is_finite() || (h_end - h_start).abs() > DIVERGENCE_THRESHOLD {
            divergent = true;
        }
        if divergent {
            log_rho = f64::NEG_INFINITY;
        }
        let (accepted, uniform) = metropolis(log_rho, rng);
        let proposal = prop.ambient.q;
        Ok(StepOutcome {
            position: if accepted { proposal.clone() } else { q.clone() },
            proposal,
            accepted,
            log_rho,
            uniform,
            hamiltonian_start: h_start,
            hamiltonian_end: h_end,
            log_volume_factor,
            divergent,
            grad_evals: prop.grad_evals,
        })
    }

    fn step_size(&self) -> f64 {
        self.step_size
    }

    fn set_step_size(&mut self, step: f64) {
        self.step_size = step;
    }
}

/// One auto-encoded HMC transition using the generic latent pull-back.
pub fn ae_hmc_step<T: Target + ?Sized, R: Rng + ?Sized>(
    target: &T,
    ae: &Autoencoder,
    q: &Vector,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    AeHmcKernel::new(target, ae, config)?.step(q, rng)
}

/// Apply the latent proposal map, flip the momentum, apply it again and
/// report the largest deviation from the starting state. Zero up to rounding
/// when `φ ∘ ψ` is the identity on the latent space.
pub fn reversibility_check<T: Target + ?Sized>(
    target: &T,
    ae: &Autoencoder,
    state: &PhaseState,
    config: &SamplerConfig,
) -> Result<f64> {
    let potential = Pullback::new(target, ae)?;
    let kinetic = LatentKinetic::new(ae, config.mass.clone())?;
    let forward = latent_proposal_map(ae, &potential, &kinetic, state, config.step_size, config.n_leapfrog)?;
    let flipped = PhaseState {
        q: forward.ambient.q,
        p: -forward.ambient.p,
        space: Space::Ambient,
    };
    let back = latent_proposal_map(ae, &potential, &kinetic, &flipped, config.step_size, config.n_leapfrog)?;
    if forward.divergent || back.divergent {
        return Err(Error::NonFinite("reversibility_check trajectory"));
    }
    let dq = (&back.ambient.q - &state.q).amax();
    let dp = (&back.ambient.p + &state.p).amax();
    Ok(dq.max(dp))
}
