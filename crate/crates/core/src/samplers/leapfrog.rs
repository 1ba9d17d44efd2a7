use crate::error::{Error, Result};
use crate::linalg::{all_finite, Vector};
use crate::samplers::{MassMatrix, PhaseState, Space};
use crate::targets::Target;

/// Output of a leapfrog integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Integration {
    pub state: PhaseState,
    /// A gradient evaluation failed or produced a non-finite value.
    pub divergent: bool,
    pub grad_evals: u64,
}

/// `n_steps` leapfrog steps (half kick, drift, half kick) for the Hamiltonian
/// `U(q) + K(p)` given `∇U` and `∇K`. Stops early, flagged divergent, on the
/// first failed or non-finite gradient.
pub(crate) fn integrate<GU, GK>(
    q0: &Vector,
    p0: &Vector,
    step_size: f64,
    n_steps: usize,
    mut grad_u: GU,
    mut grad_k: GK,
) -> (Vector, Vector, bool, u64)
where
    GU: FnMut(&Vector) -> Result<Vector>,
    GK: FnMut(&Vector) -> Result<Vector>,
{
    let mut q = q0.clone();
    let mut p = p0.clone();
    let half = 0.5 * step_size;
    let mut evals = 1u64;
    let mut g = match grad_u(&q) {
        Ok(g) if all_finite(&g) => g,
        _ => return (q, p, true, evals),
    };
    for _ in 0..n_steps {
        p.axpy(-half, &g, 1.0);
        let v = match grad_k(&p) {
            Ok(v) if all_finite(&v) => v,
            _ => return (q, p, true, evals),
        };
        q.axpy(step_size, &v, 1.0);
        evals += 1;
        g = match grad_u(&q) {
            Ok(g) if all_finite(&g) => g,
            _ => return (q, p, true, evals),
        };
        p.axpy(-half, &g, 1.0);
    }
    let divergent = !(all_finite(&q) && all_finite(&p));
    (q, p, divergent, evals)
}

/// Standard leapfrog in the ambient space with kinetic energy `½ pᵀM⁻¹p`.
pub fn leapfrog_ambient<T: Target + ?Sized>(
    target: &T,
    state: &PhaseState,
    step_size: f64,
    n_steps: usize,
    mass: &MassMatrix,
) -> Result<Integration> {
    if state.space != Space::Ambient {
        return Err(Error::InvalidConfig(
            "leapfrog_ambient needs an ambient-space state".into(),
        ));
    }
    crate::error::check_dim("leapfrog_ambient", target.dim(), state.q.len())?;
    crate::error::check_dim("leapfrog_ambient momentum", target.dim(), state.p.len())?;
    let (q, p, divergent, grad_evals) = integrate(
        &state.q,
        &state.p,
        step_size,
        n_steps,
        |q| target.gradient(q),
        |p| Ok(mass.inverse_apply(p)),
    );
    Ok(Integration {
        state: PhaseState {
            q,
            p,
            space: Space::Ambient,
        },
        divergent,
        grad_evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::targets::GaussianTarget;

    #[test]
    fn one_step_on_standard_normal() {
        let t = GaussianTarget::centered(Matrix::identity(1, 1)).unwrap();
        let s = PhaseState::ambient(Vector::from_element(1, 0.0), Vector::from_element(1, 1.0)).unwrap();
        let out = leapfrog_ambient(&t, &s, 0.1, 1, &MassMatrix::Identity).unwrap();
        assert!((out.state.q[0] - 0.1).abs() < 1e-15);
        assert!((out.state.p[0] - 0.995).abs() < 1e-15);
        assert!(!out.divergent);
        assert_eq!(out.grad_evals, 2);
    }

    #[test]
    fn tiny_step_leaves_state_unchanged() {
        let t = GaussianTarget::centered(Matrix::identity(2, 2)).unwrap();
        let s = PhaseState::ambient(Vector::from_vec(vec![0.3, -1.0]), Vector::from_vec(vec![2.0, 0.1])).unwrap();
        let out = leapfrog_ambient(&t, &s, 1e-12, 25, &MassMatrix::Identity).unwrap();
        assert!((out.state.q - &s.q).amax() < 1e-9);
        assert!((out.state.p - &s.p).amax() < 1e-9);
    }

    #[test]
    fn rejects_latent_state() {
        let t = GaussianTarget::centered(Matrix::identity(1, 1)).unwrap();
        let s = PhaseState::new(Vector::zeros(1), Vector::zeros(1), Space::Latent).unwrap();
        assert!(leapfrog_ambient(&t, &s, 0.1, 1, &MassMatrix::Identity).is_err());
    }

    #[test]
    fn blow_up_is_flagged() {
        // precision 1e6 with step 1: the integrator is unstable and overflows
        let t = GaussianTarget::centered(Matrix::identity(1, 1) * 1e-6).unwrap();
        let s = PhaseState::ambient(Vector::from_element(1, 1.0), Vector::from_element(1, 0.0)).unwrap();
        let out = leapfrog_ambient(&t, &s, 1.0, 200, &MassMatrix::Identity).unwrap();
        assert!(out.divergent);
    }
}
