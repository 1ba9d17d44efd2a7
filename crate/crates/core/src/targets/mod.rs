//! Target distributions: the potential `U(q) = -log π(q)` (additive constants
//! dropped) and its gradient.

mod gaussian;
mod gp;
mod logistic;

pub use gaussian::GaussianTarget;
pub use gp::{default_sensors, GpGridConfig, GpLinearInverseTarget};
pub use logistic::LogisticRegressionTarget;

use crate::error::Result;
use crate::linalg::{Matrix, Vector};

/// A differentiable, unnormalised target density.
///
/// Implementations are immutable after construction and can be shared across
/// chains running on different threads.
pub trait Target {
    /// Ambient dimension.
    fn dim(&self) -> usize;

    fn potential(&self, q: &Vector) -> Result<f64>;

    fn gradient(&self, q: &Vector) -> Result<Vector>;

    fn potential_and_gradient(&self, q: &Vector) -> Result<(f64, Vector)> {
        Ok((self.potential(q)?, self.gradient(q)?))
    }
}

impl<T: Target + ?Sized> Target for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn potential(&self, q: &Vector) -> Result<f64> {
        (**self).potential(q)
    }
    fn gradient(&self, q: &Vector) -> Result<Vector> {
        (**self).gradient(q)
    }
    fn potential_and_gradient(&self, q: &Vector) -> Result<(f64, Vector)> {
        (**self).potential_and_gradient(q)
    }
}

/// A target whose density factors as a Gaussian prior `N(0, C)` times a
/// likelihood, as required by pCN proposals.
pub trait GaussianPriorTarget: Target {
    /// Lower-triangular factor `L` with `L Lᵀ = C`.
    fn prior_factor(&self) -> &Matrix;

    /// Data misfit `Φ(u) = -log p(y | u)`, constants dropped.
    fn misfit(&self, u: &Vector) -> Result<f64>;
}

impl<T: GaussianPriorTarget + ?Sized> GaussianPriorTarget for &T {
    fn prior_factor(&self) -> &Matrix {
        (**self).prior_factor()
    }
    fn misfit(&self, u: &Vector) -> Result<f64> {
        (**self).misfit(u)
    }
}
