use crate::error::{check_dim, Error, Result};
use crate::linalg::{log1p_exp, sigmoid, Matrix, Vector};
use crate::targets::Target;

/// Bayesian logistic regression with an isotropic Gaussian prior
/// `q ~ N(0, σ² I)` on the coefficients.
///
/// `U(q) = ½ qᵀq/σ² − Σᵢ yᵢ xᵢᵀq + Σᵢ log(1 + exp(xᵢᵀq))`
#[derive(Debug, Clone)]
pub struct LogisticRegressionTarget {
    design: Matrix,
    labels: Vector,
    prior_variance: f64,
}

impl LogisticRegressionTarget {
    pub const DEFAULT_PRIOR_VARIANCE: f64 = 100.0;

    pub fn new(design: Matrix, labels: Vector, prior_variance: f64) -> Result<Self> {
        check_dim("logistic labels", design.nrows(), labels.len())?;
        if labels.iter().any(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::InvalidConfig("labels must be exactly 0 or 1".into()));
        }
        if design.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("logistic design matrix"));
        }
        if !(prior_variance > 0.0 && prior_variance.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "prior variance must be positive, got {prior_variance}"
            )));
        }
        Ok(Self {
            design,
            labels,
            prior_variance,
        })
    }

    pub fn design(&self) -> &Matrix {
        &self.design
    }

    pub fn labels(&self) -> &Vector {
        &self.labels
    }

    pub fn prior_variance(&self) -> f64 {
        self.prior_variance
    }

    pub fn n_obs(&self) -> usize {
        self.design.nrows()
    }

    /// Potential as a function of the linear predictor `η = Xq`.
    pub(crate) fn potential_from_eta(&self, q_sq_norm: f64, eta: &Vector) -> f64 {
        let mut lik = 0.0;
        for (e, y) in eta.iter().zip(self.labels.iter()) {
            lik += log1p_exp(*e) - y * e;
        }
        0.5 * q_sq_norm / self.prior_variance + lik
    }

    /// Residual `y − sigmoid(η)`.
    pub(crate) fn residual(&self, eta: &Vector) -> Vector {
        self.labels.zip_map(eta, |y, e| y - sigmoid(e))
    }
}

impl Target for LogisticRegressionTarget {
    fn dim(&self) -> usize {
        self.design.ncols()
    }

    fn potential(&self, q: &Vector) -> Result<f64> {
        check_dim("logistic_potential", self.dim(), q.len())?;
        let eta = &self.design * q;
        let u = self.potential_from_eta(q.norm_squared(), &eta);
        if u.is_finite() {
            Ok(u)
        } else {
            Err(Error::NonFinite("logistic potential"))
        }
    }

    fn gradient(&self, q: &Vector) -> Result<Vector> {
        self.potential_and_gradient(q).map(|(_, g)| g)
    }

    fn potential_and_gradient(&self, q: &Vector) -> Result<(f64, Vector)> {
        check_dim("logistic_potential_grad", self.dim(), q.len())?;
        let eta = &self.design * q;
        let u = self.potential_from_eta(q.norm_squared(), &eta);
        let resid = self.residual(&eta);
        let mut grad = q / self.prior_variance;
        grad.gemv_tr(-1.0, &self.design, &resid, 1.0);
        if !u.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("logistic potential/gradient"));
        }
        Ok((u, grad))
    }
}
