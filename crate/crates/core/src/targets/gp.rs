use alloc::vec::Vec;
use nalgebra::{Cholesky, Dyn};
#[allow(unused_imports)] // inherent f64 math is only there when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::targets::{GaussianPriorTarget, Target};

/// Gaussian-process prior on a regular `m × m` grid over `[0, 1]²` with the
/// exponential kernel `c(s, s') = σ_u² exp(−‖s − s'‖ / (2 s₀))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpGridConfig {
    pub grid_size: usize,
    pub sigma_u: f64,
    pub length_scale: f64,
    /// Diagonal jitter; `None` means `1e-8 · σ_u²`.
    pub jitter: Option<f64>,
}

impl Default for GpGridConfig {
    fn default() -> Self {
        Self {
            grid_size: 10,
            sigma_u: 1.25,
            length_scale: 0.0625,
            jitter: None,
        }
    }
}

impl GpGridConfig {
    pub fn effective_jitter(&self) -> f64 {
        self.jitter
            .unwrap_or(1e-8 * self.sigma_u * self.sigma_u)
    }

    /// Node coordinates, row-major: node `i * m + j` sits at `(j, i) / (m − 1)`.
    pub fn coordinates(&self) -> Vec<[f64; 2]> {
        let m = self.grid_size;
        let h = if m > 1 { 1.0 / (m - 1) as f64 } else { 0.0 };
        (0..m * m)
            .map(|k| [(k % m) as f64 * h, (k / m) as f64 * h])
            .collect()
    }

    pub fn covariance(&self) -> Matrix {
        let coords = self.coordinates();
        let n = coords.len();
        let var = self.sigma_u * self.sigma_u;
        let jitter = self.effective_jitter();
        Matrix::from_fn(n, n, |a, b| {
            let dx = coords[a][0] - coords[b][0];
            let dy = coords[a][1] - coords[b][1];
            let c = var * (-(dx * dx + dy * dy).sqrt() / (2.0 * self.length_scale)).exp();
            if a == b {
                c + jitter
            } else {
                c
            }
        })
    }

    fn validate(&self) -> Result<()> {
        if self.grid_size == 0 {
            return Err(Error::InvalidConfig("grid size must be positive".into()));
        }
        if !(self.sigma_u > 0.0) || !(self.length_scale > 0.0) {
            return Err(Error::InvalidConfig(
                "sigma_u and length scale must be positive".into(),
            ));
        }
        if self.effective_jitter() < 0.0 {
            return Err(Error::InvalidConfig("jitter must be non-negative".into()));
        }
        Ok(())
    }
}

/// 25 sensors on a uniform 5 × 5 sub-lattice of an `m × m` grid.
pub fn default_sensors(grid_size: usize) -> Result<Vec<usize>> {
    if grid_size < 5 {
        return Err(Error::InvalidConfig(format!(
            "a 5x5 sensor lattice needs a grid of at least 5x5, got {grid_size}"
        )));
    }
    let axis: Vec<usize> = (0..5).map(|k| (2 * k + 1) * grid_size / 10).collect();
    Ok(axis
        .iter()
        .flat_map(|&i| axis.iter().map(move |&j| i * grid_size + j))
        .collect())
}

/// Linear inverse problem `y = O u + η` with `u ~ N(0, C)` a grid GP and `O`
/// the selection of sensor nodes; `η ~ N(0, σ_η² I)`.
///
/// With no sensors the likelihood is flat and the posterior is the prior.
#[derive(Debug, Clone)]
pub struct GpLinearInverseTarget {
    config: GpGridConfig,
    prior_cov: Matrix,
    prior_chol: Cholesky<f64, Dyn>,
    prior_factor: Matrix,
    sensors: Vec<usize>,
    obs: Vector,
    noise_sd: f64,
}

impl GpLinearInverseTarget {
    pub fn new(config: GpGridConfig, sensors: Vec<usize>, obs: Vector, noise_sd: f64) -> Result<Self> {
        config.validate()?;
        check_dim("gp observations", sensors.len(), obs.len())?;
        let n = config.grid_size * config.grid_size;
        if let Some(&bad) = sensors.iter().find(|&&s| s >= n) {
            return Err(Error::InvalidConfig(format!(
                "sensor index {bad} is outside the {n}-node grid"
            )));
        }
        if !(noise_sd > 0.0 && noise_sd.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise sd must be positive, got {noise_sd}"
            )));
        }
        let prior_cov = config.covariance();
        let prior_chol = Cholesky::new(prior_cov.clone()).ok_or_else(|| {
            Error::Factorization(format!(
                "GP prior covariance is not positive-definite with jitter {:e}; raise the jitter",
                config.effective_jitter()
            ))
        })?;
        let prior_factor = prior_chol.l();
        Ok(Self {
            config,
            prior_cov,
            prior_chol,
            prior_factor,
            sensors,
            obs,
            noise_sd,
        })
    }

    /// Prior-only target (flat likelihood).
    pub fn flat(config: GpGridConfig) -> Result<Self> {
        Self::new(config, Vec::new(), Vector::zeros(0), 1.0)
    }

    /// Draw a true field from the prior and noisy observations at `sensors`
    /// with `σ_η = max_s u(s) / snr`. Returns the target and the true field.
    pub fn synthesize<R: Rng + ?Sized>(
        config: GpGridConfig,
        sensors: Vec<usize>,
        snr: f64,
        rng: &mut R,
    ) -> Result<(Self, Vector)> {
        if !(snr > 0.0) {
            return Err(Error::InvalidConfig("snr must be positive".into()));
        }
        let prior = Self::flat(config)?;
        let truth = prior.prior_sample(rng);
        let peak = truth.max();
        // A field that is negative everywhere has no meaningful peak; fall back to its magnitude.
        let scale = if peak > 0.0 { peak } else { truth.amax() };
        let noise_sd = scale / snr;
        let obs = Vector::from_iterator(
            sensors.len(),
            sensors.iter().map(|&s| {
                let eta: f64 = StandardNormal.sample(rng);
                truth[s] + noise_sd * eta
            }),
        );
        Ok((Self::new(config, sensors, obs, noise_sd)?, truth))
    }

    pub fn config(&self) -> &GpGridConfig {
        &self.config
    }

    pub fn prior_cov(&self) -> &Matrix {
        &self.prior_cov
    }

    pub fn sensors(&self) -> &[usize] {
        &self.sensors
    }

    pub fn observations(&self) -> &Vector {
        &self.obs
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    pub fn n_obs(&self) -> usize {
        self.sensors.len()
    }

    /// `L z` with `z ~ N(0, I)`.
    pub fn prior_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let n = self.dim();
        let z = Vector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
        &self.prior_factor * z
    }

    /// Gaussian log-likelihood `−Φ(u)` with normalising constants dropped.
    pub fn log_likelihood(&self, u: &Vector) -> Result<f64> {
        self.misfit(u).map(|m| -m)
    }

    fn residual(&self, u: &Vector) -> Vector {
        Vector::from_iterator(
            self.sensors.len(),
            self.sensors.iter().zip(self.obs.iter()).map(|(&s, y)| y - u[s]),
        )
    }
}

impl Target for GpLinearInverseTarget {
    fn dim(&self) -> usize {
        self.config.grid_size * self.config.grid_size
    }

    fn potential(&self, u: &Vector) -> Result<f64> {
        check_dim("gp_potential", self.dim(), u.len())?;
        let w = self
            .prior_factor
            .solve_lower_triangular(u)
            .ok_or(Error::NonFinite("gp prior solve"))?;
        Ok(0.5 * w.norm_squared() + self.misfit(u)?)
    }

    fn gradient(&self, u: &Vector) -> Result<Vector> {
        check_dim("gp_gradient", self.dim(), u.len())?;
        let mut grad = self.prior_chol.solve(u);
        let inv_var = 1.0 / (self.noise_sd * self.noise_sd);
        for (&s, r) in self.sensors.iter().zip(self.residual(u).iter()) {
            grad[s] -= r * inv_var;
        }
        Ok(grad)
    }
}

impl GaussianPriorTarget for GpLinearInverseTarget {
    fn prior_factor(&self) -> &Matrix {
        &self.prior_factor
    }

    fn misfit(&self, u: &Vector) -> Result<f64> {
        check_dim("gp_misfit", self.dim(), u.len())?;
        let r = self.residual(u);
        Ok(0.5 * r.norm_squared() / (self.noise_sd * self.noise_sd))
    }
}
