//! `sampler check`: a quick run of the library's core invariants on small
//! problems. Prints one PASS/FAIL line per check.

use latentmc_core::autoencoder::{pca_fit, Autoencoder};
use latentmc_core::diagnostics::ess;
use latentmc_core::linalg::gramian_volume;
use latentmc_core::samplers::{
    ae_hmc_step, hmc_step, leapfrog_ambient, pcn_step, reversibility_check, PhaseState, SamplerConfig,
};
use latentmc_core::targets::{GaussianTarget, GpGridConfig, GpLinearInverseTarget, LogisticRegressionTarget, Target};
use latentmc_core::{Matrix, Vector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::experiment::stream;

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn reference_sigma() -> Matrix {
    Matrix::from_row_slice(3, 3, &[1.0, 0.95, 0.7, 0.95, 1.0, 0.5, 0.7, 0.5, 1.0])
}

fn normal_vec(n: usize, rng: &mut impl Rng) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Largest relative error of the analytic gradient against central
/// differences at a few random points.
fn gradient_error(t: &dyn Target, rng: &mut impl Rng, scale: f64) -> latentmc_core::Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let q = normal_vec(t.dim(), rng) * scale;
        let g = t.gradient(&q)?;
        for j in 0..t.dim() {
            let h = 1e-5 * q[j].abs().max(1.0);
            let (mut up, mut dn) = (q.clone(), q.clone());
            up[j] += h;
            dn[j] -= h;
            let fd = (t.potential(&up)? - t.potential(&dn)?) / (2.0 * h);
            worst = worst.max((g[j] - fd).abs() / g[j].abs().max(1.0));
        }
    }
    Ok(worst)
}

fn check(name: &'static str, f: impl FnOnce() -> latentmc_core::Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

pub fn run_checks() -> Vec<CheckResult> {
    let mut rng = stream(7, 0);
    let mut out = Vec::new();

    out.push(check("target gradients match finite differences", || {
        let gauss = GaussianTarget::centered(reference_sigma())?;
        let x = Matrix::from_fn(30, 6, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = Vector::from_fn(30, |i, _| (i % 2) as f64);
        let logit = LogisticRegressionTarget::new(x, y, 4.0)?;
        let gp = GpLinearInverseTarget::new(
            GpGridConfig { grid_size: 5, ..Default::default() },
            vec![0, 7, 18],
            Vector::from_vec(vec![0.3, -0.1, 0.8]),
            0.2,
        )?;
        let mut worst: f64 = 0.0;
        for t in [&gauss as &dyn Target, &logit, &gp] {
            worst = worst.max(gradient_error(t, &mut rng, 0.5)?);
        }
        Ok((worst < 1e-5, format!("max rel. err {worst:.2e}")))
    }));

    out.push(check("ambient leapfrog is reversible", || {
        let t = GaussianTarget::centered(reference_sigma())?;
        let s = PhaseState::ambient(normal_vec(3, &mut rng), normal_vec(3, &mut rng))?;
        let mass = Default::default();
        let fwd = leapfrog_ambient(&t, &s, 0.05, 20, &mass)?.state;
        let flipped = PhaseState::ambient(fwd.q, -fwd.p)?;
        let back = leapfrog_ambient(&t, &flipped, 0.05, 20, &mass)?.state;
        let err = (&back.q - &s.q).amax().max((&back.p + &s.p).amax());
        Ok((err < 1e-10, format!("defect {err:.2e}")))
    }));

    out.push(check("PCA proposal map is reversible", || {
        let t = GaussianTarget::centered(reference_sigma())?;
        let draws = Matrix::from_fn(200, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let ae = pca_fit(&(draws * reference_sigma()), 2)?;
        let q = ae.decode(&normal_vec(2, &mut rng))?;
        // Momentum on the principal plane, where the map is an involution.
        let p = ae.decode_momentum(&ae.encode_momentum(&normal_vec(3, &mut rng))?)?;
        let cfg = SamplerConfig { step_size: 0.1, n_leapfrog: 15, ..Default::default() };
        let err = reversibility_check(&t, &ae, &PhaseState::ambient(q, p)?, &cfg)?;
        Ok((err < 1e-8, format!("defect {err:.2e}")))
    }));

    out.push(check("identity autoencoder reproduces HMC exactly", || {
        let t = GaussianTarget::centered(reference_sigma())?;
        let ae = Autoencoder::identity(3);
        let cfg = SamplerConfig { step_size: 0.2, ..Default::default() };
        let (mut r1, mut r2) = (stream(11, 1), stream(11, 1));
        let (mut a, mut b) = (Vector::zeros(3), Vector::zeros(3));
        for _ in 0..50 {
            a = hmc_step(&t, &a, &cfg, &mut r1)?.position;
            b = ae_hmc_step(&t, &ae, &b, &cfg, &mut r2)?.position;
            if a != b {
                return Ok((false, "trajectories differ".into()));
            }
        }
        Ok((true, "50 identical steps".into()))
    }));

    out.push(check("PCA volume factor is zero", || {
        let t = GaussianTarget::centered(reference_sigma())?;
        let draws = Matrix::from_fn(200, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let ae = pca_fit(&(draws * reference_sigma()), 2)?;
        let cfg = SamplerConfig { step_size: 0.2, ..Default::default() };
        let mut q = ae.decode(&Vector::zeros(2))?;
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let o = ae_hmc_step(&t, &ae, &q, &cfg, &mut rng)?;
            worst = worst.max(o.log_volume_factor.abs());
            q = o.position;
        }
        Ok((worst < 1e-10, format!("max |log volume| {worst:.2e}")))
    }));

    out.push(check("Gramian volume of a known matrix", || {
        let j = Matrix::from_row_slice(3, 2, &[3.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        let v = gramian_volume(&j)?;
        Ok(((v - 6.0).abs() < 1e-12, format!("{v}")))
    }));

    out.push(check("pCN accepts every move under a flat likelihood", || {
        let t = GpLinearInverseTarget::flat(GpGridConfig::default())?;
        let cfg = SamplerConfig { pcn_step: 1.0, ..Default::default() };
        let mut q = Vector::zeros(t.dim());
        let mut accepted = 0;
        for _ in 0..200 {
            let o = pcn_step(&t, &q, &cfg, &mut rng)?;
            accepted += o.accepted as usize;
            q = o.position;
        }
        Ok((accepted == 200, format!("{accepted}/200")))
    }));

    out.push(check("ESS of AR(1) with coefficient 0.5 is n/3", || {
        let n = 100_000;
        let mut x = 0.0;
        let series: Vec<f64> = (0..n)
            .map(|_| {
                x = 0.5 * x + rng.sample::<f64, _>(StandardNormal);
                x
            })
            .collect();
        let r = ess(&series)?.ess / n as f64;
        Ok(((r - 1.0 / 3.0).abs() < 0.1 / 3.0, format!("ESS/n = {r:.4}")))
    }));

    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_quick_checks_pass() {
        for c in super::run_checks() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
