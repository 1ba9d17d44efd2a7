use crate::autoencoder::{AffineLayer, Autoencoder};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{sigmoid, Matrix, Vector};
use crate::samplers::MassMatrix;
use crate::targets::{LogisticRegressionTarget, Target};

/// Gradient of the pulled-back potential `U_h(z) = U(ψ(z))`.
pub trait LatentPotential {
    fn latent_dim(&self) -> usize;

    fn latent_gradient(&self, z: &Vector) -> Result<Vector>;
}

impl<P: LatentPotential + ?Sized> LatentPotential for &P {
    fn latent_dim(&self) -> usize {
        (**self).latent_dim()
    }
    fn latent_gradient(&self, z: &Vector) -> Result<Vector> {
        (**self).latent_gradient(z)
    }
}

/// `J_ψ(z)ᵀ ∇U(ψ(z))` for any target.
pub fn latent_grad_u<T: Target + ?Sized>(target: &T, ae: &Autoencoder, z: &Vector) -> Result<Vector> {
    check_dim("latent_grad_u", ae.latent_dim(), z.len())?;
    let x = ae.decode(z)?;
    let g = target.gradient(&x)?;
    Ok(ae.decoder_jacobian(z)?.tr_mul(&g))
}

/// `J_ψp(p)ᵀ M⁻¹ ψ_p(p)`, the gradient of `K(ψ_p(p))`.
pub fn latent_grad_k(ae: &Autoencoder, p: &Vector, mass: &MassMatrix) -> Result<Vector> {
    let v = mass.inverse_apply(&ae.decode_momentum(p)?);
    Ok(ae.momentum_decoder_jacobian(p)?.tr_mul(&v))
}

/// Generic pull-back through the decoder; works with every target and
/// decoder depth.
#[derive(Debug, Clone, Copy)]
pub struct Pullback<'a, T: ?Sized> {
    pub target: &'a T,
    pub ae: &'a Autoencoder,
}

impl<'a, T: Target + ?Sized> Pullback<'a, T> {
    pub fn new(target: &'a T, ae: &'a Autoencoder) -> Result<Self> {
        check_dim("pullback", target.dim(), ae.ambient_dim())?;
        Ok(Self { target, ae })
    }
}

impl<T: Target + ?Sized> LatentPotential for Pullback<'_, T> {
    fn latent_dim(&self) -> usize {
        self.ae.latent_dim()
    }

    fn latent_gradient(&self, z: &Vector) -> Result<Vector> {
        latent_grad_u(self.target, self.ae, z)
    }
}

/// Logistic-regression pull-back with the decoder's output layer folded into
/// the design matrix.
///
/// With `ψ(z) = W a(z) + b` the linear predictor is `η = (XW) a + Xb`, so each
/// gradient costs `O(N h)` instead of `O(N D)`. The prior term uses
/// `WᵀW/σ²` and `Wᵀb/σ²`.
#[derive(Debug, Clone)]
pub struct LogisticPullback<'a> {
    hidden: Option<&'a AffineLayer>,
    xw: Matrix,
    xb: Vector,
    prior_gram: Matrix,
    prior_shift: Vector,
    labels: &'a Vector,
}

impl<'a> LogisticPullback<'a> {
    /// Fails unless the decoder has at most one hidden layer and a linear
    /// output layer.
    pub fn new(target: &'a LogisticRegressionTarget, ae: &'a Autoencoder) -> Result<Self> {
        check_dim("logistic pullback", target.dim(), ae.ambient_dim())?;
        let shallow = ae.shallow_decoder().ok_or_else(|| {
            Error::InvalidConfig("fast logistic pull-back needs a shallow decoder with linear output".into())
        })?;
        let w = &shallow.output.weight;
        let b = &shallow.output.bias;
        let s2 = target.prior_variance();
        Ok(Self {
            hidden: shallow.hidden,
            xw: target.design() * w,
            xb: target.design() * b,
            prior_gram: w.tr_mul(w) / s2,
            prior_shift: w.tr_mul(b) / s2,
            labels: target.labels(),
        })
    }
}

impl LatentPotential for LogisticPullback<'_> {
    fn latent_dim(&self) -> usize {
        match self.hidden {
            Some(h) => h.in_dim(),
            None => self.xw.ncols(),
        }
    }

    fn latent_gradient(&self, z: &Vector) -> Result<Vector> {
        check_dim("logistic pullback", self.latent_dim(), z.len())?;
        let (a, pre) = match self.hidden {
            Some(h) => {
                let pre = &h.weight * z + &h.bias;
                (pre.map(|v| h.activation.apply(v)), Some(pre))
            }
            None => (z.clone(), None),
        };
        let mut eta = self.xb.clone();
        eta.gemv(1.0, &self.xw, &a, 1.0);
        let resid = self.labels.zip_map(&eta, |y, e| y - sigmoid(e));
        let mut g = &self.prior_gram * &a + &self.prior_shift;
        g.gemv_tr(-1.0, &self.xw, &resid, 1.0);
        Ok(match (self.hidden, pre) {
            (Some(h), Some(pre)) => {
                let scaled = g.zip_map(&pre, |gi, p| gi * h.activation.derivative(p));
                h.weight.tr_mul(&scaled)
            }
            _ => g,
        })
    }
}

/// Gradient of the latent kinetic energy `K(ψ_p(p))`.
///
/// For shallow decoders `DᵀM⁻¹D` is precomputed from the output weights `D`.
#[derive(Debug, Clone)]
pub struct LatentKinetic<'a> {
    ae: &'a Autoencoder,
    mass: MassMatrix,
    fast: Option<(Option<&'a AffineLayer>, Matrix)>,
}

impl<'a> LatentKinetic<'a> {
    pub fn new(ae: &'a Autoencoder, mass: MassMatrix) -> Result<Self> {
        mass.validate(ae.ambient_dim())?;
        let fast = ae.shallow_decoder().map(|s| {
            let w = &s.output.weight;
            let gram = match &mass {
                MassMatrix::Identity => w.tr_mul(w),
                MassMatrix::Diagonal(m) => {
                    let mut scaled = w.clone();
                    for (mut row, mi) in scaled.row_iter_mut().zip(m.iter()) {
                        row /= *mi;
                    }
                    w.tr_mul(&scaled)
                }
            };
            (s.hidden, gram)
        });
        Ok(Self { ae, mass, fast })
    }

    pub fn mass(&self) -> &MassMatrix {
        &self.mass
    }

    pub fn gradient(&self, p: &Vector) -> Result<Vector> {
        match &self.fast {
            Some((None, gram)) => {
                check_dim("latent kinetic", gram.ncols(), p.len())?;
                Ok(gram * p)
            }
            Some((Some(h), gram)) => {
                check_dim("latent kinetic", h.in_dim(), p.len())?;
                let pre = &h.weight * p + &h.bias;
                let a = pre.map(|v| h.activation.apply(v));
                let g = (gram * a).zip_map(&pre, |gi, v| gi * h.activation.derivative(v));
                Ok(h.weight.tr_mul(&g))
            }
            None => latent_grad_k(self.ae, p, &self.mass),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::Activation;

    fn shallow_ae() -> Autoencoder {
        let e = Matrix::from_row_slice(2, 3, &[0.3, -0.5, 0.2, 0.8, 0.1, -0.4]);
        let d1 = Matrix::from_row_slice(4, 2, &[0.4, -0.2, 0.1, 0.9, -0.7, 0.3, 0.5, 0.5]);
        let d2 = Matrix::from_row_slice(3, 4, &[1.0, 0.2, -0.3, 0.5, -1.1, 0.4, 0.0, 0.6, 0.8, -0.2, 0.3, 0.1]);
        Autoencoder::new(
            vec![AffineLayer::new(e, Vector::from_vec(vec![0.1, -0.2]), Activation::Identity).unwrap()],
            vec![
                AffineLayer::new(d1, Vector::from_vec(vec![0.05, -0.1, 0.2, 0.0]), Activation::Tanh).unwrap(),
                AffineLayer::new(d2, Vector::from_vec(vec![0.3, -0.3, 0.1]), Activation::Identity).unwrap(),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn fast_logistic_matches_generic() {
        let ae = shallow_ae();
        let x = Matrix::from_row_slice(4, 3, &[1.0, 0.5, -0.3, 2.0, 0.7, -1.1, 0.0, 0.2, 0.9, -1.5, 0.4, 0.3]);
        let y = Vector::from_vec(vec![1.0, 0.0, 1.0, 1.0]);
        let t = LogisticRegressionTarget::new(x, y, 2.5).unwrap();
        let fast = LogisticPullback::new(&t, &ae).unwrap();
        let z = Vector::from_vec(vec![0.7, -0.4]);
        let a = fast.latent_gradient(&z).unwrap();
        let b = latent_grad_u(&t, &ae, &z).unwrap();
        assert!((a - b).amax() < 1e-12);
    }

    #[test]
    fn fast_kinetic_matches_generic() {
        let ae = shallow_ae();
        let p = Vector::from_vec(vec![-0.3, 1.2]);
        for mass in [
            MassMatrix::Identity,
            MassMatrix::Diagonal(Vector::from_vec(vec![2.0, 0.5, 1.5])),
        ] {
            let k = LatentKinetic::new(&ae, mass.clone()).unwrap();
            let a = k.gradient(&p).unwrap();
            let b = latent_grad_k(&ae, &p, &mass).unwrap();
            assert!((a - b).amax() < 1e-12);
        }
    }
}
