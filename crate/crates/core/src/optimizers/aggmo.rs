use super::{check_discount, check_positive, check_step, Optimizer};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector::RealVector;

/// Aggregated momentum: `K` unnormalized buffers `g_i ← β_i·g_i + ∇` combined as
/// `θ ← θ - (1/K)·Σ γ_i·g_i`. The standard form shares one `γ` across buffers.
#[derive(Debug, Clone)]
pub struct AggMo<T> {
    betas: Vec<T>,
    gammas: Vec<T>,
    buffers: Vec<RealVector<T>>,
}

impl<T: Scalar> AggMo<T> {
    pub fn standard(gamma: T, betas: Vec<T>, dim: usize) -> Result<Self> {
        let gammas = vec![gamma; betas.len()];
        Self::extended(betas, gammas, dim)
    }

    /// One rate per buffer. Rates may be zero but not negative.
    pub fn extended(betas: Vec<T>, gammas: Vec<T>, dim: usize) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::Empty { what: "aggmo betas" });
        }
        if betas.len() != gammas.len() {
            return Err(Error::InvalidSpec(format!(
                "{} betas but {} gammas",
                betas.len(),
                gammas.len()
            )));
        }
        for &b in &betas {
            check_discount("beta", b)?;
        }
        for &g in &gammas {
            if g != T::zero() {
                check_positive("gamma", g)?;
            }
        }
        let buffers = vec![RealVector::zeros(dim); betas.len()];
        Ok(Self { betas, gammas, buffers })
    }

    pub fn k(&self) -> usize {
        self.betas.len()
    }
}

impl<T: Scalar> Optimizer<T> for AggMo<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.buffers[0].dim(), theta, grad, lr)?;
        let k = T::lit(self.k() as f64);
        let buffers = self
            .buffers
            .iter()
            .zip(&self.betas)
            .map(|(g, &b)| g.zip_map(grad, |g, d| b * g + d))
            .collect::<Result<Vec<_>>>()?;
        let mut combined = RealVector::zeros(theta.dim());
        for (g, &gamma) in buffers.iter().zip(&self.gammas) {
            combined = RealVector::axpy(gamma, g, &combined)?;
        }
        let next = theta.zip_map(&combined, |t, c| t - lr * c / k)?;
        self.buffers = buffers;
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "aggmo"
    }

    fn dim(&self) -> usize {
        self.buffers[0].dim()
    }
}
