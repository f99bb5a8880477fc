use super::{check_finite, check_step, Optimizer};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::vector::RealVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnvParams<T> {
    pub gamma: T,
    pub beta1: T,
    pub beta2: T,
}

impl<T: Scalar> SnvParams<T> {
    /// User-supplied coefficients; only finiteness is checked.
    pub fn new(gamma: T, beta1: T, beta2: T) -> Result<Self> {
        check_finite("gamma", gamma)?;
        check_finite("beta1", beta1)?;
        check_finite("beta2", beta2)?;
        Ok(Self { gamma, beta1, beta2 })
    }
}

/// Synthesized Nesterov variant with two past iterates:
///
/// ```text
/// ξ' ← ξ - γ·∇ + β₁·(ξ - ξ_prev)
/// θ  ← ξ' + β₂·(ξ' - ξ)
/// ```
///
/// Both iterates start at the initial parameters.
#[derive(Debug, Clone)]
pub struct Snv<T> {
    pub params: SnvParams<T>,
    xi: RealVector<T>,
    xi_prev: RealVector<T>,
}

impl<T: Scalar> Snv<T> {
    pub fn new(params: SnvParams<T>, theta0: RealVector<T>) -> Self {
        Self {
            params,
            xi_prev: theta0.clone(),
            xi: theta0,
        }
    }
}

impl<T: Scalar> Optimizer<T> for Snv<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.xi.dim(), theta, grad, lr)?;
        let SnvParams { gamma, beta1, beta2 } = self.params;
        let velocity = self.xi.sub(&self.xi_prev)?;
        let xi_next = self
            .xi
            .zip_map(grad, |x, d| x - lr * gamma * d)?
            .zip_map(&velocity, |x, v| x + beta1 * v)?;
        let next = xi_next.zip_map(&self.xi, |xn, x| xn + beta2 * (xn - x))?;
        self.xi_prev = std::mem::replace(&mut self.xi, xi_next);
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "snv"
    }

    fn dim(&self) -> usize {
        self.xi.dim()
    }
}
