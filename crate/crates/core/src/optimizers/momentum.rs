use super::{check_discount, check_step, Optimizer};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::vector::RealVector;

/// Dampened (normalized) momentum: `g ← β·g + (1-β)·∇`, `θ ← θ - lr·g`.
#[derive(Debug, Clone)]
pub struct Momentum<T> {
    pub beta: T,
    g: RealVector<T>,
}

impl<T: Scalar> Momentum<T> {
    pub fn new(beta: T, dim: usize) -> Result<Self> {
        check_discount("beta", beta)?;
        Ok(Self {
            beta,
            g: RealVector::zeros(dim),
        })
    }

    pub fn with_buffer(beta: T, g: RealVector<T>) -> Result<Self> {
        check_discount("beta", beta)?;
        Ok(Self { beta, g })
    }

    pub fn buffer(&self) -> &RealVector<T> {
        &self.g
    }
}

impl<T: Scalar> Optimizer<T> for Momentum<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.g.dim(), theta, grad, lr)?;
        let beta = self.beta;
        let g = self.g.zip_map(grad, |b, d| beta * b + (T::one() - beta) * d)?;
        let next = theta.zip_map(&g, |t, b| t - lr * b)?;
        self.g = g;
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "momentum"
    }

    fn dim(&self) -> usize {
        self.g.dim()
    }
}

/// Undampened momentum as found in most deep learning libraries:
/// `g ← β·g + ∇`, `θ ← θ - lr·g`.
#[derive(Debug, Clone)]
pub struct UnnormalizedMomentum<T> {
    pub beta: T,
    g: RealVector<T>,
}

impl<T: Scalar> UnnormalizedMomentum<T> {
    pub fn new(beta: T, dim: usize) -> Result<Self> {
        check_discount("beta", beta)?;
        Ok(Self {
            beta,
            g: RealVector::zeros(dim),
        })
    }
}

impl<T: Scalar> Optimizer<T> for UnnormalizedMomentum<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.g.dim(), theta, grad, lr)?;
        let beta = self.beta;
        let g = self.g.zip_map(grad, |b, d| beta * b + d)?;
        let next = theta.zip_map(&g, |t, b| t - lr * b)?;
        self.g = g;
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "momentum-unnormalized"
    }

    fn dim(&self) -> usize {
        self.g.dim()
    }
}

/// Nesterov's accelerated gradient in dampened form:
/// `g ← β·g + (1-β)·∇`, `θ ← θ - lr·[(1-β)·∇ + β·g]`.
#[derive(Debug, Clone)]
pub struct Nag<T> {
    pub beta: T,
    g: RealVector<T>,
}

impl<T: Scalar> Nag<T> {
    pub fn new(beta: T, dim: usize) -> Result<Self> {
        check_discount("beta", beta)?;
        Ok(Self {
            beta,
            g: RealVector::zeros(dim),
        })
    }

    pub fn with_buffer(beta: T, g: RealVector<T>) -> Result<Self> {
        check_discount("beta", beta)?;
        Ok(Self { beta, g })
    }
}

impl<T: Scalar> Optimizer<T> for Nag<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.g.dim(), theta, grad, lr)?;
        let beta = self.beta;
        let one = T::one();
        let g = self.g.zip_map(grad, |b, d| beta * b + (one - beta) * d)?;
        let look_ahead = grad.zip_map(&g, |d, b| (one - beta) * d + beta * b)?;
        let next = theta.zip_map(&look_ahead, |t, u| t - lr * u)?;
        self.g = g;
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "nag"
    }

    fn dim(&self) -> usize {
        self.g.dim()
    }
}
