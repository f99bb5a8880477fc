use super::{check_step, Optimizer};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::vector::RealVector;

/// Plain stochastic gradient descent: `θ ← θ - lr·∇`.
#[derive(Debug, Clone)]
pub struct Sgd {
    dim: usize,
}

impl Sgd {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl<T: Scalar> Optimizer<T> for Sgd {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.dim, theta, grad, lr)?;
        theta.zip_map(grad, |t, g| t - lr * g)
    }

    fn name(&self) -> &'static str {
        "sgd"
    }

    fn dim(&self) -> usize {
        self.dim
    }
}
