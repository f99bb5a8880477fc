use super::{check_discount, check_finite, check_positive, check_step, check_unit_interval, Optimizer};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::vector::RealVector;

/// Hyperparameters of quasi-hyperbolic momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QhmParams<T> {
    pub alpha: T,
    pub nu: T,
    pub beta: T,
}

impl<T: Scalar> QhmParams<T> {
    /// Validated parameters: `α > 0`, `ν ∈ [0,1]`, `β ∈ [0,1)`.
    pub fn new(alpha: T, nu: T, beta: T) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_unit_interval("nu", nu)?;
        check_discount("beta", beta)?;
        Ok(Self { alpha, nu, beta })
    }

    /// Like [`QhmParams::new`] but admits any finite `ν`. The update rule is
    /// well defined for all real `ν`; this exists for mappings (An-PID) whose
    /// image lies above `ν = 1`.
    pub fn extended(alpha: T, nu: T, beta: T) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_finite("nu", nu)?;
        check_discount("beta", beta)?;
        Ok(Self { alpha, nu, beta })
    }
}

/// Quasi-hyperbolic momentum:
///
/// ```text
/// g ← β·g + (1-β)·∇
/// θ ← θ - lr·[(1-ν)·∇ + ν·g]
/// ```
#[derive(Debug, Clone)]
pub struct Qhm<T> {
    pub params: QhmParams<T>,
    g: RealVector<T>,
}

impl<T: Scalar> Qhm<T> {
    pub fn new(params: QhmParams<T>, dim: usize) -> Self {
        Self {
            params,
            g: RealVector::zeros(dim),
        }
    }

    /// Starts from a nonzero momentum buffer.
    pub fn with_buffer(params: QhmParams<T>, g: RealVector<T>) -> Self {
        Self { params, g }
    }

    pub fn buffer(&self) -> &RealVector<T> {
        &self.g
    }
}

impl<T: Scalar> Optimizer<T> for Qhm<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.g.dim(), theta, grad, lr)?;
        let QhmParams { nu, beta, .. } = self.params;
        let one = T::one();
        let g = self.g.zip_map(grad, |b, d| beta * b + (one - beta) * d)?;
        let direction = grad.zip_map(&g, |d, b| (one - nu) * d + nu * b)?;
        let next = theta.zip_map(&direction, |t, u| t - lr * u)?;
        self.g = g;
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "qhm"
    }

    fn dim(&self) -> usize {
        self.g.dim()
    }
}
