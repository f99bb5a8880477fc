use super::{check_finite, check_step, Optimizer};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::vector::RealVector;

/// Coefficients of a generic two-state optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsoParams<T> {
    pub h: T,
    pub k: T,
    pub l: T,
    pub m: T,
    pub q: T,
    pub z: T,
}

impl<T: Scalar> TsoParams<T> {
    pub fn new(h: T, k: T, l: T, m: T, q: T, z: T) -> Result<Self> {
        for (name, x) in [("h", h), ("k", k), ("l", l), ("m", m), ("q", q), ("z", z)] {
            check_finite(name, x)?;
        }
        Ok(Self { h, k, l, m, q, z })
    }
}

/// Two-state linear optimizer with an auxiliary buffer `a`:
///
/// ```text
/// a' ← h·a + k·θ + l·∇
/// θ' ← m·a + q·θ + z·∇
/// ```
///
/// `lr` scales the gradient coefficients `l` and `z`.
#[derive(Debug, Clone)]
pub struct Tso<T> {
    pub params: TsoParams<T>,
    a: RealVector<T>,
}

impl<T: Scalar> Tso<T> {
    pub fn new(params: TsoParams<T>, a0: RealVector<T>) -> Self {
        Self { params, a: a0 }
    }
}

impl<T: Scalar> Optimizer<T> for Tso<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.a.dim(), theta, grad, lr)?;
        let TsoParams { h, k, l, m, q, z } = self.params;
        let a = self
            .a
            .zip_map(theta, |a, t| h * a + k * t)?
            .zip_map(grad, |x, d| x + lr * l * d)?;
        let next = self
            .a
            .zip_map(theta, |a, t| m * a + q * t)?
            .zip_map(grad, |x, d| x + lr * z * d)?;
        self.a = a;
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "tso"
    }

    fn dim(&self) -> usize {
        self.a.dim()
    }
}
