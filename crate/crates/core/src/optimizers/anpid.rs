use super::{check_positive, check_step, Optimizer};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector::RealVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnPidParams<T> {
    pub r: T,
    pub kd: T,
    pub beta: T,
}

impl<T: Scalar> AnPidParams<T> {
    pub fn new(r: T, kd: T, beta: T) -> Result<Self> {
        check_positive("r", r)?;
        check_positive("kd", kd)?;
        if !(beta > T::zero() && beta < T::one()) {
            return Err(Error::param("beta", format!("{beta} outside (0, 1)")));
        }
        Ok(Self { r, kd, beta })
    }
}

/// Incremental PID variant whose control signal is the parameter change.
/// Its D term tracks the negated error difference:
///
/// ```text
/// e  = -∇
/// v ← β·v - (1-β)·(e - e_prev)
/// w ← β·w + r·e
/// θ ← θ + w + kD·v
/// ```
///
/// `lr` scales both `r` and `kD`.
#[derive(Debug, Clone)]
pub struct AnPid<T> {
    pub params: AnPidParams<T>,
    e_prev: RealVector<T>,
    w: RealVector<T>,
    v: RealVector<T>,
}

impl<T: Scalar> AnPid<T> {
    pub fn new(params: AnPidParams<T>, dim: usize) -> Self {
        Self {
            params,
            e_prev: RealVector::zeros(dim),
            w: RealVector::zeros(dim),
            v: RealVector::zeros(dim),
        }
    }
}

impl<T: Scalar> Optimizer<T> for AnPid<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.w.dim(), theta, grad, lr)?;
        let AnPidParams { r, kd, beta } = self.params;
        let one = T::one();
        let e = grad.map(|d| -d)?;
        let diff = e.sub(&self.e_prev)?;
        let v = self.v.zip_map(&diff, |v, d| beta * v - (one - beta) * d)?;
        let w = self.w.zip_map(&e, |w, e| beta * w + lr * r * e)?;
        let u = w.zip_map(&v, |w, v| w + lr * kd * v)?;
        let next = theta.add(&u)?;
        self.e_prev = e;
        self.w = w;
        self.v = v;
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "anpid"
    }

    fn dim(&self) -> usize {
        self.w.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> RealVector<f64> {
        RealVector::scalar(x).unwrap()
    }

    #[test]
    fn first_step_cancels() {
        // e = -1, w = -0.1, v = +0.1 (negated difference), u = 0
        let p = AnPidParams::new(0.1, 1.0, 0.9).unwrap();
        let mut opt = AnPid::new(p, 1);
        let next = opt.step(&s(0.0), &s(1.0), 1.0).unwrap();
        assert!(next[0].abs() < 1e-16);
        assert!((opt.w[0] + 0.1).abs() < 1e-16);
        assert!((opt.v[0] - 0.1).abs() < 1e-16);
    }

    #[test]
    fn zero_gradient_fixed_point() {
        let p = AnPidParams::new(0.1, 1.0, 0.9).unwrap();
        let mut opt = AnPid::new(p, 1);
        let mut theta = s(4.0);
        for _ in 0..10 {
            theta = opt.step(&theta, &s(0.0), 1.0).unwrap();
        }
        assert_eq!(theta[0], 4.0);
    }

    #[test]
    fn parameter_checks() {
        assert!(AnPidParams::new(0.0, 1.0, 0.5).is_err());
        assert!(AnPidParams::new(0.1, 0.0, 0.5).is_err());
        assert!(AnPidParams::new(0.1, 1.0, 0.0).is_err());
        assert!(AnPidParams::new(0.1, 1.0, 1.0).is_err());
    }
}
