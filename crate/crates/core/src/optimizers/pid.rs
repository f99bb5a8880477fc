use super::{check_discount, check_finite, check_step, Optimizer};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::vector::RealVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains<T> {
    pub kp: T,
    pub ki: T,
    pub kd: T,
    pub beta: T,
}

impl<T: Scalar> PidGains<T> {
    pub fn new(kp: T, ki: T, kd: T, beta: T) -> Result<Self> {
        check_finite("kp", kp)?;
        check_finite("ki", ki)?;
        check_finite("kd", kd)?;
        check_discount("beta", beta)?;
        Ok(Self { kp, ki, kd, beta })
    }
}

/// PID-control optimizer. The error signal is the negative gradient; the
/// parameters are recomputed from the stored initial point every step:
///
/// ```text
/// e  = -∇
/// v ← β·v + (1-β)·(e - e_prev)
/// w ← w + e
/// θ ← θ₀ + kP·e + kI·w + kD·v
/// ```
#[derive(Debug, Clone)]
pub struct Pid<T> {
    pub gains: PidGains<T>,
    theta0: RealVector<T>,
    e_prev: RealVector<T>,
    w: RealVector<T>,
    v: RealVector<T>,
}

impl<T: Scalar> Pid<T> {
    pub fn new(gains: PidGains<T>, theta0: RealVector<T>) -> Self {
        let dim = theta0.dim();
        Self {
            gains,
            theta0,
            e_prev: RealVector::zeros(dim),
            w: RealVector::zeros(dim),
            v: RealVector::zeros(dim),
        }
    }

    /// Current derivative (D) term.
    pub fn derivative(&self) -> &RealVector<T> {
        &self.v
    }

    pub fn integral(&self) -> &RealVector<T> {
        &self.w
    }
}

impl<T: Scalar> Optimizer<T> for Pid<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.theta0.dim(), theta, grad, lr)?;
        let PidGains { kp, ki, kd, beta } = self.gains;
        let one = T::one();
        let e = grad.map(|d| -d)?;
        let diff = e.sub(&self.e_prev)?;
        let v = self.v.zip_map(&diff, |v, d| beta * v + (one - beta) * d)?;
        let w = self.w.add(&e)?;
        let control = e.zip_map(&w, |e, w| kp * e + ki * w)?.zip_map(&v, |c, v| c + kd * v)?;
        let next = self.theta0.zip_map(&control, |t0, c| t0 + lr * c)?;
        self.e_prev = e;
        self.w = w;
        self.v = v;
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "pid"
    }

    fn dim(&self) -> usize {
        self.theta0.dim()
    }
}
