use super::{check_discount, check_step, check_unit_interval, Optimizer};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector::RealVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QhAdamParams<T> {
    pub alpha: T,
    pub eps: T,
    pub beta1: T,
    pub beta2: T,
    pub nu1: T,
    pub nu2: T,
    pub bias_correction: bool,
}

impl<T: Scalar> QhAdamParams<T> {
    pub fn new(alpha: T, eps: T, beta1: T, beta2: T, nu1: T, nu2: T) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= T::zero()) {
            return Err(Error::param("alpha", "must be finite and >= 0"));
        }
        if !(eps.is_finite() && eps >= T::zero()) {
            return Err(Error::param("eps", "must be finite and >= 0"));
        }
        check_discount("beta1", beta1)?;
        check_discount("beta2", beta2)?;
        check_unit_interval("nu1", nu1)?;
        check_unit_interval("nu2", nu2)?;
        Ok(Self {
            alpha,
            eps,
            beta1,
            beta2,
            nu1,
            nu2,
            bias_correction: true,
        })
    }

    /// The constants fixed in the QHAdam parameter sweeps:
    /// `α = 1e-3`, `ε = 1e-8`, `ν₂ = 1`, `β₂ = 0.999`.
    pub fn sweep_defaults(nu1: T, beta1: T) -> Result<Self> {
        Self::new(T::lit(1e-3), T::lit(1e-8), beta1, T::lit(0.999), nu1, T::one())
    }

    pub fn without_bias_correction(mut self) -> Self {
        self.bias_correction = false;
        self
    }
}

/// QHAdam: Adam with both moment estimates replaced by quasi-hyperbolic
/// mixtures of the estimate and the current gradient.
///
/// `ε` is added outside the square root. Bias correction divides the moment
/// buffers by `1 - β^{t+1}` where `t` counts completed steps.
#[derive(Debug, Clone)]
pub struct QhAdam<T> {
    pub params: QhAdamParams<T>,
    g: RealVector<T>,
    s: RealVector<T>,
    t: u64,
}

impl<T: Scalar> QhAdam<T> {
    pub fn new(params: QhAdamParams<T>, dim: usize) -> Self {
        Self {
            params,
            g: RealVector::zeros(dim),
            s: RealVector::zeros(dim),
            t: 0,
        }
    }

    /// Starts from given moment buffers and step count. `s` must be nonnegative.
    pub fn with_state(params: QhAdamParams<T>, g: RealVector<T>, s: RealVector<T>, t: u64) -> Result<Self> {
        g.check_dim(&s)?;
        if s.iter().any(|&x| x < T::zero()) {
            return Err(Error::param("s", "second-moment buffer must be nonnegative"));
        }
        Ok(Self { params, g, s, t })
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &RealVector<T> {
        &self.g
    }

    pub fn second_moment(&self) -> &RealVector<T> {
        &self.s
    }
}

fn correction<T: Scalar>(beta: T, t: u64) -> T {
    let exponent = i32::try_from(t + 1).unwrap_or(i32::MAX);
    T::one() - beta.powi(exponent)
}

impl<T: Scalar> Optimizer<T> for QhAdam<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.g.dim(), theta, grad, lr)?;
        let p = self.params;
        let one = T::one();
        let g = self.g.zip_map(grad, |b, d| p.beta1 * b + (one - p.beta1) * d)?;
        let s = self.s.zip_map(grad, |b, d| p.beta2 * b + (one - p.beta2) * (d * d))?;
        let (g_hat, s_hat) = if p.bias_correction {
            let c1 = correction(p.beta1, self.t);
            let c2 = correction(p.beta2, self.t);
            (g.map(|x| x / c1)?, s.map(|x| x / c2)?)
        } else {
            (g.clone(), s.clone())
        };
        let numer = grad.zip_map(&g_hat, |d, m| (one - p.nu1) * d + p.nu1 * m)?;
        let denom = grad.zip_map(&s_hat, |d, v| ((one - p.nu2) * (d * d) + p.nu2 * v).sqrt() + p.eps)?;
        let update = numer.zip_map(&denom, |n, d| n / d)?;
        let next = theta.zip_map(&update, |t, u| t - lr * u)?;
        self.g = g;
        self.s = s;
        self.t += 1;
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "qhadam"
    }

    fn dim(&self) -> usize {
        self.g.dim()
    }
}

/// Bias-corrected Adam, written out independently of [`QhAdam`].
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    m: RealVector<T>,
    v: RealVector<T>,
    t: u64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(beta1: T, beta2: T, eps: T, dim: usize) -> Result<Self> {
        check_discount("beta1", beta1)?;
        check_discount("beta2", beta2)?;
        Ok(Self {
            beta1,
            beta2,
            eps,
            m: RealVector::zeros(dim),
            v: RealVector::zeros(dim),
            t: 0,
        })
    }

    pub fn with_state(beta1: T, beta2: T, eps: T, m: RealVector<T>, v: RealVector<T>, t: u64) -> Result<Self> {
        let mut adam = Self::new(beta1, beta2, eps, m.dim())?;
        m.check_dim(&v)?;
        adam.m = m;
        adam.v = v;
        adam.t = t;
        Ok(adam)
    }
}

impl<T: Scalar> Optimizer<T> for Adam<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.m.dim(), theta, grad, lr)?;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let one = T::one();
        let m = self.m.zip_map(grad, |m, d| b1 * m + (one - b1) * d)?;
        let v = self.v.zip_map(grad, |v, d| b2 * v + (one - b2) * (d * d))?;
        let c1 = correction(b1, self.t);
        let c2 = correction(b2, self.t);
        let m_hat = m.map(|x| x / c1)?;
        let v_hat = v.map(|x| x / c2)?;
        let update = m_hat.zip_map(&v_hat, |mh, vh| mh / (vh.sqrt() + eps))?;
        let next = theta.zip_map(&update, |t, u| t - lr * u)?;
        self.m = m;
        self.v = v;
        self.t += 1;
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "adam"
    }

    fn dim(&self) -> usize {
        self.m.dim()
    }
}

/// RMSProp without bias correction: `s ← β₂·s + (1-β₂)·∇²`, `θ ← θ - lr·∇/(√s + ε)`.
#[derive(Debug, Clone)]
pub struct RmsPropStyle<T> {
    pub beta2: T,
    pub eps: T,
    s: RealVector<T>,
}

impl<T: Scalar> RmsPropStyle<T> {
    pub fn with_state(beta2: T, eps: T, s: RealVector<T>) -> Result<Self> {
        check_discount("beta2", beta2)?;
        Ok(Self { beta2, eps, s })
    }
}

impl<T: Scalar> Optimizer<T> for RmsPropStyle<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.s.dim(), theta, grad, lr)?;
        let (b2, eps) = (self.beta2, self.eps);
        let s = self.s.zip_map(grad, |s, d| b2 * s + (T::one() - b2) * (d * d))?;
        let update = grad.zip_map(&s, |d, s| d / (s.sqrt() + eps))?;
        let next = theta.zip_map(&update, |t, u| t - lr * u)?;
        self.s = s;
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "rmsprop"
    }

    fn dim(&self) -> usize {
        self.s.dim()
    }
}

/// NAdam in the simplified form without bias correction: the first moment is
/// replaced by the look-ahead `(1-β₁)·∇ + β₁·m`.
#[derive(Debug, Clone)]
pub struct NAdamStyle<T> {
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    m: RealVector<T>,
    v: RealVector<T>,
}

impl<T: Scalar> NAdamStyle<T> {
    pub fn with_state(beta1: T, beta2: T, eps: T, m: RealVector<T>, v: RealVector<T>) -> Result<Self> {
        check_discount("beta1", beta1)?;
        check_discount("beta2", beta2)?;
        m.check_dim(&v)?;
        Ok(Self {
            beta1,
            beta2,
            eps,
            m,
            v,
        })
    }
}

impl<T: Scalar> Optimizer<T> for NAdamStyle<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.m.dim(), theta, grad, lr)?;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let one = T::one();
        let m = self.m.zip_map(grad, |m, d| b1 * m + (one - b1) * d)?;
        let v = self.v.zip_map(grad, |v, d| b2 * v + (one - b2) * (d * d))?;
        let look_ahead = grad.zip_map(&m, |d, m| (one - b1) * d + b1 * m)?;
        let update = look_ahead.zip_map(&v, |n, v| n / (v.sqrt() + eps))?;
        let next = theta.zip_map(&update, |t, u| t - lr * u)?;
        self.m = m;
        self.v = v;
        Ok(next)
    }

    fn name(&self) -> &'static str {
        "nadam"
    }

    fn dim(&self) -> usize {
        self.m.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_corrected_step_has_magnitude_lr() {
        let p = QhAdamParams::new(1.0f64, 0.0, 0.9, 0.999, 1.0, 1.0).unwrap();
        let mut opt = QhAdam::new(p, 3);
        let theta = RealVector::new(vec![0.0, 1.0, -2.0]).unwrap();
        let grad = RealVector::new(vec![3.0, -0.01, 1e-5]).unwrap();
        let next = opt.step(&theta, &grad, 0.25).unwrap();
        for i in 0..3 {
            assert!(((next[i] - theta[i]).abs() - 0.25f64).abs() < 1e-12);
        }
        assert_eq!(opt.steps_taken(), 1);
    }

    #[test]
    fn zero_gradient_keeps_theta() {
        let p = QhAdamParams::new(1e-3, 1e-8, 0.9, 0.999, 0.7, 1.0).unwrap();
        let mut opt = QhAdam::new(p, 2);
        let theta = RealVector::new(vec![0.5, -0.5]).unwrap();
        let zero = RealVector::zeros(2);
        assert_eq!(opt.step(&theta, &zero, 1e-3).unwrap(), theta);
    }

    #[test]
    fn second_moment_stays_nonnegative() {
        let p = QhAdamParams::new(1e-3, 1e-8, 0.9, 0.99, 0.7, 0.5).unwrap();
        let mut opt = QhAdam::new(p, 2);
        let mut theta = RealVector::new(vec![0.5, -0.5]).unwrap();
        for k in 0..50 {
            let grad = RealVector::new(vec![(k as f64).sin(), -(k as f64).cos()]).unwrap();
            theta = opt.step(&theta, &grad, 1e-3).unwrap();
            assert!(opt.second_moment().iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(QhAdamParams::new(1.0, 0.0, 1.0, 0.9, 1.0, 1.0).is_err());
        assert!(QhAdamParams::new(1.0, -1.0, 0.5, 0.9, 1.0, 1.0).is_err());
        assert!(QhAdamParams::new(1.0, 0.0, 0.5, 0.9, 1.5, 1.0).is_err());
        let g = RealVector::zeros(1);
        let s = RealVector::new(vec![-1.0]).unwrap();
        let p = QhAdamParams::new(1.0, 0.0, 0.5, 0.9, 1.0, 1.0).unwrap();
        assert!(QhAdam::with_state(p, g, s, 0).is_err());
    }
}
