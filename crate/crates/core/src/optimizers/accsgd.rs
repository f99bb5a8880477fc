use super::{check_positive, check_step, Optimizer};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector::RealVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccSgdParams<T> {
    pub delta: T,
    pub kappa: T,
    pub xi: T,
    pub eps: T,
}

impl<T: Scalar> AccSgdParams<T> {
    /// Enforces `δ > 0`, `κ > 1`, `ξ ≤ √κ` and `ε ∈ (0, 1)`.
    pub fn new(delta: T, kappa: T, xi: T, eps: T) -> Result<Self> {
        check_positive("delta", delta)?;
        if !(kappa.is_finite() && kappa > T::one()) {
            return Err(Error::infeasible(format!("kappa > 1 (got {kappa})")));
        }
        if !(xi.is_finite() && xi <= kappa.sqrt()) {
            return Err(Error::infeasible(format!(
                "xi <= sqrt(kappa) (got xi = {xi}, sqrt(kappa) = {})",
                kappa.sqrt()
            )));
        }
        if !(eps > T::zero() && eps < T::one()) {
            return Err(Error::infeasible(format!("0 < eps < 1 (got {eps})")));
        }
        Ok(Self { delta, kappa, xi, eps })
    }

    /// Weight `ε²ξ/κ` given to the fresh gradient step in the buffer update.
    pub fn buffer_mix(&self) -> T {
        self.eps * self.eps * self.xi / self.kappa
    }
}

/// Accelerated SGD for least squares, in the form whose per-coordinate
/// transition matrix is
///
/// ```text
/// [ 1-ε²ξ/κ              ε²ξ/κ                 -δεξ                0 ]
/// [ εξ(1-ε²ξ/κ)/(κ+εξ)   (κ+ε³ξ²/κ)/(κ+εξ)     -δ(κ+ε²ξ²)/(κ+εξ)   0 ]
/// ```
///
/// i.e.
///
/// ```text
/// w̄ ← (1-ε²ξ/κ)·w̄ + (ε²ξ/κ)·[w - (κδ/ε)·∇]
/// w ← κ/(κ+εξ)·[w - δ·∇] + εξ/(κ+εξ)·w̄
/// ```
///
/// Both buffers start at the initial parameters; `w` is the iterate.
#[derive(Debug, Clone)]
pub struct AccSgd<T> {
    pub params: AccSgdParams<T>,
    w_bar: RealVector<T>,
    w: RealVector<T>,
}

impl<T: Scalar> AccSgd<T> {
    pub fn new(params: AccSgdParams<T>, theta0: RealVector<T>) -> Self {
        Self {
            params,
            w_bar: theta0.clone(),
            w: theta0,
        }
    }
}

impl<T: Scalar> Optimizer<T> for AccSgd<T> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        check_step(self.w.dim(), theta, grad, lr)?;
        let AccSgdParams { delta, kappa, xi, eps } = self.params;
        let one = T::one();
        let mix = self.params.buffer_mix();
        let long_step = kappa * delta / eps * lr;
        let target = self.w.zip_map(grad, |w, d| w - long_step * d)?;
        let w_bar = self.w_bar.zip_map(&target, |b, t| (one - mix) * b + mix * t)?;
        let denom = kappa + eps * xi;
        let (keep, pull) = (kappa / denom, eps * xi / denom);
        let short = self.w.zip_map(grad, |w, d| w - lr * delta * d)?;
        let w = short.zip_map(&w_bar, |s, b| keep * s + pull * b)?;
        self.w_bar = w_bar;
        self.w = w.clone();
        Ok(w)
    }

    fn name(&self) -> &'static str {
        "accsgd"
    }

    fn dim(&self) -> usize {
        self.w.dim()
    }
}
