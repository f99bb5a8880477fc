//! Single-step update rules for the QHM family and its relatives.
//!
//! Every optimizer owns its buffers and implements [`Optimizer::step`], which
//! validates its inputs before touching any state. The `lr` argument is the
//! step size for the α-parameterized families (SGD, momentum, NAG, QHM, Adam,
//! QHAdam). Families parameterized by gains (PID, An-PID, SNV, AccSGD, AggMo)
//! treat `lr` as a multiplier on those gains, so `lr = 1` runs them exactly as
//! configured.

mod accsgd;
mod adam;
mod aggmo;
mod anpid;
mod momentum;
mod pid;
mod qhm;
mod sgd;
mod snv;
mod tso;

pub use accsgd::{AccSgd, AccSgdParams};
pub use adam::{Adam, NAdamStyle, QhAdam, QhAdamParams, RmsPropStyle};
pub use aggmo::AggMo;
pub use anpid::{AnPid, AnPidParams};
pub use momentum::{Momentum, Nag, UnnormalizedMomentum};
pub use pid::{Pid, PidGains};
pub use qhm::{Qhm, QhmParams};
pub use sgd::Sgd;
pub use snv::{Snv, SnvParams};
pub use tso::{Tso, TsoParams};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector::RealVector;

pub trait Optimizer<T: Scalar>: Send {
    /// Advances one step from `theta` using `grad`; returns the new parameters.
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>>;

    fn name(&self) -> &'static str;

    /// Parameter dimension this optimizer's buffers were built for.
    fn dim(&self) -> usize;
}

impl<T: Scalar> Optimizer<T> for Box<dyn Optimizer<T>> {
    fn step(&mut self, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<RealVector<T>> {
        (**self).step(theta, grad, lr)
    }

    fn name(&self) -> &'static str {
        (**self).name()
    }

    fn dim(&self) -> usize {
        (**self).dim()
    }
}

pub(crate) fn check_step<T: Scalar>(dim: usize, theta: &RealVector<T>, grad: &RealVector<T>, lr: T) -> Result<()> {
    if theta.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: theta.dim(),
        });
    }
    if grad.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: grad.dim(),
        });
    }
    if !lr.is_finite() {
        return Err(Error::NonFinite { what: "learning rate" });
    }
    if lr <= T::zero() {
        return Err(Error::param("lr", "must be > 0"));
    }
    Ok(())
}

pub(crate) fn check_unit_interval<T: Scalar>(name: &'static str, x: T) -> Result<()> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::param(name, format!("{x} outside [0, 1]")));
    }
    Ok(())
}

pub(crate) fn check_discount<T: Scalar>(name: &'static str, x: T) -> Result<()> {
    if !(x >= T::zero() && x < T::one()) {
        return Err(Error::param(name, format!("{x} outside [0, 1)")));
    }
    Ok(())
}

pub(crate) fn check_positive<T: Scalar>(name: &'static str, x: T) -> Result<()> {
    if !(x.is_finite() && x > T::zero()) {
        return Err(Error::param(name, format!("{x} must be finite and > 0")));
    }
    Ok(())
}

pub(crate) fn check_finite<T: Scalar>(name: &'static str, x: T) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::param(name, format!("{x} is not finite")));
    }
    Ok(())
}
