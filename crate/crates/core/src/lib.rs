//! Quasi-hyperbolic momentum (QHM) and QHAdam, the two-state optimizers they
//! relate to, closed-form parameter mappings between them, and analytical
//! oracles (discounted sums, variance factors, transition matrices, update
//! bounds).
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` aliases below name the common double-precision instantiations.
//! Problems and the experiment harness work in `f64`.

pub mod analysis;
pub mod conversions;
pub mod discounting;
pub mod error;
pub mod harness;
pub mod optimizers;
pub mod problems;
pub mod rng;
pub mod scalar;
pub mod schedule;
pub mod trajectory;
pub mod vector;

pub use error::{Error, Result};
pub use optimizers::Optimizer;
pub use rng::SeededRng;
pub use scalar::Scalar;
pub use schedule::{schedule_lr, LrSchedule};
pub use trajectory::TrajectoryRecord;
pub use vector::{vector_axpy, RealVector};

pub type Vector = RealVector<f64>;
pub type VectorF32 = RealVector<f32>;
pub type QhmF64 = optimizers::Qhm<f64>;
pub type QhmParamsF64 = optimizers::QhmParams<f64>;
pub type QhAdamF64 = optimizers::QhAdam<f64>;
pub type QhAdamParamsF64 = optimizers::QhAdamParams<f64>;
pub type PidF64 = optimizers::Pid<f64>;
pub type SnvF64 = optimizers::Snv<f64>;
pub type AccSgdF64 = optimizers::AccSgd<f64>;
pub type AggMoF64 = optimizers::AggMo<f64>;
pub type DiscountFunctionF64 = discounting::DiscountFunction<f64>;
pub type TransitionSpecF64 = analysis::TransitionSpec<f64>;
pub type BoundParamsF64 = analysis::BoundParams<f64>;
