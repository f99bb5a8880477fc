//! Discount functions and the weighted moving averages built on them.
//!
//! Sequences are chronological: `xs[0]` is the oldest element and the last
//! element is the most recent. A discount weight `δ(i)` multiplies the element
//! `i` steps in the past, so `δ(0)` always applies to the newest element.

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::scalar::Scalar;
use crate::vector::RealVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiscountFunction<T> {
    /// `δ(i) = (1-β)·β^i`
    Exponential { beta: T },
    /// `δ(i) = c / (1 + k·i)`
    Hyperbolic { c: T, k: T },
    /// `δ(0) = 1-νβ`, `δ(i) = ν(1-β)·β^i` for `i > 0`
    QuasiHyperbolic { nu: T, beta: T },
}

fn check_beta<T: Scalar>(beta: T) -> Result<()> {
    if !(beta.is_finite() && beta.abs() < T::one()) {
        return Err(Error::param("beta", "must lie in (-1, 1)"));
    }
    Ok(())
}

impl<T: Scalar> DiscountFunction<T> {
    pub fn exponential(beta: T) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self::Exponential { beta })
    }

    pub fn hyperbolic(c: T, k: T) -> Result<Self> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(Error::param("c", "must be finite and > 0"));
        }
        if !(k > T::zero() && k.is_finite()) {
            return Err(Error::param("k", "must be finite and > 0"));
        }
        Ok(Self::Hyperbolic { c, k })
    }

    pub fn quasi_hyperbolic(nu: T, beta: T) -> Result<Self> {
        check_beta(beta)?;
        if !nu.is_finite() {
            return Err(Error::NonFinite { what: "nu" });
        }
        Ok(Self::QuasiHyperbolic { nu, beta })
    }

    /// Weight applied to the element `i` steps in the past.
    pub fn weight(&self, i: usize) -> T {
        match *self {
            Self::Exponential { beta } => (T::one() - beta) * powu(beta, i),
            Self::Hyperbolic { c, k } => c / (T::one() + k * T::lit(i as f64)),
            Self::QuasiHyperbolic { nu, beta } => {
                if i == 0 {
                    T::one() - nu * beta
                } else {
                    nu * (T::one() - beta) * powu(beta, i)
                }
            }
        }
    }

    /// `Σ_{i=0}^{n} δ(i)`.
    pub fn partial_sum(&self, n: usize) -> T {
        (0..=n).fold(T::zero(), |acc, i| acc + self.weight(i))
    }
}

pub(crate) fn powu<T: Scalar>(x: T, n: usize) -> T {
    match i32::try_from(n) {
        Ok(k) => x.powi(k),
        Err(_) => x.powf(T::lit(n as f64)),
    }
}

pub fn discount_weight<T: Scalar>(f: &DiscountFunction<T>, i: usize) -> T {
    f.weight(i)
}

/// `Σ_{i=0}^{t} δ(i)·x_{t-i}` where `x_t` is the last element of `xs`.
pub fn discounted_sum<T: Scalar>(f: &DiscountFunction<T>, xs: &[RealVector<T>]) -> Result<RealVector<T>> {
    let newest = xs.last().ok_or(Error::Empty {
        what: "discounted sum input",
    })?;
    let mut acc = RealVector::zeros(newest.dim());
    for (lag, x) in xs.iter().rev().enumerate() {
        acc = RealVector::axpy(f.weight(lag), x, &acc)?;
    }
    Ok(acc)
}

/// One exponential moving average update: `β·buffer + (1-β)·x`.
pub fn ewma_update<T: Scalar>(buffer: &RealVector<T>, beta: T, x: &RealVector<T>) -> Result<RealVector<T>> {
    if !(beta >= T::zero() && beta < T::one()) {
        return Err(Error::param("beta", "must lie in [0, 1)"));
    }
    buffer.zip_map(x, |g, xi| beta * g + (T::one() - beta) * xi)
}

/// Quasi-hyperbolic average from a tracked EWMA: `(1-ν)·current + ν·ewma`.
///
/// `_beta` is the discount of the EWMA being combined; the combination itself
/// does not depend on it.
pub fn qhwma<T: Scalar>(nu: T, _beta: T, ewma_value: &RealVector<T>, current: &RealVector<T>) -> Result<RealVector<T>> {
    if !nu.is_finite() {
        return Err(Error::NonFinite { what: "nu" });
    }
    current.zip_map(ewma_value, |c, e| (T::one() - nu) * c + nu * e)
}

/// Limit variance factor of the quasi-hyperbolic average of i.i.d. inputs:
/// `(1-νβ)² + [νβ(1-β)]²/(1-β²)`.
pub fn rho<T: Scalar>(nu: T, beta: T) -> Result<T> {
    if !(beta.is_finite() && beta.abs() < T::one()) {
        return Err(Error::param("beta", "|beta| must be < 1"));
    }
    let one = T::one();
    let head = one - nu * beta;
    let tail = nu * beta * (one - beta);
    Ok(head * head + tail * tail / (one - beta * beta))
}

/// Variance factor of the length-`t+1` quasi-hyperbolic sum (finite history):
/// `(1-νβ)² + ν²(1-β)²β²(1-β^{2t})/(1-β²)`.
pub fn rho_truncated<T: Scalar>(nu: T, beta: T, t: usize) -> Result<T> {
    if !(beta.is_finite() && beta.abs() < T::one()) {
        return Err(Error::param("beta", "|beta| must be < 1"));
    }
    let one = T::one();
    let head = one - nu * beta;
    let tail = nu * beta * (one - beta);
    let b2t = powu(beta * beta, t);
    Ok(head * head + tail * tail * (one - b2t) / (one - beta * beta))
}

/// Hyperbolically weighted moving average. There is no recursive form, so the
/// full history is stored; pushing beyond `cap` elements is an error.
#[derive(Debug, Clone)]
pub struct Hwma<T> {
    c: T,
    k: T,
    cap: usize,
    history: Vec<RealVector<T>>,
}

impl<T: Scalar> Hwma<T> {
    pub fn new(c: T, k: T, cap: usize) -> Result<Self> {
        DiscountFunction::hyperbolic(c, k)?;
        if cap == 0 {
            return Err(Error::param("cap", "must be positive"));
        }
        Ok(Self {
            c,
            k,
            cap,
            history: Vec::new(),
        })
    }

    pub fn push(&mut self, x: RealVector<T>) -> Result<()> {
        if let Some(first) = self.history.first() {
            first.check_dim(&x)?;
        }
        if self.history.len() == self.cap {
            return Err(Error::HistoryOverflow {
                len: self.cap + 1,
                cap: self.cap,
            });
        }
        self.history.push(x);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    /// Recomputes the weighted sum over the whole history.
    pub fn value(&self) -> Result<RealVector<T>> {
        discounted_sum(&DiscountFunction::Hyperbolic { c: self.c, k: self.k }, &self.history)
    }
}

pub const MIN_VARIANCE_SAMPLES: usize = 1000;

/// Empirical variance of a running discounted average of i.i.d. standard
/// normal draws.
///
/// The average is maintained online (EWMA buffer, plus the current-draw mix
/// for the quasi-hyperbolic case). Samples taken before the average has
/// forgotten its zero initialization are discarded; the rest are pooled into
/// a single variance estimate.
pub fn estimate_variance_ratio(f: &DiscountFunction<f64>, n_samples: usize, rng: &mut SeededRng) -> Result<f64> {
    if n_samples < MIN_VARIANCE_SAMPLES {
        return Err(Error::param(
            "n_samples",
            format!("need at least {MIN_VARIANCE_SAMPLES}, got {n_samples}"),
        ));
    }
    let (nu, beta) = match *f {
        DiscountFunction::Exponential { beta } => (1.0, beta),
        DiscountFunction::QuasiHyperbolic { nu, beta } => (nu, beta),
        DiscountFunction::Hyperbolic { .. } => {
            return Err(Error::param(
                "discount",
                "hyperbolic weights do not sum to a finite total; no limit variance exists",
            ))
        }
    };
    // Enough steps for β^burn-in to fall below 1e-12.
    let burn_in = if beta.abs() > 0.0 {
        ((-12.0 * std::f64::consts::LN_10) / beta.abs().ln()).ceil() as usize
    } else {
        0
    };
    let burn_in = burn_in.min(n_samples / 2);

    let mut ewma = 0.0_f64;
    let mut count = 0usize;
    let mut mean = 0.0_f64;
    let mut m2 = 0.0_f64;
    for step in 0..n_samples {
        let x = rng.normal();
        ewma = beta * ewma + (1.0 - beta) * x;
        let avg = (1.0 - nu) * x + nu * ewma;
        if step >= burn_in {
            // Welford accumulation
            count += 1;
            let delta = avg - mean;
            mean += delta / count as f64;
            m2 += delta * (avg - mean);
        }
    }
    Ok(m2 / (count - 1) as f64)
}
