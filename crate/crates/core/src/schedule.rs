//! Per-step learning-rate schedules: linear warmup followed by step decay.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub base_alpha: f64,
    pub warmup_steps: u64,
    pub decay_every: u64,
    pub decay_factor: f64,
}

impl LrSchedule {
    pub fn new(base_alpha: f64, warmup_steps: u64, decay_every: u64, decay_factor: f64) -> Result<Self> {
        if !(base_alpha.is_finite() && base_alpha > 0.0) {
            return Err(Error::param("base_alpha", "must be finite and > 0"));
        }
        if decay_every == 0 {
            return Err(Error::param("decay_every", "must be positive"));
        }
        if !(decay_factor > 0.0 && decay_factor <= 1.0) {
            return Err(Error::param("decay_factor", "must lie in (0, 1]"));
        }
        Ok(Self {
            base_alpha,
            warmup_steps,
            decay_every,
            decay_factor,
        })
    }

    /// A schedule that never changes.
    pub fn constant(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0, u64::MAX, 1.0)
    }

    /// Learning rate at `step` (counted from 0).
    ///
    /// During warmup the base rate is scaled by `(step+1)/warmup_steps`, so
    /// the very first step is already nonzero. Afterwards the rate decays by
    /// `decay_factor` once every `decay_every` steps.
    pub fn lr(&self, step: u64) -> f64 {
        if step < self.warmup_steps {
            return self.base_alpha * ((step + 1) as f64 / self.warmup_steps as f64);
        }
        let windows = step / self.decay_every;
        let exponent = i32::try_from(windows).unwrap_or(i32::MAX);
        // Strict positivity: underflow clamps to the smallest positive normal.
        (self.base_alpha * self.decay_factor.powi(exponent)).max(f64::MIN_POSITIVE)
    }
}

pub fn schedule_lr(schedule: &LrSchedule, step: u64) -> f64 {
    schedule.lr(step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let s = LrSchedule::new(1.0, 0, 30, 0.1).unwrap();
        assert_eq!(schedule_lr(&s, 0), 1.0);
        assert!((schedule_lr(&s, 60) - 0.01).abs() < 1e-15);
        assert!((schedule_lr(&s, 29) - 1.0).abs() < 1e-15);
        assert!((schedule_lr(&s, 30) - 0.1).abs() < 1e-15);

        let w = LrSchedule::new(1.0, 10, 1000, 0.1).unwrap();
        assert!((schedule_lr(&w, 4) - 0.5).abs() < 1e-15);
        assert_eq!(schedule_lr(&w, 9), 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LrSchedule::new(0.0, 0, 1, 0.5).is_err());
        assert!(LrSchedule::new(1.0, 0, 0, 0.5).is_err());
        assert!(LrSchedule::new(1.0, 0, 1, 1.5).is_err());
        assert!(LrSchedule::new(1.0, 0, 1, 0.0).is_err());
    }

    #[test]
    fn constant_schedule_never_moves() {
        let s = LrSchedule::constant(0.3).unwrap();
        assert_eq!(s.lr(0), 0.3);
        assert_eq!(s.lr(1_000_000), 0.3);
    }
}
