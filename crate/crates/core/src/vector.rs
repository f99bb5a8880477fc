//! Dense finite real vectors.

use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense vector whose entries are all finite. The dimension is fixed at
/// construction; every operation checks finiteness of its inputs before
/// producing a new value.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector<T> {
    entries: Vec<T>,
}

impl<T: Scalar> RealVector<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty { what: "vector entries" });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "vector entries" });
        }
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Self {
            entries: vec![T::zero(); dim],
        }
    }

    pub fn filled(dim: usize, value: T) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty { what: "vector entries" });
        }
        Self::new(vec![value; dim])
    }

    pub fn scalar(value: T) -> Result<Self> {
        Self::new(vec![value])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<T> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.entries.iter()
    }

    pub fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Elementwise combination of two vectors of equal dimension. The result
    /// is rejected if any entry overflows to a non-finite value.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(entries)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.entries.iter().map(|&x| f(x)).collect())
    }

    /// `a·x + y`.
    pub fn axpy(a: T, x: &Self, y: &Self) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::NonFinite { what: "axpy scale" });
        }
        x.zip_map(y, |xi, yi| a * xi + yi)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, a: T) -> Result<Self> {
        self.map(|x| a * x)
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        self.check_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b))
    }

    pub fn norm(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs())))
    }
}

impl<T> Index<usize> for RealVector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.entries[i]
    }
}

/// `a·x + y`.
pub fn vector_axpy<T: Scalar>(a: T, x: &RealVector<T>, y: &RealVector<T>) -> Result<RealVector<T>> {
    RealVector::axpy(a, x, y)
}
