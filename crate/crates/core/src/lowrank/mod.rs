//! Dense and lowrank block primitives.

mod aca;
mod truncate;

pub use aca::{aca_approximate, AcaApproximation};
pub(crate) use truncate::dense_to_lowrank;
pub use truncate::{rank_from_singular_values, svd_factorize, svd_truncate, TruncationCriterion};

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Column-major dense block.
pub type DenseBlock<T> = DMatrix<T>;

/// `M ~ U V^T` with `U: rows x k` and `V: cols x k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowrankBlock<T: Real> {
    pub u: DMatrix<T>,
    pub v: DMatrix<T>,
}

impl<T: Real> LowrankBlock<T> {
    pub fn new(u: DMatrix<T>, v: DMatrix<T>) -> Result<Self> {
        if u.ncols() != v.ncols() {
            return Err(invalid(format!(
                "lowrank factors have {} and {} columns",
                u.ncols(),
                v.ncols()
            )));
        }
        Ok(Self { u, v })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            u: DMatrix::zeros(rows, 0),
            v: DMatrix::zeros(cols, 0),
        }
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        if self.rank() == 0 {
            return DMatrix::zeros(self.nrows(), self.ncols());
        }
        &self.u * self.v.transpose()
    }

    /// Factors of `self + other` without recompression.
    pub fn concat(&self, other: &LowrankBlock<T>) -> LowrankBlock<T> {
        debug_assert_eq!(self.nrows(), other.nrows());
        debug_assert_eq!(self.ncols(), other.ncols());
        let (k1, k2) = (self.rank(), other.rank());
        let mut u = DMatrix::zeros(self.nrows(), k1 + k2);
        let mut v = DMatrix::zeros(self.ncols(), k1 + k2);
        u.columns_mut(0, k1).copy_from(&self.u);
        u.columns_mut(k1, k2).copy_from(&other.u);
        v.columns_mut(0, k1).copy_from(&self.v);
        v.columns_mut(k1, k2).copy_from(&other.v);
        LowrankBlock { u, v }
    }

    pub fn scale(&mut self, alpha: T) {
        self.u *= alpha;
    }

    /// Storage size of both factors in values.
    pub fn value_count(&self) -> usize {
        (self.nrows() + self.ncols()) * self.rank()
    }
}

/// `W diag(sigma) X^T` with orthonormal `W`, `X` and descending `sigma`.
#[derive(Clone, Debug)]
pub struct OrthoLowrank<T: Real> {
    pub w: DMatrix<T>,
    pub sigma: DVector<T>,
    pub x: DMatrix<T>,
}

impl<T: Real> OrthoLowrank<T> {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            w: DMatrix::zeros(rows, 0),
            sigma: DVector::zeros(0),
            x: DMatrix::zeros(cols, 0),
        }
    }

    /// `U = W diag(sigma)`, `V = X`.
    pub fn into_lowrank(self) -> LowrankBlock<T> {
        let mut u = self.w;
        for (mut col, &s) in u.column_iter_mut().zip(self.sigma.iter()) {
            col *= s;
        }
        LowrankBlock { u, v: self.x }
    }
}
