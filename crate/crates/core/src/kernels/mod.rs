//! Matrix entry generators for the two model problems.

mod bessel;
mod laplace;
mod matern;

pub use bessel::{bessel_k, gamma};
pub use laplace::LaplaceSlp;
pub use matern::{MaternCovariance, MaternParams};

use std::ops::Range;

use nalgebra::DMatrix;

use crate::scalar::Real;

/// Source of matrix entries addressed by internal indices.
pub trait EntrySource: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> f64;
}

/// Entry generator for one of the model problems.
#[derive(Clone, Debug)]
pub enum Kernel {
    Laplace(LaplaceSlp),
    Matern(MaternCovariance),
}

impl EntrySource for Kernel {
    fn nrows(&self) -> usize {
        match self {
            Kernel::Laplace(k) => k.nrows(),
            Kernel::Matern(k) => k.nrows(),
        }
    }

    fn ncols(&self) -> usize {
        self.nrows()
    }

    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            Kernel::Laplace(k) => k.entry(i, j),
            Kernel::Matern(k) => k.entry(i, j),
        }
    }
}

/// Restriction of an entry source to a row and column range.
pub struct BlockView<'a, K: EntrySource + ?Sized> {
    pub source: &'a K,
    pub rows: Range<usize>,
    pub cols: Range<usize>,
}

impl<'a, K: EntrySource + ?Sized> BlockView<'a, K> {
    pub fn new(source: &'a K, rows: Range<usize>, cols: Range<usize>) -> Self {
        Self { source, rows, cols }
    }
}

impl<K: EntrySource + ?Sized> EntrySource for BlockView<'_, K> {
    fn nrows(&self) -> usize {
        self.rows.len()
    }

    fn ncols(&self) -> usize {
        self.cols.len()
    }

    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.source.entry(self.rows.start + i, self.cols.start + j)
    }
}

/// Dense matrix of all entries of `src`.
pub fn assemble_dense<T: Real, K: EntrySource + ?Sized>(src: &K) -> DMatrix<T> {
    DMatrix::from_fn(src.nrows(), src.ncols(), |i, j| T::cast(src.entry(i, j)))
}
