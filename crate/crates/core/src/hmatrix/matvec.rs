use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};

use crate::error::{invalid, Result};
use crate::scalar::Real;

use super::{HMatrix, Node};

/// Whether to apply a matrix or its transpose.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    NoTrans,
    Trans,
}

impl<T: Real> HMatrix<T> {
    /// `y := alpha M x + beta y`.
    pub fn matvec(&self, alpha: T, x: &[T], beta: T, y: &mut [T]) -> Result<()> {
        self.matvec_op(Op::NoTrans, alpha, x, beta, y)
    }

    /// `y := alpha op(M) x + beta y`; compressed leaves are decoded on the fly.
    pub fn matvec_op(&self, op: Op, alpha: T, x: &[T], beta: T, y: &mut [T]) -> Result<()> {
        let (xn, yn) = match op {
            Op::NoTrans => (self.ncols(), self.nrows()),
            Op::Trans => (self.nrows(), self.ncols()),
        };
        if x.len() != xn || y.len() != yn {
            return Err(invalid(format!(
                "matvec expects x of length {xn} and y of length {yn}, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        scale(y, beta);
        if alpha == T::zero() {
            return Ok(());
        }
        let xm = DMatrixView::from_slice(x, xn, 1);
        let mut ym = DMatrixViewMut::from_slice(y, yn, 1);
        self.apply_rec(op, alpha, &xm, &mut ym, self.rows.start, self.cols.start)
    }

    /// `Y += alpha op(M) X` for a block of vectors.
    pub fn apply(&self, op: Op, alpha: T, x: &DMatrix<T>, y: &mut DMatrix<T>) -> Result<()> {
        let (xn, yn) = match op {
            Op::NoTrans => (self.ncols(), self.nrows()),
            Op::Trans => (self.nrows(), self.ncols()),
        };
        if x.nrows() != xn || y.nrows() != yn || x.ncols() != y.ncols() {
            return Err(invalid(format!(
                "apply expects X with {xn} rows and Y with {yn} rows and equal widths, got {:?} and {:?}",
                x.shape(),
                y.shape()
            )));
        }
        if alpha == T::zero() || x.ncols() == 0 {
            return Ok(());
        }
        let xv = x.as_view();
        let mut yv = y.as_view_mut();
        self.apply_rec(op, alpha, &xv, &mut yv, self.rows.start, self.cols.start)
    }

    /// `Y += alpha op(M) X` on matrix views.
    pub(crate) fn apply_view(&self, op: Op, alpha: T, x: &DMatrixView<'_, T>, y: &mut DMatrixViewMut<'_, T>) -> Result<()> {
        if alpha == T::zero() || x.ncols() == 0 {
            return Ok(());
        }
        self.apply_rec(op, alpha, x, y, self.rows.start, self.cols.start)
    }

    fn apply_rec(
        &self,
        op: Op,
        alpha: T,
        x: &DMatrixView<'_, T>,
        y: &mut DMatrixViewMut<'_, T>,
        r0: usize,
        c0: usize,
    ) -> Result<()> {
        let (i, j) = (self.rows.start - r0, self.cols.start - c0);
        let (m, n) = (self.nrows(), self.ncols());
        let (xi, xn, yi, yn) = match op {
            Op::NoTrans => (j, n, i, m),
            Op::Trans => (i, m, j, n),
        };
        match &self.node {
            Node::Structured(ch) => {
                for c in ch.iter() {
                    c.apply_rec(op, alpha, x, y, r0, c0)?;
                }
            }
            Node::Dense(d) => {
                let d = d.matrix(m, n)?;
                let xs = x.rows(xi, xn);
                let mut ys = y.rows_mut(yi, yn);
                match op {
                    Op::NoTrans => ys.gemm(alpha, &*d, &xs, T::one()),
                    Op::Trans => ys.gemm_tr(alpha, &*d, &xs, T::one()),
                }
            }
            Node::Lowrank(lr) => {
                if lr.rank() == 0 {
                    return Ok(());
                }
                let f = lr.factors(m, n)?;
                let (inner, outer) = match op {
                    Op::NoTrans => (&f.v, &f.u),
                    Op::Trans => (&f.u, &f.v),
                };
                let t = inner.tr_mul(&x.rows(xi, xn));
                y.rows_mut(yi, yn).gemm(alpha, outer, &t, T::one());
            }
        }
        Ok(())
    }
}

fn scale<T: Real>(y: &mut [T], beta: T) {
    if beta == T::zero() {
        y.fill(T::zero());
    } else if beta != T::one() {
        y.iter_mut().for_each(|v| *v *= beta);
    }
}
