//! Triangular solves with factored blocks and the LU residual estimate.

use std::ops::Range;

use nalgebra::{DMatrix, DMatrixViewMut};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::hmatrix::{HMatrix, MemoryReport, Node, Op};
use crate::scalar::Real;

use super::update::Work;

/// Which factor of a combined LU block to solve with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Triangle {
    /// Unit lower triangle `L`.
    Lower,
    /// Upper triangle `U` including the diagonal.
    Upper,
}

/// Dense LU without pivoting, overwriting `d` with `L` and `U`.
pub(crate) fn dense_lu<T: Real>(d: &mut DMatrix<T>, rows: Range<usize>, cols: Range<usize>) -> Result<()> {
    let n = d.nrows();
    if n != d.ncols() {
        return Err(invalid("dense LU needs a square block"));
    }
    let scale = d.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let tiny = scale * T::default_epsilon();
    for k in 0..n {
        let p = d[(k, k)];
        if !p.is_finite() || p.abs() <= tiny || p == T::zero() {
            return Err(Error::Singular { rows, cols, pivot: k });
        }
        let inv = T::one() / p;
        for i in k + 1..n {
            d[(i, k)] *= inv;
        }
        for j in k + 1..n {
            let a = d[(k, j)];
            if a == T::zero() {
                continue;
            }
            for i in k + 1..n {
                let l = d[(i, k)];
                d[(i, j)] -= l * a;
            }
        }
    }
    Ok(())
}

/// Solves `op(tri(d)) X = B` in place for a dense combined LU block `d`.
fn solve_dense_leaf<T: Real>(d: &DMatrix<T>, tri: Triangle, op: Op, x: &mut DMatrixViewMut<'_, T>) {
    let n = d.nrows();
    for c in 0..x.ncols() {
        let mut col = x.column_mut(c);
        match (tri, op) {
            (Triangle::Lower, Op::NoTrans) => {
                for k in 0..n {
                    let xk = col[k];
                    if xk != T::zero() {
                        for i in k + 1..n {
                            col[i] -= d[(i, k)] * xk;
                        }
                    }
                }
            }
            (Triangle::Lower, Op::Trans) => {
                for k in (0..n).rev() {
                    let mut s = col[k];
                    for i in k + 1..n {
                        s -= d[(i, k)] * col[i];
                    }
                    col[k] = s;
                }
            }
            (Triangle::Upper, Op::NoTrans) => {
                for k in (0..n).rev() {
                    let xk = col[k] / d[(k, k)];
                    col[k] = xk;
                    if xk != T::zero() {
                        for i in 0..k {
                            col[i] -= d[(i, k)] * xk;
                        }
                    }
                }
            }
            (Triangle::Upper, Op::Trans) => {
                for k in 0..n {
                    let mut s = col[k];
                    for i in 0..k {
                        s -= d[(i, k)] * col[i];
                    }
                    col[k] = s / d[(k, k)];
                }
            }
        }
    }
}

/// Solves `op(tri(LU)) X = B` in place, `X` dense with the rows of `lu`.
pub(crate) fn solve_dense<T: Real>(lu: &HMatrix<T>, tri: Triangle, op: Op, x: &mut DMatrixViewMut<'_, T>) -> Result<()> {
    if x.nrows() != lu.nrows() {
        return Err(invalid(format!("right-hand side has {} rows, expected {}", x.nrows(), lu.nrows())));
    }
    match lu.node() {
        Node::Dense(d) => {
            let d = d.matrix(lu.nrows(), lu.ncols())?;
            solve_dense_leaf(&d, tri, op, x);
            Ok(())
        }
        Node::Lowrank(_) => Err(invalid("diagonal block stored in lowrank form")),
        Node::Structured(c) => {
            let n0 = c[0].nrows();
            let n = x.nrows();
            let (mut x0, mut x1) = x.rows_range_pair_mut(0..n0, n0..n);
            let m = -T::one();
            match (tri, op) {
                (Triangle::Lower, Op::NoTrans) => {
                    solve_dense(&c[0], tri, op, &mut x0)?;
                    c[2].apply_view(Op::NoTrans, m, &x0.rows(0, n0), &mut x1)?;
                    solve_dense(&c[3], tri, op, &mut x1)
                }
                (Triangle::Lower, Op::Trans) => {
                    solve_dense(&c[3], tri, op, &mut x1)?;
                    c[2].apply_view(Op::Trans, m, &x1.rows(0, n - n0), &mut x0)?;
                    solve_dense(&c[0], tri, op, &mut x0)
                }
                (Triangle::Upper, Op::NoTrans) => {
                    solve_dense(&c[3], tri, op, &mut x1)?;
                    c[1].apply_view(Op::NoTrans, m, &x1.rows(0, n - n0), &mut x0)?;
                    solve_dense(&c[0], tri, op, &mut x0)
                }
                (Triangle::Upper, Op::Trans) => {
                    solve_dense(&c[0], tri, op, &mut x0)?;
                    c[1].apply_view(Op::Trans, m, &x0.rows(0, n0), &mut x1)?;
                    solve_dense(&c[3], tri, op, &mut x1)
                }
            }
        }
    }
}

/// `L^-1 B` (lower) or `B U^-1` (upper) for a leaf right-hand side.
pub(crate) fn solve_leaf_rhs<T: Real>(lu: &HMatrix<T>, w: Work<T>, lower: bool) -> Result<Work<T>> {
    Ok(match (w, lower) {
        (Work::Dense(mut d), true) => {
            solve_dense(lu, Triangle::Lower, Op::NoTrans, &mut d.as_view_mut())?;
            Work::Dense(d)
        }
        (Work::Lowrank(mut lr), true) => {
            solve_dense(lu, Triangle::Lower, Op::NoTrans, &mut lr.u.as_view_mut())?;
            Work::Lowrank(lr)
        }
        (Work::Dense(d), false) => {
            let mut t = d.transpose();
            solve_dense(lu, Triangle::Upper, Op::Trans, &mut t.as_view_mut())?;
            Work::Dense(t.transpose())
        }
        (Work::Lowrank(mut lr), false) => {
            solve_dense(lu, Triangle::Upper, Op::Trans, &mut lr.v.as_view_mut())?;
            Work::Lowrank(lr)
        }
    })
}

/// Combined LU factors of an H-matrix: unit lower `L` and upper `U` share
/// one block structure.
#[derive(Clone, Debug)]
pub struct LuFactors<T: Real> {
    lu: HMatrix<T>,
}

impl<T: Real> LuFactors<T> {
    pub fn new(lu: HMatrix<T>) -> Self {
        LuFactors { lu }
    }

    pub fn matrix(&self) -> &HMatrix<T> {
        &self.lu
    }

    pub fn into_matrix(self) -> HMatrix<T> {
        self.lu
    }

    pub fn size(&self) -> usize {
        self.lu.nrows()
    }

    pub fn memory_footprint(&self) -> MemoryReport {
        self.lu.memory_footprint()
    }

    /// Solves `op(tri) X = B` in place.
    pub fn solve_triangle(&self, tri: Triangle, op: Op, x: &mut DMatrix<T>) -> Result<()> {
        solve_dense(&self.lu, tri, op, &mut x.as_view_mut())
    }

    /// Solves `A X = B` in place.
    pub fn solve(&self, x: &mut DMatrix<T>) -> Result<()> {
        self.solve_triangle(Triangle::Lower, Op::NoTrans, x)?;
        self.solve_triangle(Triangle::Upper, Op::NoTrans, x)
    }

    /// Solves `A^T X = B` in place.
    pub fn solve_transposed(&self, x: &mut DMatrix<T>) -> Result<()> {
        self.solve_triangle(Triangle::Upper, Op::Trans, x)?;
        self.solve_triangle(Triangle::Lower, Op::Trans, x)
    }

    /// Dense `L` and `U`.
    pub fn to_dense(&self) -> Result<(DMatrix<T>, DMatrix<T>)> {
        let d = self.lu.to_dense()?;
        let n = d.nrows();
        let mut l = d.lower_triangle();
        for i in 0..n {
            l[(i, i)] = T::one();
        }
        Ok((l, d.upper_triangle()))
    }
}

/// Estimates `||I - A (LU)^-1||_2` by power iteration on `B^T B`, starting
/// from a seeded random vector. Stops after 50 steps or once the estimate
/// changes by less than 1e-3 relative.
pub fn lu_residual_norm<T: Real>(a: &HMatrix<T>, lu: &LuFactors<T>, seed: u64) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n || lu.size() != n {
        return Err(invalid("residual needs square matrices of equal size"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::from_fn(n, 1, |_, _| T::cast(StandardNormal.sample(&mut rng)));
    let mut est = 0.0;
    for _ in 0..50 {
        let norm = x.norm();
        if norm == T::zero() {
            return Ok(0.0);
        }
        x /= norm;
        // y = B x = x - A (LU)^-1 x
        let mut z = x.clone();
        lu.solve(&mut z)?;
        let mut y = x.clone();
        a.apply(Op::NoTrans, -T::one(), &z, &mut y)?;
        let next = y.norm().as_f64();
        // x = B^T y = y - (LU)^-T A^T y
        let mut w = DMatrix::zeros(n, 1);
        a.apply(Op::Trans, T::one(), &y, &mut w)?;
        lu.solve_transposed(&mut w)?;
        x = y - w;
        let done = (next - est).abs() <= 1e-3 * next;
        est = next;
        if done {
            break;
        }
    }
    Ok(est)
}
