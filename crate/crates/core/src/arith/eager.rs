//! Eager arithmetic: every product is added to its target at once.

use crate::error::{invalid, Result};
use crate::hmatrix::{HMatrix, Node};
use crate::scalar::Real;

use super::solve::{dense_lu, solve_leaf_rhs};
use super::update::{add_update, product, Work};
use super::Ctx;

/// `C := C + alpha A B`.
pub fn hmul_eager<T: Real>(alpha: T, a: &HMatrix<T>, b: &HMatrix<T>, c: &mut HMatrix<T>, ctx: &mut Ctx) -> Result<()> {
    if a.rows() != c.rows() || b.cols() != c.cols() || a.cols() != b.rows() {
        return Err(invalid("product blocks do not match the target"));
    }
    if let (Some(ac), Some(bc), Some(cc)) = (a.children(), b.children(), c.children_mut()) {
        for i in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    hmul_eager(alpha, &ac[2 * i + l], &bc[2 * l + j], &mut cc[2 * i + j], ctx)?;
                }
            }
        }
        return Ok(());
    }
    let want_dense = matches!(c.node(), Node::Dense(_));
    let upd = product(alpha, a, b, want_dense, ctx.mode.eps)?;
    add_update(c, upd, ctx)
}

/// `B := L^-1 B`.
pub(crate) fn trsm_lower<T: Real>(lu: &HMatrix<T>, b: &mut HMatrix<T>, ctx: &mut Ctx) -> Result<()> {
    if let (Some(l), Some(bc)) = (lu.children(), b.children_mut()) {
        let [b00, b01, b10, b11] = bc;
        for (top, bottom) in [(b00, b10), (b01, b11)] {
            trsm_lower(&l[0], top, ctx)?;
            hmul_eager(-T::one(), &l[2], top, bottom, ctx)?;
            trsm_lower(&l[3], bottom, ctx)?;
        }
        return Ok(());
    }
    solve_leaf(lu, b, true, ctx)
}

/// `B := B U^-1`.
pub(crate) fn trsm_upper<T: Real>(lu: &HMatrix<T>, b: &mut HMatrix<T>, ctx: &mut Ctx) -> Result<()> {
    if let (Some(u), Some(bc)) = (lu.children(), b.children_mut()) {
        let [b00, b01, b10, b11] = bc;
        for (left, right) in [(b00, b01), (b10, b11)] {
            trsm_upper(&u[0], left, ctx)?;
            hmul_eager(-T::one(), left, &u[1], right, ctx)?;
            trsm_upper(&u[3], right, ctx)?;
        }
        return Ok(());
    }
    solve_leaf(lu, b, false, ctx)
}

/// Triangular solve with a leaf right-hand side.
fn solve_leaf<T: Real>(lu: &HMatrix<T>, b: &mut HMatrix<T>, lower: bool, ctx: &mut Ctx) -> Result<()> {
    if !b.is_leaf() {
        return Err(invalid("triangular block is a leaf but the right-hand side is not"));
    }
    let w = solve_leaf_rhs(lu, Work::take(b)?, lower)?;
    w.put(b, ctx)
}

/// In-place LU of a diagonal block.
pub(crate) fn lu<T: Real>(a: &mut HMatrix<T>, ctx: &mut Ctx) -> Result<()> {
    let (rows, cols) = (a.rows(), a.cols());
    match a.children_mut() {
        Some([a00, a01, a10, a11]) => {
            lu(a00, ctx)?;
            trsm_lower(a00, a01, ctx)?;
            trsm_upper(a00, a10, ctx)?;
            hmul_eager(-T::one(), a10, a01, a11, ctx)?;
            lu(a11, ctx)
        }
        None => match Work::take(a)? {
            Work::Dense(mut d) => {
                dense_lu(&mut d, rows, cols)?;
                Work::Dense(d).put(a, ctx)
            }
            Work::Lowrank(_) => Err(invalid("diagonal block stored in lowrank form")),
        },
    }
}
