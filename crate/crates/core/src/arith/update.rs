//! Block updates and their application to stored leaves.

use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::hmatrix::{DenseData, HMatrix, LowrankData, Node, Op};
use crate::lowrank::{dense_to_lowrank, svd_factorize, LowrankBlock, TruncationCriterion};
use crate::scalar::Real;

use super::Ctx;

/// A matrix to be added to a block, in working precision.
#[derive(Clone, Debug)]
pub enum Update<T: Real> {
    Zero,
    Dense(DMatrix<T>),
    Lowrank(LowrankBlock<T>),
}

impl<T: Real> Update<T> {
    /// Sub-block with row and column ranges relative to the update.
    pub fn restrict(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        match self {
            Update::Zero => Update::Zero,
            Update::Dense(d) => Update::Dense(d.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned()),
            Update::Lowrank(lr) if lr.rank() == 0 => Update::Zero,
            Update::Lowrank(lr) => Update::Lowrank(LowrankBlock {
                u: lr.u.rows(rows.start, rows.len()).into_owned(),
                v: lr.v.rows(cols.start, cols.len()).into_owned(),
            }),
        }
    }

    /// Sum of two updates; lowrank sums are truncated at `eps`.
    pub fn add(self, other: Self, eps: f64) -> Result<Self> {
        Ok(match (self, other) {
            (Update::Zero, x) | (x, Update::Zero) => x,
            (Update::Dense(a), Update::Dense(b)) => Update::Dense(a + b),
            (Update::Dense(d), Update::Lowrank(lr)) | (Update::Lowrank(lr), Update::Dense(d)) => {
                Update::Dense(d + lr.to_dense())
            }
            (Update::Lowrank(a), Update::Lowrank(b)) => {
                let c = a.concat(&b);
                Update::Lowrank(svd_factorize(&c.u, &c.v, TruncationCriterion::new(eps))?.into_lowrank())
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Update::Zero => true,
            Update::Lowrank(lr) => lr.rank() == 0,
            Update::Dense(_) => false,
        }
    }
}

/// Product factors `alpha A B` as a lowrank update when `k (m + n) < m n`.
fn outer_or_dense<T: Real>(alpha: T, a: DMatrix<T>, b_t: DMatrix<T>) -> Update<T> {
    let (m, k, n) = (a.nrows(), a.ncols(), b_t.nrows());
    if k * (m + n) < m * n {
        Update::Lowrank(LowrankBlock { u: a * alpha, v: b_t })
    } else {
        Update::Dense(a * b_t.transpose() * alpha)
    }
}

/// `A` applied to the identity, as a dense matrix.
fn densify<T: Real>(a: &HMatrix<T>, op: Op) -> Result<DMatrix<T>> {
    let d = a.to_dense()?;
    Ok(match op {
        Op::NoTrans => d,
        Op::Trans => d.transpose(),
    })
}

/// Evaluates `alpha A B` completely. Products of two structured blocks are
/// formed child by child and returned dense if `want_dense`, else as a
/// truncated lowrank matrix.
pub fn product<T: Real>(alpha: T, a: &HMatrix<T>, b: &HMatrix<T>, want_dense: bool, eps: f64) -> Result<Update<T>> {
    if a.ncols() != b.nrows() {
        return Err(invalid(format!("cannot multiply {}x{} by {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols())));
    }
    if alpha == T::zero() {
        return Ok(Update::Zero);
    }
    match (a.node(), b.node()) {
        (Node::Lowrank(la), _) => {
            if la.rank() == 0 {
                return Ok(Update::Zero);
            }
            let f = la.factors(a.nrows(), a.ncols())?;
            let mut v = DMatrix::zeros(b.ncols(), f.rank());
            b.apply(Op::Trans, alpha, &f.v, &mut v)?;
            Ok(Update::Lowrank(LowrankBlock { u: f.u.clone(), v }))
        }
        (_, Node::Lowrank(lb)) => {
            if lb.rank() == 0 {
                return Ok(Update::Zero);
            }
            let f = lb.factors(b.nrows(), b.ncols())?;
            let mut u = DMatrix::zeros(a.nrows(), f.rank());
            a.apply(Op::NoTrans, alpha, &f.u, &mut u)?;
            Ok(Update::Lowrank(LowrankBlock { u, v: f.v.clone() }))
        }
        (Node::Dense(da), _) => {
            let da = da.matrix(a.nrows(), a.ncols())?;
            let b_t = densify(b, Op::Trans)?;
            Ok(outer_or_dense(alpha, da.into_owned(), b_t))
        }
        (_, Node::Dense(db)) => {
            let db = db.matrix(b.nrows(), b.ncols())?;
            let a_d = densify(a, Op::NoTrans)?;
            Ok(outer_or_dense(alpha, a_d, db.transpose()))
        }
        (Node::Structured(ac), Node::Structured(bc)) => {
            let (m0, n0) = (ac[0].nrows(), bc[0].ncols());
            let mut parts = Vec::with_capacity(4);
            for i in 0..2 {
                for j in 0..2 {
                    let mut sum = Update::Zero;
                    for l in 0..2 {
                        let p = product(alpha, &ac[2 * i + l], &bc[2 * l + j], want_dense, eps)?;
                        sum = sum.add(p, eps)?;
                    }
                    parts.push(((if i == 0 { 0 } else { m0 }), (if j == 0 { 0 } else { n0 }), sum));
                }
            }
            combine(parts, a.nrows(), b.ncols(), want_dense, eps)
        }
    }
}

/// Embeds 2x2 sub-updates at their offsets into one update.
fn combine<T: Real>(parts: Vec<(usize, usize, Update<T>)>, m: usize, n: usize, want_dense: bool, eps: f64) -> Result<Update<T>> {
    if parts.iter().all(|p| p.2.is_zero()) {
        return Ok(Update::Zero);
    }
    if want_dense {
        let mut d = DMatrix::zeros(m, n);
        for (i, j, p) in parts {
            match p {
                Update::Zero => {}
                Update::Dense(x) => {
                    let mut v = d.view_mut((i, j), x.shape());
                    v += &x;
                }
                Update::Lowrank(lr) => {
                    let mut v = d.view_mut((i, j), (lr.nrows(), lr.ncols()));
                    v.gemm(T::one(), &lr.u, &lr.v.transpose(), T::one());
                }
            }
        }
        return Ok(Update::Dense(d));
    }
    let crit = TruncationCriterion::new(eps);
    let mut blocks = Vec::new();
    for (i, j, p) in parts {
        let lr = match p {
            Update::Zero => continue,
            Update::Dense(x) => dense_to_lowrank(&x, crit).into_lowrank(),
            Update::Lowrank(lr) => lr,
        };
        blocks.push((i, j, lr));
    }
    let k: usize = blocks.iter().map(|b| b.2.rank()).sum();
    let mut u = DMatrix::zeros(m, k);
    let mut v = DMatrix::zeros(n, k);
    let mut c = 0;
    for (i, j, lr) in &blocks {
        let r = lr.rank();
        u.view_mut((*i, c), (lr.nrows(), r)).copy_from(&lr.u);
        v.view_mut((*j, c), (lr.ncols(), r)).copy_from(&lr.v);
        c += r;
    }
    Ok(Update::Lowrank(svd_factorize(&u, &v, crit)?.into_lowrank()))
}

/// Leaf content decoded for computation.
pub(crate) enum Work<T: Real> {
    Dense(DMatrix<T>),
    Lowrank(LowrankBlock<T>),
}

impl<T: Real> Work<T> {
    pub(crate) fn take(leaf: &HMatrix<T>) -> Result<Self> {
        let (m, n) = (leaf.nrows(), leaf.ncols());
        match leaf.node() {
            Node::Dense(d) => Ok(Work::Dense(d.matrix(m, n)?.into_owned())),
            Node::Lowrank(lr) => Ok(Work::Lowrank(lr.factors(m, n)?.into_owned())),
            Node::Structured(_) => Err(invalid("expected a leaf block")),
        }
    }

    /// Adds an update; lowrank results are truncated at `eps`.
    pub(crate) fn add(self, upd: Update<T>, eps: f64) -> Result<Self> {
        let crit = TruncationCriterion::new(eps);
        Ok(match (self, upd) {
            (w, Update::Zero) => w,
            (Work::Dense(d), Update::Dense(x)) => Work::Dense(d + x),
            (Work::Dense(mut d), Update::Lowrank(lr)) => {
                if lr.rank() > 0 {
                    d.gemm(T::one(), &lr.u, &lr.v.transpose(), T::one());
                }
                Work::Dense(d)
            }
            (Work::Lowrank(cur), Update::Lowrank(lr)) => {
                let c = cur.concat(&lr);
                Work::Lowrank(svd_factorize(&c.u, &c.v, crit)?.into_lowrank())
            }
            (Work::Lowrank(cur), Update::Dense(x)) => {
                Work::Lowrank(dense_to_lowrank(&(cur.to_dense() + x), crit).into_lowrank())
            }
        })
    }

    /// Stores the content back into the leaf in the context's storage mode.
    pub(crate) fn put(self, leaf: &mut HMatrix<T>, ctx: &mut Ctx) -> Result<()> {
        let mode = ctx.mode.storage;
        let eps = ctx.mode.eps;
        match (leaf.node_mut(), self) {
            (Node::Dense(slot), Work::Dense(d)) => {
                let dense_mode = if ctx.mode.dense_too { mode } else { crate::hmatrix::StorageMode::Raw };
                *slot = DenseData::encode(d, dense_mode, eps)?;
            }
            (Node::Lowrank(slot), Work::Lowrank(lr)) => {
                *slot = if mode.is_raw() {
                    LowrankData::Raw(lr)
                } else {
                    // re-orthogonalize: the factors may come from a solve or a decoded buffer
                    let f = svd_factorize(&lr.u, &lr.v, TruncationCriterion::new(eps))?;
                    LowrankData::encode_factors(f, mode, eps)?
                };
            }
            _ => return Err(invalid("leaf kind does not match its content")),
        }
        ctx.stats.leaf_writes += 1;
        Ok(())
    }
}

/// `C := C + upd`, recursing into structured blocks. Every touched leaf is
/// decoded, updated, truncated and stored again.
pub fn add_update<T: Real>(c: &mut HMatrix<T>, upd: Update<T>, ctx: &mut Ctx) -> Result<()> {
    if upd.is_zero() {
        return Ok(());
    }
    let (r0, c0) = (c.rows().start, c.cols().start);
    if let Some(children) = c.children_mut() {
        for child in children.iter_mut() {
            let rows = child.rows().start - r0..child.rows().end - r0;
            let cols = child.cols().start - c0..child.cols().end - c0;
            add_update(child, upd.restrict(rows, cols), ctx)?;
        }
        return Ok(());
    }
    let eps = ctx.mode.eps;
    Work::take(c)?.add(upd, eps)?.put(c, ctx)
}

/// Re-truncates a stored lowrank leaf: decode, truncate, encode.
pub fn truncate_compressed<T: Real>(
    data: &LowrankData<T>,
    rows: usize,
    cols: usize,
    storage: crate::hmatrix::StorageMode,
    eps: f64,
) -> Result<LowrankData<T>> {
    let lr = data.factors(rows, cols)?;
    let f = svd_factorize(&lr.u, &lr.v, TruncationCriterion::new(eps))?;
    LowrankData::encode_factors(f, storage, eps)
}
