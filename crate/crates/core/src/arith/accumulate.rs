//! Accumulator arithmetic: updates are collected per block and applied
//! once when a leaf is reached.

use std::mem;
use std::ops::Range;

use crate::error::{invalid, Result};
use crate::hmatrix::{HMatrix, Node};
use crate::scalar::Real;

use super::solve::{dense_lu, solve_leaf_rhs};
use super::update::{product, Update, Work};
use super::Ctx;

#[derive(Clone, Copy, Debug)]
struct Pending<'a, T: Real> {
    alpha: T,
    a: &'a HMatrix<T>,
    b: &'a HMatrix<T>,
}

/// Sum of evaluated updates plus products not yet evaluated.
#[derive(Clone, Debug)]
pub struct Accumulator<'a, T: Real> {
    update: Update<T>,
    pending: Vec<Pending<'a, T>>,
}

impl<T: Real> Default for Accumulator<'_, T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<'a, T: Real> Accumulator<'a, T> {
    pub fn new() -> Self {
        Accumulator { update: Update::Zero, pending: Vec::new() }
    }

    pub fn from_product(alpha: T, a: &'a HMatrix<T>, b: &'a HMatrix<T>) -> Self {
        let mut acc = Self::new();
        acc.push(alpha, a, b);
        acc
    }

    /// Records `alpha A B` for later evaluation.
    pub fn push(&mut self, alpha: T, a: &'a HMatrix<T>, b: &'a HMatrix<T>) {
        self.pending.push(Pending { alpha, a, b });
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    pub fn update(&self) -> &Update<T> {
        &self.update
    }

    fn absorb(&mut self, u: Update<T>, eps: f64) -> Result<()> {
        let cur = mem::replace(&mut self.update, Update::Zero);
        self.update = cur.add(u, eps)?;
        Ok(())
    }

    /// Evaluates the products with a leaf factor.
    fn evaluate_computable(&mut self, eps: f64) -> Result<()> {
        let (now, later): (Vec<_>, Vec<_>) = self.pending.drain(..).partition(|p| p.a.is_leaf() || p.b.is_leaf());
        self.pending = later;
        for p in now {
            self.absorb(product(p.alpha, p.a, p.b, false, eps)?, eps)?;
        }
        Ok(())
    }

    /// Evaluates everything into one update.
    fn evaluate_all(mut self, want_dense: bool, eps: f64) -> Result<Update<T>> {
        for p in mem::take(&mut self.pending) {
            self.absorb(product(p.alpha, p.a, p.b, want_dense, eps)?, eps)?;
        }
        Ok(self.update)
    }

    /// Accumulator of child `(i, j)`; pending products must be structured.
    fn restrict(&self, i: usize, j: usize, rows: Range<usize>, cols: Range<usize>) -> Result<Self> {
        let mut pending = Vec::with_capacity(2 * self.pending.len());
        for p in &self.pending {
            let (Some(a), Some(b)) = (p.a.children(), p.b.children()) else {
                return Err(invalid("pending product with a leaf factor"));
            };
            for l in 0..2 {
                pending.push(Pending { alpha: p.alpha, a: &a[2 * i + l], b: &b[2 * l + j] });
            }
        }
        Ok(Accumulator { update: self.update.restrict(rows, cols), pending })
    }
}

/// Relative row and column ranges of the four children of `m`.
fn child_ranges<T: Real>(m: &HMatrix<T>) -> [(Range<usize>, Range<usize>); 4] {
    let (r0, c0) = (m.rows().start, m.cols().start);
    let ch = m.children().expect("structured block");
    std::array::from_fn(|k| {
        let (r, c) = (ch[k].rows(), ch[k].cols());
        (r.start - r0..r.end - r0, c.start - c0..c.end - c0)
    })
}

fn tracked<R>(ctx: &mut Ctx, f: impl FnOnce(&mut Ctx) -> Result<R>) -> Result<R> {
    ctx.stats.accumulators_alive += 1;
    ctx.stats.accumulators_created += 1;
    ctx.stats.accumulators_peak = ctx.stats.accumulators_peak.max(ctx.stats.accumulators_alive);
    let r = f(ctx);
    ctx.stats.accumulators_alive -= 1;
    r
}

fn apply_at_leaf<T: Real>(c: &mut HMatrix<T>, acc: Accumulator<'_, T>, ctx: &mut Ctx) -> Result<Work<T>> {
    let want_dense = matches!(c.node(), Node::Dense(_));
    let eps = ctx.mode.eps;
    let upd = acc.evaluate_all(want_dense, eps)?;
    Work::take(c)?.add(upd, eps)
}

/// `C := C + (accumulated updates)`.
pub fn hmul_accumulated<T: Real>(c: &mut HMatrix<T>, acc: Accumulator<'_, T>, ctx: &mut Ctx) -> Result<()> {
    let mut acc = acc;
    tracked(ctx, |ctx| {
        if c.is_leaf() {
            if acc.update.is_zero() && acc.pending.is_empty() {
                return Ok(());
            }
            return apply_at_leaf(c, acc, ctx)?.put(c, ctx);
        }
        acc.evaluate_computable(ctx.mode.eps)?;
        if acc.update.is_zero() && acc.pending.is_empty() {
            return Ok(());
        }
        let ranges = child_ranges(c);
        let children = c.children_mut().expect("structured block");
        for (k, child) in children.iter_mut().enumerate() {
            let (r, cl) = ranges[k].clone();
            hmul_accumulated(child, acc.restrict(k / 2, k % 2, r, cl)?, ctx)?;
        }
        Ok(())
    })
}

/// `B := L^-1 (B + accumulated updates)`.
pub(crate) fn trsm_lower<T: Real>(lu: &HMatrix<T>, b: &mut HMatrix<T>, acc: Accumulator<'_, T>, ctx: &mut Ctx) -> Result<()> {
    let mut acc = acc;
    tracked(ctx, |ctx| {
        if lu.is_leaf() || b.is_leaf() {
            let w = apply_at_leaf(b, acc, ctx)?;
            return solve_leaf_rhs(lu, w, true)?.put(b, ctx);
        }
        acc.evaluate_computable(ctx.mode.eps)?;
        let ranges = child_ranges(b);
        let l = lu.children().expect("structured block");
        let [b00, b01, b10, b11] = b.children_mut().expect("structured block");
        for (j, top, bottom) in [(0, b00, b10), (1, b01, b11)] {
            let (r, c) = ranges[j].clone();
            trsm_lower(&l[0], top, acc.restrict(0, j, r, c)?, ctx)?;
            let (r, c) = ranges[2 + j].clone();
            let mut lower = acc.restrict(1, j, r, c)?;
            lower.push(-T::one(), &l[2], top);
            trsm_lower(&l[3], bottom, lower, ctx)?;
        }
        Ok(())
    })
}

/// `B := (B + accumulated updates) U^-1`.
pub(crate) fn trsm_upper<T: Real>(lu: &HMatrix<T>, b: &mut HMatrix<T>, acc: Accumulator<'_, T>, ctx: &mut Ctx) -> Result<()> {
    let mut acc = acc;
    tracked(ctx, |ctx| {
        if lu.is_leaf() || b.is_leaf() {
            let w = apply_at_leaf(b, acc, ctx)?;
            return solve_leaf_rhs(lu, w, false)?.put(b, ctx);
        }
        acc.evaluate_computable(ctx.mode.eps)?;
        let ranges = child_ranges(b);
        let u = lu.children().expect("structured block");
        let [b00, b01, b10, b11] = b.children_mut().expect("structured block");
        for (i, left, right) in [(0, b00, b01), (1, b10, b11)] {
            let (r, c) = ranges[2 * i].clone();
            trsm_upper(&u[0], left, acc.restrict(i, 0, r, c)?, ctx)?;
            let (r, c) = ranges[2 * i + 1].clone();
            let mut rest = acc.restrict(i, 1, r, c)?;
            rest.push(-T::one(), left, &u[1]);
            trsm_upper(&u[3], right, rest, ctx)?;
        }
        Ok(())
    })
}

/// In-place LU of `A + (accumulated updates)`.
pub(crate) fn lu<T: Real>(a: &mut HMatrix<T>, acc: Accumulator<'_, T>, ctx: &mut Ctx) -> Result<()> {
    let mut acc = acc;
    tracked(ctx, |ctx| {
        if a.is_leaf() {
            let (rows, cols) = (a.rows(), a.cols());
            return match apply_at_leaf(a, acc, ctx)? {
                Work::Dense(mut d) => {
                    dense_lu(&mut d, rows, cols)?;
                    Work::Dense(d).put(a, ctx)
                }
                Work::Lowrank(_) => Err(invalid("diagonal block stored in lowrank form")),
            };
        }
        acc.evaluate_computable(ctx.mode.eps)?;
        let ranges = child_ranges(a);
        let [a00, a01, a10, a11] = a.children_mut().expect("structured block");
        let sub = |k: usize| acc.restrict(k / 2, k % 2, ranges[k].0.clone(), ranges[k].1.clone());
        lu(a00, sub(0)?, ctx)?;
        trsm_lower(a00, a01, sub(1)?, ctx)?;
        trsm_upper(a00, a10, sub(2)?, ctx)?;
        let mut last = sub(3)?;
        drop(acc);
        last.push(-T::one(), a10, a01);
        lu(a11, last, ctx)
    })
}
