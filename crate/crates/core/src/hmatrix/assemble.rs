use std::ops::Range;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::{Block, BlockTree};
use crate::kernels::{assemble_dense, BlockView, EntrySource};
use crate::lowrank::{aca_approximate, dense_to_lowrank, svd_truncate, TruncationCriterion};
use crate::scalar::Real;

use super::{DenseData, HMatrix, LowrankData, Node};

/// Summary of an assembly run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AssemblyReport {
    pub dense_leaves: usize,
    pub lowrank_leaves: usize,
    /// Admissible blocks stored densely because truncation did not pay off.
    pub dense_admissible: usize,
    /// Admissible blocks where ACA hit its rank cap; these were recomputed
    /// from the full block.
    pub rank_capped: Vec<(Range<usize>, Range<usize>)>,
    pub max_rank: usize,
}

enum Leaf<T: Real> {
    Built(HMatrix<T>),
    Capped(HMatrix<T>),
}

/// Builds the H-matrix of `kernel` on `bt`: dense inadmissible leaves and
/// ACA approximations of admissible leaves, recompressed to accuracy `eps`.
pub fn assemble<T: Real, K: EntrySource + ?Sized>(
    bt: &BlockTree<'_>,
    kernel: &K,
    eps: f64,
) -> Result<(HMatrix<T>, AssemblyReport)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("accuracy must lie in (0, 1), got {eps}")));
    }
    if kernel.nrows() != bt.row_tree.size() || kernel.ncols() != bt.col_tree.size() {
        return Err(invalid(format!(
            "kernel is {}x{}, block tree {}x{}",
            kernel.nrows(),
            kernel.ncols(),
            bt.row_tree.size(),
            bt.col_tree.size()
        )));
    }
    let mut report = AssemblyReport::default();
    let m = build(&bt.root, kernel, eps, &mut report);
    m.visit(&mut |leaf| match &leaf.node {
        Node::Dense(_) => report.dense_leaves += 1,
        Node::Lowrank(lr) => {
            report.lowrank_leaves += 1;
            report.max_rank = report.max_rank.max(lr.rank());
        }
        Node::Structured(_) => {}
    });
    Ok((m, report))
}

fn build<T: Real, K: EntrySource + ?Sized>(b: &Block, kernel: &K, eps: f64, report: &mut AssemblyReport) -> HMatrix<T> {
    let Some(children) = &b.children else {
        return match build_leaf(b, kernel, eps) {
            Leaf::Built(m) => m,
            Leaf::Capped(m) => {
                report.rank_capped.push((m.rows(), m.cols()));
                if matches!(m.node, Node::Dense(_)) {
                    report.dense_admissible += 1;
                }
                m
            }
        };
    };
    let built: Vec<(HMatrix<T>, AssemblyReport)> = children
        .par_iter()
        .map(|c| {
            let mut r = AssemblyReport::default();
            let m = build(c, kernel, eps, &mut r);
            (m, r)
        })
        .collect();
    let mut kids = Vec::with_capacity(4);
    for (m, r) in built {
        report.rank_capped.extend(r.rank_capped);
        report.dense_admissible += r.dense_admissible;
        kids.push(m);
    }
    let kids: [HMatrix<T>; 4] = kids.try_into().unwrap_or_else(|_| unreachable!("four children"));
    HMatrix::from_parts(b.rows.clone(), b.cols.clone(), Node::Structured(Box::new(kids)))
}

fn build_leaf<T: Real, K: EntrySource + ?Sized>(b: &Block, kernel: &K, eps: f64) -> Leaf<T> {
    let view = BlockView::new(kernel, b.rows.clone(), b.cols.clone());
    let (m, n) = (b.rows.len(), b.cols.len());
    let leaf = |node| HMatrix::from_parts(b.rows.clone(), b.cols.clone(), node);
    if !b.admissible {
        return Leaf::Built(leaf(Node::Dense(DenseData::Raw(assemble_dense(&view)))));
    }
    let crit = TruncationCriterion::new(eps);
    let aca = aca_approximate::<T, _>(&view, eps, m.min(n) / 2);
    if !aca.rank_capped {
        let lr = svd_truncate(&aca.block.u, &aca.block.v, crit).unwrap_or(aca.block);
        return Leaf::Built(leaf(Node::Lowrank(LowrankData::Raw(lr))));
    }
    let dense = assemble_dense::<T, _>(&view);
    let f = dense_to_lowrank(&dense, crit);
    let node = if f.rank() * (m + n) >= m * n {
        Node::Dense(DenseData::Raw(dense))
    } else {
        Node::Lowrank(LowrankData::Raw(f.into_lowrank()))
    };
    Leaf::Capped(leaf(node))
}
