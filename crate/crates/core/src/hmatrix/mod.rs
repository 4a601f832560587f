//! Hierarchical matrices with per-leaf storage formats.

mod assemble;
mod io;
mod matvec;
mod stats;
mod storage;

pub use assemble::{assemble, AssemblyReport};
pub use matvec::Op;
pub use stats::{dynamic_range, DynamicRangeStats};
pub use storage::{MemoryReport, StorageMode, NODE_OVERHEAD_BYTES};

use std::borrow::Cow;
use std::ops::Range;

use nalgebra::DMatrix;

use crate::codec::{self, CompressedBuffer};
use crate::error::{invalid, Result};
use crate::lowrank::{dense_to_lowrank, LowrankBlock, TruncationCriterion};
use crate::mixed::{aplr_decompress, mp_decompress, AplrLowrank, MpLowrank};
use crate::scalar::Real;

/// Payload of an inadmissible leaf.
#[derive(Clone, Debug, PartialEq)]
pub enum DenseData<T: Real> {
    Raw(DMatrix<T>),
    Compressed(CompressedBuffer),
}

/// Payload of an admissible leaf.
#[derive(Clone, Debug, PartialEq)]
pub enum LowrankData<T: Real> {
    Raw(LowrankBlock<T>),
    /// `U` and `V` compressed independently.
    Codec {
        rank: usize,
        u: CompressedBuffer,
        v: CompressedBuffer,
    },
    Mixed(MpLowrank),
    Adaptive(AplrLowrank),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node<T: Real> {
    /// Row-major 2x2 sub-blocks.
    Structured(Box<[HMatrix<T>; 4]>),
    Dense(DenseData<T>),
    Lowrank(LowrankData<T>),
}

/// Block `rows x cols` of a hierarchical matrix, addressed by internal indices.
#[derive(Clone, Debug, PartialEq)]
pub struct HMatrix<T: Real> {
    rows: Range<usize>,
    cols: Range<usize>,
    node: Node<T>,
}

impl<T: Real> DenseData<T> {
    pub fn is_compressed(&self) -> bool {
        matches!(self, DenseData::Compressed(_))
    }

    /// The block as a matrix, decompressing if needed.
    pub fn matrix(&self, rows: usize, cols: usize) -> Result<Cow<'_, DMatrix<T>>> {
        match self {
            DenseData::Raw(d) => Ok(Cow::Borrowed(d)),
            DenseData::Compressed(buf) => Ok(Cow::Owned(decode_matrix(buf, rows, cols)?)),
        }
    }
}

impl<T: Real> LowrankData<T> {
    pub fn rank(&self) -> usize {
        match self {
            LowrankData::Raw(lr) => lr.rank(),
            LowrankData::Codec { rank, .. } => *rank,
            LowrankData::Mixed(mp) => mp.rank(),
            LowrankData::Adaptive(a) => a.rank(),
        }
    }

    pub fn is_compressed(&self) -> bool {
        !matches!(self, LowrankData::Raw(_))
    }

    /// Factors `U V^T`, decompressing if needed.
    pub fn factors(&self, rows: usize, cols: usize) -> Result<Cow<'_, LowrankBlock<T>>> {
        let lr64 = match self {
            LowrankData::Raw(lr) => return Ok(Cow::Borrowed(lr)),
            LowrankData::Codec { rank, u, v } => {
                return Ok(Cow::Owned(LowrankBlock {
                    u: decode_matrix(u, rows, *rank)?,
                    v: decode_matrix(v, cols, *rank)?,
                }))
            }
            LowrankData::Mixed(mp) => mp_decompress(mp),
            LowrankData::Adaptive(a) => aplr_decompress(a)?,
        };
        Ok(Cow::Owned(LowrankBlock {
            u: lr64.u.map(T::cast),
            v: lr64.v.map(T::cast),
        }))
    }
}

pub(crate) fn decode_matrix<T: Real>(buf: &CompressedBuffer, rows: usize, cols: usize) -> Result<DMatrix<T>> {
    if buf.len() != rows * cols {
        return Err(invalid(format!("buffer holds {} values, block needs {}", buf.len(), rows * cols)));
    }
    let values = codec::decompress(buf)?;
    Ok(DMatrix::from_iterator(rows, cols, values.into_iter().map(T::cast)))
}

impl<T: Real> HMatrix<T> {
    pub fn dense(rows: Range<usize>, cols: Range<usize>, d: DMatrix<T>) -> Result<Self> {
        if d.shape() != (rows.len(), cols.len()) {
            return Err(invalid(format!("dense block {:?} does not fit {rows:?} x {cols:?}", d.shape())));
        }
        Ok(Self {
            rows,
            cols,
            node: Node::Dense(DenseData::Raw(d)),
        })
    }

    pub fn lowrank(rows: Range<usize>, cols: Range<usize>, lr: LowrankBlock<T>) -> Result<Self> {
        if (lr.nrows(), lr.ncols()) != (rows.len(), cols.len()) {
            return Err(invalid(format!(
                "lowrank block {}x{} does not fit {rows:?} x {cols:?}",
                lr.nrows(),
                lr.ncols()
            )));
        }
        Ok(Self {
            rows,
            cols,
            node: Node::Lowrank(LowrankData::Raw(lr)),
        })
    }

    /// Inner node; children must tile the block in row-major order.
    pub fn structured(children: [HMatrix<T>; 4]) -> Result<Self> {
        let [a, b, c, d] = &children;
        let ok = a.rows == b.rows
            && c.rows == d.rows
            && a.cols == c.cols
            && b.cols == d.cols
            && a.rows.end == c.rows.start
            && a.cols.end == b.cols.start;
        if !ok {
            return Err(invalid("children do not tile a 2x2 block"));
        }
        Ok(Self {
            rows: a.rows.start..c.rows.end,
            cols: a.cols.start..b.cols.end,
            node: Node::Structured(Box::new(children)),
        })
    }

    pub(crate) fn from_parts(rows: Range<usize>, cols: Range<usize>, node: Node<T>) -> Self {
        Self { rows, cols, node }
    }

    pub fn rows(&self) -> Range<usize> {
        self.rows.clone()
    }

    pub fn cols(&self) -> Range<usize> {
        self.cols.clone()
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn node(&self) -> &Node<T> {
        &self.node
    }

    pub fn node_mut(&mut self) -> &mut Node<T> {
        &mut self.node
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self.node, Node::Structured(_))
    }

    pub fn children(&self) -> Option<&[HMatrix<T>; 4]> {
        match &self.node {
            Node::Structured(ch) => Some(ch),
            _ => None,
        }
    }

    pub fn children_mut(&mut self) -> Option<&mut [HMatrix<T>; 4]> {
        match &mut self.node {
            Node::Structured(ch) => Some(ch),
            _ => None,
        }
    }

    /// Leaves in preorder.
    pub fn leaves(&self) -> Vec<&HMatrix<T>> {
        let mut out = Vec::new();
        self.visit(&mut |m| {
            if m.is_leaf() {
                out.push(m)
            }
        });
        out
    }

    pub fn leaves_mut(&mut self) -> Vec<&mut HMatrix<T>> {
        let mut out = Vec::new();
        collect_leaves_mut(self, &mut out);
        out
    }

    /// Preorder traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a HMatrix<T>)) {
        f(self);
        if let Some(ch) = self.children() {
            ch.iter().for_each(|c| c.visit(f));
        }
    }

    pub fn depth(&self) -> usize {
        self.children().map_or(0, |ch| 1 + ch.iter().map(|c| c.depth()).max().unwrap_or(0))
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn max_rank(&self) -> usize {
        self.leaves()
            .iter()
            .filter_map(|l| match &l.node {
                Node::Lowrank(lr) => Some(lr.rank()),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// True if any leaf holds compressed data.
    pub fn is_compressed(&self) -> bool {
        self.leaves().iter().any(|l| match &l.node {
            Node::Dense(d) => d.is_compressed(),
            Node::Lowrank(lr) => lr.is_compressed(),
            Node::Structured(_) => false,
        })
    }

    /// Same block structure, leaf kinds and ranges.
    pub fn same_structure<S: Real>(&self, other: &HMatrix<S>) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        match (&self.node, &other.node) {
            (Node::Structured(a), Node::Structured(b)) => a.iter().zip(b.iter()).all(|(x, y)| x.same_structure(y)),
            (Node::Dense(_), Node::Dense(_)) | (Node::Lowrank(_), Node::Lowrank(_)) => true,
            _ => false,
        }
    }

    /// Dense leaf matrix, decompressing if needed.
    pub fn dense_block(&self) -> Result<Option<Cow<'_, DMatrix<T>>>> {
        match &self.node {
            Node::Dense(d) => d.matrix(self.nrows(), self.ncols()).map(Some),
            _ => Ok(None),
        }
    }

    /// Lowrank leaf factors, decompressing if needed.
    pub fn lowrank_block(&self) -> Result<Option<Cow<'_, LowrankBlock<T>>>> {
        match &self.node {
            Node::Lowrank(lr) => lr.factors(self.nrows(), self.ncols()).map(Some),
            _ => Ok(None),
        }
    }

    /// Frobenius norm, computed leaf by leaf.
    pub fn norm_fro(&self) -> Result<f64> {
        let mut sq = 0.0;
        for leaf in self.leaves() {
            match &leaf.node {
                Node::Structured(_) => {}
                Node::Dense(d) => sq += d.matrix(leaf.nrows(), leaf.ncols())?.iter().map(|x| x.as_f64().powi(2)).sum::<f64>(),
                Node::Lowrank(lr) => {
                    let f = lr.factors(leaf.nrows(), leaf.ncols())?;
                    let (gu, gv) = (f.u.tr_mul(&f.u), f.v.tr_mul(&f.v));
                    sq += gu.component_mul(&gv).sum().as_f64();
                }
            }
        }
        Ok(sq.max(0.0).sqrt())
    }

    /// The full block as a dense matrix.
    pub fn to_dense(&self) -> Result<DMatrix<T>> {
        let mut out = DMatrix::zeros(self.nrows(), self.ncols());
        self.write_dense(&mut out, self.rows.start, self.cols.start)?;
        Ok(out)
    }

    fn write_dense(&self, out: &mut DMatrix<T>, r0: usize, c0: usize) -> Result<()> {
        let (i, j) = (self.rows.start - r0, self.cols.start - c0);
        let (m, n) = (self.nrows(), self.ncols());
        match &self.node {
            Node::Structured(ch) => ch.iter().try_for_each(|c| c.write_dense(out, r0, c0))?,
            Node::Dense(d) => out.view_mut((i, j), (m, n)).copy_from(&*d.matrix(m, n)?),
            Node::Lowrank(lr) => out.view_mut((i, j), (m, n)).copy_from(&lr.factors(m, n)?.to_dense()),
        }
        Ok(())
    }

    /// Same structure with every leaf zero: dense zeros and rank-0 factors.
    pub fn zeros_like(&self) -> Self {
        let node = match &self.node {
            Node::Structured(ch) => Node::Structured(Box::new(ch.each_ref().map(|c| c.zeros_like()))),
            Node::Dense(_) => Node::Dense(DenseData::Raw(DMatrix::zeros(self.nrows(), self.ncols()))),
            Node::Lowrank(_) => Node::Lowrank(LowrankData::Raw(LowrankBlock::zeros(self.nrows(), self.ncols()))),
        };
        Self::from_parts(self.rows(), self.cols(), node)
    }

    /// Same structure filled with `f(i, j)`; lowrank leaves are truncated
    /// dense SVDs at accuracy `eps`.
    pub fn from_entries(template: &HMatrix<T>, eps: f64, f: &impl Fn(usize, usize) -> T) -> Result<Self> {
        let (r0, c0) = (template.rows.start, template.cols.start);
        let block = || DMatrix::from_fn(template.nrows(), template.ncols(), |i, j| f(r0 + i, c0 + j));
        let node = match &template.node {
            Node::Structured(ch) => {
                let [a, b, c, d] = &**ch;
                Node::Structured(Box::new([
                    Self::from_entries(a, eps, f)?,
                    Self::from_entries(b, eps, f)?,
                    Self::from_entries(c, eps, f)?,
                    Self::from_entries(d, eps, f)?,
                ]))
            }
            Node::Dense(_) => Node::Dense(DenseData::Raw(block())),
            Node::Lowrank(_) => {
                let lr = dense_to_lowrank(&block(), TruncationCriterion::new(eps)).into_lowrank();
                Node::Lowrank(LowrankData::Raw(lr))
            }
        };
        Ok(Self::from_parts(template.rows(), template.cols(), node))
    }
}

fn collect_leaves_mut<'a, T: Real>(m: &'a mut HMatrix<T>, out: &mut Vec<&'a mut HMatrix<T>>) {
    if m.is_leaf() {
        out.push(m);
        return;
    }
    if let Node::Structured(ch) = &mut m.node {
        for c in ch.iter_mut() {
            collect_leaves_mut(c, out);
        }
    }
}
