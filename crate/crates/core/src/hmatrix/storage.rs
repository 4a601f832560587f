use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::codec::{self, Scheme};
use crate::error::{invalid, Result};
use crate::lowrank::{LowrankBlock, OrthoLowrank};
use crate::mixed::{aplr_compress, mp_compress, AplrLowrank, MpLowrank, MP_D_S_H};
use crate::scalar::Real;

use super::{DenseData, HMatrix, LowrankData, Node};

/// Bytes charged per tree node for ranges, tags and pointers.
pub const NODE_OVERHEAD_BYTES: usize = 48;

/// How leaf payloads are stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StorageMode {
    /// Uncompressed working precision.
    Raw,
    /// One codec buffer per dense block and per lowrank factor.
    Codec(Scheme),
    /// FP64/FP32/FP16 groups of singular vectors; dense blocks stay raw.
    Mixed,
    /// Per-column codec accuracy for lowrank blocks, codec for dense blocks.
    Adaptive(Scheme),
}

impl StorageMode {
    pub const ALL: [StorageMode; 10] = [
        StorageMode::Raw,
        StorageMode::Codec(Scheme::Afl),
        StorageMode::Codec(Scheme::Aflp),
        StorageMode::Codec(Scheme::Bfl),
        StorageMode::Codec(Scheme::Dfl),
        StorageMode::Mixed,
        StorageMode::Adaptive(Scheme::Afl),
        StorageMode::Adaptive(Scheme::Aflp),
        StorageMode::Adaptive(Scheme::Bfl),
        StorageMode::Adaptive(Scheme::Dfl),
    ];

    pub fn is_raw(self) -> bool {
        self == StorageMode::Raw
    }

    fn dense_scheme(self) -> Option<Scheme> {
        match self {
            StorageMode::Codec(s) | StorageMode::Adaptive(s) => Some(s),
            StorageMode::Raw | StorageMode::Mixed => None,
        }
    }
}

impl fmt::Display for StorageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StorageMode::Raw => f.write_str("fp64"),
            StorageMode::Codec(s) => write!(f, "{s}"),
            StorageMode::Mixed => f.write_str("mp"),
            StorageMode::Adaptive(s) => write!(f, "{s}-aplr"),
        }
    }
}

impl FromStr for StorageMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid(format!("unknown storage mode '{s}'")))
    }
}

/// Byte accounting by payload category.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MemoryReport {
    pub dense_raw: usize,
    pub dense_compressed: usize,
    pub lowrank_raw: usize,
    pub lowrank_compressed: usize,
    pub overhead: usize,
    /// Size of the same matrix with every leaf uncompressed.
    pub uncompressed: usize,
}

impl MemoryReport {
    pub fn total(&self) -> usize {
        self.dense_raw + self.dense_compressed + self.lowrank_raw + self.lowrank_compressed + self.overhead
    }

    pub fn dense(&self) -> usize {
        self.dense_raw + self.dense_compressed
    }

    pub fn lowrank(&self) -> usize {
        self.lowrank_raw + self.lowrank_compressed
    }

    /// `uncompressed / total`.
    pub fn rate(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.uncompressed as f64 / t as f64,
        }
    }
}

impl std::ops::AddAssign for MemoryReport {
    fn add_assign(&mut self, o: Self) {
        self.dense_raw += o.dense_raw;
        self.dense_compressed += o.dense_compressed;
        self.lowrank_raw += o.lowrank_raw;
        self.lowrank_compressed += o.lowrank_compressed;
        self.overhead += o.overhead;
        self.uncompressed += o.uncompressed;
    }
}

fn to_f64<T: Real>(m: &DMatrix<T>) -> Vec<f64> {
    m.iter().map(|x| x.as_f64()).collect()
}

impl<T: Real> DenseData<T> {
    /// Encodes a dense block; stays raw unless compression saves memory.
    pub fn encode(d: DMatrix<T>, mode: StorageMode, eps: f64) -> Result<Self> {
        let Some(scheme) = mode.dense_scheme() else {
            return Ok(DenseData::Raw(d));
        };
        let buf = codec::compress(&to_f64(&d), eps, scheme)?;
        Ok(if buf.byte_size() < d.len() * T::BYTES {
            DenseData::Compressed(buf)
        } else {
            DenseData::Raw(d)
        })
    }

    pub fn byte_size(&self) -> usize {
        match self {
            DenseData::Raw(d) => d.len() * T::BYTES,
            DenseData::Compressed(buf) => buf.byte_size(),
        }
    }
}

impl<T: Real> LowrankData<T> {
    /// Encodes lowrank factors; stays raw unless compression saves memory.
    pub fn encode(lr: LowrankBlock<T>, mode: StorageMode, eps: f64) -> Result<Self> {
        let data = match mode {
            StorageMode::Raw => return Ok(LowrankData::Raw(lr)),
            StorageMode::Codec(s) => Self::codec(&lr, eps, s)?,
            StorageMode::Mixed => LowrankData::Mixed(mp_compress(&lr, eps)?),
            StorageMode::Adaptive(s) => LowrankData::Adaptive(aplr_compress(&lr, eps, s)?),
        };
        Ok(data.or_raw(lr))
    }

    /// Encodes an orthonormal factorization whose singular values were
    /// already truncated at `eps`.
    pub fn encode_factors(f: OrthoLowrank<T>, mode: StorageMode, eps: f64) -> Result<Self> {
        let delta = f.sigma.iter().next().map_or(0.0, |s0| eps * s0.as_f64());
        let as_f64 = |f: &OrthoLowrank<T>| OrthoLowrank {
            w: f.w.map(|x| x.as_f64()),
            sigma: f.sigma.map(|x| x.as_f64()),
            x: f.x.map(|x| x.as_f64()),
        };
        let data = match mode {
            StorageMode::Raw => return Ok(LowrankData::Raw(f.into_lowrank())),
            StorageMode::Codec(s) => {
                let lr = f.into_lowrank();
                return Ok(Self::codec(&lr, eps, s)?.or_raw(lr));
            }
            StorageMode::Mixed => LowrankData::Mixed(MpLowrank::from_factors(&as_f64(&f), delta, &MP_D_S_H)),
            StorageMode::Adaptive(s) => LowrankData::Adaptive(AplrLowrank::from_factors(&as_f64(&f), delta, s)?),
        };
        Ok(data.or_raw(f.into_lowrank()))
    }

    fn codec(lr: &LowrankBlock<T>, eps: f64, scheme: Scheme) -> Result<Self> {
        Ok(LowrankData::Codec {
            rank: lr.rank(),
            u: codec::compress(&to_f64(&lr.u), eps, scheme)?,
            v: codec::compress(&to_f64(&lr.v), eps, scheme)?,
        })
    }

    fn or_raw(self, lr: LowrankBlock<T>) -> Self {
        if self.byte_size() < lr.value_count() * T::BYTES {
            self
        } else {
            LowrankData::Raw(lr)
        }
    }

    pub fn byte_size(&self) -> usize {
        match self {
            LowrankData::Raw(lr) => lr.value_count() * T::BYTES,
            LowrankData::Codec { u, v, .. } => u.byte_size() + v.byte_size(),
            LowrankData::Mixed(mp) => mp.byte_size(),
            LowrankData::Adaptive(a) => a.byte_size(),
        }
    }
}

impl<T: Real> HMatrix<T> {
    /// Byte accounting of the current storage.
    pub fn memory_footprint(&self) -> MemoryReport {
        let mut r = MemoryReport::default();
        self.visit(&mut |m| {
            r.overhead += NODE_OVERHEAD_BYTES;
            r.uncompressed += NODE_OVERHEAD_BYTES;
            match &m.node {
                Node::Structured(_) => {}
                Node::Dense(d) => {
                    let raw = m.nrows() * m.ncols() * T::BYTES;
                    r.uncompressed += raw;
                    match d {
                        DenseData::Raw(_) => r.dense_raw += raw,
                        DenseData::Compressed(_) => r.dense_compressed += d.byte_size(),
                    }
                }
                Node::Lowrank(lr) => {
                    let raw = (m.nrows() + m.ncols()) * lr.rank() * T::BYTES;
                    r.uncompressed += raw;
                    match lr {
                        LowrankData::Raw(_) => r.lowrank_raw += raw,
                        _ => r.lowrank_compressed += lr.byte_size(),
                    }
                }
            }
        });
        r
    }

    /// Compresses every lowrank leaf, and dense leaves if `dense_too`, at
    /// accuracy `eps`. Leaves are processed in parallel.
    pub fn compress_in_place(&mut self, eps: f64, mode: StorageMode, dense_too: bool) -> Result<MemoryReport> {
        let before = self.memory_footprint().total();
        self.leaves_mut().into_par_iter().try_for_each(|leaf| leaf.compress_leaf(eps, mode, dense_too))?;
        let mut report = self.memory_footprint();
        report.uncompressed = before;
        Ok(report)
    }

    /// Restores raw storage in every leaf.
    pub fn decompress_in_place(&mut self) -> Result<()> {
        self.leaves_mut()
            .into_par_iter()
            .try_for_each(|leaf| leaf.compress_leaf(0.5, StorageMode::Raw, true))
    }

    pub(crate) fn compress_leaf(&mut self, eps: f64, mode: StorageMode, dense_too: bool) -> Result<()> {
        let (m, n) = (self.nrows(), self.ncols());
        match &mut self.node {
            Node::Structured(_) => {}
            Node::Dense(d) => {
                if dense_too || mode.is_raw() {
                    let raw = d.matrix(m, n)?.into_owned();
                    *d = DenseData::encode(raw, if dense_too { mode } else { StorageMode::Raw }, eps)?;
                }
            }
            Node::Lowrank(lr) => {
                let raw = lr.factors(m, n)?.into_owned();
                *lr = LowrankData::encode(raw, mode, eps)?;
            }
        }
        Ok(())
    }
}

