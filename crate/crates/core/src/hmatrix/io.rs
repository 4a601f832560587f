//! Binary H-matrix files.
//!
//! Layout: `"HCMX"`, `u32` version, `u8` scalar tag (0 = f64, 1 = f32), then
//! one record per node in preorder:
//! `[u8 kind][u64 row start][u64 row end][u64 col start][u64 col end][u8 storage]`
//! followed directly by the node's payload. All integers are little-endian.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::bytes::Cursor;
use crate::codec::CompressedBuffer;
use crate::error::{corrupt, Result};
use crate::lowrank::LowrankBlock;
use crate::mixed::{AplrLowrank, MpLowrank};
use crate::scalar::Real;

use super::{DenseData, HMatrix, LowrankData, Node};

const MAGIC: &[u8; 4] = b"HCMX";
const VERSION: u32 = 1;

const KIND_STRUCTURED: u8 = 0;
const KIND_DENSE: u8 = 1;
const KIND_LOWRANK: u8 = 2;

const STORE_NONE: u8 = 0;
const STORE_RAW: u8 = 1;
const STORE_CODEC: u8 = 2;
const STORE_MIXED: u8 = 3;
const STORE_ADAPTIVE: u8 = 4;

fn scalar_tag<T: Real>() -> u8 {
    if T::BYTES == 8 {
        0
    } else {
        1
    }
}

fn write_values<T: Real>(m: &DMatrix<T>, out: &mut Vec<u8>) {
    for &v in m.iter() {
        if T::BYTES == 8 {
            out.extend_from_slice(&v.as_f64().to_le_bytes());
        } else {
            out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    }
}

fn read_values<T: Real>(r: &mut Cursor<'_>, rows: usize, cols: usize) -> Result<DMatrix<T>> {
    let len = rows.checked_mul(cols).and_then(|n| n.checked_mul(T::BYTES));
    let bytes = r.take(len.ok_or_else(|| corrupt("block size overflows"))?)?;
    let values = bytes.chunks_exact(T::BYTES).map(|c| match T::BYTES {
        8 => T::cast(f64::from_le_bytes(c.try_into().expect("8 bytes"))),
        _ => T::cast(f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64),
    });
    Ok(DMatrix::from_iterator(rows, cols, values))
}

fn read_buffer(r: &mut Cursor<'_>, count: usize) -> Result<CompressedBuffer> {
    let (buf, used) = CompressedBuffer::from_bytes(r.rest())?;
    r.advance(used);
    if buf.len() != count {
        return Err(corrupt(format!("buffer holds {} values, expected {count}", buf.len())));
    }
    Ok(buf)
}

impl<T: Real> HMatrix<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(scalar_tag::<T>());
        self.visit(&mut |m| m.write_record(&mut out));
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = Cursor::new(data);
        if r.take(4)? != MAGIC {
            return Err(corrupt("missing HCMX magic"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(corrupt(format!("unsupported version {version}")));
        }
        let tag = r.u8()?;
        if tag != scalar_tag::<T>() {
            return Err(corrupt(format!("scalar tag {tag} does not match the requested type")));
        }
        let m = Self::read_record(&mut r)?;
        if !r.rest().is_empty() {
            return Err(corrupt("trailing bytes after the last record"));
        }
        Ok(m)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut data = Vec::new();
        r.read_to_end(&mut data)?;
        Self::from_bytes(&data)
    }

    fn write_record(&self, out: &mut Vec<u8>) {
        let (kind, store) = match &self.node {
            Node::Structured(_) => (KIND_STRUCTURED, STORE_NONE),
            Node::Dense(DenseData::Raw(_)) => (KIND_DENSE, STORE_RAW),
            Node::Dense(DenseData::Compressed(_)) => (KIND_DENSE, STORE_CODEC),
            Node::Lowrank(LowrankData::Raw(_)) => (KIND_LOWRANK, STORE_RAW),
            Node::Lowrank(LowrankData::Codec { .. }) => (KIND_LOWRANK, STORE_CODEC),
            Node::Lowrank(LowrankData::Mixed(_)) => (KIND_LOWRANK, STORE_MIXED),
            Node::Lowrank(LowrankData::Adaptive(_)) => (KIND_LOWRANK, STORE_ADAPTIVE),
        };
        out.push(kind);
        for v in [self.rows.start, self.rows.end, self.cols.start, self.cols.end] {
            out.extend_from_slice(&(v as u64).to_le_bytes());
        }
        out.push(store);
        match &self.node {
            Node::Structured(_) => {}
            Node::Dense(DenseData::Raw(d)) => write_values(d, out),
            Node::Dense(DenseData::Compressed(buf)) => buf.write_to(out),
            Node::Lowrank(LowrankData::Raw(lr)) => {
                out.extend_from_slice(&(lr.rank() as u32).to_le_bytes());
                write_values(&lr.u, out);
                write_values(&lr.v, out);
            }
            Node::Lowrank(LowrankData::Codec { rank, u, v }) => {
                out.extend_from_slice(&(*rank as u32).to_le_bytes());
                u.write_to(out);
                v.write_to(out);
            }
            Node::Lowrank(LowrankData::Mixed(mp)) => mp.write_to(out),
            Node::Lowrank(LowrankData::Adaptive(a)) => a.write_to(out),
        }
    }

    fn read_record(r: &mut Cursor<'_>) -> Result<Self> {
        let kind = r.u8()?;
        let mut ends = [0usize; 4];
        for e in &mut ends {
            *e = usize::try_from(r.u64()?).map_err(|_| corrupt("index overflows"))?;
        }
        let [rs, re, cs, ce] = ends;
        if rs > re || cs > ce {
            return Err(corrupt("inverted index range"));
        }
        let (rows, cols) = (rs..re, cs..ce);
        let (m, n) = (rows.len(), cols.len());
        let store = r.u8()?;
        let node = match (kind, store) {
            (KIND_STRUCTURED, STORE_NONE) => {
                let children = [
                    Self::read_record(r)?,
                    Self::read_record(r)?,
                    Self::read_record(r)?,
                    Self::read_record(r)?,
                ];
                let s = Self::structured(children).map_err(|e| corrupt(e.to_string()))?;
                if s.rows != rows || s.cols != cols {
                    return Err(corrupt("children do not cover their parent"));
                }
                return Ok(s);
            }
            (KIND_DENSE, STORE_RAW) => Node::Dense(DenseData::Raw(read_values(r, m, n)?)),
            (KIND_DENSE, STORE_CODEC) => Node::Dense(DenseData::Compressed(read_buffer(r, m * n)?)),
            (KIND_LOWRANK, STORE_RAW) => {
                let k = r.u32()? as usize;
                let u = read_values(r, m, k)?;
                let v = read_values(r, n, k)?;
                Node::Lowrank(LowrankData::Raw(LowrankBlock { u, v }))
            }
            (KIND_LOWRANK, STORE_CODEC) => {
                let rank = r.u32()? as usize;
                let u = read_buffer(r, m * rank)?;
                let v = read_buffer(r, n * rank)?;
                Node::Lowrank(LowrankData::Codec { rank, u, v })
            }
            (KIND_LOWRANK, STORE_MIXED) => {
                let (mp, used) = MpLowrank::from_bytes(r.rest(), m, n)?;
                r.advance(used);
                Node::Lowrank(LowrankData::Mixed(mp))
            }
            (KIND_LOWRANK, STORE_ADAPTIVE) => {
                let (a, used) = AplrLowrank::from_bytes(r.rest(), m, n)?;
                r.advance(used);
                Node::Lowrank(LowrankData::Adaptive(a))
            }
            _ => return Err(corrupt(format!("invalid node kind {kind} with storage {store}"))),
        };
        Ok(Self::from_parts(rows, cols, node))
    }
}
