//! Lowrank storage with precision varying across singular vectors.
//!
//! Both representations keep `W diag(sigma) X^T` with orthonormal `W`, `X`
//! and drop singular values at or below `delta = eps * sigma_0`.
//! [`MpLowrank`] groups columns into IEEE formats; [`AplrLowrank`] encodes
//! every column with its own codec accuracy `delta / sigma_i`.

mod aplr;
mod mp;

pub use aplr::{aplr_compress, aplr_decompress, AplrLowrank};
pub use mp::{mp_compress, mp_compress_with, mp_decompress, mp_error_bound, mp_partition, MpGroup, MpLowrank};

use half::f16;
use nalgebra::DMatrix;

use crate::bytes::Cursor;
use crate::error::{corrupt, Result};
use crate::lowrank::{svd_factorize, LowrankBlock, OrthoLowrank, TruncationCriterion};
use crate::scalar::Real;

/// Storage formats available to mixed-precision groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    Fp64,
    Fp32,
    Fp16,
}

/// FP64, FP32 and FP16 from most to least accurate.
pub const MP_D_S_H: [Precision; 3] = [Precision::Fp64, Precision::Fp32, Precision::Fp16];

impl Precision {
    pub fn unit_roundoff(self) -> f64 {
        match self {
            Precision::Fp64 => 1.1e-16,
            Precision::Fp32 => 6.0e-8,
            Precision::Fp16 => 4.9e-4,
        }
    }

    pub fn bytes(self) -> usize {
        match self {
            Precision::Fp64 => 8,
            Precision::Fp32 => 4,
            Precision::Fp16 => 2,
        }
    }

    fn tag(self) -> u8 {
        self as u8
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Precision::Fp64),
            1 => Ok(Precision::Fp32),
            2 => Ok(Precision::Fp16),
            _ => Err(corrupt(format!("unknown precision tag {tag}"))),
        }
    }
}

/// Values held in one of the [`Precision`] formats.
#[derive(Clone, Debug, PartialEq)]
pub enum Stored {
    Fp64(Vec<f64>),
    Fp32(Vec<f32>),
    Fp16(Vec<f16>),
}

impl Stored {
    pub fn from_f64(values: &[f64], precision: Precision) -> Self {
        match precision {
            Precision::Fp64 => Stored::Fp64(values.to_vec()),
            Precision::Fp32 => Stored::Fp32(values.iter().map(|&v| v as f32).collect()),
            Precision::Fp16 => Stored::Fp16(values.iter().map(|&v| f16::from_f64(v)).collect()),
        }
    }

    pub fn precision(&self) -> Precision {
        match self {
            Stored::Fp64(_) => Precision::Fp64,
            Stored::Fp32(_) => Precision::Fp32,
            Stored::Fp16(_) => Precision::Fp16,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Stored::Fp64(v) => v.len(),
            Stored::Fp32(v) => v.len(),
            Stored::Fp16(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn byte_size(&self) -> usize {
        self.len() * self.precision().bytes()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Stored::Fp64(v) => v.clone(),
            Stored::Fp32(v) => v.iter().map(|&x| x as f64).collect(),
            Stored::Fp16(v) => v.iter().map(|x| x.to_f64()).collect(),
        }
    }

    fn write_to(&self, out: &mut Vec<u8>) {
        match self {
            Stored::Fp64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            Stored::Fp32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            Stored::Fp16(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
    }

    fn read_from(r: &mut Cursor<'_>, precision: Precision, len: usize) -> Result<Self> {
        let bytes = r.take(len.checked_mul(precision.bytes()).ok_or_else(|| corrupt("length overflows"))?)?;
        Ok(match precision {
            Precision::Fp64 => Stored::Fp64(
                bytes
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect(),
            ),
            Precision::Fp32 => Stored::Fp32(
                bytes
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                    .collect(),
            ),
            Precision::Fp16 => Stored::Fp16(
                bytes
                    .chunks_exact(2)
                    .map(|c| f16::from_le_bytes(c.try_into().expect("2 bytes")))
                    .collect(),
            ),
        })
    }
}

fn write_sigma(sigma: &[f64], out: &mut Vec<u8>) {
    out.extend_from_slice(&(sigma.len() as u32).to_le_bytes());
    for s in sigma {
        out.extend_from_slice(&s.to_le_bytes());
    }
}

fn read_sigma(r: &mut Cursor<'_>) -> Result<Vec<f64>> {
    let k = r.u32()? as usize;
    let sigma = (0..k).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    if sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) || sigma.windows(2).any(|w| w[0] < w[1]) {
        return Err(corrupt("singular values must be finite, nonnegative and descending"));
    }
    Ok(sigma)
}

/// Orthonormal factorization in f64 keeping `sigma_i > eps * sigma_0`.
fn factorize<T: Real>(lr: &LowrankBlock<T>, eps: f64) -> Result<OrthoLowrank<f64>> {
    let u = lr.u.map(|x| x.as_f64());
    let v = lr.v.map(|x| x.as_f64());
    svd_factorize(&u, &v, TruncationCriterion::new(eps))
}

fn ortho_to_lowrank(w: DMatrix<f64>, sigma: &[f64], x: DMatrix<f64>) -> LowrankBlock<f64> {
    OrthoLowrank {
        w,
        sigma: sigma.to_vec().into(),
        x,
    }
    .into_lowrank()
}
