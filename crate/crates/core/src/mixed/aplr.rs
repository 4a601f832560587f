use nalgebra::DMatrix;

use crate::bytes::Cursor;
use crate::codec::bits::{BitReader, BitWriter};
use crate::codec::{block_range, mantissa_bits_for, FormatDescriptor, Scheme};
use crate::error::{corrupt, Result};
use crate::lowrank::{LowrankBlock, OrthoLowrank};
use crate::scalar::Real;

use super::{factorize, ortho_to_lowrank, read_sigma, write_sigma};

/// Per-column header: `[u8 e][u8 m][f64 m_min]`.
const COLUMN_HEADER_BYTES: usize = 10;

/// Columns of one factor, each with its own layout, packed into one stream.
#[derive(Clone, Debug, PartialEq)]
pub struct PackedColumns {
    pub layouts: Vec<FormatDescriptor>,
    payload: Vec<u8>,
}

impl PackedColumns {
    fn encode(m: &DMatrix<f64>, mantissas: &[u32], scheme: Scheme) -> Result<Self> {
        let ranges = m
            .column_iter()
            .zip(mantissas)
            .map(|(col, &mb)| block_range(col.as_slice(), mb))
            .collect::<Result<Vec<_>>>()?;
        // one exponent width per factor keeps the code width monotone in the column index
        let e_r = ranges.iter().map(|r| r.1).max().unwrap_or(2);
        let mut payload = Vec::new();
        let mut w = BitWriter::new(&mut payload);
        let mut layouts = Vec::with_capacity(mantissas.len());
        for ((col, &mb), &(scale, _)) in m.column_iter().zip(mantissas).zip(&ranges) {
            let (exp_bits, mant_bits) = scheme.layout(e_r, mb);
            let d = FormatDescriptor {
                scheme,
                exp_bits,
                mant_bits,
                scale,
            };
            d.encode(col.as_slice(), &mut w)?;
            layouts.push(d);
        }
        w.finish();
        Ok(Self { layouts, payload })
    }

    fn decode(&self, rows: usize) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(rows, self.layouts.len());
        let mut r = BitReader::new(&self.payload);
        for (mut col, d) in out.column_iter_mut().zip(&self.layouts) {
            d.decode(&mut r, col.as_mut_slice())?;
        }
        Ok(out)
    }

    /// Packed code bytes without headers.
    pub fn payload_bytes(&self) -> usize {
        self.payload.len()
    }

    pub fn byte_size(&self) -> usize {
        COLUMN_HEADER_BYTES * self.layouts.len() + self.payload.len()
    }

    fn write_to(&self, out: &mut Vec<u8>) {
        for d in &self.layouts {
            out.extend_from_slice(&[d.exp_bits as u8, d.mant_bits as u8]);
            out.extend_from_slice(&d.scale.to_le_bytes());
        }
        out.extend_from_slice(&self.payload);
    }

    fn read_from(r: &mut Cursor<'_>, scheme: Scheme, rows: usize, k: usize) -> Result<Self> {
        let mut layouts = Vec::with_capacity(k);
        let mut bits = 0usize;
        for _ in 0..k {
            let (exp_bits, mant_bits) = (r.u8()? as u32, r.u8()? as u32);
            let scale = r.f64()?;
            if !(1..=11).contains(&exp_bits) || !(1..=52).contains(&mant_bits) || !(scale.is_finite() && scale > 0.0) {
                return Err(corrupt("invalid column layout"));
            }
            let d = FormatDescriptor {
                scheme,
                exp_bits,
                mant_bits,
                scale,
            };
            bits = rows
                .checked_mul(d.width() as usize)
                .and_then(|b| b.checked_add(bits))
                .ok_or_else(|| corrupt("payload size overflows"))?;
            layouts.push(d);
        }
        let payload = r.take(bits.div_ceil(8))?.to_vec();
        Ok(Self { layouts, payload })
    }
}

/// Adaptive-precision lowrank block: column `i` of `W` and `X` is encoded at
/// accuracy `min(1/2, delta / sigma_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AplrLowrank {
    rows: usize,
    cols: usize,
    pub scheme: Scheme,
    pub sigma: Vec<f64>,
    pub w: PackedColumns,
    pub x: PackedColumns,
}

impl AplrLowrank {
    pub fn from_factors(f: &OrthoLowrank<f64>, delta: f64, scheme: Scheme) -> Result<Self> {
        let k = f.sigma.iter().take_while(|&&s| s > delta).count();
        let mantissas = f.sigma.as_slice()[..k]
            .iter()
            .map(|&s| mantissa_bits_for((delta / s).min(0.5)))
            .collect::<Result<Vec<_>>>()?;
        let w = f.w.columns(0, k).into_owned();
        let x = f.x.columns(0, k).into_owned();
        Ok(Self {
            rows: f.w.nrows(),
            cols: f.x.nrows(),
            scheme,
            sigma: f.sigma.as_slice()[..k].to_vec(),
            w: PackedColumns::encode(&w, &mantissas, scheme)?,
            x: PackedColumns::encode(&x, &mantissas, scheme)?,
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Mantissa bits of each column.
    pub fn mantissa_bits(&self) -> Vec<u32> {
        self.w.layouts.iter().map(|d| d.mant_bits).collect()
    }

    /// Packed code bytes of both factors.
    pub fn payload_bytes(&self) -> usize {
        self.w.payload_bytes() + self.x.payload_bytes()
    }

    pub fn byte_size(&self) -> usize {
        4 + 8 * self.rank() + 1 + self.w.byte_size() + self.x.byte_size()
    }

    /// Decoded `(W, sigma, X)`.
    pub fn factors(&self) -> Result<OrthoLowrank<f64>> {
        Ok(OrthoLowrank {
            w: self.w.decode(self.rows)?,
            sigma: self.sigma.clone().into(),
            x: self.x.decode(self.cols)?,
        })
    }

    /// `[u32 rank][f64 sigma..][u8 scheme]` then the column headers and
    /// payload of `W`, then those of `X`.
    pub fn write_to(&self, out: &mut Vec<u8>) {
        write_sigma(&self.sigma, out);
        out.push(self.scheme.tag());
        self.w.write_to(out);
        self.x.write_to(out);
    }

    pub fn from_bytes(data: &[u8], rows: usize, cols: usize) -> Result<(Self, usize)> {
        let mut r = Cursor::new(data);
        let sigma = read_sigma(&mut r)?;
        let scheme = Scheme::from_tag(r.u8()?)?;
        let k = sigma.len();
        let w = PackedColumns::read_from(&mut r, scheme, rows, k)?;
        let x = PackedColumns::read_from(&mut r, scheme, cols, k)?;
        Ok((
            Self {
                rows,
                cols,
                scheme,
                sigma,
                w,
                x,
            },
            r.position(),
        ))
    }
}

pub fn aplr_compress<T: Real>(lr: &LowrankBlock<T>, eps: f64, scheme: Scheme) -> Result<AplrLowrank> {
    let f = factorize(lr, eps)?;
    let delta = f.sigma.iter().next().map_or(0.0, |&s0| eps * s0);
    AplrLowrank::from_factors(&f, delta, scheme)
}

/// Factors `U = W Sigma`, `V = X`.
pub fn aplr_decompress(rep: &AplrLowrank) -> Result<LowrankBlock<f64>> {
    let f = rep.factors()?;
    Ok(ortho_to_lowrank(f.w, &rep.sigma, f.x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graded(rows: usize, cols: usize, decay: f64, k: usize) -> LowrankBlock<f64> {
        let u = DMatrix::from_fn(rows, k, |i, j| ((i * (j + 1)) as f64 * 0.7).sin() * decay.powi(j as i32));
        let v = DMatrix::from_fn(cols, k, |i, j| ((i + 3 * j) as f64 * 0.3).cos());
        LowrankBlock::new(u, v).unwrap()
    }

    #[test]
    fn per_column_mantissas() {
        let f = OrthoLowrank {
            w: DMatrix::<f64>::identity(4, 3),
            sigma: vec![1.0, 1e-2, 1e-3].into(),
            x: DMatrix::<f64>::identity(4, 3),
        };
        let rep = AplrLowrank::from_factors(&f, 1e-8, Scheme::Afl).unwrap();
        assert_eq!(rep.mantissa_bits(), vec![26, 19, 16]);
    }

    #[test]
    fn all_below_delta_is_empty() {
        let f = OrthoLowrank {
            w: DMatrix::<f64>::identity(4, 2),
            sigma: vec![1e-9, 1e-10].into(),
            x: DMatrix::<f64>::identity(4, 2),
        };
        let rep = AplrLowrank::from_factors(&f, 1e-8, Scheme::Dfl).unwrap();
        assert_eq!(rep.rank(), 0);
        assert_eq!(aplr_decompress(&rep).unwrap().rank(), 0);
    }

    #[test]
    fn widths_non_increasing() {
        let lr = graded(40, 30, 0.1, 8);
        for s in Scheme::ALL {
            let rep = aplr_compress(&lr, 1e-6, s).unwrap();
            let widths: Vec<u32> = rep.w.layouts.iter().map(|d| d.width()).collect();
            assert!(widths.windows(2).all(|w| w[0] >= w[1]), "{s}: {widths:?}");
        }
    }

    #[test]
    fn serialization_roundtrip() {
        let lr = graded(20, 12, 0.3, 5);
        let rep = aplr_compress(&lr, 1e-5, Scheme::Aflp).unwrap();
        let mut bytes = Vec::new();
        rep.write_to(&mut bytes);
        assert_eq!(bytes.len(), rep.byte_size());
        let (back, used) = AplrLowrank::from_bytes(&bytes, 20, 12).unwrap();
        assert_eq!(used, bytes.len());
        assert_eq!(back, rep);
        assert!(AplrLowrank::from_bytes(&bytes[..bytes.len() - 1], 20, 12).is_err());
    }

    #[test]
    fn reconstruction_accuracy() {
        let lr = graded(50, 45, 0.2, 10);
        let m = lr.to_dense();
        let eps = 1e-4;
        for s in Scheme::ALL {
            let rep = aplr_compress(&lr, eps, s).unwrap();
            let delta = eps * rep.sigma[0];
            let err = (aplr_decompress(&rep).unwrap().to_dense() - &m).norm();
            assert!(err <= 10.0 * lr.rank() as f64 * delta, "{s}: {err}");
        }
    }
}
