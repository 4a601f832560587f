//! Bit-packed adaptive-precision floating-point formats.
//!
//! A block is scaled by `1/m_min` and shifted by one, so every nonzero value
//! maps to `v' = |v|/m_min + 1 >= 2` and zero maps to `v' = 1`. Only the low
//! exponent bits of `v'` and a rounded prefix of its mantissa are stored:
//!
//! * `AFL`: exponent width fitted to the block, mantissa from the accuracy.
//! * `AFLP`: as `AFL` with the mantissa padded to a whole number of bytes.
//! * `BFL`: 8 exponent bits, byte aligned.
//! * `DFL`: 11 exponent bits, byte aligned.
//!
//! Each code is `mantissa | exponent << m | sign << (m + e)`, packed
//! contiguously in little-endian bit order.

pub mod bits;

use std::fmt;
use std::str::FromStr;

use crate::error::{corrupt, invalid, Result};

use bits::{BitReader, BitWriter};

/// Serialized header: scheme, e, m, reserved, `m_min`, count.
pub const HEADER_BYTES: usize = 20;

const MANT_MASK: u64 = (1 << 52) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Afl,
    Aflp,
    Bfl,
    Dfl,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Afl, Scheme::Aflp, Scheme::Bfl, Scheme::Dfl];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Afl => "afl",
            Scheme::Aflp => "aflp",
            Scheme::Bfl => "bfl",
            Scheme::Dfl => "dfl",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_tag(tag: u8) -> Result<Self> {
        Self::ALL
            .get(tag as usize)
            .copied()
            .ok_or_else(|| corrupt(format!("unknown codec scheme tag {tag}")))
    }

    /// Final `(e, m)` for a block needing `e_r` exponent and `m` mantissa bits.
    pub fn layout(self, e_r: u32, m: u32) -> (u32, u32) {
        let aligned_mantissa = |e: u32| (1 + e + m).next_multiple_of(8) - 1 - e;
        match self {
            Scheme::Afl => (e_r, m),
            Scheme::Aflp => match aligned_mantissa(e_r) {
                pm if pm <= 52 => (e_r, pm),
                _ => (11, 52),
            },
            Scheme::Bfl => match aligned_mantissa(8) {
                pm if e_r <= 8 && pm <= 52 => (8, pm),
                _ => (11, aligned_mantissa(11)),
            },
            Scheme::Dfl => (11, aligned_mantissa(11)),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid(format!("unknown codec scheme '{s}'")))
    }
}

/// Bit layout and scale of one compressed block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormatDescriptor {
    pub scheme: Scheme,
    pub exp_bits: u32,
    pub mant_bits: u32,
    /// Smallest nonzero magnitude of the block, or 1 for an all-zero block.
    pub scale: f64,
}

impl FormatDescriptor {
    /// Bits per value including the sign.
    pub fn width(&self) -> u32 {
        1 + self.exp_bits + self.mant_bits
    }

    /// Unit roundoff of the mantissa, `2^-(m+1)`.
    pub fn unit_roundoff(&self) -> f64 {
        (-(self.mant_bits as f64 + 1.0)).exp2()
    }

    /// Chooses the layout for `values` at accuracy `eps`.
    pub fn for_values(values: &[f64], eps: f64, scheme: Scheme) -> Result<Self> {
        let m = mantissa_bits_for(eps)?;
        let (scale, e_r) = block_range(values, m)?;
        let (exp_bits, mant_bits) = scheme.layout(e_r, m);
        Ok(Self {
            scheme,
            exp_bits,
            mant_bits,
            scale,
        })
    }

    pub(crate) fn write_header(&self, count: usize, out: &mut Vec<u8>) {
        out.extend_from_slice(&[self.scheme.tag(), self.exp_bits as u8, self.mant_bits as u8, 0]);
        out.extend_from_slice(&self.scale.to_le_bytes());
        out.extend_from_slice(&(count as u64).to_le_bytes());
    }

    pub(crate) fn read_header(data: &[u8]) -> Result<(Self, usize)> {
        if data.len() < HEADER_BYTES {
            return Err(corrupt(format!("header needs {HEADER_BYTES} bytes, got {}", data.len())));
        }
        let scheme = Scheme::from_tag(data[0])?;
        let (exp_bits, mant_bits) = (data[1] as u32, data[2] as u32);
        let scale = f64::from_le_bytes(data[4..12].try_into().expect("8 bytes"));
        let count = u64::from_le_bytes(data[12..20].try_into().expect("8 bytes"));
        if !(1..=11).contains(&exp_bits) || !(1..=52).contains(&mant_bits) {
            return Err(corrupt(format!("invalid layout e={exp_bits} m={mant_bits}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(corrupt(format!("invalid scale {scale}")));
        }
        let count = usize::try_from(count).map_err(|_| corrupt("element count overflows"))?;
        Ok((
            Self {
                scheme,
                exp_bits,
                mant_bits,
                scale,
            },
            count,
        ))
    }

    /// Appends the codes of `values` to a bit stream.
    pub fn encode(&self, values: &[f64], w: &mut BitWriter<'_>) -> Result<()> {
        let (m, e) = (self.mant_bits, self.exp_bits);
        let max_exp = (1u64 << e) - 1;
        let inv = 1.0 / self.scale;
        for &v in values {
            if !v.is_finite() {
                return Err(invalid(format!("cannot compress non-finite value {v}")));
            }
            let shifted = v.abs() * inv + 1.0;
            if !shifted.is_finite() {
                return Err(invalid(format!("value {v} overflows after scaling by {}", self.scale)));
            }
            let mut bits = shifted.to_bits();
            if m < 52 {
                // round to nearest; a carry moves into the exponent field
                bits += 1 << (51 - m);
            }
            let exp = (bits >> 52) - 1023;
            let (exp, mant) = if exp > max_exp {
                (max_exp, (1u64 << m) - 1)
            } else {
                (exp, (bits & MANT_MASK) >> (52 - m))
            };
            let sign = v.is_sign_negative() as u64;
            w.write(mant | exp << m | sign << (m + e), m + e + 1);
        }
        Ok(())
    }

    /// Decodes `out.len()` values from a bit stream.
    pub fn decode(&self, r: &mut BitReader<'_>, out: &mut [f64]) -> Result<()> {
        let (m, e) = (self.mant_bits, self.exp_bits);
        let width = m + e + 1;
        if r.remaining() < out.len() * width as usize {
            return Err(corrupt("payload is truncated"));
        }
        let mant_mask = (1u64 << m) - 1;
        let exp_mask = (1u64 << e) - 1;
        for o in out.iter_mut() {
            let code = r.read(width).ok_or_else(|| corrupt("payload is truncated"))?;
            *o = self.decode_code(code, mant_mask, exp_mask);
        }
        Ok(())
    }

    #[inline]
    fn decode_code(&self, code: u64, mant_mask: u64, exp_mask: u64) -> f64 {
        let m = self.mant_bits;
        let mant = code & mant_mask;
        let exp = (code >> m) & exp_mask;
        let negative = (code >> (m + self.exp_bits)) & 1 == 1;
        let shifted = f64::from_bits((exp + 1023) << 52 | mant << (52 - m));
        let v = (shifted - 1.0) * self.scale;
        if negative {
            -v
        } else {
            v
        }
    }
}

/// A compressed block of `f64` values.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressedBuffer {
    pub descriptor: FormatDescriptor,
    count: usize,
    payload: Vec<u8>,
}

impl CompressedBuffer {
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Header plus payload bytes.
    pub fn byte_size(&self) -> usize {
        HEADER_BYTES + self.payload.len()
    }

    pub fn decompress(&self) -> Result<Vec<f64>> {
        decompress(self)
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        self.descriptor.write_header(self.count, out);
        out.extend_from_slice(&self.payload);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.byte_size());
        self.write_to(&mut out);
        out
    }

    /// Parses a buffer from the front of `data`; returns it and the bytes consumed.
    pub fn from_bytes(data: &[u8]) -> Result<(Self, usize)> {
        let (descriptor, count) = FormatDescriptor::read_header(data)?;
        let len = payload_bytes(count, &descriptor).ok_or_else(|| corrupt("payload size overflows"))?;
        let end = HEADER_BYTES
            .checked_add(len)
            .filter(|&end| end <= data.len())
            .ok_or_else(|| corrupt(format!("payload needs {len} bytes, {} available", data.len() - HEADER_BYTES)))?;
        Ok((
            Self {
                descriptor,
                count,
                payload: data[HEADER_BYTES..end].to_vec(),
            },
            end,
        ))
    }
}

/// Mantissa bits so that `2^-(m+1) <= eps`, clamped to `[2, 52]`.
pub fn mantissa_bits_for(eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("accuracy must lie in (0, 1), got {eps}")));
    }
    let m = (1.0 / eps).log2().ceil() - 1.0;
    Ok(m.clamp(2.0, 52.0) as u32)
}

/// Exponent bits needed for the scaled and shifted values of a block.
///
/// The largest value maps to `m_max/m_min + 1`; its binary exponent must fit
/// into the stored exponent field. All-zero blocks need the minimum of 2.
pub fn exponent_bits_for(values: &[f64]) -> u32 {
    block_range(values, 52).map_or(11, |(_, e_r)| e_r)
}

/// Bytes of a serialized buffer holding `count` values.
pub fn compressed_size(count: usize, descriptor: &FormatDescriptor) -> usize {
    HEADER_BYTES + payload_bytes(count, descriptor).expect("compressed size overflows")
}

fn payload_bytes(count: usize, d: &FormatDescriptor) -> Option<usize> {
    count.checked_mul(d.width() as usize).map(|bits| bits.div_ceil(8))
}

pub fn compress(values: &[f64], eps: f64, scheme: Scheme) -> Result<CompressedBuffer> {
    let descriptor = FormatDescriptor::for_values(values, eps, scheme)?;
    compress_with(values, descriptor)
}

/// Compresses with a given layout, e.g. one shared by several blocks.
pub fn compress_with(values: &[f64], descriptor: FormatDescriptor) -> Result<CompressedBuffer> {
    let mut payload = Vec::with_capacity(payload_bytes(values.len(), &descriptor).unwrap_or(0));
    let mut w = BitWriter::new(&mut payload);
    descriptor.encode(values, &mut w)?;
    w.finish();
    Ok(CompressedBuffer {
        descriptor,
        count: values.len(),
        payload,
    })
}

pub fn decompress(buf: &CompressedBuffer) -> Result<Vec<f64>> {
    let mut out = vec![0.0; buf.count];
    decompress_into(buf, &mut out)?;
    Ok(out)
}

pub fn decompress_into(buf: &CompressedBuffer, out: &mut [f64]) -> Result<()> {
    if out.len() != buf.count {
        return Err(invalid(format!("output holds {} values, buffer {}", out.len(), buf.count)));
    }
    let d = &buf.descriptor;
    let width = d.width();
    if buf.payload.len() < payload_bytes(buf.count, d).unwrap_or(usize::MAX) {
        return Err(corrupt("payload is truncated"));
    }
    if width % 8 == 0 {
        let step = (width / 8) as usize;
        let mant_mask = (1u64 << d.mant_bits) - 1;
        let exp_mask = (1u64 << d.exp_bits) - 1;
        for (o, chunk) in out.iter_mut().zip(buf.payload.chunks_exact(step)) {
            let mut word = [0u8; 8];
            word[..step].copy_from_slice(chunk);
            *o = d.decode_code(u64::from_le_bytes(word), mant_mask, exp_mask);
        }
        return Ok(());
    }
    d.decode(&mut BitReader::new(&buf.payload), out)
}

/// Smallest nonzero magnitude and the exponent bits `e_r` needed for the
/// largest scaled-shifted value after rounding to `m` mantissa bits.
pub(crate) fn block_range(values: &[f64], m: u32) -> Result<(f64, u32)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &v in values {
        if !v.is_finite() {
            return Err(invalid(format!("cannot compress non-finite value {v}")));
        }
        let a = v.abs();
        if a > 0.0 {
            lo = lo.min(a);
            hi = hi.max(a);
        }
    }
    if hi == 0.0 {
        return Ok((1.0, 2));
    }
    let shifted = hi / lo + 1.0;
    if !shifted.is_finite() {
        return Err(invalid(format!("dynamic range {hi:e}/{lo:e} exceeds the double range")));
    }
    let mut bits = shifted.to_bits();
    if m < 52 {
        bits += 1 << (51 - m);
    }
    let max_exp = (bits >> 52) - 1023;
    Ok((lo, (u64::BITS - max_exp.leading_zeros()).clamp(2, 11)))
}
