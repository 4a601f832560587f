//! Little-endian bit packing of fixed-width codes.

/// Appends codes of up to 64 bits to a byte vector, least significant bit first.
pub struct BitWriter<'a> {
    out: &'a mut Vec<u8>,
    acc: u128,
    nbits: u32,
}

impl<'a> BitWriter<'a> {
    pub fn new(out: &'a mut Vec<u8>) -> Self {
        Self { out, acc: 0, nbits: 0 }
    }

    #[inline]
    pub fn write(&mut self, code: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || code >> width == 0);
        self.acc |= (code as u128) << self.nbits;
        self.nbits += width;
        if self.nbits >= 64 {
            self.out.extend_from_slice(&(self.acc as u64).to_le_bytes());
            self.acc >>= 64;
            self.nbits -= 64;
        }
    }

    /// Flushes the partial byte; trailing bits are zero.
    pub fn finish(mut self) {
        self.flush();
    }

    fn flush(&mut self) {
        let bytes = self.nbits.div_ceil(8) as usize;
        self.out.extend_from_slice(&(self.acc as u64).to_le_bytes()[..bytes]);
        self.acc = 0;
        self.nbits = 0;
    }
}

impl Drop for BitWriter<'_> {
    fn drop(&mut self) {
        if self.nbits > 0 {
            self.flush();
        }
    }
}

/// Sequential reader matching [`BitWriter`].
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u128,
    nbits: u32,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0, acc: 0, nbits: 0 }
    }

    /// Bits not yet consumed.
    pub fn remaining(&self) -> usize {
        (self.data.len() - self.pos) * 8 + self.nbits as usize
    }

    /// Reads `width` bits; `None` past the end of the data.
    #[inline]
    pub fn read(&mut self, width: u32) -> Option<u64> {
        if self.nbits < width {
            self.refill();
            if self.nbits < width {
                return None;
            }
        }
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        let code = (self.acc as u64) & mask;
        self.acc >>= width;
        self.nbits -= width;
        Some(code)
    }

    fn refill(&mut self) {
        let rest = &self.data[self.pos..];
        if rest.len() >= 8 && self.nbits <= 64 {
            let word = u64::from_le_bytes(rest[..8].try_into().expect("8 bytes"));
            self.acc |= (word as u128) << self.nbits;
            self.nbits += 64;
            self.pos += 8;
        } else {
            while self.nbits <= 120 && self.pos < self.data.len() {
                self.acc |= (self.data[self.pos] as u128) << self.nbits;
                self.nbits += 8;
                self.pos += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_mixed_widths() {
        let codes: Vec<(u64, u32)> = (0..500u64)
            .map(|i| {
                let w = (i % 64 + 1) as u32;
                let mask = if w == 64 { u64::MAX } else { (1 << w) - 1 };
                (i.wrapping_mul(0x9E37_79B9_7F4A_7C15) & mask, w)
            })
            .collect();
        let mut buf = Vec::new();
        let mut w = BitWriter::new(&mut buf);
        for &(c, width) in &codes {
            w.write(c, width);
        }
        w.finish();
        let total: u32 = codes.iter().map(|c| c.1).sum();
        assert_eq!(buf.len(), total.div_ceil(8) as usize);
        let mut r = BitReader::new(&buf);
        for &(c, width) in &codes {
            assert_eq!(r.read(width), Some(c));
        }
        assert!(r.remaining() < 8);
    }

    #[test]
    fn little_endian_order() {
        let mut buf = Vec::new();
        let mut w = BitWriter::new(&mut buf);
        w.write(0b101, 3);
        w.write(0b11, 2);
        w.write(0x1ff, 9);
        w.finish();
        // bits from lsb: 101 | 11 | 111111111
        assert_eq!(buf, vec![0b1111_1101, 0b0011_1111]);
    }

    #[test]
    fn read_past_end() {
        let buf = [0xffu8];
        let mut r = BitReader::new(&buf);
        assert_eq!(r.read(6), Some(0x3f));
        assert_eq!(r.read(3), None);
    }
}
