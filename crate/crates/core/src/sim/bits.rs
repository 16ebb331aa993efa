//! MSB-first bit packing.

use super::payload::CodecError;

#[derive(Debug, Default)]
pub(crate) struct BitWriter {
    bytes: Vec<u8>,
    used: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit(&mut self, b: bool) {
        if self.used.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if b {
            let last = self.bytes.last_mut().unwrap();
            *last |= 0x80 >> (self.used % 8);
        }
        self.used += 1;
    }

    /// Writes the low `width` bits of `value`. Fails if `value` needs more.
    pub fn fixed(&mut self, value: u64, width: u32) -> Result<(), CodecError> {
        if width < 64 && value >> width != 0 {
            return Err(CodecError::FieldOverflow { value, width });
        }
        for i in (0..width).rev() {
            self.bit((value >> i) & 1 == 1);
        }
        Ok(())
    }

    /// Elias-gamma code of `value + 1`.
    pub fn gamma(&mut self, value: u64) {
        let x = value as u128 + 1;
        let k = 127 - x.leading_zeros();
        for _ in 0..k {
            self.bit(false);
        }
        for i in (0..=k).rev() {
            self.bit((x >> i) & 1 == 1);
        }
    }

    /// Pads to a byte boundary and returns the bytes.
    pub fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

pub(crate) struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() * 8 - self.pos
    }

    pub fn bit(&mut self) -> Result<bool, CodecError> {
        let byte = *self.bytes.get(self.pos / 8).ok_or(CodecError::Truncated)?;
        let b = byte & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(b)
    }

    pub fn fixed(&mut self, width: u32) -> Result<u64, CodecError> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.bit()? as u64;
        }
        Ok(v)
    }

    pub fn gamma(&mut self) -> Result<u64, CodecError> {
        let mut k = 0u32;
        while !self.bit()? {
            k += 1;
            if k > 64 {
                return Err(CodecError::Malformed("gamma prefix too long"));
            }
        }
        let mut x: u128 = 1;
        for _ in 0..k {
            x = (x << 1) | self.bit()? as u128;
        }
        u64::try_from(x - 1).map_err(|_| CodecError::Malformed("gamma value exceeds 64 bits"))
    }

    /// Skips zero padding up to the next byte boundary; non-zero padding is rejected.
    pub fn align(&mut self) -> Result<(), CodecError> {
        while !self.pos.is_multiple_of(8) {
            if self.bit()? {
                return Err(CodecError::Malformed("non-zero padding"));
            }
        }
        Ok(())
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.bytes.len() * 8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_round_trip_edges() {
        for v in [0u64, 1, 2, 3, 7, 8, 1000, u64::MAX - 1, u64::MAX] {
            let mut w = BitWriter::new();
            w.gamma(v);
            let bytes = w.finish();
            let mut r = BitReader::new(&bytes);
            assert_eq!(r.gamma().unwrap(), v);
        }
    }

    #[test]
    fn fixed_overflow_is_rejected() {
        let mut w = BitWriter::new();
        assert!(w.fixed(8, 3).is_err());
        assert!(w.fixed(7, 3).is_ok());
        assert_eq!(w.finish(), vec![0b1110_0000]);
    }
}
