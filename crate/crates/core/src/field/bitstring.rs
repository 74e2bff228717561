use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-length bit sequence packed most-significant-bit first within each byte.
///
/// Bits past `len` in the final byte are always zero, so byte-wise equality is
/// bit-wise equality.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitString {
    len: usize,
    #[serde(with = "hex")]
    bytes: Vec<u8>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString { len, bytes: vec![0; len.div_ceil(8)] }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut bytes = vec![0; len.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        let mut out = BitString { len, bytes };
        out.clear_padding();
        out
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            out.set(i, b);
        }
        out
    }

    /// Parses a string of `'0'`/`'1'` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::ParseError(format!("unexpected bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits))
    }

    /// Wraps packed bytes; padding bits beyond `len` are cleared.
    pub fn from_bytes(mut bytes: Vec<u8>, len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::LengthError { left: bytes.len() * 8, right: len });
        }
        bytes.shrink_to_fit();
        let mut out = BitString { len, bytes };
        out.clear_padding();
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub(crate) fn bytes_mut(&mut self) -> &mut [u8] {
        &mut self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.bytes[i / 8] >> (7 - i % 8) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u8 << (7 - i % 8);
        if bit {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    /// Reads `width <= 64` bits starting at `offset` as a big-endian integer.
    pub fn get_bits(&self, offset: usize, width: usize) -> u64 {
        assert!(width <= 64 && offset + width <= self.len);
        let mut v = 0u64;
        let mut i = offset;
        let end = offset + width;
        while i < end {
            // Byte-aligned fast path.
            if i.is_multiple_of(8) && end - i >= 8 {
                v = (v << 8) | self.bytes[i / 8] as u64;
                i += 8;
            } else {
                v = (v << 1) | self.get(i) as u64;
                i += 1;
            }
        }
        v
    }

    /// Writes the low `width` bits of `value` at `offset`, big-endian.
    pub fn set_bits(&mut self, offset: usize, width: usize, value: u64) {
        assert!(width <= 64 && offset + width <= self.len);
        for k in 0..width {
            let bit = value >> (width - 1 - k) & 1 == 1;
            self.set(offset + k, bit);
        }
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitString) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthError { left: self.len, right: other.len });
        }
        xor_into(&mut self.bytes, &other.bytes);
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.bytes.iter().all(|&b| b == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Keeps the first `len` bits.
    pub fn truncate(&mut self, len: usize) {
        if len >= self.len {
            return;
        }
        self.len = len;
        self.bytes.truncate(len.div_ceil(8));
        self.clear_padding();
    }

    /// Appends `other`; byte-aligned lengths take a memcpy path.
    pub fn extend(&mut self, other: &BitString) {
        if self.len.is_multiple_of(8) {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
            return;
        }
        let start = self.len;
        self.len += other.len;
        self.bytes.resize(self.len.div_ceil(8), 0);
        for i in 0..other.len {
            if other.get(i) {
                self.set(start + i, true);
            }
        }
    }

    /// XORs `src` into `self` starting at bit `offset`; bits of `src` that
    /// would land past `self.len()` are dropped.
    pub fn xor_at(&mut self, offset: usize, src: &BitString) {
        assert!(offset <= self.len, "offset {offset} past end {}", self.len);
        if offset.is_multiple_of(8) {
            let start = offset / 8;
            let n = src.bytes.len().min(self.bytes.len() - start);
            xor_into(&mut self.bytes[start..start + n], &src.bytes[..n]);
        } else {
            let shift = offset % 8;
            for (idx, &b) in (offset / 8..).zip(&src.bytes) {
                if idx >= self.bytes.len() {
                    break;
                }
                self.bytes[idx] ^= b >> shift;
                if idx + 1 < self.bytes.len() {
                    self.bytes[idx + 1] ^= b << (8 - shift);
                }
            }
        }
        self.clear_padding();
    }

    /// Copies `len` bits starting at `offset`.
    pub fn slice(&self, offset: usize, len: usize) -> BitString {
        assert!(offset + len <= self.len);
        let mut out = BitString::zeros(len);
        if offset.is_multiple_of(8) {
            let start = offset / 8;
            let n = out.bytes.len();
            out.bytes.copy_from_slice(&self.bytes[start..start + n]);
        } else {
            let shift = offset % 8;
            let start = offset / 8;
            for (k, o) in out.bytes.iter_mut().enumerate() {
                let hi = self.bytes[start + k] << shift;
                let lo = self.bytes.get(start + k + 1).map_or(0, |b| b >> (8 - shift));
                *o = hi | lo;
            }
        }
        out.clear_padding();
        out
    }

    pub(crate) fn clear_padding(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xffu8 << (8 - rem);
            }
        }
    }
}

/// XORs `src` into `dst` byte-wise; lengths must match.
#[inline]
pub(crate) fn xor_into(dst: &mut [u8], src: &[u8]) {
    debug_assert_eq!(dst.len(), src.len());
    let mut d = dst.chunks_exact_mut(8);
    let mut s = src.chunks_exact(8);
    for (a, b) in (&mut d).zip(&mut s) {
        let x = u64::from_ne_bytes(a.try_into().unwrap()) ^ u64::from_ne_bytes(b.try_into().unwrap());
        a.copy_from_slice(&x.to_ne_bytes());
    }
    for (a, b) in d.into_remainder().iter_mut().zip(s.remainder()) {
        *a ^= b;
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "BitString({self})")
        } else {
            write!(f, "BitString(len={}, ones={})", self.len, self.count_ones())
        }
    }
}
