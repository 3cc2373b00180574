//! Compact bit strings and bit matrices.
//!
//! Storage is little-endian u64 words, bit i of the string at word i/64,
//! bit position i%64. The canonical wire form packs bits LSB-first into
//! bytes with no per-row padding; in memory, matrix rows are word-aligned
//! for cheap XOR.

use rand::RngCore;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitString {
    pub fn zeroed(len: usize) -> Self {
        Self {
            len,
            words: vec![0; word_count(len)],
        }
    }

    pub fn random(rng: &mut impl RngCore, len: usize) -> Self {
        let mut s = Self::zeroed(len);
        s.randomize(rng);
        s
    }

    /// Refill in place with fresh random bits.
    pub fn randomize(&mut self, rng: &mut impl RngCore) {
        for w in &mut self.words {
            *w = rng.next_u64();
        }
        self.mask_tail();
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        debug_assert!(i < self.len);
        ((self.words[i / 64] >> (i % 64)) & 1) as u8
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: u8) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if bit & 1 == 1 {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Write `width` bits of `value` starting at bit offset `at`.
    pub fn set_bits(&mut self, at: usize, width: usize, value: u64) {
        debug_assert!(width <= 64 && at + width <= self.len);
        for b in 0..width {
            self.set(at + b, ((value >> b) & 1) as u8);
        }
    }

    /// Read `width` bits starting at `at` as a little-endian integer.
    pub fn get_bits(&self, at: usize, width: usize) -> u64 {
        debug_assert!(width <= 64 && at + width <= self.len);
        let mut v = 0u64;
        for b in 0..width {
            v |= (self.get(at + b) as u64) << b;
        }
        v
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "bit length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn fill_zero(&mut self) {
        self.words.fill(0);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Number of set bits.
    pub fn weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Append this string's bits to a bit-level packer.
    pub fn pack_into(&self, packer: &mut BitPacker) {
        for i in 0..self.len {
            packer.push(self.get(i));
        }
    }

    pub fn unpack_from(unpacker: &mut BitUnpacker, len: usize) -> Option<Self> {
        let mut s = Self::zeroed(len);
        for i in 0..len {
            s.set(i, unpacker.pull()?);
        }
        Some(s)
    }

    pub fn to_hex(&self) -> String {
        let mut bytes = Vec::with_capacity(self.len.div_ceil(8));
        for chunk_start in (0..self.len).step_by(8) {
            let mut b = 0u8;
            for off in 0..8.min(self.len - chunk_start) {
                b |= self.get(chunk_start + off) << off;
            }
            bytes.push(b);
        }
        let mut s = String::with_capacity(bytes.len() * 2);
        for b in bytes {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

/// Word-aligned rows of a fixed-width bit matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize, // words per row
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn zeroed(rows: usize, cols: usize) -> Self {
        let stride = word_count(cols);
        Self {
            rows,
            cols,
            stride,
            words: vec![0; rows * stride],
        }
    }

    pub fn random(rng: &mut impl RngCore, rows: usize, cols: usize) -> Self {
        let mut m = Self::zeroed(rows, cols);
        m.randomize(rng);
        m
    }

    /// Refill all rows with fresh random bits (row by row, so the stream
    /// consumption matches per-row generation).
    pub fn randomize(&mut self, rng: &mut impl RngCore) {
        for r in 0..self.rows {
            self.randomize_row(r, rng);
        }
    }

    pub fn randomize_row(&mut self, r: usize, rng: &mut impl RngCore) {
        let (rows, cols) = (self.rows, self.cols);
        debug_assert!(r < rows);
        let start = r * self.stride;
        for w in &mut self.words[start..start + self.stride] {
            *w = rng.next_u64();
        }
        let rem = cols % 64;
        if rem != 0 {
            self.words[start + self.stride - 1] &= (1u64 << rem) - 1;
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        debug_assert!(r < self.rows && c < self.cols);
        ((self.words[r * self.stride + c / 64] >> (c % 64)) & 1) as u8
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, bit: u8) {
        debug_assert!(r < self.rows && c < self.cols);
        let idx = r * self.stride + c / 64;
        let mask = 1u64 << (c % 64);
        if bit & 1 == 1 {
            self.words[idx] |= mask;
        } else {
            self.words[idx] &= !mask;
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.words[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_to_bitstring(&self, r: usize) -> BitString {
        BitString {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    pub fn set_row(&mut self, r: usize, row: &BitString) {
        assert_eq!(row.len, self.cols);
        self.words[r * self.stride..(r + 1) * self.stride].copy_from_slice(&row.words);
    }

    pub fn xor_row_assign(&mut self, r: usize, row: &BitString) {
        assert_eq!(row.len, self.cols);
        let start = r * self.stride;
        for (a, b) in self.words[start..start + self.stride].iter_mut().zip(&row.words) {
            *a ^= b;
        }
    }

    /// Write `width` bits of `value` into row r at column offset `at`.
    pub fn set_row_bits(&mut self, r: usize, at: usize, width: usize, value: u64) {
        for b in 0..width {
            self.set(r, at + b, ((value >> b) & 1) as u8);
        }
    }

    pub fn get_row_bits(&self, r: usize, at: usize, width: usize) -> u64 {
        let mut v = 0u64;
        for b in 0..width {
            v |= (self.get(r, at + b) as u64) << b;
        }
        v
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn pack_into(&self, packer: &mut BitPacker) {
        for r in 0..self.rows {
            for c in 0..self.cols {
                packer.push(self.get(r, c));
            }
        }
    }

    pub fn unpack_from(unpacker: &mut BitUnpacker, rows: usize, cols: usize) -> Option<Self> {
        let mut m = Self::zeroed(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, unpacker.pull()?);
            }
        }
        Some(m)
    }
}

/// LSB-first bit packer for the canonical wire layout.
#[derive(Default)]
pub struct BitPacker {
    bytes: Vec<u8>,
    bit: usize,
}

impl BitPacker {
    pub fn push(&mut self, b: u8) {
        if self.bit % 8 == 0 {
            self.bytes.push(0);
        }
        if b & 1 == 1 {
            *self.bytes.last_mut().unwrap() |= 1 << (self.bit % 8);
        }
        self.bit += 1;
    }

    pub fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

pub struct BitUnpacker<'a> {
    bytes: &'a [u8],
    bit: usize,
}

impl<'a> BitUnpacker<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, bit: 0 }
    }

    pub fn pull(&mut self) -> Option<u8> {
        let byte = self.bytes.get(self.bit / 8)?;
        let b = (byte >> (self.bit % 8)) & 1;
        self.bit += 1;
        Some(b)
    }

    pub fn bits_read(&self) -> usize {
        self.bit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{DetRng, DetRngExt};

    #[test]
    fn set_get_roundtrip() {
        let mut s = BitString::zeroed(130);
        s.set(0, 1);
        s.set(63, 1);
        s.set(64, 1);
        s.set(129, 1);
        assert_eq!(s.get(0), 1);
        assert_eq!(s.get(1), 0);
        assert_eq!(s.get(63), 1);
        assert_eq!(s.get(64), 1);
        assert_eq!(s.get(129), 1);
        assert_eq!(s.weight(), 4);
    }

    #[test]
    fn xor_involution() {
        let mut rng = DetRng::for_trial(3, 0);
        let a = BitString::random(&mut rng, 97);
        let b = BitString::random(&mut rng, 97);
        let c = a.xor(&b);
        assert_eq!(c.xor(&b), a);
        assert_eq!(c.xor(&a), b);
    }

    #[test]
    fn bits_field_roundtrip() {
        let mut s = BitString::zeroed(40);
        s.set_bits(3, 11, 0x5a5);
        assert_eq!(s.get_bits(3, 11), 0x5a5);
        s.set_bits(3, 11, 0);
        assert_eq!(s.get_bits(3, 11), 0);
    }

    #[test]
    fn matrix_rows() {
        let mut rng = DetRng::for_trial(4, 0);
        let m = BitMatrix::random(&mut rng, 5, 70);
        for r in 0..5 {
            let row = m.row_to_bitstring(r);
            assert_eq!(row.len(), 70);
            for c in 0..70 {
                assert_eq!(row.get(c), m.get(r, c));
            }
        }
    }

    #[test]
    fn pack_unpack_roundtrip() {
        let mut rng = DetRng::for_trial(5, 0);
        let s = BitString::random(&mut rng, 51);
        let m = BitMatrix::random(&mut rng, 3, 29);
        let mut p = BitPacker::default();
        s.pack_into(&mut p);
        m.pack_into(&mut p);
        let bytes = p.finish();
        assert_eq!(bytes.len(), (51 + 3 * 29 + 7) / 8);
        let mut u = BitUnpacker::new(&bytes);
        let s2 = BitString::unpack_from(&mut u, 51).unwrap();
        let m2 = BitMatrix::unpack_from(&mut u, 3, 29).unwrap();
        assert_eq!(s, s2);
        assert_eq!(m, m2);
    }

    #[test]
    fn tail_bits_masked() {
        let mut rng = DetRng::for_trial(6, 0);
        let s = BitString::random(&mut rng, 65);
        assert_eq!(s.words()[1] >> 1, 0);
    }
}
