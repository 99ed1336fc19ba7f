//! Bit vectors.
//!
//! Bits are stored one per byte with values 0 or 1, which keeps indexing and
//! XOR loops branch-free and easy to read; the block lengths in play (up to a
//! few hundred kilobits) make the 8x storage overhead irrelevant. Packed
//! MSB-first byte conversion is provided for file I/O.

use std::fmt;

use crate::{invalid, Result};

/// A vector of bits, each stored as a `u8` that is 0 or 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    bits: Vec<u8>,
}

impl BitVector {
    /// Builds a bit vector from raw bytes.
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidArgument`](crate::Error::InvalidArgument) if
    /// any element is neither 0 nor 1.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(invalid(format!(
                "bit {pos} is {}, expected 0 or 1",
                bits[pos]
            )));
        }
        Ok(Self { bits })
    }

    /// An all-zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.bits
    }

    pub fn iter(&self) -> std::slice::Iter<'_, u8> {
        self.bits.iter()
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.bits
    }

    /// Sets position `i` to `bit`.
    ///
    /// Panics if `i` is out of range or `bit` is not 0 or 1.
    pub fn set(&mut self, i: usize, bit: u8) {
        assert!(bit <= 1, "bit value must be 0 or 1");
        self.bits[i] = bit;
    }

    /// Component-wise XOR. Panics if the lengths differ.
    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// In-place component-wise XOR. Panics if the lengths differ.
    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(
            self.len(),
            other.len(),
            "XOR requires equal-length vectors"
        );
        for (a, b) in self.bits.iter_mut().zip(other.iter()) {
            *a ^= b;
        }
    }

    /// Number of ones.
    pub fn hamming_weight(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    /// Number of positions where `self` and `other` differ.
    ///
    /// Panics if the lengths differ.
    pub fn hamming_distance(&self, other: &Self) -> usize {
        assert_eq!(
            self.len(),
            other.len(),
            "Hamming distance requires equal-length vectors"
        );
        self.bits
            .iter()
            .zip(other.iter())
            .filter(|(a, b)| a != b)
            .count()
    }

    /// The subvector at the given positions, in the order listed.
    ///
    /// Panics if any index is out of range.
    pub fn restricted_to(&self, positions: &[usize]) -> Self {
        Self {
            bits: positions.iter().map(|&i| self.bits[i]).collect(),
        }
    }

    /// Packs into bytes MSB-first; the final byte is zero-padded on the
    /// right when the length is not a multiple of eight.
    pub fn pack_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            out[i / 8] |= b << (7 - i % 8);
        }
        out
    }

    /// Unpacks `bit_len` bits from MSB-first bytes. Pad bits beyond
    /// `bit_len` are ignored.
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidArgument`](crate::Error::InvalidArgument) if
    /// `bytes` is too short to hold `bit_len` bits.
    pub fn unpack_bytes(bytes: &[u8], bit_len: usize) -> Result<Self> {
        if bytes.len() * 8 < bit_len {
            return Err(invalid(format!(
                "{} bytes hold fewer than {bit_len} bits",
                bytes.len()
            )));
        }
        let bits = (0..bit_len)
            .map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1)
            .collect();
        Ok(Self { bits })
    }
}

impl std::ops::Index<usize> for BitVector {
    type Output = u8;

    fn index(&self, i: usize) -> &u8 {
        &self.bits[i]
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}
