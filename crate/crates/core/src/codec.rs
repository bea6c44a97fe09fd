//! Byte/bit conversion, padding, and block segmentation.
//!
//! Bits are taken most significant first within each byte. Padding depends
//! on the number of full blocks `q = k / m` and the remainder `r = k % m`
//! of a `k`-bit message:
//!
//! * `q` odd: append `m - r` zero bits.
//! * `q` even and at least 2: XOR the trailing `r` bits into the leading
//!   `r` bits and drop them.
//! * `q = 0`: zero-extend to exactly `2m` bits.
//!
//! Every padded stream therefore holds an even number (at least two) of
//! `m`-bit blocks.

use crate::error::{Error, Result};
use crate::gf2::BitVector;

/// An ordered sequence of bits `b_0, b_1, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitStream {
    bits: Vec<bool>,
}

impl BitStream {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Bitwise XOR of two equal-length streams.
    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                op: "stream xor",
                left: (self.len(), 1),
                right: (other.len(), 1),
            });
        }
        Ok(Self::new(
            self.bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        ))
    }
}

impl std::fmt::Display for BitStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Padded message split into `m`-bit column vectors `B_1 ... B_N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStream {
    m: usize,
    blocks: Vec<BitVector>,
}

impl BlockStream {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[BitVector] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Concatenates the blocks back into a stream.
    pub fn concat(&self) -> BitStream {
        BitStream::new(self.blocks.iter().flat_map(|b| b.iter()).collect())
    }
}

pub fn bytes_to_bits(data: &[u8]) -> BitStream {
    BitStream::new(
        data.iter()
            .flat_map(|&byte| (0..8).map(move |j| (byte >> (7 - j)) & 1 == 1))
            .collect(),
    )
}

/// Inverse of [`bytes_to_bits`]; the stream must be byte aligned.
pub fn bits_to_bytes(s: &BitStream) -> Result<Vec<u8>> {
    if !s.len().is_multiple_of(8) {
        return Err(Error::InvalidArgument(format!(
            "stream of {} bits is not byte aligned",
            s.len()
        )));
    }
    Ok(s.bits
        .chunks_exact(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8))
        .collect())
}

/// Length in bits of the padded form of a `k`-bit message.
pub fn padded_len(k: usize, m: usize) -> usize {
    assert!(m >= 1, "block size must be positive");
    let (q, r) = (k / m, k % m);
    match q {
        0 => 2 * m,
        q if q % 2 == 1 => k + m - r,
        _ => k - r,
    }
}

pub fn pad(s: &BitStream, m: usize) -> BitStream {
    assert!(m >= 1, "block size must be positive");
    let k = s.len();
    let (q, r) = (k / m, k % m);
    let mut bits = s.bits.clone();
    if q == 0 {
        bits.resize(2 * m, false);
    } else if q % 2 == 1 {
        bits.resize(k + m - r, false);
    } else {
        for (b, &x) in bits[..r].iter_mut().zip(&s.bits[k - r..]) {
            *b ^= x;
        }
        bits.truncate(k - r);
    }
    debug_assert_eq!(bits.len(), padded_len(k, m));
    BitStream::new(bits)
}

/// Splits a padded stream; block `j` holds bits `m(j-1) .. mj`.
pub fn split_blocks(s: &BitStream, m: usize) -> Result<BlockStream> {
    let n = s.len().checked_div(m).unwrap_or(0);
    if m == 0 || !s.len().is_multiple_of(m) || n < 2 || n % 2 != 0 {
        return Err(Error::UnpaddedStream { len: s.len(), m });
    }
    Ok(BlockStream {
        m,
        blocks: s.bits.chunks_exact(m).map(BitVector::from_bits).collect(),
    })
}
