//! The two chaining hash models.
//!
//! Both start from `H_0 = 0` and compute `H_i = P (B_i xor H_{i-1})` over the
//! padded blocks. Model 2 additionally replaces every even-indexed chaining
//! value with `f_mix(H_i, H_{i-1})` before it feeds the next block.
//!
//! `f_mix` splits its inputs into quarters `Q1..Q4` and returns
//!
//! ```text
//! Q1(h) ^ Q2(prev) | Q2(h) ^ Q3(prev) | Q3(h) ^ Q1(prev) | Q4(h) ^ Q4(prev)
//! ```

use std::fmt;
use std::str::FromStr;

use crate::codec::{padded_len, BlockStream};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Model {
    /// Plain chaining.
    One,
    /// Chaining with the quarter mix after every second block.
    #[default]
    Two,
}

impl Model {
    pub fn number(self) -> u8 {
        match self {
            Model::One => 1,
            Model::Two => 2,
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Model::One),
            "2" => Ok(Model::Two),
            other => Err(Error::InvalidArgument(format!(
                "unknown model {other:?}, expected 1 or 2"
            ))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// The public parameters of a hash instance: a singular square matrix and a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashParams {
    matrix: BitMatrix,
    model: Model,
}

impl HashParams {
    pub fn new(matrix: BitMatrix, model: Model) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if model == Model::Two && !matrix.rows().is_multiple_of(4) {
            return Err(Error::QuarterMismatch { m: matrix.rows() });
        }
        if matrix.is_invertible() {
            return Err(Error::InvertibleMatrix);
        }
        Ok(Self { matrix, model })
    }

    /// Block size in bits.
    pub fn m(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn with_model(&self, model: Model) -> Result<Self> {
        if model == Model::Two && !self.m().is_multiple_of(4) {
            return Err(Error::QuarterMismatch { m: self.m() });
        }
        Ok(Self {
            matrix: self.matrix.clone(),
            model,
        })
    }
}

/// An `m`-bit hash value.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Digest(BitVector);

impl Digest {
    pub fn new(bits: BitVector) -> Self {
        Digest(bits)
    }

    pub fn bits(&self) -> &BitVector {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_hex(&self) -> String {
        digest_to_hex(self)
    }

    pub fn to_bit_string(&self) -> String {
        self.0.to_string()
    }

    /// Parses a rendering produced by [`digest_to_hex`] or a plain bit string.
    pub fn parse(s: &str, m: usize) -> Result<Self> {
        let s = s.trim();
        if m.is_multiple_of(8) && s.len() == m / 4 {
            let bytes = (0..s.len())
                .step_by(2)
                .map(|i| u8::from_str_radix(&s[i..i + 2], 16))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidArgument(format!("bad hex digest: {e}")))?;
            return Ok(Digest(BitVector::from_bytes_msb(&bytes, m)?));
        }
        if s.len() == m {
            return Ok(Digest(BitVector::from_bit_str(s)?));
        }
        Err(Error::InvalidArgument(format!(
            "digest {s:?} does not encode {m} bits"
        )))
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&digest_to_hex(self))
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({self})")
    }
}

/// Lowercase hex of the bits packed MSB first; a `0`/`1` string when `m` is
/// not a multiple of 8.
pub fn digest_to_hex(d: &Digest) -> String {
    if !d.len().is_multiple_of(8) {
        return d.0.to_string();
    }
    d.0.to_bytes_msb()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// One chaining step: `P (h xor b)`.
pub fn compress(p: &BitMatrix, h: &BitVector, b: &BitVector) -> Result<BitVector> {
    p.mat_vec(&h.checked_xor(b)?)
}

/// Quarter rotation `(Q2, Q3, Q1, Q4)` of `x`.
fn rotate_quarters(x: &BitVector) -> BitVector {
    let q = x.len() / 4;
    let mut out = BitVector::zeros(x.len());
    out.xor_at(0, &x.slice(q, q));
    out.xor_at(q, &x.slice(2 * q, q));
    out.xor_at(2 * q, &x.slice(0, q));
    out.xor_at(3 * q, &x.slice(3 * q, q));
    out
}

fn mix_in_place(h: &mut BitVector, prev: &BitVector) {
    let q = h.len() / 4;
    h.xor_range_from(0, prev, q, 2 * q);
    h.xor_range_from(2 * q, prev, 0, q);
    h.xor_range_from(3 * q, prev, 3 * q, q);
}

/// Quarter-wise mixing of the current chaining value with the previous one.
pub fn f_mix(h: &BitVector, h_prev: &BitVector) -> Result<BitVector> {
    if h.len() != h_prev.len() {
        return Err(Error::DimensionMismatch {
            op: "f_mix",
            left: (h.len(), 1),
            right: (h_prev.len(), 1),
        });
    }
    if !h.len().is_multiple_of(4) {
        return Err(Error::QuarterMismatch { m: h.len() });
    }
    Ok(h ^ &rotate_quarters(h_prev))
}

/// Runs the chain over an already padded block stream.
pub fn hash_blocks(params: &HashParams, blocks: &BlockStream) -> Result<Digest> {
    if blocks.m() != params.m() {
        return Err(Error::DimensionMismatch {
            op: "hash_blocks",
            left: (params.m(), params.m()),
            right: (blocks.m(), 1),
        });
    }
    let mut h = BitVector::zeros(params.m());
    for (i, b) in blocks.blocks().iter().enumerate() {
        let next = compress(params.matrix(), &h, b)?;
        h = match params.model() {
            Model::Two if (i + 1) % 2 == 0 => f_mix(&next, &h)?,
            _ => next,
        };
    }
    Ok(Digest(h))
}

/// Hashes a complete message.
pub fn hash(params: &HashParams, message: &[u8]) -> Digest {
    let mut hasher = Hasher::new(params);
    hasher.update(message);
    hasher.finalize()
}

/// Incremental hasher holding `O(m)` state.
///
/// Full blocks are absorbed as soon as they are complete. The padding fold
/// rewrites the head of the message, which has already been absorbed by the
/// time the tail is known; since the whole pipeline is linear over GF(2),
/// [`finalize`](Self::finalize) adds the chain's response to the folded bits
/// instead of replaying the message.
pub struct Hasher<'p> {
    params: &'p HashParams,
    h: BitVector,
    prev: BitVector,
    scratch: BitVector,
    /// Partial block, MSB-first bytes (used when `m % 8 == 0`).
    pending_bytes: Vec<u8>,
    /// Partial block, packed bits (used otherwise).
    pending_bits: BitVector,
    pending_len: usize,
    blocks: u64,
    total_bits: u64,
}

impl<'p> Hasher<'p> {
    pub fn new(params: &'p HashParams) -> Self {
        let m = params.m();
        Self {
            params,
            h: BitVector::zeros(m),
            prev: BitVector::zeros(m),
            scratch: BitVector::zeros(m),
            pending_bytes: Vec::with_capacity(m / 8),
            pending_bits: BitVector::zeros(m),
            pending_len: 0,
            blocks: 0,
            total_bits: 0,
        }
    }

    pub fn update(&mut self, mut data: &[u8]) {
        let m = self.params.m();
        self.total_bits += 8 * data.len() as u64;
        if m.is_multiple_of(8) {
            let block_bytes = m / 8;
            if !self.pending_bytes.is_empty() {
                let take = (block_bytes - self.pending_bytes.len()).min(data.len());
                self.pending_bytes.extend_from_slice(&data[..take]);
                data = &data[take..];
                if self.pending_bytes.len() < block_bytes {
                    return;
                }
                let block = std::mem::take(&mut self.pending_bytes);
                self.absorb_bytes(&block);
                self.pending_bytes = block;
                self.pending_bytes.clear();
            }
            let mut chunks = data.chunks_exact(block_bytes);
            for chunk in &mut chunks {
                self.absorb_bytes(chunk);
            }
            self.pending_bytes.extend_from_slice(chunks.remainder());
        } else {
            for &byte in data {
                for j in 0..8 {
                    let bit = (byte >> (7 - j)) & 1 == 1;
                    self.pending_bits.set(self.pending_len, bit);
                    self.pending_len += 1;
                    if self.pending_len == m {
                        let block = std::mem::replace(&mut self.pending_bits, BitVector::zeros(m));
                        self.absorb(&block);
                        self.pending_len = 0;
                    }
                }
            }
        }
    }

    fn absorb_bytes(&mut self, chunk: &[u8]) {
        let words = self.scratch.words_mut();
        for (w, bytes) in words.iter_mut().zip(chunk.chunks(8)) {
            let mut buf = [0u8; 8];
            for (dst, src) in buf.iter_mut().zip(bytes) {
                *dst = src.reverse_bits();
            }
            *w = u64::from_le_bytes(buf);
        }
        self.step_with_scratch();
    }

    fn absorb(&mut self, block: &BitVector) {
        self.scratch.words_mut().copy_from_slice(block.words());
        self.step_with_scratch();
    }

    /// `scratch` holds the block; advances the chain by one block.
    fn step_with_scratch(&mut self) {
        for (s, h) in self.scratch.words_mut().iter_mut().zip(self.h.words()) {
            *s ^= h;
        }
        std::mem::swap(&mut self.prev, &mut self.h);
        self.params
            .matrix
            .mat_vec_into(self.scratch.words(), self.h.words_mut());
        self.blocks += 1;
        if self.params.model == Model::Two && self.blocks.is_multiple_of(2) {
            mix_in_place(&mut self.h, &self.prev);
        }
    }

    pub fn finalize(mut self) -> Digest {
        let m = self.params.m();
        let k = self.total_bits as usize;
        let (q, r) = (k / m, k % m);
        debug_assert_eq!(q as u64, self.blocks);

        let mut tail = BitVector::zeros(m);
        if r > 0 {
            if m.is_multiple_of(8) {
                let bits = BitVector::from_bytes_msb(&self.pending_bytes, r)
                    .expect("pending bytes hold exactly r bits");
                tail.xor_at(0, &bits);
            } else {
                tail = self.pending_bits.clone();
            }
        }

        if q == 0 {
            self.absorb(&tail);
            self.absorb(&BitVector::zeros(m));
        } else if q % 2 == 1 {
            self.absorb(&tail);
        } else if r > 0 {
            let correction = chain_response(self.params, &tail, q as u64);
            self.h.xor_assign(&correction);
        }
        debug_assert_eq!(self.blocks as usize * m, padded_len(k, m));
        Digest(self.h)
    }
}

/// Final chaining value of `n` blocks (`n` even) when `delta` is injected
/// into the first block and every other block is zero.
fn chain_response(params: &HashParams, delta: &BitVector, n: u64) -> BitVector {
    debug_assert!(n.is_multiple_of(2));
    let m = params.m() as u64;
    let log_n = u64::from(64 - n.leading_zeros());
    if n <= 2 * (log_n + 1) * m {
        let mut h = delta.clone();
        for i in 1..=n {
            let next = params.matrix.mat_vec(&h).expect("square matrix");
            let prev = std::mem::replace(&mut h, next);
            if params.model == Model::Two && i % 2 == 0 {
                mix_in_place(&mut h, &prev);
            }
        }
        h
    } else {
        pair_map(params)
            .pow(n / 2)
            .and_then(|g| g.mat_vec(delta))
            .expect("square matrix")
    }
}

/// Linear map advancing the chain by two zero blocks.
fn pair_map(params: &HashParams) -> BitMatrix {
    let p = &params.matrix;
    let p2 = p.mat_mul(p).expect("square matrix");
    match params.model {
        Model::One => p2,
        Model::Two => {
            let m = params.m();
            let q = m / 4;
            let rotated_rows: Vec<BitVector> = (0..m)
                .map(|t| {
                    let src = match t / q {
                        0 | 1 => t + q,
                        2 => t - 2 * q,
                        _ => t,
                    };
                    p.row(src)
                })
                .collect();
            let rotated = BitMatrix::from_rows(&rotated_rows).expect("rows of equal length");
            p2.mat_add(&rotated).expect("same shape")
        }
    }
}
