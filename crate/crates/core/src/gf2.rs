//! Dense linear algebra over GF(2).
//!
//! Vectors and matrix rows are packed into `u64` words. Logical bit `j` lives
//! in bit `j % 64` of word `j / 64`; bits past the logical length are always
//! zero, which lets every row product run as a word-wide AND followed by a
//! parity reduction.

use std::fmt;
use std::ops::BitXor;

use crate::error::{Error, Result};

pub(crate) const WORD_BITS: usize = u64::BITS as usize;

/// Largest supported dimension for vectors and matrices.
pub const MAX_DIM: usize = 1 << 16;

#[inline]
pub(crate) const fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Parity of `popcount(a AND b)`.
///
/// XOR-folding the ANDed words first leaves the parity unchanged and needs a
/// single popcount per row.
#[inline]
pub(crate) fn and_parity(a: &[u64], b: &[u64]) -> bool {
    let folded = a.iter().zip(b).fold(0u64, |acc, (x, y)| acc ^ (x & y));
    folded.count_ones() & 1 == 1
}

fn check_dim(what: &'static str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::InvalidSize {
            what,
            value,
            reason: "must be at least 1",
        });
    }
    if value > MAX_DIM {
        return Err(Error::InvalidSize {
            what,
            value,
            reason: "exceeds the supported maximum of 65536",
        });
    }
    Ok(())
}

/// Row products of a packed matrix, 64 rows per output word.
#[inline(always)]
fn mat_vec_kernel(data: &[u64], stride: usize, v: &[u64], out: &mut [u64]) {
    match stride {
        1 => mat_vec_fixed::<1>(data, v, out),
        2 => mat_vec_fixed::<2>(data, v, out),
        4 => mat_vec_fixed::<4>(data, v, out),
        _ => {
            for (o, rows) in out.iter_mut().zip(data.chunks(stride * WORD_BITS)) {
                let mut acc = 0u64;
                for (j, row) in rows.chunks_exact(stride).enumerate() {
                    acc |= (and_parity(row, v) as u64) << j;
                }
                *o = acc;
            }
        }
    }
}

#[inline(always)]
fn mat_vec_fixed<const N: usize>(data: &[u64], v: &[u64], out: &mut [u64]) {
    let v: &[u64; N] = v.try_into().expect("vector width matches stride");
    for (o, rows) in out.iter_mut().zip(data.chunks(N * WORD_BITS)) {
        let mut acc = 0u64;
        for (j, row) in rows.chunks_exact(N).enumerate() {
            let mut folded = 0u64;
            for w in 0..N {
                folded ^= row[w] & v[w];
            }
            acc |= ((folded.count_ones() & 1) as u64) << j;
        }
        *o = acc;
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "popcnt")]
unsafe fn mat_vec_popcnt(data: &[u64], stride: usize, v: &[u64], out: &mut [u64]) {
    mat_vec_kernel(data, stride, v, out)
}

/// Reads `n <= 64` bits starting at bit `pos`.
#[inline]
fn read_bits(words: &[u64], pos: usize, n: usize) -> u64 {
    let (wi, shift) = (pos / WORD_BITS, pos % WORD_BITS);
    let mut x = words[wi] >> shift;
    if shift != 0 && shift + n > WORD_BITS {
        x |= words[wi + 1] << (WORD_BITS - shift);
    }
    if n < WORD_BITS {
        x &= (1u64 << n) - 1;
    }
    x
}

/// XORs the low `n <= 64` bits of `value` in at bit `pos`.
#[inline]
fn xor_bits(words: &mut [u64], pos: usize, n: usize, value: u64) {
    let (wi, shift) = (pos / WORD_BITS, pos % WORD_BITS);
    words[wi] ^= value << shift;
    if shift != 0 && shift + n > WORD_BITS {
        words[wi + 1] ^= value >> (WORD_BITS - shift);
    }
}

/// An `m`-bit column vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    /// The zero vector of length `len`.
    ///
    /// # Panics
    /// Panics if `len` is zero.
    pub fn zeros(len: usize) -> Self {
        assert!(len >= 1, "bit vectors have at least one bit");
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// The standard basis vector `e_i`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            if f(i) {
                v.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Self::from_fn(bits.len(), |i| bits[i])
    }

    /// Parses a string of `0`/`1` characters; `_` and whitespace are ignored.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!(
                    "unexpected character {other:?} in bit string"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() {
            return Err(Error::InvalidArgument("empty bit string".into()));
        }
        Ok(Self::from_bits(&bits))
    }

    /// Unpacks the first `len` bits of `bytes`, most significant bit first.
    pub fn from_bytes_msb(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() * 8 < len {
            return Err(Error::DimensionMismatch {
                op: "from_bytes_msb",
                left: (len, 1),
                right: (bytes.len() * 8, 1),
            });
        }
        let mut v = Self::zeros(len);
        if len.is_multiple_of(8) {
            for (w, chunk) in v.words.iter_mut().zip(bytes[..len / 8].chunks(8)) {
                let mut buf = [0u8; 8];
                for (dst, src) in buf.iter_mut().zip(chunk) {
                    *dst = src.reverse_bits();
                }
                *w = u64::from_le_bytes(buf);
            }
        } else {
            for i in 0..len {
                if (bytes[i / 8] >> (7 - i % 8)) & 1 == 1 {
                    v.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
                }
            }
        }
        Ok(v)
    }

    /// Packs the bits into bytes, most significant bit first; a trailing
    /// partial byte is zero-filled on the right.
    pub fn to_bytes_msb(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for (i, byte) in out.iter_mut().enumerate() {
            let word = self.words[i / 8];
            *byte = ((word >> ((i % 8) * 8)) as u8).reverse_bits();
        }
        out
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; kept for API symmetry with `len`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn checked_xor(&self, other: &Self) -> Result<Self> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                op: "xor",
                left: (self.len, 1),
                right: (other.len, 1),
            });
        }
        let mut out = self.clone();
        out.xor_assign(other);
        Ok(out)
    }

    /// # Panics
    /// Panics if the lengths differ.
    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        debug_assert!(self.padding_clear());
    }

    /// Copies `len` bits starting at `start` into a new vector.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = Self::zeros(len);
        let (base, shift) = (start / WORD_BITS, start % WORD_BITS);
        for (i, w) in out.words.iter_mut().enumerate() {
            let lo = self.words[base + i] >> shift;
            let hi = match shift {
                0 => 0,
                s => self
                    .words
                    .get(base + i + 1)
                    .map_or(0, |&x| x << (WORD_BITS - s)),
            };
            *w = lo | hi;
        }
        if let Some(last) = out.words.last_mut() {
            *last &= tail_mask(len);
        }
        out
    }

    /// XORs bits `src_start .. src_start + len` of `src` into this vector at
    /// `dst_start`.
    pub fn xor_range_from(&mut self, dst_start: usize, src: &Self, src_start: usize, len: usize) {
        assert!(
            dst_start + len <= self.len && src_start + len <= src.len,
            "range out of bounds"
        );
        let mut done = 0;
        while done < len {
            let n = (len - done).min(WORD_BITS);
            let x = read_bits(&src.words, src_start + done, n);
            xor_bits(&mut self.words, dst_start + done, n, x);
            done += n;
        }
        debug_assert!(self.padding_clear());
    }

    /// XORs `src` into this vector starting at bit `offset`.
    pub fn xor_at(&mut self, offset: usize, src: &Self) {
        assert!(offset + src.len <= self.len, "xor_at out of range");
        if offset.is_multiple_of(WORD_BITS) {
            let base = offset / WORD_BITS;
            for (i, w) in src.words.iter().enumerate() {
                self.words[base + i] ^= w;
            }
        } else {
            let shift = offset % WORD_BITS;
            let base = offset / WORD_BITS;
            for (i, &w) in src.words.iter().enumerate() {
                self.words[base + i] ^= w << shift;
                let spill = w >> (WORD_BITS - shift);
                if spill != 0 {
                    self.words[base + i + 1] ^= spill;
                }
            }
        }
        debug_assert!(self.padding_clear());
    }

    #[inline]
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub(crate) fn padding_clear(&self) -> bool {
        self.words
            .last()
            .is_none_or(|&w| w & !tail_mask(self.len) == 0)
    }
}

impl BitXor for &BitVector {
    type Output = BitVector;

    /// # Panics
    /// Panics if the lengths differ; use [`BitVector::checked_xor`] otherwise.
    fn bitxor(self, rhs: Self) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(rhs);
        out
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// A dense matrix over GF(2), packed row by row.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_dim("rows", rows)?;
        check_dim("cols", cols)?;
        let stride = words_for(cols);
        Ok(Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        })
    }

    pub fn identity(m: usize) -> Result<Self> {
        let mut id = Self::zeros(m, m)?;
        for i in 0..m {
            id.set(i, i, true);
        }
        Ok(id)
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut out = Self::zeros(rows, cols)?;
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    out.set(i, j, true);
                }
            }
        }
        Ok(out)
    }

    /// Builds a matrix from row vectors of equal length.
    pub fn from_rows(rows: &[BitVector]) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVector::len);
        let mut out = Self::zeros(rows.len(), cols)?;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    op: "from_rows",
                    left: (1, cols),
                    right: (1, r.len()),
                });
            }
            out.row_words_mut(i).copy_from_slice(r.words());
        }
        debug_assert!(out.padding_clear());
        Ok(out)
    }

    /// Parses rows written as `0`/`1` strings, e.g. `["110", "011", "101"]`.
    pub fn from_row_strs(rows: &[&str]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|s| BitVector::from_bit_str(s))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&rows)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(
            i < self.rows && j < self.cols,
            "entry ({i},{j}) out of range"
        );
        (self.data[i * self.stride + j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(
            i < self.rows && j < self.cols,
            "entry ({i},{j}) out of range"
        );
        let w = &mut self.data[i * self.stride + j / WORD_BITS];
        let mask = 1u64 << (j % WORD_BITS);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize, j: usize) {
        assert!(
            i < self.rows && j < self.cols,
            "entry ({i},{j}) out of range"
        );
        self.data[i * self.stride + j / WORD_BITS] ^= 1 << (j % WORD_BITS);
    }

    pub fn row(&self, i: usize) -> BitVector {
        let mut v = BitVector::zeros(self.cols);
        v.words_mut().copy_from_slice(self.row_words(i));
        v
    }

    pub fn column(&self, j: usize) -> BitVector {
        BitVector::from_fn(self.rows, |i| self.get(i, j))
    }

    #[inline]
    pub(crate) fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|i| {
                self.row_words(i)
                    .iter()
                    .map(|w| w.count_ones() as usize)
                    .sum()
            })
            .collect()
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.cols];
        for i in 0..self.rows {
            for (wi, &word) in self.row_words(i).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    counts[wi * WORD_BITS + w.trailing_zeros() as usize] += 1;
                    w &= w - 1;
                }
            }
        }
        counts
    }

    /// Total number of ones.
    pub fn weight(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// Matrix-vector product; bit `k` of the result is the parity of row `k` AND `v`.
    pub fn mat_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "mat_vec",
                left: (self.rows, self.cols),
                right: (v.len(), 1),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        self.mat_vec_into(v.words(), out.words_mut());
        Ok(out)
    }

    /// Unchecked core of [`mat_vec`](Self::mat_vec): `out` must hold `rows` bits
    /// and `v` must hold `cols` bits.
    #[inline]
    pub(crate) fn mat_vec_into(&self, v: &[u64], out: &mut [u64]) {
        #[cfg(target_arch = "x86_64")]
        if std::arch::is_x86_feature_detected!("popcnt") {
            // SAFETY: the popcnt feature was detected at runtime.
            unsafe { mat_vec_popcnt(&self.data, self.stride, v, out) };
            return;
        }
        mat_vec_kernel(&self.data, self.stride, v, out);
    }

    /// Entrywise sum mod 2.
    pub fn mat_add(&self, other: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch {
                op: "mat_add",
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a ^= b;
        }
        debug_assert!(out.padding_clear());
        Ok(out)
    }

    /// Product `self * other` over GF(2).
    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "mat_mul",
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols)?;
        let stride = out.stride;
        for i in 0..self.rows {
            let acc = &mut out.data[i * stride..(i + 1) * stride];
            for (wi, &word) in self.row_words(i).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let k = wi * WORD_BITS + w.trailing_zeros() as usize;
                    for (a, b) in acc.iter_mut().zip(other.row_words(k)) {
                        *a ^= b;
                    }
                    w &= w - 1;
                }
            }
        }
        debug_assert!(out.padding_clear());
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows).expect("dimensions already validated");
        for i in 0..self.rows {
            for (wi, &word) in self.row_words(i).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let j = wi * WORD_BITS + w.trailing_zeros() as usize;
                    out.set(j, i, true);
                    w &= w - 1;
                }
            }
        }
        out
    }

    /// `self^exp` by repeated squaring.
    pub fn pow(&self, mut exp: u64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut result = Self::identity(self.rows)?;
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mat_mul(&base)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mat_mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    ///
    /// Columns are scanned left to right; the lowest-indexed remaining row
    /// with a one in the column becomes the pivot.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let stride = m.stride;
        for col in 0..m.cols {
            let r = pivots.len();
            if r == m.rows {
                break;
            }
            let (wi, bit) = (col / WORD_BITS, 1u64 << (col % WORD_BITS));
            let Some(p) = (r..m.rows).find(|&i| m.data[i * stride + wi] & bit != 0) else {
                continue;
            };
            if p != r {
                for w in 0..stride {
                    m.data.swap(p * stride + w, r * stride + w);
                }
            }
            let pivot_row: Vec<u64> = m.row_words(r).to_vec();
            for i in 0..m.rows {
                if i != r && m.data[i * stride + wi] & bit != 0 {
                    for (a, b) in m.row_words_mut(i).iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
            pivots.push(col);
        }
        (m, pivots)
    }

    /// Row rank over GF(2).
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// True iff the matrix is square with full rank.
    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// A basis of `{v : self * v = 0}`, one vector per free column in
    /// increasing column order. Empty iff the columns are independent.
    pub fn nullspace_basis(&self) -> Vec<BitVector> {
        let (reduced, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitVector::unit(self.cols, f);
                for (row, &p) in pivots.iter().enumerate() {
                    if reduced.get(row, f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }

    /// Exactly one 1 in every row and every column.
    pub fn is_permutation_matrix(&self) -> bool {
        self.is_square()
            && self.row_weights().iter().all(|&w| w == 1)
            && self.column_weights().iter().all(|&w| w == 1)
    }

    pub(crate) fn padding_clear(&self) -> bool {
        let mask = !tail_mask(self.cols);
        (0..self.rows).all(|i| self.row_words(i)[self.stride - 1] & mask == 0)
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", self.row(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "{}{}", if i > 0 { ", " } else { "" }, self.row(i))?;
        }
        write!(f, "]")
    }
}
