//! On-disk matrix format.
//!
//! ```text
//! offset  size            field
//! 0       4               magic "GF2M"
//! 4       1               version (1)
//! 5       4               m, u32 little-endian
//! 9       m * ceil(m/8)   rows, each packed MSB first, unused low bits zero
//! end-4   4               CRC-32 (IEEE) of all preceding bytes, little-endian
//! ```
//!
//! A file only loads if the matrix is singular and every row and column
//! weight is 0 or 2.

use std::path::Path;

use thiserror::Error;

use crate::gf2::{BitMatrix, BitVector, MAX_DIM};

pub const MAGIC: [u8; 4] = *b"GF2M";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 9;
const CHECKSUM_LEN: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixFileError {
    #[error("file too short ({0} bytes)")]
    TooShort(usize),
    #[error("bad magic, not a GF2M matrix file")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("matrix size {0} out of range 2..=65536")]
    BadDimension(u32),
    #[error("length mismatch: expected {expected} bytes, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("row {0} has nonzero padding bits")]
    NonzeroPadding(usize),
    #[error("matrix is invertible")]
    Invertible,
    #[error("{axis} {index} has weight {weight}, expected 0 or 2")]
    BadWeight {
        axis: &'static str,
        index: usize,
        weight: usize,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

fn row_bytes(m: usize) -> usize {
    m.div_ceil(8)
}

pub fn encoded_len(m: usize) -> usize {
    HEADER_LEN + m * row_bytes(m) + CHECKSUM_LEN
}

pub fn encode(p: &BitMatrix) -> Vec<u8> {
    assert!(p.is_square(), "only square matrices are stored");
    let m = p.rows();
    let mut out = Vec::with_capacity(encoded_len(m));
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(m as u32).to_le_bytes());
    for i in 0..m {
        out.extend_from_slice(&p.row(i).to_bytes_msb());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Frame<'a> {
    m: usize,
    body: &'a [u8],
    stored: u32,
}

fn parse_frame(bytes: &[u8]) -> Result<Frame<'_>, MatrixFileError> {
    if bytes.len() < HEADER_LEN + CHECKSUM_LEN {
        return Err(MatrixFileError::TooShort(bytes.len()));
    }
    if bytes[..4] != MAGIC {
        return Err(MatrixFileError::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(MatrixFileError::UnsupportedVersion(bytes[4]));
    }
    let m32 = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes"));
    let m = m32 as usize;
    if !(2..=MAX_DIM).contains(&m) {
        return Err(MatrixFileError::BadDimension(m32));
    }
    let expected = encoded_len(m);
    if bytes.len() != expected {
        return Err(MatrixFileError::LengthMismatch {
            expected,
            found: bytes.len(),
        });
    }
    let (body, tail) = bytes.split_at(expected - CHECKSUM_LEN);
    Ok(Frame {
        m,
        body,
        stored: u32::from_le_bytes(tail.try_into().expect("4 bytes")),
    })
}

fn checksum(frame: &Frame<'_>) -> Result<(), MatrixFileError> {
    let computed = crc32fast::hash(frame.body);
    if frame.stored != computed {
        return Err(MatrixFileError::ChecksumMismatch {
            stored: frame.stored,
            computed,
        });
    }
    Ok(())
}

fn parse_rows(frame: &Frame<'_>) -> Result<BitMatrix, MatrixFileError> {
    let m = frame.m;
    let stride = row_bytes(m);
    let pad_mask = match m % 8 {
        0 => 0u8,
        r => 0xFF >> r,
    };
    let rows = frame.body[HEADER_LEN..]
        .chunks_exact(stride)
        .enumerate()
        .map(|(i, row)| {
            if row[stride - 1] & pad_mask != 0 {
                return Err(MatrixFileError::NonzeroPadding(i));
            }
            Ok(BitVector::from_bytes_msb(row, m).expect("row holds m bits"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BitMatrix::from_rows(&rows).expect("validated dimensions"))
}

/// Parses framing and checksum only; the matrix invariants are not checked.
pub fn decode_unchecked(bytes: &[u8]) -> Result<BitMatrix, MatrixFileError> {
    let frame = parse_frame(bytes)?;
    checksum(&frame)?;
    parse_rows(&frame)
}

/// Result of checking a file without stopping at the first failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inspection {
    /// The stored matrix, if the framing and row padding are intact.
    pub matrix: Option<BitMatrix>,
    pub failures: Vec<MatrixFileError>,
}

impl Inspection {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs every check that the framing allows; a checksum failure does not
/// stop the matrix from being examined.
pub fn inspect(bytes: &[u8]) -> Inspection {
    let frame = match parse_frame(bytes) {
        Ok(f) => f,
        Err(e) => {
            return Inspection {
                matrix: None,
                failures: vec![e],
            }
        }
    };
    let mut failures: Vec<_> = checksum(&frame).err().into_iter().collect();
    let matrix = match parse_rows(&frame) {
        Ok(p) => {
            failures.extend(invariant_violations(&p));
            Some(p)
        }
        Err(e) => {
            failures.push(e);
            None
        }
    };
    Inspection { matrix, failures }
}

/// Every invariant violation of a decoded matrix, in a fixed order:
/// invertibility first, then row weights, then column weights.
pub fn invariant_violations(p: &BitMatrix) -> Vec<MatrixFileError> {
    let mut out = Vec::new();
    if p.is_invertible() {
        out.push(MatrixFileError::Invertible);
    }
    let weights = [("row", p.row_weights()), ("column", p.column_weights())];
    for (axis, ws) in weights {
        if let Some((index, &weight)) = ws.iter().enumerate().find(|(_, &w)| w != 0 && w != 2) {
            out.push(MatrixFileError::BadWeight {
                axis,
                index,
                weight,
            });
        }
    }
    out
}

/// Full decode: framing, checksum, and the matrix invariants.
pub fn decode(bytes: &[u8]) -> Result<BitMatrix, MatrixFileError> {
    let p = decode_unchecked(bytes)?;
    match invariant_violations(&p).into_iter().next() {
        Some(e) => Err(e),
        None => Ok(p),
    }
}

pub fn write_file(path: impl AsRef<Path>, p: &BitMatrix) -> Result<(), MatrixFileError> {
    std::fs::write(path, encode(p)).map_err(|e| MatrixFileError::Io(e.to_string()))
}

pub fn read_file(path: impl AsRef<Path>) -> Result<BitMatrix, MatrixFileError> {
    let path = path.as_ref();
    let bytes =
        std::fs::read(path).map_err(|e| MatrixFileError::Io(format!("{}: {e}", path.display())))?;
    decode(&bytes)
}
