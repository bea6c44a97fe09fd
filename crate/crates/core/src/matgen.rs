//! Seeded random permutations and the singular multiplication matrix.
//!
//! The generator is SplitMix64, written out here so that a given
//! `(m, seed)` produces the same matrix in every implementation:
//!
//! ```text
//! state  = state + 0x9E3779B97F4A7C15        (wrapping)
//! z      = state
//! z      = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z      = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! The initial state is the seed. Bounded draws in `[0, n)` reject outputs
//! at or above `floor(2^64 / n) * n` and return `x mod n` otherwise.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, MAX_DIM};

/// Seed for the deterministic generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// SplitMix64 pseudo-random generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: Seed) -> Self {
        Self { state: seed.0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `[0, n)` without modulo bias.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let limit = (u64::MAX / n) * n;
        loop {
            let x = self.next_u64();
            if x < limit {
                return x % n;
            }
        }
    }

    pub fn fill_bytes(&mut self, buf: &mut [u8]) {
        let mut chunks = buf.chunks_exact_mut(8);
        for chunk in &mut chunks {
            chunk.copy_from_slice(&self.next_u64().to_le_bytes());
        }
        let rest = chunks.into_remainder();
        if !rest.is_empty() {
            let bytes = self.next_u64().to_le_bytes();
            rest.copy_from_slice(&bytes[..rest.len()]);
        }
    }

    pub fn bytes(&mut self, len: usize) -> Vec<u8> {
        let mut buf = vec![0; len];
        self.fill_bytes(&mut buf);
        buf
    }
}

/// A permutation `a_1 ... a_m` of `{1, ..., m}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    /// Validates that `map` uses each of `1..=m` exactly once.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::InvalidPermutation("empty".into()));
        }
        let m = map.len();
        let mut seen = vec![false; m];
        for &a in &map {
            if a == 0 || a > m {
                return Err(Error::InvalidPermutation(format!(
                    "value {a} outside 1..={m}"
                )));
            }
            if std::mem::replace(&mut seen[a - 1], true) {
                return Err(Error::InvalidPermutation(format!("value {a} repeated")));
            }
        }
        Ok(Self { map })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            map: (1..=m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// One-based images `a_1 ... a_m`.
    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.map)
    }
}

fn shuffle(m: usize, rng: &mut SplitMix64) -> Permutation {
    let mut a: Vec<usize> = (1..=m).collect();
    for i in 0..m {
        let j = i + rng.below((m - i) as u64) as usize;
        a.swap(i, j);
    }
    Permutation { map: a }
}

/// Fisher-Yates shuffle of `1..=m`: position `i` swaps with a uniform
/// position in `i..m`.
pub fn fisher_yates(m: usize, seed: Seed) -> Result<Permutation> {
    if m == 0 {
        return Err(Error::InvalidSize {
            what: "permutation length",
            value: m,
            reason: "must be at least 1",
        });
    }
    Ok(shuffle(m, &mut SplitMix64::new(seed)))
}

/// Permutation matrix with a one at `(a_j - 1, j - 1)` for every `j`.
pub fn perm_to_matrix(p: &Permutation) -> BitMatrix {
    let m = p.len();
    let mut out = BitMatrix::zeros(m, m).expect("permutation length within matrix limits");
    for (j, &a) in p.as_slice().iter().enumerate() {
        out.set(a - 1, j, true);
    }
    out
}

/// The two distinct permutations behind [`gen_noninvertible`].
///
/// Both are drawn from one generator stream; if the second equals the first
/// it is redrawn from the continuing stream.
pub fn generate_pair(m: usize, seed: Seed) -> Result<(Permutation, Permutation)> {
    if m < 2 {
        return Err(Error::InvalidSize {
            what: "matrix size",
            value: m,
            reason: "must be at least 2",
        });
    }
    if m > MAX_DIM {
        return Err(Error::InvalidSize {
            what: "matrix size",
            value: m,
            reason: "exceeds the supported maximum of 65536",
        });
    }
    let mut rng = SplitMix64::new(seed);
    let p1 = shuffle(m, &mut rng);
    let mut p2 = shuffle(m, &mut rng);
    while p2 == p1 {
        p2 = shuffle(m, &mut rng);
    }
    Ok((p1, p2))
}

/// `P = P1 + P2 (mod 2)` for two distinct seeded permutation matrices.
///
/// The result is singular; every row and column has weight 0 or 2.
pub fn gen_noninvertible(m: usize, seed: Seed) -> Result<BitMatrix> {
    let (p1, p2) = generate_pair(m, seed)?;
    perm_to_matrix(&p1).mat_add(&perm_to_matrix(&p2))
}
