//! Algebraic and statistical checks of the construction.
//!
//! Every step of the hash is linear over GF(2) and the matrix has a
//! nontrivial kernel, so collisions can be written down directly: XOR a
//! kernel vector into the last full message block and the chain absorbs it
//! without a trace.

use std::fmt::Write as _;

use crate::digest::{hash, Digest, HashParams};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::matgen::{Seed, SplitMix64};

/// Two distinct equal-length messages with the same digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionPair {
    pub msg_a: Vec<u8>,
    pub msg_b: Vec<u8>,
    pub digest: Digest,
    /// Kernel vector XORed into the last full block of `msg_a`.
    pub kernel_vector: BitVector,
    /// Zero-based index of the modified block.
    pub block_index: usize,
}

impl CollisionPair {
    pub fn to_text(&self) -> String {
        format!(
            "collision found\nblock:   {}\nkernel:  {}\nmsg_a:   {}\nmsg_b:   {}\ndigest:  {}\n",
            self.block_index,
            self.kernel_vector,
            to_hex(&self.msg_a),
            to_hex(&self.msg_b),
            self.digest
        )
    }

    pub fn to_kv(&self) -> String {
        format!(
            "mode=collision\nblock_index={}\nkernel_vector={}\nmsg_a={}\nmsg_b={}\ndigest={}\n",
            self.block_index,
            self.kernel_vector,
            to_hex(&self.msg_a),
            to_hex(&self.msg_b),
            self.digest
        )
    }
}

pub(crate) fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn xor_into_message(msg: &mut [u8], bit_offset: usize, v: &BitVector) {
    for i in (0..v.len()).filter(|&i| v.get(i)) {
        let bit = bit_offset + i;
        msg[bit / 8] ^= 0x80 >> (bit % 8);
    }
}

/// Builds a second message colliding with `base_msg`.
///
/// The last full `m`-bit block of the message is XORed with a kernel vector
/// of `P`. That block is never touched by the padding fold (which only
/// rewrites the first block when there are at least two full blocks), so the
/// chaining value after it is unchanged. Each candidate is checked with an
/// independent call to [`hash`] before it is returned.
pub fn construct_collision(params: &HashParams, base_msg: &[u8]) -> Result<CollisionPair> {
    let m = params.m();
    let full_blocks = base_msg.len() * 8 / m;
    if full_blocks == 0 {
        return Err(Error::InvalidArgument(format!(
            "base message of {} bytes holds no full {m}-bit block",
            base_msg.len()
        )));
    }
    let block_index = full_blocks - 1;
    let basis = params.matrix().nullspace_basis();
    if basis.is_empty() {
        return Err(Error::CollisionNotFound(
            "matrix has a trivial kernel".into(),
        ));
    }
    let digest = hash(params, base_msg);
    for v in basis {
        let mut msg_b = base_msg.to_vec();
        xor_into_message(&mut msg_b, block_index * m, &v);
        if msg_b != base_msg && hash(params, &msg_b) == digest {
            return Ok(CollisionPair {
                msg_a: base_msg.to_vec(),
                msg_b,
                digest,
                kernel_vector: v,
                block_index,
            });
        }
    }
    Err(Error::CollisionNotFound(
        "no kernel vector survived verification".into(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearityReport {
    pub trials: usize,
    pub passed: usize,
}

impl LinearityReport {
    pub fn holds(&self) -> bool {
        self.passed == self.trials
    }

    pub fn to_text(&self) -> String {
        format!(
            "linearity: {} ({}/{})\n",
            if self.holds() { "PASS" } else { "FAIL" },
            self.passed,
            self.trials
        )
    }

    pub fn to_kv(&self) -> String {
        format!(
            "mode=linearity\ntrials={}\npassed={}\nholds={}\n",
            self.trials,
            self.passed,
            self.holds()
        )
    }
}

/// Checks `hash(x ^ y) == hash(x) ^ hash(y)` on random pairs of `len`-byte messages.
pub fn linearity_report(
    params: &HashParams,
    trials: usize,
    len: usize,
    seed: Seed,
) -> Result<LinearityReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let passed = (0..trials)
        .filter(|_| {
            let x = rng.bytes(len);
            let y = rng.bytes(len);
            let z: Vec<u8> = x.iter().zip(&y).map(|(a, b)| a ^ b).collect();
            let lhs = hash(params, &z);
            let rhs = hash(params, &x).bits() ^ hash(params, &y).bits();
            lhs.bits() == &rhs
        })
        .count();
    Ok(LinearityReport { trials, passed })
}

pub fn linearity_check(params: &HashParams, trials: usize, len: usize, seed: Seed) -> Result<bool> {
    Ok(linearity_report(params, trials, len, seed)?.holds())
}

/// Single-bit-flip diffusion statistics. The ideal for a strong hash is 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct AvalancheReport {
    pub m: usize,
    pub trials: usize,
    pub mean_flip_fraction: f64,
    pub per_bit_flip_rates: Vec<f64>,
}

impl AvalancheReport {
    pub const IDEAL: f64 = 0.5;

    pub fn min_rate(&self) -> f64 {
        self.per_bit_flip_rates
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_rate(&self) -> f64 {
        self.per_bit_flip_rates
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "avalanche over {} trials (m = {})", self.trials, self.m);
        let _ = writeln!(
            s,
            "mean flip fraction: {:.6} (ideal {:.1})",
            self.mean_flip_fraction,
            Self::IDEAL
        );
        let _ = writeln!(
            s,
            "per-bit flip rate:  min {:.6}  max {:.6}",
            self.min_rate(),
            self.max_rate()
        );
        s
    }

    pub fn to_kv(&self) -> String {
        let rates: Vec<String> = self
            .per_bit_flip_rates
            .iter()
            .map(|r| format!("{r:.6}"))
            .collect();
        format!(
            "mode=avalanche\nm={}\ntrials={}\nmean_flip_fraction={:.6}\nideal={}\nmin_rate={:.6}\nmax_rate={:.6}\nper_bit_flip_rates={}\n",
            self.m,
            self.trials,
            self.mean_flip_fraction,
            Self::IDEAL,
            self.min_rate(),
            self.max_rate(),
            rates.join(",")
        )
    }
}

/// Flips one uniformly chosen bit of a random `len`-byte message per trial
/// and records which digest bits change. Each trial draws from its own
/// generator stream seeded from `seed`.
pub fn avalanche(
    params: &HashParams,
    trials: usize,
    len: usize,
    seed: Seed,
) -> Result<AvalancheReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if len == 0 {
        return Err(Error::InvalidArgument(
            "message length must be at least 1 byte".into(),
        ));
    }
    let m = params.m();
    let mut seeds = SplitMix64::new(seed);
    let mut flips = vec![0usize; m];
    let mut total = 0usize;
    for _ in 0..trials {
        let mut rng = SplitMix64::new(Seed(seeds.next_u64()));
        let msg = rng.bytes(len);
        let bit = rng.below(8 * len as u64) as usize;
        let mut flipped = msg.clone();
        flipped[bit / 8] ^= 0x80 >> (bit % 8);
        let diff = hash(params, &msg).bits() ^ hash(params, &flipped).bits();
        total += diff.weight();
        for (j, count) in flips.iter_mut().enumerate() {
            *count += diff.get(j) as usize;
        }
    }
    Ok(AvalancheReport {
        m,
        trials,
        mean_flip_fraction: total as f64 / (trials * m) as f64,
        per_bit_flip_rates: flips.iter().map(|&c| c as f64 / trials as f64).collect(),
    })
}
