//! One-way hashing with singular matrices over GF(2).
//!
//! The multiplication matrix is the mod-2 sum of two random permutation
//! matrices, which is never invertible. Messages are padded to an even number
//! of `m`-bit blocks and chained through `H_i = P (B_i xor H_{i-1})`;
//! [`Model::Two`] adds a quarter-mixing step after every second block.
//!
//! The construction is linear over GF(2), so the [`analysis`] module can
//! produce collisions directly from the kernel of `P`.

pub mod analysis;
pub mod bench;
pub mod cli;
pub mod codec;
pub mod digest;
pub mod error;
pub mod gf2;
pub mod matfile;
pub mod matgen;

pub use codec::{bits_to_bytes, bytes_to_bits, pad, split_blocks, BitStream, BlockStream};
pub use digest::{
    compress, digest_to_hex, f_mix, hash, hash_blocks, Digest, HashParams, Hasher, Model,
};
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector};
pub use matgen::{fisher_yates, gen_noninvertible, perm_to_matrix, Permutation, Seed, SplitMix64};
