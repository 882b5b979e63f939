//! RBPBO: a two-phase symmetric block cipher built from recursive bitwise
//! and pairs-of-bits XOR operations, plus the tooling around it.
//!
//! The cipher splits a byte stream into blocks according to a 114-bit,
//! twelve-segment session key (segment rank `R` holds up to `2^(15-R)`
//! blocks of `2^(15-R)` bits), then transforms each block independently:
//! a configurable number of neighbor-XOR passes over single bits followed
//! by cascade passes over consecutive bit pairs. Both passes are exact
//! bijections, so decryption runs the single-pass inverses in reverse
//! order. Ciphertext length always equals plaintext length.
//!
//! **This cipher is not secure.** Every transform is linear over GF(2),
//! so one known plaintext/ciphertext pair of each block size recovers the
//! whole keystream mapping. The crate exists for format compatibility and
//! for studying the transforms' cycle structure and output statistics,
//! not for protecting data.
//!
//! Modules:
//! - [`bitcore`] — the block transforms, their inverses, and cycle/order
//!   measurement
//! - [`keying`] — the 114-bit session-key format: derivation, packing,
//!   parsing, capacity accounting
//! - [`codec`] — whole-stream and whole-file encryption/decryption
//! - [`analysis`] — byte histograms, chi-square homogeneity tests, timing
//!   runs, and brute-force key-search estimates
//!
//! With the default `parallel` feature the stream codec and order sweeps
//! fan out over a rayon pool; disable default features for a fully
//! sequential build.

pub mod analysis;
pub mod bitcore;
pub mod codec;
pub mod keying;

pub use analysis::{byte_histogram, chi_square, ChiSquareReport, Histogram256};
pub use bitcore::{Block, IterationParams, Phase};
pub use codec::{decrypt_stream, encrypt_stream, SegmentPlan};
pub use keying::{capacity, derive_key, pack_key, parse_key, KeyError, SessionKey};
