//! Whole-stream and whole-file encryption.
//!
//! A session key expands into a plan of block sizes that tiles the stream;
//! every block size is a multiple of 8 bits, so blocks land on byte
//! boundaries and each one is transformed independently in place. The
//! ciphertext is exactly as long as the plaintext — no header, no padding;
//! all metadata lives in the separate 17-byte key record.
//!
//! Blocks are independent, so with the `parallel` feature enabled streams
//! above a small threshold are processed on the rayon pool; output is
//! written into per-block slices of one buffer, which keeps emission in
//! plan order by construction.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bitcore::{decrypt_block_in_place, encrypt_block_in_place, Block, IterationParams};
use crate::keying::{
    derive_key, pack_key, parse_key, segment_block_bits, KeyError, SessionKey, SEGMENT_COUNT,
};

/// Streams shorter than this are always processed sequentially.
const PARALLEL_MIN_BYTES: usize = 64 * 1024;

/// Errors raised by stream and file transforms.
#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error("LengthMismatch: stream is {actual_bits} bits but the key plan covers {expected_bits}")]
    LengthMismatch { expected_bits: u64, actual_bits: u64 },
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CodecError + '_ {
    move |source| CodecError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// The ordered expansion of a session key into concrete block sizes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SegmentPlan {
    blocks: Vec<u32>,
    total_bits: u64,
}

impl SegmentPlan {
    /// Block bit-sizes in stream order (non-increasing).
    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    /// Sum of all block sizes in bits.
    pub fn total_bits(&self) -> u64 {
        self.total_bits
    }
}

/// Expands a session key into its block-size sequence: `c_1` blocks of
/// 16384 bits, then `c_2` of 8192, down to `c_12` of 8.
pub fn plan_segments(key: &SessionKey) -> SegmentPlan {
    let mut blocks = Vec::new();
    for rank in 1..=SEGMENT_COUNT as u8 {
        let size = segment_block_bits(rank);
        for _ in 0..key.counts[rank as usize - 1] {
            blocks.push(size);
        }
    }
    let total_bits = blocks.iter().map(|&b| b as u64).sum();
    SegmentPlan { blocks, total_bits }
}

#[derive(Clone, Copy)]
enum Direction {
    Encrypt,
    Decrypt,
}

fn transform_chunk(chunk: &mut [u8], params: IterationParams, dir: Direction) {
    let mut block = Block::from_bytes(chunk);
    match dir {
        Direction::Encrypt => encrypt_block_in_place(&mut block, params),
        Direction::Decrypt => decrypt_block_in_place(&mut block, params),
    }
    block.store_bytes(chunk);
}

fn transform_region(
    region: &mut [u8],
    block_bytes: usize,
    params: IterationParams,
    dir: Direction,
    parallel: bool,
) {
    #[cfg(feature = "parallel")]
    if parallel {
        region
            .par_chunks_mut(block_bytes)
            .for_each(|chunk| transform_chunk(chunk, params, dir));
        return;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    for chunk in region.chunks_mut(block_bytes) {
        transform_chunk(chunk, params, dir);
    }
}

fn transform_in_place(buf: &mut [u8], key: &SessionKey, dir: Direction, allow_parallel: bool) {
    let parallel = allow_parallel && buf.len() >= PARALLEL_MIN_BYTES;
    let mut offset = 0usize;
    for rank in 1..=SEGMENT_COUNT as u8 {
        let count = key.counts[rank as usize - 1] as usize;
        if count == 0 {
            continue;
        }
        let block_bytes = segment_block_bits(rank) as usize / 8;
        let region = &mut buf[offset..offset + count * block_bytes];
        offset += count * block_bytes;
        transform_region(region, block_bytes, key.params, dir, parallel);
    }
}

fn transform_stream(
    data: &[u8],
    key: &SessionKey,
    dir: Direction,
    allow_parallel: bool,
) -> Result<Vec<u8>, CodecError> {
    let expected_bits = key.total_bits();
    let actual_bits = data.len() as u64 * 8;
    if actual_bits != expected_bits {
        return Err(CodecError::LengthMismatch {
            expected_bits,
            actual_bits,
        });
    }
    let mut out = data.to_vec();
    transform_in_place(&mut out, key, dir, allow_parallel);
    Ok(out)
}

/// Encrypts a byte stream whose bit length matches the key's plan.
/// Output length equals input length exactly.
pub fn encrypt_stream(plaintext: &[u8], key: &SessionKey) -> Result<Vec<u8>, CodecError> {
    transform_stream(plaintext, key, Direction::Encrypt, true)
}

/// Inverse of [`encrypt_stream`] under the same key.
pub fn decrypt_stream(ciphertext: &[u8], key: &SessionKey) -> Result<Vec<u8>, CodecError> {
    transform_stream(ciphertext, key, Direction::Decrypt, true)
}

/// [`encrypt_stream`] pinned to the sequential path regardless of
/// features. Reference implementation for benches and equivalence tests.
pub fn encrypt_stream_serial(plaintext: &[u8], key: &SessionKey) -> Result<Vec<u8>, CodecError> {
    transform_stream(plaintext, key, Direction::Encrypt, false)
}

/// [`decrypt_stream`] pinned to the sequential path.
pub fn decrypt_stream_serial(ciphertext: &[u8], key: &SessionKey) -> Result<Vec<u8>, CodecError> {
    transform_stream(ciphertext, key, Direction::Decrypt, false)
}

/// Sizes and transform wall-clock of one file operation. The seconds
/// cover only the in-memory transform, not file I/O.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct FileSummary {
    pub input_bytes: u64,
    pub output_bytes: u64,
    pub seconds: f64,
}

/// Encrypts a file: derives the key from the file's bit length, writes the
/// 17-byte key record to `key_out`, and writes ciphertext of identical
/// byte length to `output`.
pub fn encrypt_file(
    input: &Path,
    key_out: &Path,
    output: &Path,
    params: IterationParams,
) -> Result<FileSummary, CodecError> {
    let data = fs::read(input).map_err(io_err(input))?;
    let key = derive_key(data.len() as u64 * 8, params)?;
    let start = Instant::now();
    let cipher = encrypt_stream(&data, &key)?;
    let seconds = start.elapsed().as_secs_f64();
    fs::write(key_out, pack_key(&key)?).map_err(io_err(key_out))?;
    fs::write(output, &cipher).map_err(io_err(output))?;
    Ok(FileSummary {
        input_bytes: data.len() as u64,
        output_bytes: cipher.len() as u64,
        seconds,
    })
}

/// Decrypts a file with an already-parsed session key.
pub fn decrypt_file_with_key(
    input: &Path,
    key: &SessionKey,
    output: &Path,
) -> Result<FileSummary, CodecError> {
    let data = fs::read(input).map_err(io_err(input))?;
    let start = Instant::now();
    let plain = decrypt_stream(&data, key)?;
    let seconds = start.elapsed().as_secs_f64();
    fs::write(output, &plain).map_err(io_err(output))?;
    Ok(FileSummary {
        input_bytes: data.len() as u64,
        output_bytes: plain.len() as u64,
        seconds,
    })
}

/// Decrypts a file using the 17-byte key record at `key_path`.
pub fn decrypt_file(input: &Path, key_path: &Path, output: &Path) -> Result<FileSummary, CodecError> {
    let record = fs::read(key_path).map_err(io_err(key_path))?;
    let key = parse_key(&record)?;
    decrypt_file_with_key(input, &key, output)
}
