//! The 114-bit, twelve-segment session-key format.
//!
//! Segment rank `R` (1..=12) covers up to `2^(15-R)` blocks of `2^(15-R)`
//! bits, and its block count is stored in a field of `16 - R` bits. The
//! field widths 15..4 sum to 114. A key serializes to a 17-byte record:
//! the twelve counts packed MSB-first in rank order, six zero padding
//! bits, then one byte each for the two iteration counts.

use crate::bitcore::IterationParams;

/// Number of key segments.
pub const SEGMENT_COUNT: usize = 12;

/// Serialized key length in bytes: 114 count bits + 6 pad bits + t1 + t2.
pub const KEY_RECORD_LEN: usize = 17;

/// Total width of the twelve count fields.
pub const KEY_BITS: u32 = 114;

const PAD_BITS: u32 = 6;

/// Block size in bits for segment `rank` (1..=12).
pub fn segment_block_bits(rank: u8) -> u32 {
    assert!((1..=12).contains(&rank));
    1 << (15 - rank as u32)
}

/// Maximum block count for segment `rank`.
pub fn segment_max_blocks(rank: u8) -> u16 {
    assert!((1..=12).contains(&rank));
    1 << (15 - rank as u32)
}

/// Serialized field width in bits for segment `rank`.
pub fn segment_field_width(rank: u8) -> u32 {
    assert!((1..=12).contains(&rank));
    16 - rank as u32
}

/// Errors raised by key handling.
#[derive(Debug, thiserror::Error)]
pub enum KeyError {
    #[error(
        "CapacityExceeded: a stream of {stream_bits} bits cannot be covered by the key format \
         ({remaining_bits} bits left after segment 12; capacity is {max_bits} bits)"
    )]
    CapacityExceeded {
        stream_bits: u64,
        remaining_bits: u64,
        max_bits: u64,
    },
    #[error("FieldOverflow: segment {rank} holds {count} blocks, above its cap of {cap}")]
    FieldOverflow { rank: u8, count: u16, cap: u16 },
    #[error("MalformedKey: {reason}")]
    MalformedKey { reason: String },
}

/// A session key: twelve block counts (index 0 is rank 1) plus the two
/// iteration counts.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SessionKey {
    pub counts: [u16; SEGMENT_COUNT],
    pub params: IterationParams,
}

impl SessionKey {
    /// Builds a key after checking every count against its segment cap.
    pub fn new(counts: [u16; SEGMENT_COUNT], params: IterationParams) -> Result<SessionKey, KeyError> {
        let key = SessionKey { counts, params };
        key.validate()?;
        Ok(key)
    }

    /// Checks every count against its segment cap.
    pub fn validate(&self) -> Result<(), KeyError> {
        for rank in 1..=SEGMENT_COUNT as u8 {
            let count = self.counts[rank as usize - 1];
            let cap = segment_max_blocks(rank);
            if count > cap {
                return Err(KeyError::FieldOverflow { rank, count, cap });
            }
        }
        Ok(())
    }

    /// Total stream length covered by this key, in bits.
    pub fn total_bits(&self) -> u64 {
        (1..=SEGMENT_COUNT as u8)
            .map(|rank| self.counts[rank as usize - 1] as u64 * segment_block_bits(rank) as u64)
            .sum()
    }
}

/// Maximum stream length the key format can describe.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CapacityReport {
    pub max_bits: u64,
    pub max_bytes: u64,
}

impl CapacityReport {
    /// Human-readable correction of the nominal capacity rating.
    pub fn deviation_note(&self) -> String {
        format!(
            "exact capacity is {} bytes ({:.2} MiB); the nominal 42.79 MB rating \
             overstates it by about 0.12 MB",
            self.max_bytes,
            self.max_bytes as f64 / (1024.0 * 1024.0)
        )
    }
}

/// Computes the exact capacity from the segment caps:
/// `sum over R of 2^(15-R) blocks * 2^(15-R) bits`.
pub fn capacity() -> CapacityReport {
    let max_bits: u64 = (1..=SEGMENT_COUNT as u8)
        .map(|rank| segment_max_blocks(rank) as u64 * segment_block_bits(rank) as u64)
        .sum();
    CapacityReport {
        max_bits,
        max_bytes: max_bits / 8,
    }
}

/// Derives the session key covering a stream of `stream_bits` bits
/// (byte-aligned) by greedy largest-first assignment: each segment takes
/// as many whole blocks as remain, up to its cap.
pub fn derive_key(stream_bits: u64, params: IterationParams) -> Result<SessionKey, KeyError> {
    let mut counts = [0u16; SEGMENT_COUNT];
    let mut remaining = stream_bits;
    for rank in 1..=SEGMENT_COUNT as u8 {
        let size = segment_block_bits(rank) as u64;
        let take = (remaining / size).min(segment_max_blocks(rank) as u64);
        counts[rank as usize - 1] = take as u16;
        remaining -= take * size;
    }
    if remaining != 0 {
        return Err(KeyError::CapacityExceeded {
            stream_bits,
            remaining_bits: remaining,
            max_bits: capacity().max_bits,
        });
    }
    Ok(SessionKey { counts, params })
}

/// Serializes a key to its 17-byte record: counts packed MSB-first in
/// rank order (15 bits for rank 1 down to 4 bits for rank 12), six zero
/// padding bits, then `t1` and `t2`.
pub fn pack_key(key: &SessionKey) -> Result<[u8; KEY_RECORD_LEN], KeyError> {
    key.validate()?;
    let mut acc: u128 = 0;
    for rank in 1..=SEGMENT_COUNT as u8 {
        acc = (acc << segment_field_width(rank)) | key.counts[rank as usize - 1] as u128;
    }
    acc <<= PAD_BITS;
    let be = acc.to_be_bytes();
    let mut record = [0u8; KEY_RECORD_LEN];
    record[..15].copy_from_slice(&be[1..16]);
    record[15] = key.params.t1;
    record[16] = key.params.t2;
    Ok(record)
}

/// Parses a 17-byte key record, validating length, padding bits, and
/// segment caps. Exact inverse of [`pack_key`].
pub fn parse_key(record: &[u8]) -> Result<SessionKey, KeyError> {
    if record.len() != KEY_RECORD_LEN {
        return Err(KeyError::MalformedKey {
            reason: format!("record is {} bytes, expected {}", record.len(), KEY_RECORD_LEN),
        });
    }
    let mut be = [0u8; 16];
    be[1..16].copy_from_slice(&record[..15]);
    let mut acc = u128::from_be_bytes(be);
    if acc & ((1 << PAD_BITS) - 1) != 0 {
        return Err(KeyError::MalformedKey {
            reason: "nonzero padding bits".to_string(),
        });
    }
    acc >>= PAD_BITS;
    let mut counts = [0u16; SEGMENT_COUNT];
    for rank in (1..=SEGMENT_COUNT as u8).rev() {
        let width = segment_field_width(rank);
        counts[rank as usize - 1] = (acc & ((1 << width) - 1)) as u16;
        acc >>= width;
    }
    let key = SessionKey {
        counts,
        params: IterationParams {
            t1: record[15],
            t2: record[16],
        },
    };
    key.validate()?;
    Ok(key)
}
