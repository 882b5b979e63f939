//! Bit-level block transforms and their cycle structure.
//!
//! A [`Block`] stores its bits packed MSB-first into `u64` words: bit 0 of
//! the block is the most significant bit of word 0. Under that layout both
//! forward transforms collapse to one whole-word pass:
//!
//! * phase 1 (neighbor XOR, `q_0 = s_0`, `q_i = s_(i-1) ^ s_i`) is
//!   `x ^ (x >> 1)` carried across word boundaries;
//! * phase 2 (the same recurrence over consecutive bit pairs) is
//!   `x ^ (x >> 2)`.
//!
//! The inverses are prefix-XOR scans with stride 1 and 2, computed per word
//! with the shift-doubling cascade and a carry mask between words. Both
//! directions cost O(n/64) words per pass.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Iteration counts for the two phases: `t1` neighbor-XOR passes followed
/// by `t2` pair-cascade passes. Both fit in one byte so they can ride in
/// the key record.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct IterationParams {
    pub t1: u8,
    pub t2: u8,
}

impl Default for IterationParams {
    /// Three neighbor-XOR passes (the third intermediate block is the
    /// ciphertext) and one pair-cascade pass.
    fn default() -> Self {
        IterationParams { t1: 3, t2: 1 }
    }
}

/// Selects one of the two forward transforms.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Phase {
    /// Neighbor XOR on single bits.
    Bits,
    /// Cascade XOR on consecutive bit pairs.
    Pairs,
}

impl Phase {
    fn stride(self) -> u32 {
        match self {
            Phase::Bits => 1,
            Phase::Pairs => 2,
        }
    }
}

/// A fixed-length bit vector, the unit of encryption.
///
/// The length must be at least 2 and even (the pair transform needs whole
/// pairs). Bits are indexed from 0; unused low bits of the final word are
/// kept zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Block {
    words: Vec<u64>,
    len: usize,
}

impl Block {
    /// All-zero block of `len` bits.
    pub fn zero(len: usize) -> Block {
        assert!(len >= 2 && len.is_multiple_of(2), "block length must be even and >= 2");
        Block {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Block from individual bits, `bits[0]` first.
    pub fn from_bits(bits: &[bool]) -> Block {
        let mut b = Block::zero(bits.len());
        for (i, &bit) in bits.iter().enumerate() {
            if bit {
                b.words[i / 64] |= 1 << (63 - (i % 64));
            }
        }
        b
    }

    /// Block from bytes, MSB of `bytes[0]` first.
    pub fn from_bytes(bytes: &[u8]) -> Block {
        assert!(!bytes.is_empty(), "block must not be empty");
        let mut b = Block::zero(bytes.len() * 8);
        for (w, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            b.words[w] = u64::from_be_bytes(buf);
        }
        b
    }

    /// Bit count.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // length is always >= 2
    }

    /// Bit at index `i`.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len);
        (self.words[i / 64] >> (63 - (i % 64))) & 1 == 1
    }

    /// The bits as a vector, index 0 first.
    pub fn bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.bit(i)).collect()
    }

    /// The bits re-packed as bytes, MSB-first. Length must be a multiple
    /// of 8.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len / 8];
        self.store_bytes(&mut out);
        out
    }

    /// Writes the bits into `out` MSB-first. `out` must hold exactly
    /// `len / 8` bytes and the length must be a multiple of 8.
    pub fn store_bytes(&self, out: &mut [u8]) {
        assert!(self.len.is_multiple_of(8), "bit count {} is not byte-aligned", self.len);
        assert_eq!(out.len(), self.len / 8);
        for (w, chunk) in out.chunks_mut(8).enumerate() {
            let bytes = self.words[w].to_be_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }

    /// Bitwise XOR with another block of the same length.
    pub fn xor_assign(&mut self, other: &Block) {
        assert_eq!(self.len, other.len, "length mismatch in block XOR");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            *self.words.last_mut().unwrap() &= !0u64 << (64 - rem);
        }
    }

    /// One forward pass: `q_i = s_(i-k) ^ s_i`, with the first `k` bits
    /// passing through unchanged.
    fn forward_pass(&mut self, k: u32) {
        let mut carry = 0u64;
        for w in self.words.iter_mut() {
            let orig = *w;
            *w = orig ^ ((orig >> k) | carry);
            carry = orig << (64 - k);
        }
        self.mask_tail();
    }

    /// One inverse pass: the stride-`k` prefix-XOR scan
    /// `p_i = q_i ^ p_(i-k)`.
    fn inverse_pass(&mut self, k: u32) {
        // carry holds, replicated at every position of matching parity,
        // the running prefix value at the last k bits of the words seen
        // so far.
        let mut carry = 0u64;
        for w in self.words.iter_mut() {
            let mut y = *w;
            let mut shift = k;
            while shift < 64 {
                y ^= y >> shift;
                shift <<= 1;
            }
            y ^= carry;
            *w = y;
            carry = match k {
                1 => 0u64.wrapping_sub(y & 1),
                2 => {
                    (0u64.wrapping_sub((y >> 1) & 1) & 0xAAAA_AAAA_AAAA_AAAA)
                        | (0u64.wrapping_sub(y & 1) & 0x5555_5555_5555_5555)
                }
                _ => unreachable!("stride is 1 or 2"),
            };
        }
        self.mask_tail();
    }

    fn apply_forward(&mut self, phase: Phase) {
        self.forward_pass(phase.stride());
    }

    fn apply_inverse(&mut self, phase: Phase) {
        self.inverse_pass(phase.stride());
    }
}

impl std::fmt::Debug for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Block[{}]<", self.len)?;
        let shown = self.len.min(128);
        for i in 0..shown {
            write!(f, "{}", self.bit(i) as u8)?;
        }
        if shown < self.len {
            write!(f, "...")?;
        }
        write!(f, ">")
    }
}

/// Neighbor-XOR transform: `q_0 = s_0`, `q_i = s_(i-1) ^ s_i`.
pub fn phase1_forward(b: &Block) -> Block {
    let mut out = b.clone();
    out.apply_forward(Phase::Bits);
    out
}

/// Exact inverse of [`phase1_forward`]: the prefix-XOR scan
/// `p_0 = q_0`, `p_i = q_i ^ p_(i-1)`.
pub fn phase1_inverse(b: &Block) -> Block {
    let mut out = b.clone();
    out.apply_inverse(Phase::Bits);
    out
}

/// Pair-cascade transform: the neighbor-XOR recurrence applied to
/// consecutive 2-bit pairs, first pair passing through.
pub fn phase2_forward(b: &Block) -> Block {
    let mut out = b.clone();
    out.apply_forward(Phase::Pairs);
    out
}

/// Exact inverse of [`phase2_forward`].
pub fn phase2_inverse(b: &Block) -> Block {
    let mut out = b.clone();
    out.apply_inverse(Phase::Pairs);
    out
}

/// `t1` neighbor-XOR passes followed by `t2` pair-cascade passes.
pub fn encrypt_block(b: &Block, params: IterationParams) -> Block {
    let mut out = b.clone();
    encrypt_block_in_place(&mut out, params);
    out
}

/// Inverse of [`encrypt_block`] under the same parameters.
pub fn decrypt_block(b: &Block, params: IterationParams) -> Block {
    let mut out = b.clone();
    decrypt_block_in_place(&mut out, params);
    out
}

/// In-place [`encrypt_block`].
pub fn encrypt_block_in_place(b: &mut Block, params: IterationParams) {
    for _ in 0..params.t1 {
        b.apply_forward(Phase::Bits);
    }
    for _ in 0..params.t2 {
        b.apply_forward(Phase::Pairs);
    }
}

/// In-place [`decrypt_block`].
pub fn decrypt_block_in_place(b: &mut Block, params: IterationParams) {
    for _ in 0..params.t2 {
        b.apply_inverse(Phase::Pairs);
    }
    for _ in 0..params.t1 {
        b.apply_inverse(Phase::Bits);
    }
}

/// Smallest `k >= 1` such that `k` forward applications of the chosen
/// phase return `b` unchanged. Terminates because the transform is a
/// bijection on a finite set.
pub fn block_cycle_length(b: &Block, phase: Phase) -> u64 {
    let mut cur = b.clone();
    let mut k = 0u64;
    loop {
        cur.apply_forward(phase);
        k += 1;
        if cur == *b {
            return k;
        }
    }
}

/// Smallest `k >= 1` such that `k` forward applications equal the identity
/// on every `n`-bit block: the least common multiple of the cycle lengths
/// of the `n` single-bit basis blocks (sufficient by GF(2) linearity).
///
/// Cost grows roughly with `n^2 / 64`; sweeps over large `n` run on the
/// rayon pool when the `parallel` feature is enabled.
pub fn transform_order(n: usize, phase: Phase) -> u64 {
    assert!(n >= 2 && n.is_multiple_of(2), "block length must be even and >= 2");
    let basis_cycle = |i: usize| {
        let mut b = Block::zero(n);
        b.words[i / 64] |= 1 << (63 - (i % 64));
        block_cycle_length(&b, phase)
    };
    #[cfg(feature = "parallel")]
    if n >= 64 {
        return (0..n)
            .into_par_iter()
            .map(basis_cycle)
            .reduce(|| 1, lcm);
    }
    (0..n).map(basis_cycle).fold(1, lcm)
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
    a / gcd(a, b) * b
}
