//! Deterministic, counted bit streams.
//!
//! A [`SeedStream`] yields the raw seed bits first (most significant bit of
//! each byte first). Once those run out it continues with counter-mode
//! blocks `SHA-256(DOMAIN || len(seed) || seed || block_index)`, lengths and
//! indices encoded as big-endian `u64`. Reading past the optional budget is
//! an error.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const DOMAIN: &[u8] = b"capgen/seed-expand/v1";
const DERIVE_DOMAIN: &[u8] = b"capgen/seed-derive/v1";
const BLOCK_BYTES: usize = 32;

#[derive(Debug, Clone)]
pub struct SeedStream {
    seed: Vec<u8>,
    consumed: usize,
    budget: Option<usize>,
    block: Option<(u64, [u8; BLOCK_BYTES])>,
}

impl SeedStream {
    /// Parses a hex seed (case-insensitive, even length, non-empty).
    pub fn from_hex(seed_hex: &str, bit_budget: Option<usize>) -> Result<Self> {
        let s = seed_hex.trim();
        if s.is_empty() {
            return Err(Error::InvalidSeed("empty seed".into()));
        }
        if s.len() % 2 != 0 {
            return Err(Error::InvalidSeed(format!("odd number of hex digits in {s:?}")));
        }
        let bytes = (0..s.len())
            .step_by(2)
            .map(|i| {
                u8::from_str_radix(&s[i..i + 2], 16)
                    .map_err(|_| Error::InvalidSeed(format!("not a hex string: {s:?}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self::from_bytes(bytes, bit_budget))
    }

    pub fn from_bytes(seed: Vec<u8>, bit_budget: Option<usize>) -> Self {
        Self {
            seed,
            consumed: 0,
            budget: bit_budget,
            block: None,
        }
    }

    /// The stream whose first `nbits` bits are the binary expansion of
    /// `value` (most significant first), with budget exactly `nbits`.
    /// Enumerating `value` over `0..2^nbits` visits every seed of that length.
    pub fn from_bits(value: u64, nbits: usize) -> Self {
        assert!(nbits <= 64, "at most 64 enumerated bits");
        let nbytes = nbits.div_ceil(8).max(1);
        let mut bytes = vec![0u8; nbytes];
        for i in 0..nbits {
            let bit = (value >> (nbits - 1 - i)) & 1;
            bytes[i / 8] |= (bit as u8) << (7 - (i % 8));
        }
        Self::from_bytes(bytes, Some(nbits))
    }

    /// An independent stream for sample `index` under a master seed; the
    /// stream seed is `SHA-256(DERIVE_DOMAIN || len(master) || master || index)`.
    pub fn derived(master: &[u8], index: u64) -> Self {
        let mut h = Sha256::new();
        h.update(DERIVE_DOMAIN);
        h.update((master.len() as u64).to_be_bytes());
        h.update(master);
        h.update(index.to_be_bytes());
        Self::from_bytes(h.finalize().to_vec(), None)
    }

    pub fn seed_bytes(&self) -> &[u8] {
        &self.seed
    }

    pub fn bits_consumed(&self) -> usize {
        self.consumed
    }

    pub fn bit_budget(&self) -> Option<usize> {
        self.budget
    }

    /// Bits left before the budget is hit, `None` when unbounded.
    pub fn remaining(&self) -> Option<usize> {
        self.budget.map(|b| b.saturating_sub(self.consumed))
    }

    fn check(&self, n: usize) -> Result<()> {
        match self.budget {
            Some(budget) if self.consumed + n > budget => Err(Error::StreamExhausted {
                requested: n,
                consumed: self.consumed,
                budget,
            }),
            _ => Ok(()),
        }
    }

    fn byte_at(&mut self, idx: usize) -> u8 {
        if idx < self.seed.len() {
            return self.seed[idx];
        }
        let off = idx - self.seed.len();
        let block_index = (off / BLOCK_BYTES) as u64;
        match &self.block {
            Some((b, data)) if *b == block_index => data[off % BLOCK_BYTES],
            _ => {
                let data = expand_block(&self.seed, block_index);
                let byte = data[off % BLOCK_BYTES];
                self.block = Some((block_index, data));
                byte
            }
        }
    }

    fn next_bit(&mut self) -> u64 {
        let pos = self.consumed;
        let byte = self.byte_at(pos / 8);
        self.consumed += 1;
        u64::from((byte >> (7 - (pos % 8))) & 1)
    }

    /// Reads `n <= 64` bits as an unsigned integer, most significant first.
    pub fn read_bits(&mut self, n: usize) -> Result<u64> {
        if n > 64 {
            return Err(Error::InvalidArgument(format!("cannot read {n} bits at once")));
        }
        self.check(n)?;
        let mut v = 0u64;
        for _ in 0..n {
            v = (v << 1) | self.next_bit();
        }
        Ok(v)
    }

    /// Reads `n` bits of arbitrary length into a bit vector.
    pub fn read_bitvec(&mut self, n: usize) -> Result<Vec<bool>> {
        self.check(n)?;
        Ok((0..n).map(|_| self.next_bit() == 1).collect())
    }

    pub fn skip(&mut self, n: usize) -> Result<()> {
        self.check(n)?;
        self.consumed += n;
        Ok(())
    }
}

fn expand_block(seed: &[u8], block_index: u64) -> [u8; BLOCK_BYTES] {
    let mut h = Sha256::new();
    h.update(DOMAIN);
    h.update((seed.len() as u64).to_be_bytes());
    h.update(seed);
    h.update(block_index.to_be_bytes());
    h.finalize().into()
}

/// Number of bits needed to index `k` items, `ceil(log2 k)`; zero for `k <= 1`.
pub fn index_bits(k: usize) -> usize {
    if k <= 1 {
        0
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as usize
    }
}
