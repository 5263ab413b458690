//! MSB-first bit buffers, the 3-bit block feature code and the 24-bit
//! start-block header.

use crate::capacity::Bcf;
use crate::error::{Error, Result};

/// Exact-length bit sequence packed MSB-first into bytes.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl std::fmt::Debug for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitString({}:", self.len)?;
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// Every bit of `bytes`, MSB of the first byte first.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self {
            bytes: bytes.to_vec(),
            len: bytes.len() * 8,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Self::with_capacity(bits.len());
        out.extend(bits.iter().copied());
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[self.len / 8] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Appends the low `count` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, count: u32) {
        debug_assert!(count <= 64);
        for shift in (0..count).rev() {
            self.push((value >> shift) & 1 == 1);
        }
    }

    pub fn append(&mut self, other: &BitString) {
        self.extend(other.iter());
    }

    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit {index} out of range {}", self.len);
        self.bytes[index / 8] & (0x80 >> (index % 8)) != 0
    }

    pub fn flip(&mut self, index: usize) {
        assert!(index < self.len, "bit {index} out of range {}", self.len);
        self.bytes[index / 8] ^= 0x80 >> (index % 8);
    }

    /// Reads `count` bits starting at `start` as a big-endian integer.
    pub fn read_bits(&self, start: usize, count: u32) -> u64 {
        debug_assert!(count <= 64);
        (start..start + count as usize).fold(0, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    pub fn slice(&self, start: usize, end: usize) -> BitString {
        assert!(start <= end && end <= self.len);
        (start..end).map(|i| self.get(i)).collect()
    }

    pub fn truncate(&mut self, len: usize) {
        if len >= self.len {
            return;
        }
        self.len = len;
        self.bytes.truncate(len.div_ceil(8));
        if len % 8 != 0 {
            let last = self.bytes.len() - 1;
            self.bytes[last] &= 0xFFu8 << (8 - len % 8);
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Packed bytes; a trailing partial byte is zero-padded.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// XORs bit `i` with bit `i` of `stream`, MSB-first within each byte.
    pub fn xor_with_bytes(&mut self, stream: &[u8]) {
        assert!(stream.len() * 8 >= self.len, "keystream too short");
        for (byte, key) in self.bytes.iter_mut().zip(stream) {
            *byte ^= key;
        }
        if self.len % 8 != 0 {
            let last = self.bytes.len() - 1;
            self.bytes[last] &= 0xFFu8 << (8 - self.len % 8);
        }
    }
}

impl Extend<bool> for BitString {
    fn extend<I: IntoIterator<Item = bool>>(&mut self, iter: I) {
        for bit in iter {
            self.push(bit);
        }
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut out = BitString::new();
        out.extend(iter);
        out
    }
}

/// 3-bit code of a block feature; `n' = 8` takes the slot left free by the
/// unrealisable `n' = 7`.
pub fn bcf_encode(bcf: Bcf) -> u8 {
    match bcf.get() {
        8 => 7,
        n => n,
    }
}

pub fn bcf_decode(code: u8) -> Bcf {
    debug_assert!(code < 8);
    match code & 7 {
        7 => Bcf::EIGHT,
        n => Bcf::new(n).expect("codes 0..=6 are legal features"),
    }
}

pub const HEADER_BITS: usize = 24;
const START_BLOCK_BITS: u32 = 21;
pub const MAX_BLOCKS: usize = 1 << START_BLOCK_BITS;

/// Start block of the hierarchical embedding and its feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub start_block: usize,
    pub start_bcf: Bcf,
}

/// 21-bit big-endian start block followed by the 3-bit feature code.
pub fn encode_header(header: &Header) -> Result<BitString> {
    if header.start_block >= MAX_BLOCKS {
        return Err(Error::BlockIndexOverflow(header.start_block));
    }
    let mut bits = BitString::with_capacity(HEADER_BITS);
    bits.push_bits(header.start_block as u64, START_BLOCK_BITS);
    bits.push_bits(bcf_encode(header.start_bcf) as u64, 3);
    Ok(bits)
}

pub fn decode_header(bits: &BitString) -> Result<Header> {
    if bits.len() != HEADER_BITS {
        return Err(Error::LengthMismatch {
            expected: HEADER_BITS,
            found: bits.len(),
        });
    }
    Ok(Header {
        start_block: bits.read_bits(0, START_BLOCK_BITS) as usize,
        start_bcf: bcf_decode(bits.read_bits(START_BLOCK_BITS as usize, 3) as u8),
    })
}
