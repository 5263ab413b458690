//! AES-128-CTR keystreams, stream encryption and the keyed block shuffle.
//!
//! Counter block layout (16 bytes, big-endian):
//!
//! ```text
//! bytes 0..8   domain tag (u64)
//! bytes 8..16  block counter (u64), starting at 0
//! ```
//!
//! Keystream byte `o` of a `(key, tag)` stream is byte `o % 16` of
//! `AES-128(key, tag || o / 16)`.

use ctr::cipher::{KeyIvInit, StreamCipher, StreamCipherSeek};

use crate::bits::BitString;
use crate::block::{BlockLayout, Permutation};
use crate::error::{Error, Result};
use crate::image::{GrayImage, Role};

type Aes128Ctr = ctr::Ctr128BE<aes::Aes128>;

/// Domain tag of the pixel masking stream (content owner key).
pub const TAG_PIXEL: u64 = 0;
/// Domain tag of the block shuffle stream (content owner key).
pub const TAG_PERM: u64 = 1;
/// Domain tag of the payload stream (data hider key).
pub const TAG_PAYLOAD: u64 = 2;
/// Domain tag of the auxiliary stream (shared key).
pub const TAG_AUX: u64 = 3;

/// 128-bit secret key.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Key([u8; 16]);

impl Key {
    pub const fn new(bytes: [u8; 16]) -> Self {
        Self(bytes)
    }

    /// Parses exactly 32 hex digits.
    pub fn from_hex(s: &str) -> Result<Self> {
        let mut bytes = [0u8; 16];
        hex::decode_to_slice(s.trim(), &mut bytes)
            .map_err(|e| Error::InvalidKey(format!("{e} (expected 32 hex digits)")))?;
        Ok(Self(bytes))
    }

    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

impl std::fmt::Debug for Key {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Key(..)")
    }
}

impl std::str::FromStr for Key {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Key::from_hex(s)
    }
}

/// Keys held by whoever runs an operation. Each operation asks only for the
/// keys it needs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KeyMaterial {
    /// Content owner: block shuffle and pixel masking.
    pub kc: Option<Key>,
    /// Data hider: payload masking.
    pub kd: Option<Key>,
    /// Shared: auxiliary stream masking. Absent means the auxiliary stream
    /// is embedded in the clear.
    pub ks: Option<Key>,
}

impl KeyMaterial {
    pub fn new(kc: Option<Key>, kd: Option<Key>, ks: Option<Key>) -> Self {
        Self { kc, kd, ks }
    }

    pub fn content_owner(&self) -> Result<&Key> {
        self.kc.as_ref().ok_or(Error::MissingKey("content owner"))
    }

    pub fn data_hider(&self) -> Result<&Key> {
        self.kd.as_ref().ok_or(Error::MissingKey("data hider"))
    }
}

/// Sequential reader over one `(key, tag)` keystream.
pub struct Keystream {
    cipher: Aes128Ctr,
}

impl Keystream {
    pub fn new(key: &Key, domain_tag: u64) -> Self {
        let mut iv = [0u8; 16];
        iv[..8].copy_from_slice(&domain_tag.to_be_bytes());
        Self {
            cipher: Aes128Ctr::new(key.as_bytes().into(), (&iv).into()),
        }
    }

    pub fn at(key: &Key, domain_tag: u64, offset: u64) -> Self {
        let mut ks = Self::new(key, domain_tag);
        ks.cipher.seek(offset);
        ks
    }

    pub fn fill(&mut self, buf: &mut [u8]) {
        buf.fill(0);
        self.cipher.apply_keystream(buf);
    }

    pub fn next_byte(&mut self) -> u8 {
        let mut b = [0u8];
        self.fill(&mut b);
        b[0]
    }
}

pub fn keystream_bytes(key: &Key, domain_tag: u64, offset: u64, count: usize) -> Vec<u8> {
    let mut out = vec![0u8; count];
    Keystream::at(key, domain_tag, offset).fill(&mut out);
    out
}

/// XORs pixel `t` (raster order) with byte `t` of `stream`.
pub fn xor_image_with_stream(img: &GrayImage, stream: &[u8]) -> GrayImage {
    assert!(stream.len() >= img.pixels().len(), "keystream too short");
    let mut out = img.clone();
    for (p, s) in out.pixels_mut().iter_mut().zip(stream) {
        *p ^= s;
    }
    out.set_role(match img.role() {
        Role::Plain => Role::Encrypted,
        Role::Encrypted | Role::Marked => Role::Plain,
    });
    out
}

/// Masks (or unmasks) every pixel with the pixel keystream of `key`.
pub fn xor_cipher_image(img: &GrayImage, key: &Key) -> GrayImage {
    let stream = keystream_bytes(key, TAG_PIXEL, 0, img.pixels().len());
    xor_image_with_stream(img, &stream)
}

/// XORs bit `i` of `bits` with bit `i` of the `(key, tag)` keystream.
pub fn stream_encrypt_bits(bits: &BitString, key: &Key, domain_tag: u64) -> BitString {
    let mut out = bits.clone();
    let stream = keystream_bytes(key, domain_tag, 0, bits.len().div_ceil(8));
    out.xor_with_bytes(&stream);
    out
}

/// Uniform integer in `0..=bound` by rejection sampling on whole bytes.
fn uniform_at_most(stream: &mut Keystream, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let bits = 64 - bound.leading_zeros();
    let nbytes = bits.div_ceil(8) as usize;
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let mut buf = [0u8; 8];
    loop {
        stream.fill(&mut buf[..nbytes]);
        let v = buf[..nbytes].iter().fold(0u64, |acc, &b| (acc << 8) | b as u64) & mask;
        if v <= bound {
            return v;
        }
    }
}

/// Fisher-Yates shuffle of each shape class, drawing from one
/// `(key, TAG_PERM)` stream in class order.
pub fn keyed_block_permutation(key: &Key, layout: &BlockLayout) -> Permutation {
    let mut stream = Keystream::new(key, TAG_PERM);
    let mut forward: Vec<usize> = (0..layout.block_count).collect();
    for (_, slots) in layout.shape_classes() {
        let mut order: Vec<usize> = (0..slots.len()).collect();
        for i in (1..order.len()).rev() {
            let j = uniform_at_most(&mut stream, i as u64) as usize;
            order.swap(i, j);
        }
        for (k, &slot) in slots.iter().enumerate() {
            forward[slot] = slots[order[k]];
        }
    }
    Permutation::from_forward(forward).expect("shuffle of a bijection is a bijection")
}
