//! MSB substitution and the two-step hierarchical embedding.
//!
//! Layout of a marked image:
//!
//! 1. The first three followers of block 0 hold the 24-bit header (start
//!    block `s` and its feature). Their encrypted values are saved.
//! 2. Starting at block `s` and walking the blocks cyclically
//!    (`s, s+1, .., N-1, 0, .., s-1`), each follower carries `n'` of its
//!    block's MSBs. Block 0 skips its three header followers.
//! 3. The carried bit stream is the auxiliary stream (24 saved header bits,
//!    then the 3-bit feature codes of blocks `s+1, .., s-1`, masked with the
//!    shared key when present) followed by the payload stream (32-bit
//!    big-endian payload bit length and the payload bits, masked with the
//!    data hider key).

use crate::bits::{bcf_encode, encode_header, BitString, Header};
use crate::block::BlockLayout;
use crate::capacity::{Bcf, CapacityProfile, HEADER_PIXELS, LENGTH_FIELD_BITS};
use crate::crypto::{stream_encrypt_bits, KeyMaterial, TAG_AUX, TAG_PAYLOAD};
use crate::error::{Error, Result};
use crate::image::{GrayImage, Role};

/// Bits the start block must carry so that the decoder learns the next
/// block's feature.
pub const BOOTSTRAP_BITS: u64 = 24 + 3;

/// Replaces the top `n'` bits of `p` with `chunk`, first bit at the MSB.
pub fn embed_bits_in_pixel(p: u8, chunk: &BitString, n_prime: Bcf) -> Result<u8> {
    let n = n_prime.get();
    if chunk.len() != n as usize {
        return Err(Error::ChunkLengthMismatch {
            expected: n as usize,
            found: chunk.len(),
        });
    }
    Ok(replace_msbs(p, chunk.read_bits(0, n as u32) as u8, n))
}

/// `value` holds `n` bits right-aligned.
pub(crate) fn replace_msbs(p: u8, value: u8, n: u8) -> u8 {
    if n == 0 {
        return p;
    }
    let low_mask = (0xFFu16 >> n) as u8;
    ((value as u16) << (8 - n)) as u8 | (p & low_mask)
}

/// Cyclic walk over blocks, beginning at the start block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbedCursor {
    pub start_block: usize,
    pub block_count: usize,
}

impl EmbedCursor {
    pub fn new(start_block: usize, block_count: usize) -> Self {
        Self {
            start_block,
            block_count,
        }
    }

    /// Block at cyclic position `j`.
    pub fn block_at(&self, position: usize) -> usize {
        (self.start_block + position) % self.block_count
    }

    pub fn blocks(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.block_count).map(|j| self.block_at(j))
    }

    /// Every carrier pixel with its feature, in embedding order. Blocks with
    /// `n' = 0` are skipped.
    pub fn carriers<'a>(
        &'a self,
        layout: &'a BlockLayout,
        bcfs: &'a [Bcf],
    ) -> impl Iterator<Item = (usize, Bcf)> + 'a {
        self.blocks()
            .filter(move |&slot| bcfs[slot].get() > 0)
            .flat_map(move |slot| carrier_pixels(layout, slot).map(move |px| (px, bcfs[slot])))
    }
}

/// Raster indices of the followers of `slot` that carry data.
pub fn carrier_pixels(layout: &BlockLayout, slot: usize) -> impl Iterator<Item = usize> + '_ {
    let block = layout.slot(slot).expect("slot within layout");
    let skip = if slot == 0 { HEADER_PIXELS } else { 0 };
    let width = layout.image_width;
    block
        .followers()
        .skip(skip)
        .map(|(r, c)| r * width + c)
        .collect::<Vec<_>>()
        .into_iter()
}

/// Raster indices of the three header pixels.
pub fn header_pixels(layout: &BlockLayout) -> Result<[usize; HEADER_PIXELS]> {
    let block = layout.slot(0)?;
    let addrs: Vec<usize> = block
        .followers()
        .take(HEADER_PIXELS)
        .map(|(r, c)| r * layout.image_width + c)
        .collect();
    addrs
        .try_into()
        .map_err(|_| Error::BlockTooSmall(layout.block_width, layout.block_height))
}

/// Saved header pixels followed by the feature codes of every block after
/// the start block in cyclic order, masked with the shared key if present.
pub fn build_aux_stream(profile: &CapacityProfile, saved_pixels: [u8; 3], keys: &KeyMaterial) -> BitString {
    let cursor = EmbedCursor::new(profile.start_block, profile.layout.block_count);
    let mut aux = BitString::with_capacity(profile.aux_bits as usize);
    for byte in saved_pixels {
        aux.push_bits(byte as u64, 8);
    }
    for slot in cursor.blocks().skip(1) {
        aux.push_bits(bcf_encode(profile.bcfs[slot]) as u64, 3);
    }
    debug_assert_eq!(aux.len() as u64, profile.aux_bits);
    match &keys.ks {
        Some(ks) => stream_encrypt_bits(&aux, ks, TAG_AUX),
        None => aux,
    }
}

/// Refuses profiles whose auxiliary stream the decoder could not bootstrap:
/// before reaching cyclic position `j`, the blocks already walked must have
/// carried the saved header bits and the codes up to block `j`.
pub fn check_decodable(profile: &CapacityProfile) -> Result<()> {
    let cursor = EmbedCursor::new(profile.start_block, profile.layout.block_count);
    let first = profile.carrier_capacity(profile.start_block);
    if first < BOOTSTRAP_BITS {
        return Err(Error::BootstrapUnderflow { capacity: first });
    }
    let mut embedded = 0u64;
    for position in 1..profile.layout.block_count {
        embedded += profile.carrier_capacity(cursor.block_at(position - 1));
        let required = 24 + 3 * position as u64;
        if embedded < required {
            return Err(Error::AuxDeadlock {
                position,
                embedded,
                required,
            });
        }
    }
    Ok(())
}

/// 32-bit length prefix plus payload, masked with the data hider key.
pub(crate) fn payload_stream(payload: &BitString, keys: &KeyMaterial) -> Result<BitString> {
    let kd = keys.data_hider()?;
    let len = u32::try_from(payload.len()).map_err(|_| Error::PayloadTooLong(payload.len()))?;
    let mut framed = BitString::with_capacity(payload.len() + LENGTH_FIELD_BITS as usize);
    framed.push_bits(len as u64, LENGTH_FIELD_BITS as u32);
    framed.append(payload);
    Ok(stream_encrypt_bits(&framed, kd, TAG_PAYLOAD))
}

/// Embeds the header, the auxiliary stream and `payload` into an encrypted
/// image whose plaintext produced `profile`.
pub fn embed_all(
    encrypted: &GrayImage,
    profile: &CapacityProfile,
    payload: &BitString,
    keys: &KeyMaterial,
) -> Result<GrayImage> {
    encrypted.expect_role(Role::Encrypted)?;
    let layout = &profile.layout;
    layout.check_image(encrypted)?;

    let needed = profile.aux_bits + LENGTH_FIELD_BITS + payload.len() as u64;
    let available = profile.usable_bits();
    if needed > available {
        return Err(Error::InsufficientCapacity { needed, available });
    }
    check_decodable(profile)?;

    let header = encode_header(&Header {
        start_block: profile.start_block,
        start_bcf: profile.bcfs[profile.start_block],
    })?;
    let mut marked = encrypted.clone();
    let header_addrs = header_pixels(layout)?;
    let mut saved = [0u8; 3];
    for (i, &px) in header_addrs.iter().enumerate() {
        saved[i] = marked.pixels()[px];
        marked.pixels_mut()[px] = header.read_bits(8 * i, 8) as u8;
    }

    let mut stream = build_aux_stream(profile, saved, keys);
    stream.append(&payload_stream(payload, keys)?);

    let cursor = EmbedCursor::new(profile.start_block, layout.block_count);
    let mut offset = 0usize;
    let pixels = marked.pixels_mut();
    for (px, bcf) in cursor.carriers(layout, &profile.bcfs) {
        if offset >= stream.len() {
            break;
        }
        let n = bcf.get();
        let take = (n as usize).min(stream.len() - offset) as u8;
        let rest = n - take;
        // a final partial chunk keeps the pixel's own trailing bits
        let kept = (pixels[px] >> (8 - n)) & ((1u16 << rest) - 1) as u8;
        let value = ((stream.read_bits(offset, take as u32) as u16) << rest) as u8 | kept;
        pixels[px] = replace_msbs(pixels[px], value, n);
        offset += take as usize;
    }
    debug_assert_eq!(offset, stream.len());
    marked.set_role(Role::Marked);
    Ok(marked)
}
