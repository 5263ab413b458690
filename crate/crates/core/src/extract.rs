//! Hierarchical recovery of block features and payload extraction.

use crate::bits::{bcf_decode, decode_header, BitString, Header, HEADER_BITS};
use crate::block::BlockLayout;
use crate::capacity::{aux_stream_bits, Bcf, LENGTH_FIELD_BITS};
use crate::crypto::{keystream_bytes, stream_encrypt_bits, KeyMaterial, TAG_AUX, TAG_PAYLOAD};
use crate::embed::{carrier_pixels, header_pixels, EmbedCursor};
use crate::error::{Error, Result};
use crate::image::{GrayImage, Role};

/// Top `n'` bits of a marked pixel, MSB first.
pub fn extract_bits_from_pixel(p: u8, n_prime: Bcf) -> BitString {
    let n = n_prime.get() as u32;
    let mut bits = BitString::with_capacity(n as usize);
    bits.push_bits((p as u64) >> (8 - n), n);
    bits
}

/// State recovered from the auxiliary stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bootstrap {
    pub header: Header,
    /// Indexed by permuted block slot.
    pub bcfs: Vec<Bcf>,
    /// Encrypted-domain values of the three header pixels.
    pub saved_header_pixels: [u8; 3],
    pub cursor: EmbedCursor,
    /// Offset of the payload stream within the carried bits.
    pub payload_offset: u64,
}

/// Reads the header, then walks the blocks from the start block, decoding
/// each block's feature from the bits carried by the blocks before it.
pub fn bootstrap(marked: &GrayImage, layout: &BlockLayout, keys: &KeyMaterial) -> Result<Bootstrap> {
    marked.expect_role(Role::Marked)?;
    layout.check_image(marked)?;
    let count = layout.block_count;

    let mut header_bits = BitString::with_capacity(HEADER_BITS);
    for px in header_pixels(layout)? {
        header_bits.push_bits(marked.pixels()[px] as u64, 8);
    }
    let header = decode_header(&header_bits)?;
    if header.start_block >= count {
        return Err(Error::HeaderOutOfRange {
            start: header.start_block,
            count,
        });
    }

    let aux_len = aux_stream_bits(count) as usize;
    let mask = match &keys.ks {
        Some(ks) => keystream_bytes(ks, TAG_AUX, 0, aux_len.div_ceil(8)),
        None => vec![0; aux_len.div_ceil(8)],
    };
    let mut aux = BitString::from_bytes(&mask);
    aux.truncate(aux_len);

    let cursor = EmbedCursor::new(header.start_block, count);
    let mut bcfs: Vec<Option<Bcf>> = vec![None; count];
    bcfs[header.start_block] = Some(header.start_bcf);
    let mut collected = 0usize;

    for position in 0..count {
        let slot = cursor.block_at(position);
        if position > 0 {
            let code_end = HEADER_BITS + 3 * position;
            if collected < code_end {
                return Err(Error::AuxStreamStall { position });
            }
            bcfs[slot] = Some(bcf_decode(aux.read_bits(code_end - 3, 3) as u8));
        }
        if collected >= aux_len {
            continue;
        }
        let bcf = bcfs[slot].expect("feature decoded before its block");
        if bcf.get() == 0 {
            continue;
        }
        for px in carrier_pixels(layout, slot) {
            let bits = extract_bits_from_pixel(marked.pixels()[px], bcf);
            for bit in bits.iter() {
                if collected == aux_len {
                    break;
                }
                if bit {
                    aux.flip(collected);
                }
                collected += 1;
            }
        }
    }

    let bcfs: Vec<Bcf> = bcfs.into_iter().map(|b| b.expect("all features decoded")).collect();
    let saved_header_pixels = [
        aux.read_bits(0, 8) as u8,
        aux.read_bits(8, 8) as u8,
        aux.read_bits(16, 8) as u8,
    ];
    Ok(Bootstrap {
        header,
        bcfs,
        saved_header_pixels,
        cursor,
        payload_offset: aux_len as u64,
    })
}

/// All bits carried by a marked image, in embedding order.
pub fn read_carried_bits(marked: &GrayImage, layout: &BlockLayout, cursor: &EmbedCursor, bcfs: &[Bcf]) -> BitString {
    let mut bits = BitString::new();
    for (px, bcf) in cursor.carriers(layout, bcfs) {
        bits.push_bits((marked.pixels()[px] as u64) >> (8 - bcf.get()), bcf.get() as u32);
    }
    bits
}

/// Recovers the payload with the data hider key (and the shared key if the
/// auxiliary stream was masked).
pub fn extract_payload(marked: &GrayImage, layout: &BlockLayout, keys: &KeyMaterial) -> Result<BitString> {
    let kd = keys.data_hider()?;
    let boot = bootstrap(marked, layout, keys)?;
    let carried = read_carried_bits(marked, layout, &boot.cursor, &boot.bcfs);
    let start = boot.payload_offset as usize;
    let available = carried.len().saturating_sub(start + LENGTH_FIELD_BITS as usize) as u64;
    if carried.len() < start + LENGTH_FIELD_BITS as usize {
        return Err(Error::LengthFieldOverflow {
            declared: 0,
            available,
        });
    }
    let stream = stream_encrypt_bits(&carried.slice(start, carried.len()), kd, TAG_PAYLOAD);
    let declared = stream.read_bits(0, LENGTH_FIELD_BITS as u32);
    if declared > available {
        return Err(Error::LengthFieldOverflow { declared, available });
    }
    let from = LENGTH_FIELD_BITS as usize;
    Ok(stream.slice(from, from + declared as usize))
}
