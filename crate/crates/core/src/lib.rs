//! Reversible data hiding in encrypted grayscale images.
//!
//! The content owner shuffles the image's blocks and measures, per block, how
//! far followers stray from the block's leader pixel. That bound fixes how
//! many MSBs of each follower can be sacrificed. The shuffled image is then
//! masked with an AES-CTR keystream, and the data hider overwrites follower
//! MSBs with a self-describing feature map and a masked payload.
//!
//! Decoding is separable: [`extract_payload`] needs only the data hider key,
//! [`recover_image`] only the content owner key, and both need the shared key
//! if one was used for the feature map.

pub mod bits;
pub mod block;
pub mod capacity;
pub mod crypto;
pub mod embed;
pub mod error;
pub mod extract;
pub mod image;
pub mod recover;

pub use bits::{bcf_decode, bcf_encode, decode_header, encode_header, BitString, Header};
pub use block::{
    apply_permutation, block_ref, build_layout, invert_permutation, BlockLayout, BlockRef, Permutation,
};
pub use capacity::{bcf_from_errors, block_prediction_errors, profile_image, Bcf, CapacityProfile};
pub use crypto::{
    keyed_block_permutation, keystream_bytes, stream_encrypt_bits, xor_cipher_image, Key, KeyMaterial,
};
pub use embed::{build_aux_stream, embed_all, embed_bits_in_pixel, EmbedCursor};
pub use error::{Error, Result};
pub use extract::{bootstrap, extract_bits_from_pixel, extract_payload, Bootstrap};
pub use image::{psnr, read_pgm, write_pgm, GrayImage, Role};
pub use recover::{candidate_pixel, recover_image, resolve_original};

/// Capacity profile of a plain image after the block shuffle of `kc`, or of
/// the unshuffled image when no key is given.
pub fn analyze(plain: &GrayImage, layout: &BlockLayout, kc: Option<&Key>) -> Result<CapacityProfile> {
    let perm = match kc {
        Some(kc) => keyed_block_permutation(kc, layout),
        None => Permutation::identity(layout.block_count),
    };
    profile_image(plain, layout, &perm)
}

/// Shuffles, profiles and encrypts `plain`.
pub fn encrypt_image(plain: &GrayImage, layout: &BlockLayout, kc: &Key) -> Result<(GrayImage, CapacityProfile)> {
    let perm = keyed_block_permutation(kc, layout);
    let profile = profile_image(plain, layout, &perm)?;
    let permuted = apply_permutation(plain, layout, &perm)?;
    Ok((xor_cipher_image(&permuted, kc), profile))
}

/// Full sender side: shuffle, profile, encrypt and embed `payload`.
pub fn encode(plain: &GrayImage, layout: &BlockLayout, keys: &KeyMaterial, payload: &BitString) -> Result<GrayImage> {
    let (encrypted, profile) = encrypt_image(plain, layout, keys.content_owner()?)?;
    embed_all(&encrypted, &profile, payload, keys)
}
