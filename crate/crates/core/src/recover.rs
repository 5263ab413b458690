//! Lossless reconstruction of the original image by the content owner.
//!
//! After decryption, a follower's low `8 - n'` bits are intact while its top
//! `n'` bits are noise. Splicing in the leader's top bits yields a candidate
//! within `2^(8-n')` of the original; the original is the unique value in
//! the candidate's residue class that lies strictly within `2^(7-n')` of the
//! leader.

use crate::block::{invert_permutation, BlockLayout};
use crate::capacity::Bcf;
use crate::crypto::{keyed_block_permutation, xor_cipher_image, KeyMaterial};
use crate::embed::header_pixels;
use crate::error::Result;
use crate::extract::bootstrap;
use crate::image::{GrayImage, Role};

/// Low `8 - n'` bits of the decrypted follower under the leader's top `n'`
/// bits.
pub fn candidate_pixel(decrypted_follower: u8, leader: u8, n_prime: Bcf) -> u8 {
    let n = n_prime.get();
    let low_mask = (0xFFu16 >> n) as u8;
    (decrypted_follower & low_mask) | (leader & !low_mask)
}

/// Moves `candidate` by one step of `2^(8-n')` towards `leader` when it lies
/// too far from it.
pub fn resolve_original(candidate: u8, leader: u8, n_prime: Bcf) -> u8 {
    let n = n_prime.get();
    if n == 0 || n == 8 {
        return candidate;
    }
    let step = 1i32 << (8 - n);
    let error = candidate as i32 - leader as i32;
    let value = if error.abs() < step / 2 {
        candidate as i32
    } else if error < 0 {
        candidate as i32 + step
    } else {
        candidate as i32 - step
    };
    debug_assert!(
        (0..=255).contains(&value),
        "recovered value {value} out of range (candidate {candidate}, leader {leader}, n' {n})"
    );
    value.clamp(0, 255) as u8
}

/// Rebuilds the original image using the content owner key, plus the shared
/// key when the auxiliary stream was masked. The payload key is never used.
pub fn recover_image(marked: &GrayImage, layout: &BlockLayout, keys: &KeyMaterial) -> Result<GrayImage> {
    let kc = keys.content_owner()?;
    let boot = bootstrap(marked, layout, keys)?;

    let mut restored = marked.clone();
    for (px, saved) in header_pixels(layout)?.into_iter().zip(boot.saved_header_pixels) {
        restored.pixels_mut()[px] = saved;
    }
    let decrypted = xor_cipher_image(&restored, kc);

    let mut permuted = decrypted.clone();
    for (slot, &bcf) in boot.bcfs.iter().enumerate() {
        let block = layout.slot(slot)?;
        let (lr, lc) = block.leader();
        let leader = decrypted.get(lr, lc);
        for (r, c) in block.followers() {
            let candidate = candidate_pixel(decrypted.get(r, c), leader, bcf);
            permuted.set(r, c, resolve_original(candidate, leader, bcf));
        }
    }

    let perm = keyed_block_permutation(kc, layout);
    let mut original = invert_permutation(&permuted, layout, &perm)?;
    original.set_role(Role::Plain);
    Ok(original)
}
