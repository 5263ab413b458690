#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdhei_core::{BitString, GrayImage, Key, KeyMaterial};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_key(rng: &mut impl Rng) -> Key {
    Key::new(rng.gen())
}

pub fn random_keys(rng: &mut impl Rng, with_ks: bool) -> KeyMaterial {
    KeyMaterial::new(
        Some(random_key(rng)),
        Some(random_key(rng)),
        with_ks.then(|| random_key(rng)),
    )
}

pub fn random_bits(rng: &mut impl Rng, len: usize) -> BitString {
    (0..len).map(|_| rng.gen::<bool>()).collect()
}

/// Patchwork of flat areas, gradients, mild texture and raw noise.
pub fn synthetic_image(rng: &mut impl Rng, width: usize, height: usize) -> GrayImage {
    const TILE: usize = 8;
    let tiles_x = width.div_ceil(TILE);
    let tiles_y = height.div_ceil(TILE);
    let modes: Vec<(u8, i32, i32, i32)> = (0..tiles_x * tiles_y)
        .map(|_| {
            let mode = match rng.gen_range(0..10) {
                0..=2 => 0, // flat
                3..=5 => 1, // gradient
                6..=7 => 2, // texture
                8 => 3,     // strong texture
                _ => 4,     // noise
            };
            (mode, rng.gen_range(20..235), rng.gen_range(-3..=3), rng.gen_range(-3..=3))
        })
        .collect();
    GrayImage::from_fn(width, height, |r, c| {
        let (mode, base, dx, dy) = modes[(r / TILE) * tiles_x + c / TILE];
        let (lr, lc) = ((r % TILE) as i32, (c % TILE) as i32);
        let v = match mode {
            0 => base,
            1 => base + dx * lc + dy * lr,
            2 => base + rng.gen_range(-4..=4),
            3 => base + rng.gen_range(-30..=30),
            _ => rng.gen_range(0..=255),
        };
        v.clamp(0, 255) as u8
    })
    .unwrap()
}

/// Smooth image with mild texture, embeddable at every block size.
pub fn smooth_image(rng: &mut impl Rng, width: usize, height: usize) -> GrayImage {
    let fx = rng.gen_range(0.02..0.2f64);
    let fy = rng.gen_range(0.02..0.2f64);
    GrayImage::from_fn(width, height, |r, c| {
        let v = 128.0 + 60.0 * (fx * c as f64).sin() + 50.0 * (fy * r as f64).cos();
        (v as i32 + rng.gen_range(-2..=2)).clamp(0, 255) as u8
    })
    .unwrap()
}

/// Per-block capacity recomputed from raw pixel differences, using only
/// the grid geometry: leader at `(h / 2, w / 2)`, every other pixel a
/// follower, `n'` from the smallest `n` with `max |diff| < 2^n`.
pub fn brute_force_block_capacities(img: &GrayImage, bw: usize, bh: usize) -> Vec<(u64, u8)> {
    let mut out = Vec::new();
    let mut row0 = 0;
    while row0 < img.height() {
        let mut col0 = 0;
        while col0 < img.width() {
            let h = bh.min(img.height() - row0);
            let w = bw.min(img.width() - col0);
            let leader = img.get(row0 + h / 2, col0 + w / 2) as i32;
            let mut max_err = 0;
            for r in 0..h {
                for c in 0..w {
                    let d = (img.get(row0 + r, col0 + c) as i32 - leader).abs();
                    max_err = max_err.max(d);
                }
            }
            let n = (0..=7).find(|&n| max_err < (1 << n)).unwrap_or(7);
            let n_prime: u8 = if n == 0 { 8 } else { 7 - n as u8 };
            out.push((n_prime as u64 * (h * w - 1) as u64, n_prime));
            col0 += bw;
        }
        row0 += bh;
    }
    out
}

pub fn shannon_entropy(bytes: &[u8]) -> f64 {
    let mut hist = [0u64; 256];
    for &b in bytes {
        hist[b as usize] += 1;
    }
    let n = bytes.len() as f64;
    hist.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

pub fn chi_square_uniform(bytes: &[u8]) -> f64 {
    let mut hist = [0u64; 256];
    for &b in bytes {
        hist[b as usize] += 1;
    }
    let expected = bytes.len() as f64 / 256.0;
    hist.iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}
