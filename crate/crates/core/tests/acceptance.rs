//! Acceptance suite: one pass/fail line per criterion, non-zero exit if any
//! criterion fails.
//!
//! Set `RDHEI_TABLE_IMAGES` to a directory holding 512x512 `lena.pgm`,
//! `baboon.pgm` and `splash.pgm` to run the published-capacity comparison.
//! Set `RDHEI_BLESS=1` to regenerate the golden marked image.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use rdhei_core::embed::EmbedCursor;
use rdhei_core::*;

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn is_refusal(e: &Error) -> bool {
    matches!(
        e,
        Error::InsufficientCapacity { .. } | Error::BootstrapUnderflow { .. } | Error::AuxDeadlock { .. }
    )
}

/// Every leader, every original within the leader's error class, every data
/// chunk and every keystream byte: MSB substitution in the encrypted domain,
/// decryption, splice and resolution return the original intensity.
fn exhaustive_pixel_oracle() -> Outcome {
    let started = Instant::now();
    let mut cases = 0u64;
    for n in 0u32..=7 {
        let bcf = Bcf::from_max_error(if n == 0 { 0 } else { (1 << n) - 1 });
        let n_prime = bcf.get() as u32;
        let chunks: Vec<BitString> = (0..1u64 << n_prime)
            .map(|v| {
                let mut b = BitString::new();
                b.push_bits(v, n_prime);
                b
            })
            .collect();
        let reach = (1i32 << n) - 1;
        for leader in 0..=255i32 {
            for p in (leader - reach).max(0)..=(leader + reach).min(255) {
                let p = p as u8;
                for key in 0..=255u8 {
                    let encrypted = p ^ key;
                    for chunk in &chunks {
                        let marked = embed_bits_in_pixel(encrypted, chunk, bcf).map_err(|e| e.to_string())?;
                        let decrypted = marked ^ key;
                        let candidate = candidate_pixel(decrypted, leader as u8, bcf);
                        let got = resolve_original(candidate, leader as u8, bcf);
                        if got != p {
                            return Err(format!(
                                "n={n} leader={leader} p={p} key={key} chunk={chunk:?}: got {got}"
                            ));
                        }
                        cases += 1;
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{cases} cases exact in {elapsed:.2?}"))
}

fn end_to_end_round_trips() -> Outcome {
    let started = Instant::now();
    let mut rng = rng(2);
    let mut done = 0;
    let mut refused = 0;
    let mut attempts = 0;
    while done < 200 {
        attempts += 1;
        ensure(attempts < 2000, || format!("only {done} accepted after {attempts} images"))?;
        let block = [3, 4, 5][done % 3];
        let (w, h) = (rng.gen_range(9..=128), rng.gen_range(9..=128));
        let img = synthetic_image(&mut rng, w, h);
        let layout = build_layout(w, h, block, block).map_err(|e| e.to_string())?;
        let with_ks = rng.gen();
        let keys = random_keys(&mut rng, with_ks);
        let (encrypted, profile) =
            encrypt_image(&img, &layout, keys.kc.as_ref().unwrap()).map_err(|e| e.to_string())?;
        let len = rng.gen_range(0..=profile.net_payload_bits as usize);
        let payload = random_bits(&mut rng, len);
        let marked = match embed_all(&encrypted, &profile, &payload, &keys) {
            Ok(m) => m,
            Err(e) if is_refusal(&e) => {
                refused += 1;
                continue;
            }
            Err(e) => return Err(format!("{w}x{h}/{block}: {e}")),
        };
        let recovered = recover_image(&marked, &layout, &keys).map_err(|e| e.to_string())?;
        let extracted = extract_payload(&marked, &layout, &keys).map_err(|e| e.to_string())?;
        ensure(psnr(&recovered, &img).unwrap().is_infinite() && recovered == img, || {
            format!("{w}x{h}/{block}: image not recovered")
        })?;
        ensure(extracted == payload, || format!("{w}x{h}/{block}: payload differs"))?;
        done += 1;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{done} images bit-exact ({refused} refused by capacity checks) in {elapsed:.2?}"
    ))
}

/// Pixel and bit shift carrying bit `offset` of the embedded stream.
fn locate_stream_bit(layout: &BlockLayout, profile: &CapacityProfile, offset: u64) -> (usize, u8) {
    let cursor = EmbedCursor::new(profile.start_block, layout.block_count);
    let mut at = 0u64;
    for (px, bcf) in cursor.carriers(layout, &profile.bcfs) {
        let n = bcf.get() as u64;
        if offset < at + n {
            return (px, (7 - (offset - at)) as u8);
        }
        at += n;
    }
    panic!("offset {offset} beyond carried bits");
}

fn separability() -> Outcome {
    let mut rng = rng(3);
    let mut done = 0;
    while done < 50 {
        let block = [3, 4, 5][done % 3];
        let (w, h) = (rng.gen_range(16..=96), rng.gen_range(16..=96));
        let img = smooth_image(&mut rng, w, h);
        let layout = build_layout(w, h, block, block).map_err(|e| e.to_string())?;
        let with_ks = rng.gen();
        let keys = random_keys(&mut rng, with_ks);
        let (encrypted, profile) =
            encrypt_image(&img, &layout, keys.kc.as_ref().unwrap()).map_err(|e| e.to_string())?;
        let len = rng.gen_range(1..=profile.net_payload_bits.max(1) as usize);
        let payload = random_bits(&mut rng, len);
        let Ok(mut marked) = embed_all(&encrypted, &profile, &payload, &keys) else {
            continue;
        };

        let owner = KeyMaterial::new(keys.kc, None, keys.ks);
        let hider = KeyMaterial::new(None, keys.kd, keys.ks);
        ensure(recover_image(&marked, &layout, &owner).as_ref() == Ok(&img), || {
            "recovery without the data hider key failed".into()
        })?;
        ensure(extract_payload(&marked, &layout, &hider).as_ref() == Ok(&payload), || {
            "extraction without the content owner key failed".into()
        })?;

        let bit = rng.gen_range(0..len);
        let (px, shift) = locate_stream_bit(&layout, &profile, profile.aux_bits + 32 + bit as u64);
        marked.pixels_mut()[px] ^= 1 << shift;
        let mut expected = payload.clone();
        expected.flip(bit);
        ensure(extract_payload(&marked, &layout, &hider).as_ref() == Ok(&expected), || {
            format!("flipping payload bit {bit} did not flip exactly that bit")
        })?;
        ensure(recover_image(&marked, &layout, &owner).as_ref() == Ok(&img), || {
            format!("flipping payload bit {bit} disturbed recovery")
        })?;
        done += 1;
    }
    Ok(format!("{done} instances separable, payload flips isolated"))
}

fn check_accounting(img: &GrayImage, block: usize, kc: &Key) -> std::result::Result<(), String> {
    let layout = build_layout(img.width(), img.height(), block, block).map_err(|e| e.to_string())?;
    let (_, profile) = encrypt_image(img, &layout, kc).map_err(|e| e.to_string())?;
    let brute = brute_force_block_capacities(img, block, block);
    let total: u64 = brute.iter().map(|&(c, _)| c).sum();
    ensure(profile.total_capacity == total, || {
        format!("total {} vs brute force {total}", profile.total_capacity)
    })?;

    let perm = keyed_block_permutation(kc, &layout);
    let permuted = apply_permutation(img, &layout, &perm).map_err(|e| e.to_string())?;
    let n0 = brute_force_block_capacities(&permuted, block, block)[0].1 as u64;
    let nb = brute.len() as u64;
    let overhead = 3 * n0 + (24 + 3 * (nb - 1)) + 32;
    ensure(profile.net_payload_bits == total.saturating_sub(overhead), || {
        format!("net {} vs {total} - {overhead}", profile.net_payload_bits)
    })?;
    ensure(overhead - 3 * nb <= 77, || format!("overhead {overhead} vs 3*N_b {}", 3 * nb))?;
    Ok(())
}

fn capacity_accounting() -> Outcome {
    let mut rng = rng(4);
    let mut checked = 0;
    for i in 0..120 {
        let (w, h) = (rng.gen_range(9..=128), rng.gen_range(9..=128));
        let img = if i % 2 == 0 {
            synthetic_image(&mut rng, w, h)
        } else {
            smooth_image(&mut rng, w, h)
        };
        let kc = random_key(&mut rng);
        for block in [3, 4, 5] {
            check_accounting(&img, block, &kc)?;
            checked += 1;
        }
    }
    let big = synthetic_image(&mut rng, 512, 512);
    let layout = build_layout(512, 512, 3, 3).unwrap();
    ensure(3 * layout.block_count == 87723, || "3x3 block count".into())?;
    check_accounting(&big, 3, &random_key(&mut rng))?;
    Ok(format!("{} profiles match the brute-force recount", checked + 1))
}

fn table_image(dir: &Path, name: &str) -> Option<GrayImage> {
    let bytes = std::fs::read(dir.join(name)).ok()?;
    read_pgm(&bytes).ok()
}

fn published_capacities() -> Outcome {
    let dir = std::env::var_os("RDHEI_TABLE_IMAGES").map(PathBuf::from);
    let images = dir.as_ref().and_then(|d| {
        Some((
            table_image(d, "lena.pgm")?,
            table_image(d, "baboon.pgm")?,
            table_image(d, "splash.pgm")?,
        ))
    });
    let Some((lena, baboon, splash)) = images else {
        capacity_accounting()?;
        return Ok("reference images absent; replaced by the brute-force accounting oracle".into());
    };
    let kc = Key::new([0; 16]);
    let profile = |img: &GrayImage, block: usize| -> std::result::Result<CapacityProfile, String> {
        ensure(img.dimensions() == (512, 512), || "reference images must be 512x512".into())?;
        let layout = build_layout(512, 512, block, block).map_err(|e| e.to_string())?;
        analyze(img, &layout, Some(&kc)).map_err(|e| e.to_string())
    };
    let lena3 = profile(&lena, 3)?;
    let lena4 = profile(&lena, 4)?;
    let baboon3 = profile(&baboon, 3)?;
    let splash3 = profile(&splash, 3)?;
    let rel = |got: u64, want: f64| (got as f64 - want).abs() / want;
    ensure(rel(lena3.total_capacity, 743448.0) <= 0.02, || {
        format!("Lena 3x3 total {}", lena3.total_capacity)
    })?;
    ensure((lena3.bpp - 2.50).abs() <= 0.05, || format!("Lena 3x3 bpp {:.3}", lena3.bpp))?;
    ensure((baboon3.bpp - 1.04).abs() <= 0.05, || format!("Baboon 3x3 bpp {:.3}", baboon3.bpp))?;
    ensure(rel(lena4.total_capacity, 686295.0) <= 0.02, || {
        format!("Lena 4x4 total {}", lena4.total_capacity)
    })?;
    ensure(splash3.bpp > lena3.bpp && lena3.bpp > baboon3.bpp, || {
        format!("ordering Splash {:.3} Lena {:.3} Baboon {:.3}", splash3.bpp, lena3.bpp, baboon3.bpp)
    })?;
    Ok(format!(
        "Lena 3x3 {} bits / {:.3} bpp, Lena 4x4 {} bits, Baboon {:.3} bpp, Splash {:.3} bpp",
        lena3.total_capacity, lena3.bpp, lena4.total_capacity, baboon3.bpp, splash3.bpp
    ))
}

fn failure_modes() -> Outcome {
    let mut rng = rng(6);
    let noise = GrayImage::from_fn(64, 64, |_, _| rng.gen()).unwrap();
    let layout = build_layout(64, 64, 3, 3).unwrap();
    let keys = random_keys(&mut rng, false);
    let (encrypted, profile) = encrypt_image(&noise, &layout, keys.kc.as_ref().unwrap()).unwrap();
    let noise_outcome = match embed_all(&encrypted, &profile, &random_bits(&mut rng, 64), &keys) {
        Err(e @ Error::InsufficientCapacity { .. }) => format!("noise refused ({e})"),
        Err(e) if is_refusal(&e) => format!("noise refused ({e})"),
        Ok(_) if profile.bpp < 0.05 => format!("noise embeds {:.4} bpp", profile.bpp),
        other => return Err(format!("noise image: {other:?}")),
    };

    // start block carries 32 bits, the next two blocks carry nothing, so the
    // code for the fourth block is due before 33 bits have been read
    let img = GrayImage::from_fn(21, 3, |r, c| {
        if (3..6).contains(&c) || c >= 12 {
            100 + 2 * ((r + c) % 4) as u8
        } else if (r + c) % 2 == 0 {
            0
        } else {
            255
        }
    })
    .unwrap();
    let layout = build_layout(21, 3, 3, 3).unwrap();
    let profile = profile_image(&img, &layout, &Permutation::identity(7)).unwrap();
    ensure(profile.start_block == 1 && profile.total_capacity == 128, || {
        format!("constructed profile: start {} total {}", profile.start_block, profile.total_capacity)
    })?;
    let kc = Key::new([9; 16]);
    let encrypted = xor_cipher_image(&img, &kc);
    let keys = KeyMaterial::new(Some(kc), Some(Key::new([8; 16])), None);
    match embed_all(&encrypted, &profile, &BitString::new(), &keys) {
        Err(Error::AuxDeadlock { position: 3, .. }) => {}
        other => return Err(format!("constructed deadlock: {other:?}")),
    }

    // sparse-capacity images: whatever embed accepts, bootstrap decodes
    let mut accepted = 0;
    let mut refused = 0;
    for _ in 0..300 {
        let (w, h) = (rng.gen_range(9..=48), rng.gen_range(9..=48));
        let img = GrayImage::from_fn(w, h, |r, c| {
            if (r / 4 + c / 5) % 3 == 0 {
                90 + rng.gen_range(0..=6)
            } else {
                rng.gen()
            }
        })
        .unwrap();
        let block = rng.gen_range(3..=5);
        let layout = build_layout(w, h, block, block).unwrap();
        let with_ks = rng.gen();
        let keys = random_keys(&mut rng, with_ks);
        let (encrypted, profile) = encrypt_image(&img, &layout, keys.kc.as_ref().unwrap()).unwrap();
        match embed_all(&encrypted, &profile, &BitString::new(), &keys) {
            Ok(marked) => {
                let boot = bootstrap(&marked, &layout, &keys).map_err(|e| format!("accepted image stalled: {e}"))?;
                ensure(boot.bcfs == profile.bcfs, || "bootstrap disagrees with profile".into())?;
                ensure(recover_image(&marked, &layout, &keys).as_ref() == Ok(&img), || "recovery failed".into())?;
                accepted += 1;
            }
            Err(e) if is_refusal(&e) => refused += 1,
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(format!(
        "{noise_outcome}; constructed deadlock refused; sparse images {accepted} decoded, {refused} refused"
    ))
}

fn encryption_sanity() -> Outcome {
    let mut rng = rng(7);
    let mut lines = Vec::new();
    for (w, h) in [(128, 128), (512, 512)] {
        let img = smooth_image(&mut rng, w, h);
        let layout = build_layout(w, h, 3, 3).unwrap();
        let (encrypted, _) = encrypt_image(&img, &layout, &Key::new([0x5c; 16])).unwrap();
        let chi = chi_square_uniform(encrypted.pixels());
        let entropy = shannon_entropy(encrypted.pixels());
        // 99th percentile of chi-square with 255 degrees of freedom
        ensure(chi < 310.457, || format!("{w}x{h} chi-square {chi:.1}"))?;
        ensure(entropy > 7.9, || format!("{w}x{h} entropy {entropy:.4}"))?;
        lines.push(format!("{w}x{h}: chi2 {chi:.1}, H {entropy:.4}"));
    }
    Ok(lines.join("; "))
}

const GOLDEN_KC: &str = "000102030405060708090a0b0c0d0e0f";
const GOLDEN_KD: &str = "101112131415161718191a1b1c1d1e1f";
const GOLDEN_KS: &str = "202122232425262728292a2b2c2d2e2f";
const GOLDEN_PAYLOAD: &[u8] = b"rdhei golden vector";

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden")
}

fn golden_image() -> GrayImage {
    GrayImage::from_fn(16, 16, |r, c| (96 + 3 * r + 2 * c + (r * c) % 3) as u8).unwrap()
}

fn golden_vector() -> Outcome {
    let dir = golden_dir();
    let keys = KeyMaterial::new(
        Some(Key::from_hex(GOLDEN_KC).unwrap()),
        Some(Key::from_hex(GOLDEN_KD).unwrap()),
        Some(Key::from_hex(GOLDEN_KS).unwrap()),
    );
    let layout = build_layout(16, 16, 3, 3).unwrap();
    let payload = BitString::from_bytes(GOLDEN_PAYLOAD);
    if std::env::var_os("RDHEI_BLESS").is_some() {
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        let marked = encode(&golden_image(), &layout, &keys, &payload).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("cover.pgm"), write_pgm(&golden_image())).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("payload.bin"), GOLDEN_PAYLOAD).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("marked.pgm"), write_pgm(&marked)).map_err(|e| e.to_string())?;
    }
    let read = |name: &str| std::fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"));
    let cover = read_pgm(&read("cover.pgm")?).map_err(|e| e.to_string())?;
    ensure(cover == golden_image(), || "committed cover differs from generator".into())?;
    ensure(read("payload.bin")? == GOLDEN_PAYLOAD, || "committed payload differs".into())?;
    let expected = read("marked.pgm")?;
    let marked = encode(&cover, &layout, &keys, &payload).map_err(|e| e.to_string())?;
    ensure(write_pgm(&marked) == expected, || "marked image is not byte-identical to the golden file".into())?;
    let reloaded = read_pgm(&expected).unwrap().with_role(Role::Marked);
    ensure(extract_payload(&reloaded, &layout, &keys).as_ref() == Ok(&payload), || "golden payload".into())?;
    ensure(recover_image(&reloaded, &layout, &keys).as_ref() == Ok(&cover), || "golden recovery".into())?;
    Ok(format!("marked.pgm byte-identical ({} bytes)", expected.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 exhaustive pixel recovery", exhaustive_pixel_oracle),
        ("2 end-to-end round trip", end_to_end_round_trips),
        ("3 separability", separability),
        ("4 capacity accounting", capacity_accounting),
        ("5 published capacities", published_capacities),
        ("6 failure modes", failure_modes),
        ("7 encryption sanity", encryption_sanity),
        ("8 golden vector", golden_vector),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
