use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rdhei_core::{
    build_layout, encode, extract_payload, psnr, read_pgm, recover_image, BitString, BlockLayout, Error,
    GrayImage, Key, KeyMaterial, Role,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "rdhei", version, about = "Reversible data hiding in encrypted grayscale images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report the embedding capacity of a plain image as JSON
    Analyze {
        image: PathBuf,
        #[command(flatten)]
        block: BlockArg,
        /// Content owner key; without it the blocks are profiled unshuffled
        #[arg(long)]
        kc: Option<Key>,
    },
    /// Encrypt a plain image and embed a payload file into it
    Embed {
        image: PathBuf,
        #[command(flatten)]
        block: BlockArg,
        #[arg(long)]
        kc: Key,
        #[arg(long)]
        kd: Key,
        #[arg(long)]
        ks: Option<Key>,
        #[arg(long)]
        payload: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the payload from a marked image
    Extract {
        image: PathBuf,
        #[command(flatten)]
        block: BlockArg,
        #[arg(long)]
        kd: Key,
        #[arg(long)]
        ks: Option<Key>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Restore the original image from a marked image
    Recover {
        image: PathBuf,
        #[command(flatten)]
        block: BlockArg,
        #[arg(long)]
        kc: Key,
        #[arg(long)]
        ks: Option<Key>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the PSNR in dB between two images
    Psnr { first: PathBuf, second: PathBuf },
}

#[derive(Args)]
struct BlockArg {
    /// Block size as WxH
    #[arg(long = "block-size", default_value = "3x3")]
    block_size: BlockSize,
}

#[derive(Clone, Copy, Debug)]
struct BlockSize {
    width: usize,
    height: usize,
}

impl FromStr for BlockSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad block dimension {v:?}: {e}"));
        Ok(BlockSize { width: parse(w)?, height: parse(h)? })
    }
}

#[derive(Serialize)]
struct Report {
    schema: u32,
    block_size: String,
    #[serde(rename = "N_b")]
    n_b: usize,
    total_capacity_bits: u64,
    aux_bits: u64,
    net_payload_bits: u64,
    bpp: f64,
    bcf_histogram: [usize; 9],
    shuffled: bool,
}

fn load(path: &Path, role: Role) -> anyhow::Result<GrayImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let img = read_pgm(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    Ok(img.with_role(role))
}

fn layout_for(img: &GrayImage, block: &BlockArg) -> anyhow::Result<BlockLayout> {
    let BlockSize { width, height } = block.block_size;
    Ok(build_layout(img.width(), img.height(), width, height)?)
}

fn write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Analyze { image, block, kc } => {
            let img = load(&image, Role::Plain)?;
            let layout = layout_for(&img, &block)?;
            let profile = rdhei_core::analyze(&img, &layout, kc.as_ref())?;
            let report = Report {
                schema: 1,
                block_size: format!("{}x{}", layout.block_width, layout.block_height),
                n_b: layout.block_count,
                total_capacity_bits: profile.total_capacity,
                aux_bits: profile.aux_bits,
                net_payload_bits: profile.net_payload_bits,
                bpp: profile.bpp,
                bcf_histogram: profile.bcf_histogram(),
                shuffled: kc.is_some(),
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Embed { image, block, kc, kd, ks, payload, out } => {
            let img = load(&image, Role::Plain)?;
            let layout = layout_for(&img, &block)?;
            let data = fs::read(&payload).with_context(|| format!("reading {}", payload.display()))?;
            let bits = BitString::from_bytes(&data);
            let marked = encode(&img, &layout, &KeyMaterial::new(Some(kc), Some(kd), ks), &bits)?;
            write(&out, &rdhei_core::write_pgm(&marked))?;
            println!("embedded {} payload bits", bits.len());
        }
        Command::Extract { image, block, kd, ks, out } => {
            let img = load(&image, Role::Marked)?;
            let layout = layout_for(&img, &block)?;
            let bits = extract_payload(&img, &layout, &KeyMaterial::new(None, Some(kd), ks))
                .context("extraction failed; check --kd, --ks and --block-size")?;
            if bits.len() % 8 != 0 {
                bail!("extracted {} bits, not a whole number of bytes; check the keys", bits.len());
            }
            write(&out, bits.as_bytes())?;
        }
        Command::Recover { image, block, kc, ks, out } => {
            let img = load(&image, Role::Marked)?;
            let layout = layout_for(&img, &block)?;
            let plain = recover_image(&img, &layout, &KeyMaterial::new(Some(kc), None, ks))?;
            write(&out, &rdhei_core::write_pgm(&plain))?;
        }
        Command::Psnr { first, second } => {
            let value = psnr(&load(&first, Role::Plain)?, &load(&second, Role::Plain)?)?;
            if value.is_infinite() {
                println!("inf");
            } else {
                println!("{value:.4}");
            }
        }
    }
    Ok(())
}

fn is_capacity_error(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<Error>(),
            Some(Error::InsufficientCapacity { .. } | Error::BootstrapUnderflow { .. } | Error::AuxDeadlock { .. })
        )
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_capacity_error(&e) { 2 } else { 1 })
        }
    }
}
