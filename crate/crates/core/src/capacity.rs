//! Prediction errors, block capacity features and capacity accounting.

use crate::bits::HEADER_BITS;
use crate::block::{BlockLayout, BlockRef, Permutation};
use crate::error::{Error, Result};
use crate::image::{GrayImage, Role};

/// Bits of the payload length prefix.
pub const LENGTH_FIELD_BITS: u64 = 32;

/// Number of follower pixels in block 0 overwritten by the header.
pub const HEADER_PIXELS: usize = HEADER_BITS / 8;

/// Per-block capacity feature `n'`: how many MSBs of every follower may be
/// replaced. Always one of 0..=6 or 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bcf(u8);

impl Bcf {
    pub const ZERO: Bcf = Bcf(0);
    pub const EIGHT: Bcf = Bcf(8);

    pub fn new(n_prime: u8) -> Result<Self> {
        match n_prime {
            0..=6 | 8 => Ok(Bcf(n_prime)),
            other => Err(Error::IllegalBcf(other)),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Feature of a block whose largest absolute prediction error is
    /// `max_error`. Errors of 128 or more leave no room at all.
    pub fn from_max_error(max_error: u32) -> Self {
        // smallest n in 0..=7 with max_error < 2^n
        let n = match max_error {
            0 => 0,
            e if e >= 128 => 7,
            e => 32 - e.leading_zeros(),
        };
        if n == 0 {
            Bcf(8)
        } else {
            Bcf((7 - n) as u8)
        }
    }
}

impl TryFrom<u8> for Bcf {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        Bcf::new(value)
    }
}

impl From<Bcf> for u8 {
    fn from(b: Bcf) -> u8 {
        b.0
    }
}

/// Follower minus leader, in follower order.
pub fn block_prediction_errors(block: &BlockRef, img: &GrayImage) -> Vec<i16> {
    let (lr, lc) = block.leader();
    let leader = img.get(lr, lc) as i16;
    block
        .followers()
        .map(|(r, c)| img.get(r, c) as i16 - leader)
        .collect()
}

pub fn bcf_from_errors(errors: &[i16]) -> Bcf {
    let max_error = errors.iter().map(|e| e.unsigned_abs() as u32).max().unwrap_or(0);
    Bcf::from_max_error(max_error)
}

/// Capacity of every block of a permuted image plus the bookkeeping needed
/// to embed into it.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityProfile {
    pub layout: BlockLayout,
    /// Indexed by permuted block slot.
    pub bcfs: Vec<Bcf>,
    pub block_capacities: Vec<u64>,
    pub total_capacity: u64,
    /// Saved header pixels plus the feature codes of every block but the
    /// start block.
    pub aux_bits: u64,
    /// Capacity lost to the header pixels of block 0.
    pub header_cost_bits: u64,
    pub net_payload_bits: u64,
    pub bpp: f64,
    /// First block of the embedding order: the block carrying the most bits
    /// once block 0's header pixels are excluded, lowest index on ties.
    pub start_block: usize,
}

pub fn aux_stream_bits(block_count: usize) -> u64 {
    HEADER_BITS as u64 + 3 * (block_count as u64 - 1)
}

impl CapacityProfile {
    pub fn from_bcfs(layout: BlockLayout, bcfs: Vec<Bcf>) -> Self {
        assert_eq!(bcfs.len(), layout.block_count);
        let block_capacities: Vec<u64> = bcfs
            .iter()
            .enumerate()
            .map(|(slot, b)| b.get() as u64 * layout.follower_count(slot) as u64)
            .collect();
        let total_capacity: u64 = block_capacities.iter().sum();
        let aux_bits = aux_stream_bits(layout.block_count);
        let header_cost_bits = HEADER_PIXELS as u64 * bcfs[0].get() as u64;
        // rank by what a block can actually carry: block 0 loses its header pixels
        let carried = |slot: usize| {
            block_capacities[slot] - if slot == 0 { header_cost_bits } else { 0 }
        };
        let max = (0..bcfs.len()).map(carried).max().unwrap_or(0);
        let start_block = (0..bcfs.len()).position(|slot| carried(slot) == max).unwrap_or(0);
        let net_payload_bits =
            total_capacity.saturating_sub(header_cost_bits + aux_bits + LENGTH_FIELD_BITS);
        Self {
            layout,
            bpp: net_payload_bits as f64 / layout.pixel_count() as f64,
            bcfs,
            block_capacities,
            total_capacity,
            aux_bits,
            header_cost_bits,
            net_payload_bits,
            start_block,
        }
    }

    /// Capacity left after the header pixels are taken out of block 0.
    pub fn usable_bits(&self) -> u64 {
        self.total_capacity - self.header_cost_bits
    }

    /// Bits that a block carries once header pixels are excluded.
    pub fn carrier_capacity(&self, slot: usize) -> u64 {
        if slot == 0 {
            self.block_capacities[0] - self.header_cost_bits
        } else {
            self.block_capacities[slot]
        }
    }

    /// Everything embedded besides the payload itself, counting the header
    /// pixels' lost capacity.
    pub fn overhead_bits(&self) -> u64 {
        self.header_cost_bits + self.aux_bits + LENGTH_FIELD_BITS
    }

    /// Number of blocks per feature value, indexed by `n'` (0..=8).
    pub fn bcf_histogram(&self) -> [usize; 9] {
        let mut hist = [0; 9];
        for b in &self.bcfs {
            hist[b.get() as usize] += 1;
        }
        hist
    }
}

/// Analyses `img` as it will look after `perm` moves its blocks.
pub fn profile_image(img: &GrayImage, layout: &BlockLayout, perm: &Permutation) -> Result<CapacityProfile> {
    img.expect_role(Role::Plain)?;
    layout.check_image(img)?;
    perm.check(layout)?;
    let bcfs = (0..layout.block_count)
        .map(|k| {
            let block = layout.slot(perm.invert(k))?;
            Ok(bcf_from_errors(&block_prediction_errors(&block, img)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CapacityProfile::from_bcfs(*layout, bcfs))
}
