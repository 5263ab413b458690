//! Block grid, leader/follower addressing and block permutations.
//!
//! An image is tiled row-major by `block_width x block_height` blocks; the
//! last column and row of blocks are truncated at the image border. Every
//! block has one leader at block-local `(h / 2, w / 2)` and all remaining
//! pixels are followers, enumerated row-major.
//!
//! Permutations move whole blocks between grid slots. A block may only move
//! to a slot of the same shape, so the set of slots sharing a shape (a
//! *shape class*) is permuted independently of the others.

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Tiling of an image into (possibly truncated) rectangular blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    pub image_width: usize,
    pub image_height: usize,
    pub block_width: usize,
    pub block_height: usize,
    pub blocks_per_row: usize,
    pub blocks_per_col: usize,
    pub block_count: usize,
}

/// Height and width of a block.
pub type Shape = (usize, usize);

/// Placement of one block inside the image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockRef {
    pub block_index: usize,
    /// Raster `(row, col)` addresses, row-major within the block.
    pub pixel_addrs: Vec<(usize, usize)>,
    pub leader_ordinal: usize,
}

impl BlockRef {
    pub fn leader(&self) -> (usize, usize) {
        self.pixel_addrs[self.leader_ordinal]
    }

    pub fn followers(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pixel_addrs
            .iter()
            .enumerate()
            .filter(move |&(i, _)| i != self.leader_ordinal)
            .map(|(_, &addr)| addr)
    }

    pub fn follower_count(&self) -> usize {
        self.pixel_addrs.len() - 1
    }
}

pub fn build_layout(
    image_width: usize,
    image_height: usize,
    block_width: usize,
    block_height: usize,
) -> Result<BlockLayout> {
    let too_small = Error::ImageTooSmall {
        width: image_width,
        height: image_height,
        block_width,
        block_height,
    };
    if block_width == 0 || block_height == 0 {
        return Err(too_small);
    }
    if block_width * block_height < 4 {
        return Err(Error::BlockTooSmall(block_width, block_height));
    }
    if image_width < block_width || image_height < block_height {
        return Err(too_small);
    }
    let blocks_per_row = image_width.div_ceil(block_width);
    let blocks_per_col = image_height.div_ceil(block_height);
    let block_count = blocks_per_row * blocks_per_col;
    if block_count < 2 {
        return Err(too_small);
    }
    Ok(BlockLayout {
        image_width,
        image_height,
        block_width,
        block_height,
        blocks_per_row,
        blocks_per_col,
        block_count,
    })
}

impl BlockLayout {
    /// Layout for `img`, checked against its dimensions.
    pub fn for_image(img: &GrayImage, block_width: usize, block_height: usize) -> Result<Self> {
        build_layout(img.width(), img.height(), block_width, block_height)
    }

    pub fn pixel_count(&self) -> usize {
        self.image_width * self.image_height
    }

    pub(crate) fn check_image(&self, img: &GrayImage) -> Result<()> {
        if img.dimensions() != (self.image_width, self.image_height) {
            return Err(Error::DimensionMismatch {
                left: img.dimensions(),
                right: (self.image_width, self.image_height),
            });
        }
        Ok(())
    }

    fn check_slot(&self, slot: usize) -> Result<()> {
        if slot >= self.block_count {
            return Err(Error::IndexOutOfRange {
                index: slot,
                count: self.block_count,
            });
        }
        Ok(())
    }

    /// Top-left corner and shape of grid slot `slot`.
    pub fn slot_rect(&self, slot: usize) -> (usize, usize, Shape) {
        let row0 = (slot / self.blocks_per_row) * self.block_height;
        let col0 = (slot % self.blocks_per_row) * self.block_width;
        let h = self.block_height.min(self.image_height - row0);
        let w = self.block_width.min(self.image_width - col0);
        (row0, col0, (h, w))
    }

    pub fn shape(&self, slot: usize) -> Shape {
        self.slot_rect(slot).2
    }

    pub fn follower_count(&self, slot: usize) -> usize {
        let (h, w) = self.shape(slot);
        h * w - 1
    }

    /// Block occupying grid slot `slot`.
    pub fn slot(&self, slot: usize) -> Result<BlockRef> {
        self.check_slot(slot)?;
        let (row0, col0, (h, w)) = self.slot_rect(slot);
        let pixel_addrs = (0..h)
            .flat_map(|r| (0..w).map(move |c| (row0 + r, col0 + c)))
            .collect();
        Ok(BlockRef {
            block_index: slot,
            pixel_addrs,
            leader_ordinal: (h / 2) * w + w / 2,
        })
    }

    /// Slots grouped by shape, classes ordered by first appearance in grid
    /// order and slots ascending within each class.
    pub fn shape_classes(&self) -> Vec<(Shape, Vec<usize>)> {
        let mut classes: Vec<(Shape, Vec<usize>)> = Vec::new();
        for slot in 0..self.block_count {
            let shape = self.shape(slot);
            match classes.iter_mut().find(|(s, _)| *s == shape) {
                Some((_, slots)) => slots.push(slot),
                None => classes.push((shape, vec![slot])),
            }
        }
        classes
    }
}

/// Bijection on block slots: the block at grid slot `g` moves to slot
/// `forward[g]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            forward: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    pub fn from_forward(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (from, &to) in forward.iter().enumerate() {
            if to >= n || inverse[to] != usize::MAX {
                return Err(Error::NotAPermutation(n));
            }
            inverse[to] = from;
        }
        Ok(Self { forward, inverse })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn apply(&self, slot: usize) -> usize {
        self.forward[slot]
    }

    pub fn invert(&self, slot: usize) -> usize {
        self.inverse[slot]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.forward
    }

    pub(crate) fn check(&self, layout: &BlockLayout) -> Result<()> {
        if self.len() != layout.block_count {
            return Err(Error::NotAPermutation(layout.block_count));
        }
        for (from, &to) in self.forward.iter().enumerate() {
            if layout.shape(from) != layout.shape(to) {
                return Err(Error::ShapeClassMismatch { from, to });
            }
        }
        Ok(())
    }
}

/// Original block that lands on slot `permuted_index` under `perm`.
pub fn block_ref(layout: &BlockLayout, permuted_index: usize, perm: &Permutation) -> Result<BlockRef> {
    layout.check_slot(permuted_index)?;
    perm.check(layout)?;
    let mut block = layout.slot(perm.invert(permuted_index))?;
    block.block_index = permuted_index;
    Ok(block)
}

fn move_blocks(img: &GrayImage, layout: &BlockLayout, dest: impl Fn(usize) -> usize) -> GrayImage {
    let mut out = img.clone();
    let width = img.width();
    for from in 0..layout.block_count {
        let (r0, c0, (h, w)) = layout.slot_rect(from);
        let (r1, c1, _) = layout.slot_rect(dest(from));
        for r in 0..h {
            let src = (r0 + r) * width + c0;
            let dst = (r1 + r) * width + c1;
            out.pixels_mut()[dst..dst + w].copy_from_slice(&img.pixels()[src..src + w]);
        }
    }
    out
}

pub fn apply_permutation(img: &GrayImage, layout: &BlockLayout, perm: &Permutation) -> Result<GrayImage> {
    layout.check_image(img)?;
    perm.check(layout)?;
    Ok(move_blocks(img, layout, |g| perm.apply(g)))
}

pub fn invert_permutation(img: &GrayImage, layout: &BlockLayout, perm: &Permutation) -> Result<GrayImage> {
    layout.check_image(img)?;
    perm.check(layout)?;
    Ok(move_blocks(img, layout, |g| perm.invert(g)))
}
