use thiserror::Error;

use crate::image::Role;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while reading, embedding into, or decoding
/// an image.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    #[error("unsupported PGM maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),

    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    TruncatedData { expected: usize, found: usize },

    #[error("invalid image dimensions {width}x{height} for {len} pixels")]
    InvalidDimensions {
        width: usize,
        height: usize,
        len: usize,
    },

    #[error("image dimensions differ: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("expected a {expected:?} image, got {found:?}")]
    RoleMismatch { expected: Role, found: Role },

    #[error("image {width}x{height} is too small for {block_width}x{block_height} blocks")]
    ImageTooSmall {
        width: usize,
        height: usize,
        block_width: usize,
        block_height: usize,
    },

    #[error("block size {0}x{1} leaves fewer than three followers for the header")]
    BlockTooSmall(usize, usize),

    #[error("block index {index} out of range for {count} blocks")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),

    #[error("permutation maps block {from} onto block {to} of a different shape")]
    ShapeClassMismatch { from: usize, to: usize },

    #[error("illegal block capacity feature {0}")]
    IllegalBcf(u8),

    #[error("start block {0} does not fit the 21-bit header field")]
    BlockIndexOverflow(usize),

    #[error("expected {expected} bits, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("chunk of {found} bits does not match capacity {expected}")]
    ChunkLengthMismatch { expected: usize, found: usize },

    #[error("insufficient capacity: need {needed} bits, have {available} (short by {})", needed - available)]
    InsufficientCapacity { needed: u64, available: u64 },

    #[error("start block carries {capacity} bits, at least 27 are needed to bootstrap")]
    BootstrapUnderflow { capacity: u64 },

    #[error("auxiliary stream deadlock at cyclic position {position}: {embedded} bits precede it, {required} required")]
    AuxDeadlock {
        position: usize,
        embedded: u64,
        required: u64,
    },

    #[error("auxiliary stream stalled at cyclic position {position}: block feature not yet available")]
    AuxStreamStall { position: usize },

    #[error("header start block {start} out of range for {count} blocks")]
    HeaderOutOfRange { start: usize, count: usize },

    #[error("declared payload length {declared} exceeds remaining capacity {available}")]
    LengthFieldOverflow { declared: u64, available: u64 },

    #[error("payload of {0} bits does not fit the 32-bit length field")]
    PayloadTooLong(usize),

    #[error("invalid key: {0}")]
    InvalidKey(String),

    #[error("missing {0} key")]
    MissingKey(&'static str),
}
