//! Polar-code toolkit for distributed compression of correlated binary
//! sources.
//!
//! Compression here is syndrome coding: a length-`N` source block is mapped
//! through the polar transform and only the frozen-position values are kept.
//! Decompression is coset decoding with a successive-cancellation list
//! decoder, optionally steered by side information from a correlated source.
//! On top of that sit three codecs — plain single-source compression, the
//! asymmetric Slepian–Wolf corner point, and a nonasymmetric scheme that
//! trades systematic bits between the two encoders to move along the dominant
//! face of the rate region — plus a Monte-Carlo harness that measures BER
//! against the source correlation.
//!
//! Module map:
//!
//! * [`bits`] — bit vectors and MSB-first byte packing,
//! * [`transform`] — the polar transform `G_N = B_N F^{⊗n}` and bit reversal,
//! * [`code`] — code specifications, syndromes, spec-file persistence,
//! * [`construct`] — frozen-set construction for BSC(p) by degrading-merge
//!   density evolution,
//! * [`crc`] — the strictly linear CRC-16 used for list selection,
//! * [`decode`] — successive-cancellation and SC-list coset decoders,
//! * [`systematic`] — systematic polar encoding (algebraic reference and a
//!   fast butterfly route),
//! * [`sw`] — the three source codecs,
//! * [`sim`] — reproducible Monte-Carlo sweeps and threshold search,
//! * [`gf2`] — small dense GF(2) linear algebra used by the algebraic
//!   systematic encoder and by tests.

pub mod bits;
pub mod code;
pub mod construct;
pub mod crc;
pub mod decode;
pub mod gf2;
pub mod sim;
pub mod sw;
pub mod systematic;
pub mod transform;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's preconditions
    /// (wrong length, out-of-range parameter, inconsistent dimensions).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A serialized artifact could not be parsed; `field` names the first
    /// offending field.
    #[error("parse error in field `{field}`: {reason}")]
    Parse { field: String, reason: String },
    /// Structurally well-formed input that violates a domain invariant.
    #[error("validation error: {0}")]
    Validation(String),
    /// Threshold search failed because every sweep point missed the target.
    #[error("threshold below grid: no sweep point reached the target BER")]
    ThresholdBelowGrid,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
