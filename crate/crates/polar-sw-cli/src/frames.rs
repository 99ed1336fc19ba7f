//! Container format for compressed block streams.
//!
//! Layout, all integers big-endian:
//!
//! ```text
//! offset 0   magic "PSW1"
//! offset 4   mode byte: 1 single, 2 asym, 3 nonasym-x, 4 nonasym-y
//! offset 5   spec digest, u64
//! offset 13  split point k1, u32 (0 outside the nonasymmetric modes)
//! offset 17  block count, u32
//! offset 21  blocks
//! ```
//!
//! Each block is its message bits (systematic share first, then the
//! syndrome) packed MSB-first and zero-padded to a whole number of bytes,
//! so blocks start on byte boundaries. Values of pad bits are ignored on
//! read; content corruption is caught downstream by the decoder checksum.

use anyhow::{bail, ensure, Context, Result};
use polar_sw::bits::BitVector;

pub const MAGIC: [u8; 4] = *b"PSW1";
const HEADER_LEN: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameMode {
    Single,
    Asym,
    NonasymX,
    NonasymY,
}

impl FrameMode {
    pub fn byte(self) -> u8 {
        match self {
            FrameMode::Single => 1,
            FrameMode::Asym => 2,
            FrameMode::NonasymX => 3,
            FrameMode::NonasymY => 4,
        }
    }

    pub fn from_byte(byte: u8) -> Result<Self> {
        Ok(match byte {
            1 => FrameMode::Single,
            2 => FrameMode::Asym,
            3 => FrameMode::NonasymX,
            4 => FrameMode::NonasymY,
            other => bail!("unknown mode byte {other} in compressed file"),
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            FrameMode::Single => "single",
            FrameMode::Asym => "asym",
            FrameMode::NonasymX => "nonasym-x",
            FrameMode::NonasymY => "nonasym-y",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameHeader {
    pub mode: FrameMode,
    pub spec_digest: u64,
    pub k1: u32,
    pub block_count: u32,
}

pub fn encode_file(
    mode: FrameMode,
    spec_digest: u64,
    k1: u32,
    blocks: &[BitVector],
) -> Result<Vec<u8>> {
    ensure!(!blocks.is_empty(), "refusing to write an empty stream");
    let block_count =
        u32::try_from(blocks.len()).context("block count exceeds the header field")?;
    let bits_per_block = blocks[0].len();
    ensure!(
        blocks.iter().all(|b| b.len() == bits_per_block),
        "blocks have inconsistent lengths"
    );
    let mut out = Vec::with_capacity(HEADER_LEN + blocks.len() * bits_per_block.div_ceil(8));
    out.extend_from_slice(&MAGIC);
    out.push(mode.byte());
    out.extend_from_slice(&spec_digest.to_be_bytes());
    out.extend_from_slice(&k1.to_be_bytes());
    out.extend_from_slice(&block_count.to_be_bytes());
    for block in blocks {
        out.extend_from_slice(&block.pack_bytes());
    }
    Ok(out)
}

/// Parses a stream produced by [`encode_file`]. The per-block bit width
/// depends on the spec and the header's mode and split, so the caller
/// supplies it through `bits_per_block` after inspecting the header.
pub fn decode_file(
    bytes: &[u8],
    bits_per_block: impl FnOnce(&FrameHeader) -> Result<usize>,
) -> Result<(FrameHeader, Vec<BitVector>)> {
    ensure!(
        bytes.len() >= HEADER_LEN,
        "file too short to hold a header ({} bytes)",
        bytes.len()
    );
    ensure!(bytes[..4] == MAGIC, "bad magic; not a compressed stream");
    let header = FrameHeader {
        mode: FrameMode::from_byte(bytes[4])?,
        spec_digest: u64::from_be_bytes(bytes[5..13].try_into().expect("sized slice")),
        k1: u32::from_be_bytes(bytes[13..17].try_into().expect("sized slice")),
        block_count: u32::from_be_bytes(bytes[17..21].try_into().expect("sized slice")),
    };
    let width = bits_per_block(&header)?;
    ensure!(width > 0, "blocks cannot be empty");
    let block_bytes = width.div_ceil(8);
    let body = &bytes[HEADER_LEN..];
    let expected = header.block_count as usize * block_bytes;
    ensure!(
        body.len() == expected,
        "body is {} bytes but the header promises {} blocks of {} bytes",
        body.len(),
        header.block_count,
        block_bytes
    );
    let blocks = body
        .chunks_exact(block_bytes)
        .map(|chunk| BitVector::unpack_bytes(chunk, width))
        .collect::<Result<_, _>>()?;
    Ok((header, blocks))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_blocks() -> Vec<BitVector> {
        vec![
            BitVector::new(vec![1, 0, 1, 1, 0, 0, 1, 0, 1, 1]).unwrap(),
            BitVector::new(vec![0, 1, 0, 0, 1, 1, 0, 1, 0, 0]).unwrap(),
        ]
    }

    #[test]
    fn round_trip() {
        let blocks = sample_blocks();
        let bytes = encode_file(FrameMode::NonasymX, 0xDEAD_BEEF, 7, &blocks).unwrap();
        let (header, decoded) = decode_file(&bytes, |h| {
            assert_eq!(h.mode, FrameMode::NonasymX);
            Ok(10)
        })
        .unwrap();
        assert_eq!(header.spec_digest, 0xDEAD_BEEF);
        assert_eq!(header.k1, 7);
        assert_eq!(header.block_count, 2);
        assert_eq!(decoded, blocks);
    }

    #[test]
    fn rejects_bad_magic() {
        let mut bytes = encode_file(FrameMode::Single, 1, 0, &sample_blocks()).unwrap();
        bytes[0] = b'Q';
        assert!(decode_file(&bytes, |_| Ok(10)).is_err());
    }

    #[test]
    fn rejects_unknown_mode_byte() {
        let mut bytes = encode_file(FrameMode::Single, 1, 0, &sample_blocks()).unwrap();
        bytes[4] = 9;
        assert!(decode_file(&bytes, |_| Ok(10)).is_err());
    }

    #[test]
    fn rejects_wrong_body_length() {
        let bytes = encode_file(FrameMode::Single, 1, 0, &sample_blocks()).unwrap();
        assert!(decode_file(&bytes[..bytes.len() - 1], |_| Ok(10)).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_file(&extra, |_| Ok(10)).is_err());
        assert!(decode_file(&bytes, |_| Ok(20)).is_err());
    }

    #[test]
    fn rejects_empty_or_ragged_input() {
        assert!(encode_file(FrameMode::Single, 1, 0, &[]).is_err());
        let ragged = vec![BitVector::zeros(10), BitVector::zeros(12)];
        assert!(encode_file(FrameMode::Single, 1, 0, &ragged).is_err());
        assert!(decode_file(&[0u8; 4], |_| Ok(10)).is_err());
    }

    #[test]
    fn pad_bits_are_ignored() {
        let blocks = sample_blocks();
        let mut bytes = encode_file(FrameMode::Asym, 2, 0, &blocks).unwrap();
        let last = bytes.len() - 1;
        bytes[last] |= 0b0001_1111;
        let (_, decoded) = decode_file(&bytes, |_| Ok(10)).unwrap();
        assert_eq!(decoded, blocks);
    }
}
