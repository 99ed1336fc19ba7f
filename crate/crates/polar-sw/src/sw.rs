//! Source codecs: single-source compression and the two Slepian–Wolf modes.
//!
//! All three codecs share one mechanism. A length-`N` frame is the payload
//! followed by an optional 16-bit checksum; the encoder transmits the
//! frame's frozen-set transform values (its syndrome). Because the
//! transform and the checksum are both linear, the syndromes of two frames
//! differ by the syndrome of their bitwise difference, so the decoder
//! always works on the *error* frame `e = x ⊕ y`: it list-decodes the coset
//! selected by the syndrome difference under log-likelihood ratios that say
//! "each payload bit of `e` is 1 with probability p", and lets the
//! checksum pick among the list.
//!
//! * **Single source** ([`compress_single`] / [`decompress_single`]):
//!   side information is the all-zero word, so the error frame is the
//!   source itself. Models a memoryless Bernoulli(p) source.
//! * **Asymmetric** ([`asym_encode`] / [`asym_decode`]): the decoder knows
//!   `y` exactly and recovers `x = e ⊕ y`. Rate `(N - K) / N` for `x`,
//!   nothing sent about `y`.
//! * **Nonasymmetric** ([`nonasym_encode_x`] / [`nonasym_encode_y`] /
//!   [`nonasym_decode`]): both sources are compressed. Each encoder sends
//!   its syndrome plus its frame's values on a share of the systematic
//!   position set `B`; the split point [`RateSplit`] moves rate between
//!   the two sources while the sum rate stays fixed. The decoder recovers
//!   the error frame once, patches the exchanged systematic values, and
//!   rebuilds both frames with the systematic encoder.

use crate::bits::BitVector;
use crate::code::{compute_syndrome, CodeSpec, Syndrome};
use crate::crc::{crc_append, xmodem16, CrcConfig, CRC_WIDTH};
use crate::decode::{init_llrs, scl_decode, LlrVector};
use crate::systematic::{systematic_encode_fast, SystematicSpec};
use crate::{invalid, Error, Result};

/// List size used by every codec decode. Chosen so that checksum-aided
/// selection, rather than list capacity, is the limiting factor at the
/// block lengths this crate targets.
pub const LIST_SIZE: usize = 32;

/// Recovered payload plus the checksum verdict of the selected path.
///
/// `crc_pass == false` flags a likely decoding failure; the payload is
/// still the decoder's best guess. Without a checksum in the spec the flag
/// is always `true`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedSource {
    pub payload: BitVector,
    pub crc_pass: bool,
}

fn codec_crc(spec: &CodeSpec) -> Result<Option<CrcConfig>> {
    match spec.l_crc() {
        0 => Ok(None),
        CRC_WIDTH => Ok(Some(xmodem16())),
        other => Err(Error::Validation(format!(
            "codecs support l_crc of 0 or {CRC_WIDTH}, got {other}"
        ))),
    }
}

fn frame_from_payload(payload: &BitVector, spec: &CodeSpec) -> Result<BitVector> {
    if payload.len() != spec.payload_len() {
        return Err(invalid(format!(
            "payload length {} does not match N - l_crc = {}",
            payload.len(),
            spec.payload_len()
        )));
    }
    Ok(match codec_crc(spec)? {
        Some(cfg) => crc_append(payload, &cfg),
        None => payload.clone(),
    })
}

fn payload_of(frame: &BitVector, spec: &CodeSpec) -> BitVector {
    BitVector::new(frame.as_slice()[..spec.payload_len()].to_vec())
        .expect("frame bits are 0/1")
}

/// LLRs for decoding an error frame: every payload position reports a
/// zero observation with crossover `p`, checksum positions are unknown.
fn error_llrs(spec: &CodeSpec, p: f64) -> Result<LlrVector> {
    init_llrs(&BitVector::zeros(spec.block_len()), p, spec.l_crc())
}

fn decode_error_frame(
    spec: &CodeSpec,
    error_syndrome: &Syndrome,
    p: f64,
) -> Result<(BitVector, bool)> {
    let crc = codec_crc(spec)?;
    let llrs = error_llrs(spec, p)?;
    let result = scl_decode(&llrs, spec, error_syndrome, LIST_SIZE, crc.as_ref())?;
    Ok((result.x_hat, result.crc_pass))
}

/// Compresses one block of a Bernoulli(p) source to its syndrome.
///
/// The output has `N - K` bits for `N - l_crc` payload bits.
///
/// # Errors
///
/// Rejects payloads of the wrong length and specs whose `l_crc` is neither
/// 0 nor 16.
pub fn compress_single(x: &BitVector, spec: &CodeSpec) -> Result<Syndrome> {
    asym_encode(x, spec)
}

/// Decompresses a [`compress_single`] block.
pub fn decompress_single(syndrome: &Syndrome, spec: &CodeSpec, p: f64) -> Result<DecodedSource> {
    asym_decode(syndrome, &BitVector::zeros(spec.payload_len()), spec, p)
}

/// Syndrome-former encoder for the asymmetric setting (and, with zero side
/// information, the single-source one): appends the checksum and keeps the
/// frozen-set transform values.
pub fn asym_encode(x: &BitVector, spec: &CodeSpec) -> Result<Syndrome> {
    let frame = frame_from_payload(x, spec)?;
    compute_syndrome(&frame, spec)
}

/// Recovers `x` from its syndrome and full side information `y`, assuming
/// the bits of `x ⊕ y` are independent with `P(1) = p`.
pub fn asym_decode(
    syndrome: &Syndrome,
    y: &BitVector,
    spec: &CodeSpec,
    p: f64,
) -> Result<DecodedSource> {
    if syndrome.len() != spec.frozen_len() {
        return Err(invalid(format!(
            "syndrome length {} does not match N - K = {}",
            syndrome.len(),
            spec.frozen_len()
        )));
    }
    let frame_y = frame_from_payload(y, spec)?;
    let error_syndrome = syndrome.xor(&compute_syndrome(&frame_y, spec)?);
    let (error_frame, crc_pass) = decode_error_frame(spec, &error_syndrome, p)?;
    let frame_x = error_frame.xor(&frame_y);
    Ok(DecodedSource {
        payload: payload_of(&frame_x, spec),
        crc_pass,
    })
}

/// How the `K` systematic positions are divided between the two encoders
/// in the nonasymmetric mode.
///
/// Encoder X transmits the first `k1` positions of `B` (ascending),
/// encoder Y the remaining `k2 = K - k1`. Moving the split point trades
/// rate between the sources one bit at a time; the extremes reduce to the
/// asymmetric setting with one source sent losslessly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RateSplit {
    k1: usize,
    k2: usize,
}

impl RateSplit {
    pub fn new(k1: usize, spec: &CodeSpec) -> Result<Self> {
        if k1 > spec.dim() {
            return Err(invalid(format!(
                "split k1 = {k1} exceeds K = {}",
                spec.dim()
            )));
        }
        Ok(Self {
            k1,
            k2: spec.dim() - k1,
        })
    }

    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn k2(&self) -> usize {
        self.k2
    }

    /// Transmitted bits per source bit for encoder X: `(k1 + N - K) / N`.
    pub fn rate_x(&self, spec: &CodeSpec) -> f64 {
        (self.k1 + spec.frozen_len()) as f64 / spec.block_len() as f64
    }

    /// Transmitted bits per source bit for encoder Y: `(k2 + N - K) / N`.
    pub fn rate_y(&self, spec: &CodeSpec) -> f64 {
        (self.k2 + spec.frozen_len()) as f64 / spec.block_len() as f64
    }

    /// Always `(K + 2(N - K)) / N`, independent of the split point.
    pub fn sum_rate(&self, spec: &CodeSpec) -> f64 {
        self.rate_x(spec) + self.rate_y(spec)
    }
}

/// One encoder's transmission in the nonasymmetric mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonasymMessage {
    pub syndrome: Syndrome,
    /// Frame values on this encoder's share of the systematic set `B`.
    pub systematic: BitVector,
}

/// Both recovered payloads plus the checksum verdict for the decoded
/// error frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonasymDecoded {
    pub x_payload: BitVector,
    pub y_payload: BitVector,
    pub crc_pass: bool,
}

pub fn nonasym_encode_x(
    x: &BitVector,
    split: &RateSplit,
    spec: &SystematicSpec,
) -> Result<NonasymMessage> {
    check_split(split, spec)?;
    let frame = frame_from_payload(x, spec.base())?;
    let syndrome = compute_syndrome(&frame, spec.base())?;
    let systematic = frame.restricted_to(&spec.b_set()[..split.k1]);
    Ok(NonasymMessage {
        syndrome,
        systematic,
    })
}

pub fn nonasym_encode_y(
    y: &BitVector,
    split: &RateSplit,
    spec: &SystematicSpec,
) -> Result<NonasymMessage> {
    check_split(split, spec)?;
    let frame = frame_from_payload(y, spec.base())?;
    let syndrome = compute_syndrome(&frame, spec.base())?;
    let systematic = frame.restricted_to(&spec.b_set()[split.k1..]);
    Ok(NonasymMessage {
        syndrome,
        systematic,
    })
}

fn check_split(split: &RateSplit, spec: &SystematicSpec) -> Result<()> {
    if split.k1 + split.k2 != spec.base().dim() {
        return Err(invalid(format!(
            "split {} + {} does not cover K = {}",
            split.k1,
            split.k2,
            spec.base().dim()
        )));
    }
    Ok(())
}

/// Joint decoder for the nonasymmetric mode.
///
/// Decodes the error frame from the syndrome difference, then rebuilds
/// each source frame from its own syndrome and systematic values: the
/// received positions are taken as-is, the other encoder's positions are
/// corrected through the error estimate. At `k1 = 0` the Y frame is a
/// pure re-encode of received data, so `y` is always recovered exactly
/// (symmetrically for `x` at `k1 = K`).
pub fn nonasym_decode(
    msg_x: &NonasymMessage,
    msg_y: &NonasymMessage,
    split: &RateSplit,
    spec: &SystematicSpec,
    p: f64,
) -> Result<NonasymDecoded> {
    check_split(split, spec)?;
    let base = spec.base();
    if msg_x.syndrome.len() != base.frozen_len() || msg_y.syndrome.len() != base.frozen_len() {
        return Err(invalid(format!(
            "syndrome lengths {} and {} do not match N - K = {}",
            msg_x.syndrome.len(),
            msg_y.syndrome.len(),
            base.frozen_len()
        )));
    }
    if msg_x.systematic.len() != split.k1 || msg_y.systematic.len() != split.k2 {
        return Err(invalid(format!(
            "systematic lengths {} and {} do not match split ({}, {})",
            msg_x.systematic.len(),
            msg_y.systematic.len(),
            split.k1,
            split.k2
        )));
    }
    let error_syndrome = msg_x.syndrome.xor(&msg_y.syndrome);
    let (error_frame, crc_pass) = decode_error_frame(base, &error_syndrome, p)?;

    let error_b1 = error_frame.restricted_to(&spec.b_set()[..split.k1]);
    let error_b2 = error_frame.restricted_to(&spec.b_set()[split.k1..]);
    let mut x_b = msg_x.systematic.clone().into_vec();
    x_b.extend_from_slice(msg_y.systematic.xor(&error_b2).as_slice());
    let mut y_b = msg_x.systematic.xor(&error_b1).into_vec();
    y_b.extend_from_slice(msg_y.systematic.as_slice());

    let (frame_x, _) = systematic_encode_fast(
        &BitVector::new(x_b).expect("bits are 0/1"),
        &msg_x.syndrome,
        spec,
    )?;
    let (frame_y, _) = systematic_encode_fast(
        &BitVector::new(y_b).expect("bits are 0/1"),
        &msg_y.syndrome,
        spec,
    )?;
    Ok(NonasymDecoded {
        x_payload: payload_of(&frame_x, base),
        y_payload: payload_of(&frame_y, base),
        crc_pass,
    })
}
