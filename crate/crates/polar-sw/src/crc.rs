//! CRC-16 for list-decoder selection.
//!
//! The default configuration is CRC-16/XMODEM (polynomial 0x1021, zero
//! initial value, zero output XOR, no reflection). With zero initial and
//! output values the map from message to checksum is linear over GF(2),
//! which the source codecs rely on: the CRC of an XOR of two frames is the
//! XOR of their CRCs, so checksums survive the translation into and out of
//! coset coordinates.
//!
//! Messages are bit strings, processed most significant bit first; byte
//! input is handled by unpacking MSB-first, matching the usual byte-wise
//! definition of the check value.

use crate::bits::BitVector;

/// Width of the checksum in bits.
pub const CRC_WIDTH: usize = 16;

/// Parameters of a 16-bit CRC.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrcConfig {
    pub polynomial: u16,
    pub initial: u16,
    pub final_xor: u16,
}

/// CRC-16/XMODEM: polynomial 0x1021, zero init, zero final XOR.
pub const fn xmodem16() -> CrcConfig {
    CrcConfig {
        polynomial: 0x1021,
        initial: 0,
        final_xor: 0,
    }
}

/// Checksum of a bit string, returned as 16 bits MSB-first.
pub fn crc_compute(message: &BitVector, cfg: &CrcConfig) -> BitVector {
    let mut reg = cfg.initial;
    for &bit in message.iter() {
        let feedback = ((reg >> 15) as u8) ^ bit;
        reg <<= 1;
        if feedback == 1 {
            reg ^= cfg.polynomial;
        }
    }
    reg ^= cfg.final_xor;
    let bits = (0..CRC_WIDTH).map(|i| ((reg >> (15 - i)) & 1) as u8).collect();
    BitVector::new(bits).expect("bits are 0/1 by construction")
}

/// The message followed by its checksum.
pub fn crc_append(payload: &BitVector, cfg: &CrcConfig) -> BitVector {
    let mut bits = payload.as_slice().to_vec();
    bits.extend_from_slice(crc_compute(payload, cfg).as_slice());
    BitVector::new(bits).expect("bits are 0/1 by construction")
}

/// Whether the last 16 bits of `frame` are the checksum of the rest.
///
/// Panics if the frame is shorter than the checksum.
pub fn crc_check(frame: &BitVector, cfg: &CrcConfig) -> bool {
    assert!(
        frame.len() >= CRC_WIDTH,
        "frame shorter than the checksum width"
    );
    let split = frame.len() - CRC_WIDTH;
    let payload = BitVector::new(frame.as_slice()[..split].to_vec()).expect("bits are 0/1");
    crc_compute(&payload, cfg).as_slice() == &frame.as_slice()[split..]
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    /// Independent byte-wise table implementation used as an oracle.
    fn table_crc(bytes: &[u8], cfg: &CrcConfig) -> u16 {
        let mut table = [0u16; 256];
        for (i, entry) in table.iter_mut().enumerate() {
            let mut r = (i as u16) << 8;
            for _ in 0..8 {
                r = if r & 0x8000 != 0 {
                    (r << 1) ^ cfg.polynomial
                } else {
                    r << 1
                };
            }
            *entry = r;
        }
        let mut reg = cfg.initial;
        for &b in bytes {
            reg = (reg << 8) ^ table[((reg >> 8) as u8 ^ b) as usize];
        }
        reg ^ cfg.final_xor
    }

    fn crc_as_u16(v: &BitVector) -> u16 {
        v.iter().fold(0u16, |acc, &b| (acc << 1) | u16::from(b))
    }

    #[test]
    fn xmodem_check_value() {
        let message = BitVector::unpack_bytes(b"123456789", 72).unwrap();
        assert_eq!(crc_as_u16(&crc_compute(&message, &xmodem16())), 0x31c3);
    }

    #[test]
    fn zero_message_has_zero_checksum() {
        let cfg = xmodem16();
        assert_eq!(crc_compute(&BitVector::zeros(100), &cfg), BitVector::zeros(16));
        assert!(crc_check(&BitVector::zeros(116), &cfg));
    }

    #[test]
    fn append_then_check_round_trips() {
        let cfg = xmodem16();
        let payload = BitVector::new(vec![1, 0, 1, 1, 0, 0, 1]).unwrap();
        let frame = crc_append(&payload, &cfg);
        assert_eq!(frame.len(), payload.len() + CRC_WIDTH);
        assert_eq!(&frame.as_slice()[..payload.len()], payload.as_slice());
        assert!(crc_check(&frame, &cfg));
    }

    #[test]
    fn single_bit_flips_are_detected() {
        let cfg = xmodem16();
        let payload = BitVector::new((0..40).map(|i| (i % 3 == 1) as u8).collect()).unwrap();
        let frame = crc_append(&payload, &cfg);
        for i in 0..frame.len() {
            let mut bad = frame.clone();
            bad.set(i, 1 - bad[i]);
            assert!(!crc_check(&bad, &cfg), "flip at {i} went undetected");
        }
    }

    proptest! {
        #[test]
        fn matches_table_oracle(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
            let cfg = xmodem16();
            let message = BitVector::unpack_bytes(&bytes, bytes.len() * 8).unwrap();
            prop_assert_eq!(crc_as_u16(&crc_compute(&message, &cfg)), table_crc(&bytes, &cfg));
        }

        #[test]
        fn checksum_is_linear(a in prop::collection::vec(0u8..2, 50), b in prop::collection::vec(0u8..2, 50)) {
            let cfg = xmodem16();
            let a = BitVector::new(a).unwrap();
            let b = BitVector::new(b).unwrap();
            let lhs = crc_compute(&a.xor(&b), &cfg);
            let rhs = crc_compute(&a, &cfg).xor(&crc_compute(&b, &cfg));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn appended_frames_always_verify(bits in prop::collection::vec(0u8..2, 0..200)) {
            let cfg = xmodem16();
            let frame = crc_append(&BitVector::new(bits).unwrap(), &cfg);
            prop_assert!(crc_check(&frame, &cfg));
        }
    }
}
