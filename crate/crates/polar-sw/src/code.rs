//! Code specifications and syndrome computation.
//!
//! A [`CodeSpec`] fixes everything both ends of a link must agree on: the
//! block length `N = 2^n`, the information set `A` (transform-domain
//! positions left free), the design crossover probability the set was built
//! for, and how many trailing source positions are reserved for a CRC. The
//! compressed representation of a block `x` is its syndrome: the transform
//! `u = x · G_N` restricted to the frozen set `A^c` in ascending index
//! order.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::bits::BitVector;
use crate::transform::polar_transform;
use crate::{invalid, Error, Result};

const SPEC_VERSION_TAG: &str = "polar-sw-spec v1";

/// Full description of one polar source code.
#[derive(Clone, PartialEq)]
pub struct CodeSpec {
    n: u32,
    block_len: usize,
    info_set: Vec<usize>,
    design_p: f64,
    l_crc: usize,
}

impl CodeSpec {
    /// Builds a spec from its parts.
    ///
    /// # Parameters
    ///
    /// * `n` — transform depth; the block length is `N = 2^n`.
    /// * `info_set` — strictly increasing positions in `0..N`, at least one
    ///   and fewer than `N`.
    /// * `design_p` — crossover probability the set was designed for, in
    ///   `(0, 0.5)`.
    /// * `l_crc` — number of trailing source positions holding a CRC; must
    ///   leave a positive payload `N' = N - l_crc`.
    ///
    /// # Errors
    ///
    /// Returns [`Error::Validation`] if any of the above is violated.
    pub fn new(n: u32, info_set: Vec<usize>, design_p: f64, l_crc: usize) -> Result<Self> {
        if n == 0 || n > 30 {
            return Err(Error::Validation(format!(
                "transform depth n must be in 1..=30, got {n}"
            )));
        }
        let block_len = 1usize << n;
        if info_set.is_empty() || info_set.len() >= block_len {
            return Err(Error::Validation(format!(
                "information set must satisfy 0 < K < N, got K = {} at N = {block_len}",
                info_set.len()
            )));
        }
        if info_set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "information set must be strictly increasing".into(),
            ));
        }
        if *info_set.last().expect("nonempty") >= block_len {
            return Err(Error::Validation(format!(
                "information set position {} is outside 0..{block_len}",
                info_set.last().expect("nonempty")
            )));
        }
        if !(design_p > 0.0 && design_p < 0.5) {
            return Err(Error::Validation(format!(
                "design_p must lie in (0, 0.5), got {design_p}"
            )));
        }
        if l_crc >= block_len {
            return Err(Error::Validation(format!(
                "l_crc = {l_crc} leaves no payload at N = {block_len}"
            )));
        }
        Ok(Self {
            n,
            block_len,
            info_set,
            design_p,
            l_crc,
        })
    }

    /// The same spec with a different CRC length.
    ///
    /// # Errors
    ///
    /// Returns [`Error::Validation`] if `l_crc` leaves no payload.
    pub fn with_l_crc(&self, l_crc: usize) -> Result<Self> {
        Self::new(self.n, self.info_set.clone(), self.design_p, l_crc)
    }

    /// Transform depth `n`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Block length `N = 2^n`.
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Information-set size `K`.
    pub fn dim(&self) -> usize {
        self.info_set.len()
    }

    /// The information set `A`, strictly increasing.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    /// Number of trailing source positions reserved for the CRC.
    pub fn l_crc(&self) -> usize {
        self.l_crc
    }

    /// Payload length `N' = N - l_crc`.
    pub fn payload_len(&self) -> usize {
        self.block_len - self.l_crc
    }

    /// Design crossover probability.
    pub fn design_p(&self) -> f64 {
        self.design_p
    }

    /// Size of the frozen set, `N - K`; equals the syndrome length.
    pub fn frozen_len(&self) -> usize {
        self.block_len - self.info_set.len()
    }

    /// The frozen set `A^c` in ascending order.
    pub fn frozen_set(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.frozen_len());
        let mut next_info = self.info_set.iter().peekable();
        for i in 0..self.block_len {
            if next_info.peek() == Some(&&i) {
                next_info.next();
            } else {
                out.push(i);
            }
        }
        out
    }

    /// Membership mask of the information set, indexed by position.
    pub fn info_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.block_len];
        for &i in &self.info_set {
            mask[i] = true;
        }
        mask
    }

    /// Canonical text serialization.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{SPEC_VERSION_TAG}").expect("writing to String cannot fail");
        writeln!(s, "n = {}", self.n).expect("infallible");
        writeln!(s, "N = {}", self.block_len).expect("infallible");
        writeln!(s, "K = {}", self.info_set.len()).expect("infallible");
        writeln!(s, "design_p = {}", self.design_p).expect("infallible");
        writeln!(s, "l_crc = {}", self.l_crc).expect("infallible");
        if self.l_crc == 16 {
            writeln!(s, "crc = xmodem16").expect("infallible");
        }
        let positions: Vec<String> = self.info_set.iter().map(|i| i.to_string()).collect();
        writeln!(s, "info_set = {}", positions.join(" ")).expect("infallible");
        s
    }

    /// FNV-1a hash of the canonical serialization; used to match compressed
    /// frames against the spec they were produced with.
    pub fn digest(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        for byte in self.to_text().bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(PRIME);
        }
        h
    }

    /// Writes the canonical text form.
    pub fn save(&self, mut w: impl Write) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    /// Parses the canonical text form.
    ///
    /// # Errors
    ///
    /// [`Error::Parse`] for malformed text, [`Error::Validation`] for
    /// well-formed text describing an inconsistent code, [`Error::Io`] on
    /// read failure.
    pub fn load(mut r: impl Read) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        Self::from_text(&text)
    }

    /// Saves to a file path.
    pub fn save_to_path(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Loads from a file path.
    pub fn load_from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }

    /// Parses the canonical text form from a string.
    pub fn from_text(text: &str) -> Result<Self> {
        let parse = |field: &str, reason: &str| Error::Parse {
            field: field.into(),
            reason: reason.into(),
        };
        let mut lines = text.lines();
        match lines.next() {
            Some(first) if first.trim() == SPEC_VERSION_TAG => {}
            _ => return Err(parse("version", "first line must be `polar-sw-spec v1`")),
        }
        let mut fields = std::collections::HashMap::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse(line, "expected `key = value`"))?;
            if fields.insert(key.trim().to_string(), value.trim().to_string()).is_some() {
                return Err(parse(key.trim(), "duplicate field"));
            }
        }
        let take = |key: &str| {
            fields
                .get(key)
                .ok_or_else(|| parse(key, "missing field"))
        };
        let num = |key: &str| -> Result<usize> {
            take(key)?
                .parse()
                .map_err(|_| parse(key, "not a nonnegative integer"))
        };
        let n: u32 = take("n")?
            .parse()
            .map_err(|_| parse("n", "not a nonnegative integer"))?;
        let big_n = num("N")?;
        let k = num("K")?;
        let design_p: f64 = take("design_p")?
            .parse()
            .map_err(|_| parse("design_p", "not a number"))?;
        let l_crc = num("l_crc")?;
        let mut info_set = Vec::new();
        for token in take("info_set")?.split_whitespace() {
            info_set.push(
                token
                    .parse()
                    .map_err(|_| parse("info_set", "not a list of integers"))?,
            );
        }
        match fields.get("crc").map(String::as_str) {
            Some("xmodem16") if l_crc == 16 => {}
            Some("xmodem16") => {
                return Err(Error::Validation(
                    "crc = xmodem16 requires l_crc = 16".into(),
                ))
            }
            Some(other) => return Err(parse("crc", &format!("unsupported value `{other}`"))),
            None if l_crc == 16 => return Err(parse("crc", "missing field")),
            None => {}
        }
        if n > 30 || big_n != 1usize << n {
            return Err(Error::Validation(format!(
                "N = {big_n} does not match n = {n}"
            )));
        }
        if k != info_set.len() {
            return Err(Error::Validation(format!(
                "K = {k} does not match an information set of {} positions",
                info_set.len()
            )));
        }
        Self::new(n, info_set, design_p, l_crc)
    }
}

impl std::fmt::Debug for CodeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CodeSpec")
            .field("n", &self.n)
            .field("N", &self.block_len)
            .field("K", &self.info_set.len())
            .field("design_p", &self.design_p)
            .field("l_crc", &self.l_crc)
            .finish_non_exhaustive()
    }
}

/// A frozen-set restriction of a transform-domain vector; the compressed
/// form of one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syndrome {
    bits: BitVector,
}

impl Syndrome {
    /// Wraps raw bits as a syndrome for `spec`.
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidArgument`](crate::Error::InvalidArgument) if
    /// the length is not `N - K`.
    pub fn new(bits: BitVector, spec: &CodeSpec) -> Result<Self> {
        if bits.len() != spec.frozen_len() {
            return Err(invalid(format!(
                "syndrome length {} does not match N - K = {}",
                bits.len(),
                spec.frozen_len()
            )));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Component-wise XOR. Panics if lengths differ.
    pub fn xor(&self, other: &Self) -> Self {
        Self {
            bits: self.bits.xor(&other.bits),
        }
    }

    pub fn into_bits(self) -> BitVector {
        self.bits
    }
}

/// Compresses `x`: applies the polar transform and keeps the frozen-set
/// values in ascending index order.
///
/// # Errors
///
/// Returns [`Error::InvalidArgument`](crate::Error::InvalidArgument) if
/// `x.len() != N`.
pub fn compute_syndrome(x: &BitVector, spec: &CodeSpec) -> Result<Syndrome> {
    if x.len() != spec.block_len() {
        return Err(invalid(format!(
            "input length {} does not match block length {}",
            x.len(),
            spec.block_len()
        )));
    }
    let u = polar_transform(x)?;
    Ok(Syndrome {
        bits: u.restricted_to(&spec.frozen_set()),
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn demo_spec() -> CodeSpec {
        CodeSpec::new(2, vec![2, 3], 0.09, 0).unwrap()
    }

    #[test]
    fn accessors_are_consistent() {
        let spec = CodeSpec::new(3, vec![3, 5, 6, 7], 0.11, 2).unwrap();
        assert_eq!(spec.block_len(), 8);
        assert_eq!(spec.dim(), 4);
        assert_eq!(spec.frozen_len(), 4);
        assert_eq!(spec.payload_len(), 6);
        assert_eq!(spec.frozen_set(), vec![0, 1, 2, 4]);
        let mask = spec.info_mask();
        assert!(mask[3] && mask[7] && !mask[0] && !mask[4]);
    }

    #[test]
    fn rejects_degenerate_specs() {
        assert!(CodeSpec::new(2, vec![], 0.1, 0).is_err());
        assert!(CodeSpec::new(2, vec![0, 1, 2, 3], 0.1, 0).is_err());
        assert!(CodeSpec::new(2, vec![3, 2], 0.1, 0).is_err());
        assert!(CodeSpec::new(2, vec![2, 2], 0.1, 0).is_err());
        assert!(CodeSpec::new(2, vec![2, 4], 0.1, 0).is_err());
        assert!(CodeSpec::new(2, vec![2, 3], 0.5, 0).is_err());
        assert!(CodeSpec::new(2, vec![2, 3], 0.0, 0).is_err());
        assert!(CodeSpec::new(2, vec![2, 3], 0.1, 4).is_err());
        assert!(CodeSpec::new(0, vec![], 0.1, 0).is_err());
    }

    #[test]
    fn crc_length_change_preserves_the_rest() {
        let spec = demo_spec().with_l_crc(3).unwrap();
        assert_eq!(spec.l_crc(), 3);
        assert_eq!(spec.payload_len(), 1);
        assert_eq!(spec.info_set(), &[2, 3]);
        assert!(demo_spec().with_l_crc(4).is_err());
    }

    #[test]
    fn syndrome_of_known_block() {
        // x = (1,0,1,0) transforms to u = (0,1,0,0); frozen set {0,1}.
        let spec = demo_spec();
        let x = BitVector::new(vec![1, 0, 1, 0]).unwrap();
        let s = compute_syndrome(&x, &spec).unwrap();
        assert_eq!(s.bits().as_slice(), &[0, 1]);
    }

    #[test]
    fn syndrome_of_zero_block_is_zero() {
        let spec = CodeSpec::new(4, (4..12).collect(), 0.1, 0).unwrap();
        let s = compute_syndrome(&BitVector::zeros(16), &spec).unwrap();
        assert_eq!(s.bits(), &BitVector::zeros(8));
    }

    #[test]
    fn syndrome_rejects_wrong_length() {
        assert!(compute_syndrome(&BitVector::zeros(8), &demo_spec()).is_err());
    }

    #[test]
    fn syndrome_xor_matches_input_xor() {
        let spec = CodeSpec::new(3, vec![1, 3, 5, 7], 0.2, 0).unwrap();
        let a = BitVector::new(vec![1, 0, 0, 1, 1, 1, 0, 0]).unwrap();
        let b = BitVector::new(vec![0, 1, 1, 1, 0, 0, 0, 1]).unwrap();
        let lhs = compute_syndrome(&a.xor(&b), &spec).unwrap();
        let rhs = compute_syndrome(&a, &spec)
            .unwrap()
            .xor(&compute_syndrome(&b, &spec).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn text_round_trip_without_crc() {
        let spec = CodeSpec::new(4, vec![7, 9, 11, 13, 14, 15], 0.04, 0).unwrap();
        let text = spec.to_text();
        assert!(!text.lines().any(|l| l.starts_with("crc ")));
        let back = CodeSpec::from_text(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn text_round_trip_with_crc() {
        let spec = CodeSpec::new(6, (20..52).collect(), 0.09, 16).unwrap();
        let text = spec.to_text();
        assert!(text.contains("crc = xmodem16"));
        let back = CodeSpec::from_text(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.digest(), spec.digest());
    }

    #[test]
    fn digest_tracks_content() {
        let a = CodeSpec::new(3, vec![3, 5, 6, 7], 0.1, 0).unwrap();
        let b = CodeSpec::new(3, vec![3, 5, 6, 7], 0.11, 0).unwrap();
        let c = CodeSpec::new(3, vec![1, 5, 6, 7], 0.1, 0).unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest(), a.clone().digest());
    }

    #[test]
    fn load_rejects_malformed_text() {
        let bad_version = "polar-spec v9\nn = 2\n";
        assert!(matches!(
            CodeSpec::from_text(bad_version),
            Err(Error::Parse { field, .. }) if field == "version"
        ));

        let spec = demo_spec();
        let missing = spec.to_text().replace("design_p = 0.09\n", "");
        assert!(matches!(
            CodeSpec::from_text(&missing),
            Err(Error::Parse { field, .. }) if field == "design_p"
        ));

        let garbled = spec.to_text().replace("K = 2", "K = two");
        assert!(matches!(
            CodeSpec::from_text(&garbled),
            Err(Error::Parse { field, .. }) if field == "K"
        ));

        let inconsistent = spec.to_text().replace("K = 2", "K = 3");
        assert!(matches!(
            CodeSpec::from_text(&inconsistent),
            Err(Error::Validation(_))
        ));

        let wrong_n = spec.to_text().replace("N = 4", "N = 8");
        assert!(matches!(
            CodeSpec::from_text(&wrong_n),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn crc_field_consistency_is_enforced() {
        let spec = CodeSpec::new(6, (20..52).collect(), 0.09, 16).unwrap();
        let no_crc_line = spec.to_text().replace("crc = xmodem16\n", "");
        assert!(matches!(
            CodeSpec::from_text(&no_crc_line),
            Err(Error::Parse { field, .. }) if field == "crc"
        ));

        let wrong_value = spec.to_text().replace("xmodem16", "crc32");
        assert!(CodeSpec::from_text(&wrong_value).is_err());

        let stray = demo_spec().to_text() + "crc = xmodem16\n";
        assert!(matches!(
            CodeSpec::from_text(&stray),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("code.spec");
        let spec = CodeSpec::new(5, (10..26).collect(), 0.03, 16).unwrap();
        spec.save_to_path(&path).unwrap();
        assert_eq!(CodeSpec::load_from_path(&path).unwrap(), spec);
    }

    proptest! {
        #[test]
        fn syndrome_inverts_transform_restriction(n in 1u32..=4, seed in any::<u64>()) {
            // Feeding a transform image back through compute_syndrome must
            // recover exactly the frozen part of the original vector.
            let len = 1usize << n;
            let k = 1 + (seed as usize) % (len - 1);
            let mut positions: Vec<usize> = (0..len).collect();
            // Deterministic shuffle driven by the seed.
            let mut state = seed | 1;
            for i in (1..len).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                positions.swap(i, (state >> 33) as usize % (i + 1));
            }
            let mut info: Vec<usize> = positions[..k].to_vec();
            info.sort_unstable();
            let spec = CodeSpec::new(n, info, 0.2, 0).unwrap();

            let bits: Vec<u8> = (0..len).map(|i| ((seed >> (i % 64)) & 1) as u8).collect();
            let u = BitVector::new(bits).unwrap();
            let x = polar_transform(&u).unwrap();
            let s = compute_syndrome(&x, &spec).unwrap();
            prop_assert_eq!(s.bits(), &u.restricted_to(&spec.frozen_set()));
        }
    }
}
