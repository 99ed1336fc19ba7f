//! Monte-Carlo rate/BER measurement for the three codec modes.
//!
//! A sweep runs the full encode/decode chain over many independent blocks
//! at each crossover probability and reports bit error rates against the
//! conditional entropy `H(p)` of the correlation channel. Results are
//! reproducible: block `b` of a run draws all its randomness from counter
//! streams derived only from `(seed, b)`, and the stopping rule scans
//! blocks in index order, so neither thread count nor chunking changes a
//! single reported number.
//!
//! The error pattern and the side information come from separate streams.
//! Single-source trials draw their source from the error stream, which
//! makes a single-source run at crossover `p` process the same words as
//! the error-frame decoder inside an asymmetric run with the same seed.

use rayon::prelude::*;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitVector;
use crate::code::CodeSpec;
use crate::sw::{
    asym_decode, asym_encode, compress_single, decompress_single, nonasym_decode,
    nonasym_encode_x, nonasym_encode_y, RateSplit,
};
use crate::systematic::SystematicSpec;
use crate::{invalid, Error, Result};

/// Entropy of a Bernoulli(p) bit.
pub fn binary_entropy(p: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&p),
        "probability out of range: {p}"
    );
    let mut h = 0.0;
    for q in [p, 1.0 - p] {
        if q > 0.0 {
            h -= q * q.log2();
        }
    }
    h
}

/// Inverse of [`binary_entropy`] on `[0, 1/2]`, by bisection.
///
/// # Errors
///
/// Rejects `h` outside `[0, 1]`.
pub fn entropy_inverse(h: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(invalid(format!("entropy must lie in [0, 1], got {h}")));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-block randomness: one counter stream for the uniform side
/// information, one for the error pattern.
///
/// Keeping the streams separate means the error pattern for block `b` is
/// the same whether or not side information is drawn, which is what ties
/// single-source and asymmetric runs together block by block.
pub struct SourceRng {
    uniform: ChaCha8Rng,
    noise: ChaCha8Rng,
}

impl SourceRng {
    pub fn for_block(seed: u64, block: u64) -> Self {
        let mut uniform = ChaCha8Rng::seed_from_u64(seed);
        uniform.set_stream(2 * block);
        let mut noise = ChaCha8Rng::seed_from_u64(seed);
        noise.set_stream(2 * block + 1);
        Self { uniform, noise }
    }

    pub fn uniform_bits(&mut self, len: usize) -> BitVector {
        BitVector::new((0..len).map(|_| u8::from(self.uniform.random_bool(0.5))).collect())
            .expect("bits are 0/1")
    }

    pub fn error_bits(&mut self, len: usize, p: f64) -> BitVector {
        BitVector::new((0..len).map(|_| u8::from(self.noise.random_bool(p))).collect())
            .expect("bits are 0/1")
    }

    /// Draws `(y, e)`; the correlated pair is `x = y ⊕ e`.
    pub fn source_pair(&mut self, len: usize, p: f64) -> (BitVector, BitVector) {
        (self.uniform_bits(len), self.error_bits(len, p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Single,
    Asym,
    Nonasym,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Asym => "asym",
            Mode::Nonasym => "nonasym",
        }
    }
}

pub const DEFAULT_TARGET_ERRORS: u64 = 100;
pub const DEFAULT_MAX_BLOCKS: u64 = 100_000;

/// Everything a sweep needs besides the crossover probabilities.
#[derive(Clone)]
pub struct SimConfig {
    mode: Mode,
    spec: CodeSpec,
    k1: usize,
    seed: u64,
    target_errors: u64,
    max_blocks: u64,
}

impl SimConfig {
    /// `k1` is the nonasymmetric split point and must be 0 in the other
    /// modes.
    pub fn new(mode: Mode, spec: CodeSpec, k1: usize, seed: u64) -> Result<Self> {
        match mode {
            Mode::Nonasym => {
                RateSplit::new(k1, &spec)?;
            }
            _ if k1 != 0 => {
                return Err(invalid(format!(
                    "k1 = {k1} is only meaningful in nonasymmetric mode"
                )));
            }
            _ => {}
        }
        Ok(Self {
            mode,
            spec,
            k1,
            seed,
            target_errors: DEFAULT_TARGET_ERRORS,
            max_blocks: DEFAULT_MAX_BLOCKS,
        })
    }

    /// Stop a point early once this many block errors have accumulated.
    pub fn with_target_errors(mut self, target_errors: u64) -> Result<Self> {
        if target_errors == 0 {
            return Err(invalid("target_errors must be at least 1"));
        }
        self.target_errors = target_errors;
        Ok(self)
    }

    pub fn with_max_blocks(mut self, max_blocks: u64) -> Result<Self> {
        if max_blocks == 0 {
            return Err(invalid("max_blocks must be at least 1"));
        }
        self.max_blocks = max_blocks;
        Ok(self)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn target_errors(&self) -> u64 {
        self.target_errors
    }

    pub fn max_blocks(&self) -> u64 {
        self.max_blocks
    }
}

/// Measured operating point.
#[derive(Clone, Debug, PartialEq)]
pub struct BerRecord {
    pub p: f64,
    /// `H(p)`, the conditional entropy the rate is compared against.
    pub h_cond: f64,
    pub blocks: u64,
    pub bit_errors_x: u64,
    pub bit_errors_y: u64,
    /// Bit error rate averaged over both sources in the two-source modes
    /// (side information counts as error-free in asymmetric runs), over
    /// the single source otherwise.
    pub ber_avg: f64,
    /// Blocks in which either recovered payload differed from the truth.
    pub block_errors: u64,
    /// Blocks whose selected path failed the checksum.
    pub crc_fail_count: u64,
}

struct TrialOutcome {
    bit_errors_x: u64,
    bit_errors_y: u64,
    crc_pass: bool,
}

fn run_trial(
    config: &SimConfig,
    systematic: &SystematicSpec,
    p: f64,
    block: u64,
) -> Result<TrialOutcome> {
    let spec = &config.spec;
    let len = spec.payload_len();
    let mut rng = SourceRng::for_block(config.seed, block);
    match config.mode {
        Mode::Single => {
            let x = rng.error_bits(len, p);
            let decoded = decompress_single(&compress_single(&x, spec)?, spec, p)?;
            Ok(TrialOutcome {
                bit_errors_x: x.hamming_distance(&decoded.payload) as u64,
                bit_errors_y: 0,
                crc_pass: decoded.crc_pass,
            })
        }
        Mode::Asym => {
            let (y, e) = rng.source_pair(len, p);
            let x = y.xor(&e);
            let decoded = asym_decode(&asym_encode(&x, spec)?, &y, spec, p)?;
            Ok(TrialOutcome {
                bit_errors_x: x.hamming_distance(&decoded.payload) as u64,
                bit_errors_y: 0,
                crc_pass: decoded.crc_pass,
            })
        }
        Mode::Nonasym => {
            let (y, e) = rng.source_pair(len, p);
            let x = y.xor(&e);
            let split = RateSplit::new(config.k1, spec)?;
            let msg_x = nonasym_encode_x(&x, &split, systematic)?;
            let msg_y = nonasym_encode_y(&y, &split, systematic)?;
            let decoded = nonasym_decode(&msg_x, &msg_y, &split, systematic, p)?;
            Ok(TrialOutcome {
                bit_errors_x: x.hamming_distance(&decoded.x_payload) as u64,
                bit_errors_y: y.hamming_distance(&decoded.y_payload) as u64,
                crc_pass: decoded.crc_pass,
            })
        }
    }
}

const CHUNK_BLOCKS: u64 = 32;

/// Measures one operating point.
///
/// Blocks are decoded in parallel a chunk at a time, then folded into the
/// totals in index order until `target_errors` block errors have been seen
/// or `max_blocks` blocks are exhausted.
pub fn run_point(config: &SimConfig, p: f64) -> Result<BerRecord> {
    if !(p > 0.0 && p < 0.5) {
        return Err(invalid(format!("p must lie in (0, 0.5), got {p}")));
    }
    let systematic = SystematicSpec::new(config.spec.clone());
    let mut blocks = 0u64;
    let mut bit_errors_x = 0u64;
    let mut bit_errors_y = 0u64;
    let mut block_errors = 0u64;
    let mut crc_fail_count = 0u64;
    'outer: while blocks < config.max_blocks {
        let start = blocks;
        let end = (start + CHUNK_BLOCKS).min(config.max_blocks);
        let outcomes: Vec<TrialOutcome> = (start..end)
            .into_par_iter()
            .map(|b| run_trial(config, &systematic, p, b))
            .collect::<Result<_>>()?;
        for outcome in outcomes {
            blocks += 1;
            bit_errors_x += outcome.bit_errors_x;
            bit_errors_y += outcome.bit_errors_y;
            if outcome.bit_errors_x + outcome.bit_errors_y > 0 {
                block_errors += 1;
            }
            if !outcome.crc_pass {
                crc_fail_count += 1;
            }
            if block_errors >= config.target_errors {
                break 'outer;
            }
        }
    }
    let source_bits = config.spec.payload_len() as u64 * blocks;
    let ber_avg = match config.mode {
        Mode::Single => bit_errors_x as f64 / source_bits as f64,
        Mode::Asym | Mode::Nonasym => {
            (bit_errors_x + bit_errors_y) as f64 / (2 * source_bits) as f64
        }
    };
    Ok(BerRecord {
        p,
        h_cond: binary_entropy(p),
        blocks,
        bit_errors_x,
        bit_errors_y,
        ber_avg,
        block_errors,
        crc_fail_count,
    })
}

/// Measures every point of `ps` in order.
pub fn run_sweep(config: &SimConfig, ps: &[f64]) -> Result<Vec<BerRecord>> {
    ps.iter().map(|&p| run_point(config, p)).collect()
}

/// Stand-in magnitude for a measured BER of exactly zero when
/// interpolating on a log scale.
const LOG_FLOOR_BER: f64 = 1e-12;

/// Largest conditional entropy at which the sweep stays at or below
/// `target_ber`.
///
/// `records` must be ordered by increasing `h_cond`. The crossing is
/// interpolated linearly in `(H, log10 BER)` between the last compliant
/// point and its successor; a compliant final point is returned as-is.
///
/// # Errors
///
/// [`Error::ThresholdBelowGrid`](crate::Error::ThresholdBelowGrid) when
/// even the first point exceeds the target.
pub fn find_threshold(records: &[BerRecord], target_ber: f64) -> Result<f64> {
    if records.is_empty() {
        return Err(invalid("cannot find a threshold in an empty sweep"));
    }
    if target_ber <= 0.0 || target_ber.is_nan() {
        return Err(invalid(format!(
            "target BER must be positive, got {target_ber}"
        )));
    }
    let last_ok = records
        .iter()
        .rposition(|r| r.ber_avg <= target_ber)
        .ok_or(Error::ThresholdBelowGrid)?;
    if last_ok + 1 == records.len() {
        return Ok(records[last_ok].h_cond);
    }
    let below = &records[last_ok];
    let above = &records[last_ok + 1];
    let log_below = below.ber_avg.max(LOG_FLOOR_BER).log10();
    let log_above = above.ber_avg.max(LOG_FLOOR_BER).log10();
    let t = (target_ber.log10() - log_below) / (log_above - log_below);
    Ok(below.h_cond + t * (above.h_cond - below.h_cond))
}
