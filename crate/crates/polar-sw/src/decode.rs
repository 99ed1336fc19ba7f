//! Successive-cancellation (SC) and SC-list coset decoding.
//!
//! Both decoders recover the most plausible vector `u` whose frozen-set
//! restriction equals a given syndrome, from per-position log-likelihood
//! ratios of the codeword `x = u · G_N`. Because `B_N F^{⊗n} B_N = F^{⊗n}`,
//! permuting the channel LLRs by bit reversal up front lets the butterfly
//! recursion visit `u` in natural index order, so frozen positions are
//! consumed as plain ascending ranks of the frozen set.
//!
//! The list decoder follows the lazy-copy scheme of Tal and Vardy: each path
//! holds its per-depth LLR and partial-sum layers behind shared pointers,
//! cloned only when a path about to write a layer still shares it. Path
//! metrics are the usual penalty form: deciding against the sign of an LLR
//! costs its magnitude. With the min-sum `f`, that cost telescopes exactly,
//! so a full-size list (one that never prunes) returns the weighted-Hamming
//! maximum-likelihood coset member; the unit tests check this against an
//! exhaustive search.
//!
//! Ties are broken deterministically everywhere: candidate paths are kept in
//! lexicographic order of their decision history, pruning keeps the
//! lexicographically first among equal metrics, and a zero LLR decides 0.

use std::rc::Rc;

use crate::bits::BitVector;
use crate::code::{CodeSpec, Syndrome};
use crate::crc::{crc_check, CrcConfig};
use crate::transform::{bit_reversal_permutation, polar_transform};
use crate::{invalid, Result};

/// LLR magnitudes are clamped to this value on construction; it is large
/// enough that a clamped bit practically never loses a metric comparison,
/// yet keeps sums of penalties well inside `f64` integer-exact range.
pub const LLR_CLAMP: f64 = 40.0;

/// Channel log-likelihood ratios `ln(P(y|0) / P(y|1))`, one per codeword
/// position, clamped to `[-LLR_CLAMP, LLR_CLAMP]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrVector {
    values: Vec<f64>,
}

impl LlrVector {
    /// Wraps and clamps raw LLR values.
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidArgument`](crate::Error::InvalidArgument) if
    /// any value is NaN.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(invalid("LLR values must not be NaN"));
        }
        for v in values.iter_mut() {
            *v = v.clamp(-LLR_CLAMP, LLR_CLAMP);
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// LLRs for observing `y` through a BSC with crossover probability `p`,
/// with the last `l_crc` positions treated as unobserved (zero LLR).
///
/// The zeroed tail is how CRC positions enter list decoding in the source
/// codecs: the checksum bits of the unknown block are not observable through
/// the side information, so they carry no channel evidence.
///
/// # Errors
///
/// Returns [`Error::InvalidArgument`](crate::Error::InvalidArgument) if `p`
/// is outside `(0, 0.5)` or `l_crc >= y.len()`.
pub fn init_llrs(y: &BitVector, p: f64, l_crc: usize) -> Result<LlrVector> {
    if !(p > 0.0 && p < 0.5) {
        return Err(invalid(format!("p must lie in (0, 0.5), got {p}")));
    }
    if l_crc >= y.len() {
        return Err(invalid(format!(
            "l_crc = {l_crc} leaves no observed positions in a block of {}",
            y.len()
        )));
    }
    let magnitude = ((1.0 - p) / p).ln();
    let observed = y.len() - l_crc;
    let values = (0..y.len())
        .map(|i| {
            if i >= observed {
                0.0
            } else if y[i] == 1 {
                -magnitude
            } else {
                magnitude
            }
        })
        .collect();
    LlrVector::new(values)
}

/// Output of a coset decode.
#[derive(Clone, Debug)]
pub struct DecodeResult {
    /// Transform-domain estimate; its frozen restriction equals the input
    /// syndrome by construction.
    pub u_hat: BitVector,
    /// Codeword estimate `u_hat · G_N`.
    pub x_hat: BitVector,
    /// Whether the selected path passed the CRC; `true` when no CRC was
    /// supplied.
    pub crc_pass: bool,
    /// Penalty metric of the selected path (sum of LLR magnitudes decided
    /// against).
    pub selected_metric: f64,
}

/// Min-sum check-node update.
#[inline]
fn f_min(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    sign * a.abs().min(b.abs())
}

#[inline]
fn g_update(a: f64, b: f64, left_sum: u8) -> f64 {
    if left_sum == 1 {
        b - a
    } else {
        b + a
    }
}

#[inline]
fn hard_decision(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

fn get_bit(words: &[u64], i: usize) -> u8 {
    ((words[i / 64] >> (i % 64)) & 1) as u8
}

fn set_bit(words: &mut [u64], i: usize, bit: u8) {
    if bit == 1 {
        words[i / 64] |= 1 << (i % 64);
    }
}

/// Returns a uniquely owned view of a copy-on-write layer, reallocating if
/// the layer is still shared with another path.
fn fresh<T: Copy + Default>(layer: &mut Rc<Box<[T]>>) -> &mut [T] {
    if Rc::get_mut(layer).is_none() {
        *layer = Rc::new(vec![T::default(); layer.len()].into_boxed_slice());
    }
    Rc::get_mut(layer).expect("uniquely owned after replacement")
}

/// One decoding hypothesis. Layer `d - 1` of `llr`/`sums` holds the values
/// at tree depth `d` (length `N >> d`); the depth-0 channel layer is shared
/// by all paths and lives outside. All layer writes are full overwrites, so
/// sharing stale contents through `Rc` is safe.
struct Path {
    llr: Vec<Rc<Box<[f64]>>>,
    sums: Vec<Rc<Box<[u8]>>>,
    decisions: Vec<u64>,
    metric: f64,
}

impl Path {
    fn new(n: usize, block_len: usize) -> Self {
        Self {
            llr: (1..=n)
                .map(|d| Rc::new(vec![0.0; block_len >> d].into_boxed_slice()))
                .collect(),
            sums: (1..=n)
                .map(|d| Rc::new(vec![0u8; block_len >> d].into_boxed_slice()))
                .collect(),
            decisions: vec![0; block_len.div_ceil(64)],
            metric: 0.0,
        }
    }
}

impl Clone for Path {
    fn clone(&self) -> Self {
        Self {
            llr: self.llr.clone(),
            sums: self.sums.clone(),
            decisions: self.decisions.clone(),
            metric: self.metric,
        }
    }
}

struct Candidate {
    parent: usize,
    bit: u8,
    metric: f64,
}

/// Reusable SC-list decoder for one code spec.
///
/// The instance holds only read-only tables, so one decoder can serve many
/// sequential decodes and may be shared across threads.
pub struct ListDecoder {
    n: usize,
    block_len: usize,
    permutation: Vec<usize>,
    /// `Some(rank)` at frozen positions (rank in the ascending frozen set),
    /// `None` at information positions.
    frozen_rank: Vec<Option<u32>>,
}

impl ListDecoder {
    pub fn new(spec: &CodeSpec) -> Self {
        let mask = spec.info_mask();
        let mut rank = 0u32;
        let frozen_rank = mask
            .iter()
            .map(|&info| {
                if info {
                    None
                } else {
                    let r = rank;
                    rank += 1;
                    Some(r)
                }
            })
            .collect();
        Self {
            n: spec.n() as usize,
            block_len: spec.block_len(),
            permutation: bit_reversal_permutation(spec.n()),
            frozen_rank,
        }
    }

    /// Decodes the coset identified by `syndrome`.
    ///
    /// # Parameters
    ///
    /// * `llrs` — channel LLRs, one per codeword position.
    /// * `syndrome` — frozen-set values, ascending order.
    /// * `list_size` — maximum number of paths kept; 1 reproduces plain SC.
    /// * `crc` — when given, the reported estimate is the best-metric path
    ///   whose codeword ends in a valid checksum, falling back to the
    ///   overall best path (with `crc_pass = false`) if none does.
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidArgument`](crate::Error::InvalidArgument) on
    /// dimension mismatches or `list_size == 0`.
    pub fn decode(
        &self,
        llrs: &LlrVector,
        syndrome: &Syndrome,
        list_size: usize,
        crc: Option<&CrcConfig>,
    ) -> Result<DecodeResult> {
        if llrs.len() != self.block_len {
            return Err(invalid(format!(
                "LLR length {} does not match block length {}",
                llrs.len(),
                self.block_len
            )));
        }
        let frozen_len = self.frozen_rank.iter().flatten().count();
        if syndrome.len() != frozen_len {
            return Err(invalid(format!(
                "syndrome length {} does not match frozen-set size {frozen_len}",
                syndrome.len()
            )));
        }
        if list_size == 0 {
            return Err(invalid("list size must be at least 1"));
        }

        let channel: Vec<f64> = self
            .permutation
            .iter()
            .map(|&j| llrs.values()[j])
            .collect();
        let mut paths = vec![Path::new(self.n, self.block_len)];
        let mut scratch = (
            Vec::with_capacity(self.block_len),
            Vec::with_capacity(self.block_len),
        );
        let mut leaf_llrs: Vec<f64> = Vec::with_capacity(list_size);
        let mut candidates: Vec<Candidate> = Vec::with_capacity(2 * list_size);
        let mut keep: Vec<usize> = Vec::with_capacity(2 * list_size);

        for phase in 0..self.block_len {
            leaf_llrs.clear();
            for path in paths.iter_mut() {
                leaf_llrs.push(self.leaf_llr(path, &channel, phase));
            }
            match self.frozen_rank[phase] {
                Some(rank) => {
                    let bit = syndrome.bits()[rank as usize];
                    for (path, &llr) in paths.iter_mut().zip(&leaf_llrs) {
                        if hard_decision(llr) != bit {
                            path.metric += llr.abs();
                        }
                        set_bit(&mut path.decisions, phase, bit);
                        self.update_sums(path, phase, bit, &mut scratch);
                    }
                }
                None => {
                    candidates.clear();
                    for (parent, &llr) in leaf_llrs.iter().enumerate() {
                        let base = paths[parent].metric;
                        let penalty = llr.abs();
                        let (m0, m1) = if llr < 0.0 {
                            (base + penalty, base)
                        } else {
                            (base, base + penalty)
                        };
                        candidates.push(Candidate {
                            parent,
                            bit: 0,
                            metric: m0,
                        });
                        candidates.push(Candidate {
                            parent,
                            bit: 1,
                            metric: m1,
                        });
                    }
                    keep.clear();
                    keep.extend(0..candidates.len());
                    if candidates.len() > list_size {
                        // Candidates are generated in lexicographic order of
                        // the extended decision history; the index tie-break
                        // keeps the lexicographically first among equals, and
                        // re-sorting the survivors restores that order.
                        keep.sort_unstable_by(|&i, &j| {
                            candidates[i]
                                .metric
                                .total_cmp(&candidates[j].metric)
                                .then(i.cmp(&j))
                        });
                        keep.truncate(list_size);
                        keep.sort_unstable();
                    }
                    let mut uses = vec![0u8; paths.len()];
                    for &i in &keep {
                        uses[candidates[i].parent] += 1;
                    }
                    let mut parents: Vec<Option<Path>> =
                        paths.drain(..).map(Some).collect();
                    for &i in &keep {
                        let cand = &candidates[i];
                        uses[cand.parent] -= 1;
                        let mut path = if uses[cand.parent] == 0 {
                            parents[cand.parent].take().expect("taken once")
                        } else {
                            parents[cand.parent].as_ref().expect("still present").clone()
                        };
                        path.metric = cand.metric;
                        set_bit(&mut path.decisions, phase, cand.bit);
                        self.update_sums(&mut path, phase, cand.bit, &mut scratch);
                        paths.push(path);
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..paths.len()).collect();
        order.sort_by(|&i, &j| {
            paths[i]
                .metric
                .total_cmp(&paths[j].metric)
                .then(i.cmp(&j))
        });
        let materialize = |path: &Path| -> Result<(BitVector, BitVector)> {
            let bits = (0..self.block_len)
                .map(|i| get_bit(&path.decisions, i))
                .collect();
            let u = BitVector::new(bits)?;
            let x = polar_transform(&u)?;
            Ok((u, x))
        };

        let mut selected = None;
        if let Some(cfg) = crc {
            for &i in &order {
                let (u, x) = materialize(&paths[i])?;
                if crc_check(&x, cfg) {
                    selected = Some((i, u, x, true));
                    break;
                }
            }
        }
        let (index, u_hat, x_hat, crc_pass) = match selected {
            Some(s) => s,
            None => {
                let i = order[0];
                let (u, x) = materialize(&paths[i])?;
                (i, u, x, crc.is_none())
            }
        };
        debug_assert!(
            self.frozen_rank.iter().enumerate().all(|(i, r)| match r {
                Some(rank) => u_hat[i] == syndrome.bits()[*rank as usize],
                None => true,
            }),
            "decoded vector left the requested coset"
        );
        Ok(DecodeResult {
            u_hat,
            x_hat,
            crc_pass,
            selected_metric: paths[index].metric,
        })
    }

    /// Computes the LLR of leaf `phase` for one path, refreshing exactly the
    /// layers whose inputs changed since the previous leaf: a `g` update at
    /// the depth addressed by the lowest zero-run of `phase`, then `f`
    /// updates below it.
    fn leaf_llr(&self, path: &mut Path, channel: &[f64], phase: usize) -> f64 {
        let start = if phase == 0 {
            1
        } else {
            let depth = self.n - phase.trailing_zeros() as usize;
            self.g_layer(path, channel, depth);
            depth + 1
        };
        for depth in start..=self.n {
            self.f_layer(path, channel, depth);
        }
        path.llr[self.n - 1][0]
    }

    fn f_layer(&self, path: &mut Path, channel: &[f64], depth: usize) {
        let half = self.block_len >> depth;
        let parent = (depth > 1).then(|| Rc::clone(&path.llr[depth - 2]));
        let src: &[f64] = match &parent {
            Some(rc) => rc,
            None => channel,
        };
        let dst = fresh(&mut path.llr[depth - 1]);
        for i in 0..half {
            dst[i] = f_min(src[i], src[i + half]);
        }
    }

    fn g_layer(&self, path: &mut Path, channel: &[f64], depth: usize) {
        let half = self.block_len >> depth;
        let parent = (depth > 1).then(|| Rc::clone(&path.llr[depth - 2]));
        let src: &[f64] = match &parent {
            Some(rc) => rc,
            None => channel,
        };
        let left_sums = Rc::clone(&path.sums[depth - 1]);
        let dst = fresh(&mut path.llr[depth - 1]);
        for i in 0..half {
            dst[i] = g_update(src[i], src[i + half], left_sums[i]);
        }
    }

    /// Folds the freshly decided bit into the partial-sum layers: walks up
    /// through every depth where `phase` has a trailing 1 bit (each such
    /// node just finished its right child) and stores the combined block
    /// codeword at the first left-child ancestor.
    fn update_sums(
        &self,
        path: &mut Path,
        phase: usize,
        bit: u8,
        scratch: &mut (Vec<u8>, Vec<u8>),
    ) {
        if phase + 1 == self.block_len {
            return;
        }
        let (cur, next) = scratch;
        cur.clear();
        cur.push(bit);
        let mut depth = self.n;
        while (phase >> (self.n - depth)) & 1 == 1 {
            let left = &path.sums[depth - 1];
            debug_assert_eq!(left.len(), cur.len());
            next.clear();
            next.extend(left.iter().zip(cur.iter()).map(|(l, c)| l ^ c));
            next.extend_from_slice(cur);
            std::mem::swap(cur, next);
            depth -= 1;
        }
        let dst = fresh(&mut path.sums[depth - 1]);
        dst.copy_from_slice(cur);
    }
}

/// One-shot list decode; builds a [`ListDecoder`] internally.
pub fn scl_decode(
    llrs: &LlrVector,
    spec: &CodeSpec,
    syndrome: &Syndrome,
    list_size: usize,
    crc: Option<&CrcConfig>,
) -> Result<DecodeResult> {
    ListDecoder::new(spec).decode(llrs, syndrome, list_size, crc)
}

/// Plain successive-cancellation coset decoding.
///
/// Implemented as an independent depth-first recursion rather than through
/// [`ListDecoder`] with list size 1, so the two can cross-check each other;
/// they must agree bit for bit (a unit test enforces this).
///
/// # Errors
///
/// Returns [`Error::InvalidArgument`](crate::Error::InvalidArgument) on
/// dimension mismatches.
pub fn sc_decode(llrs: &LlrVector, spec: &CodeSpec, syndrome: &Syndrome) -> Result<DecodeResult> {
    if llrs.len() != spec.block_len() {
        return Err(invalid(format!(
            "LLR length {} does not match block length {}",
            llrs.len(),
            spec.block_len()
        )));
    }
    if syndrome.len() != spec.frozen_len() {
        return Err(invalid(format!(
            "syndrome length {} does not match frozen-set size {}",
            syndrome.len(),
            spec.frozen_len()
        )));
    }

    struct Ctx<'a> {
        mask: Vec<bool>,
        frozen_rank: Vec<usize>,
        syndrome: &'a BitVector,
        u: Vec<u8>,
        metric: f64,
    }

    fn recurse(llr: &[f64], base: usize, ctx: &mut Ctx) -> Vec<u8> {
        if llr.len() == 1 {
            let value = llr[0];
            let hard = hard_decision(value);
            let bit = if ctx.mask[base] {
                hard
            } else {
                ctx.syndrome[ctx.frozen_rank[base]]
            };
            if bit != hard {
                ctx.metric += value.abs();
            }
            ctx.u[base] = bit;
            return vec![bit];
        }
        let half = llr.len() / 2;
        let left_llr: Vec<f64> = (0..half).map(|i| f_min(llr[i], llr[i + half])).collect();
        let left = recurse(&left_llr, base, ctx);
        let right_llr: Vec<f64> = (0..half)
            .map(|i| g_update(llr[i], llr[i + half], left[i]))
            .collect();
        let right = recurse(&right_llr, base + half, ctx);
        let mut beta: Vec<u8> = left.iter().zip(&right).map(|(a, b)| a ^ b).collect();
        beta.extend_from_slice(&right);
        beta
    }

    let len = spec.block_len();
    let permutation = bit_reversal_permutation(spec.n());
    let channel: Vec<f64> = permutation.iter().map(|&j| llrs.values()[j]).collect();
    let mask = spec.info_mask();
    let mut frozen_rank = vec![0usize; len];
    let mut rank = 0;
    for (i, rank_slot) in frozen_rank.iter_mut().enumerate() {
        if !mask[i] {
            *rank_slot = rank;
            rank += 1;
        }
    }
    let mut ctx = Ctx {
        mask,
        frozen_rank,
        syndrome: syndrome.bits(),
        u: vec![0; len],
        metric: 0.0,
    };
    let beta = recurse(&channel, 0, &mut ctx);

    let u_hat = BitVector::new(ctx.u)?;
    // The root partial sum is the codeword in permuted coordinates.
    let mut x = vec![0u8; len];
    for (j, &b) in beta.iter().enumerate() {
        x[permutation[j]] = b;
    }
    let x_hat = BitVector::new(x)?;
    debug_assert_eq!(x_hat, polar_transform(&u_hat)?);
    debug_assert_eq!(
        &crate::code::compute_syndrome(&x_hat, spec)?.bits(),
        &syndrome.bits(),
        "decoded codeword left the requested coset"
    );
    Ok(DecodeResult {
        u_hat,
        x_hat,
        crc_pass: true,
        selected_metric: ctx.metric,
    })
}
