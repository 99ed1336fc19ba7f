//! Frozen-set construction for the binary symmetric channel.
//!
//! Synthetic-channel reliabilities are computed by degrading-merge density
//! evolution in the style of Tal and Vardy. Every synthetic channel is kept
//! as an explicit symmetric channel, stored as conjugate output-symbol pairs
//! with their likelihoods under input 0. Each polarization step applies the
//! minus or plus kernel combination exactly, then merges the output alphabet
//! back down to a configurable size by repeatedly fusing the pair of
//! adjacent (in likelihood-ratio order) symbol groups whose fusion loses the
//! least mutual information. Merging only ever degrades a channel, so the
//! reported error probabilities are upper bounds on the true ones, and
//! selecting the K smallest keeps the bound interpretation intact.
//!
//! The error bound of the channel seen at transform position `i` is the
//! probability that a maximum-a-posteriori decision on that position is
//! wrong, given the channel outputs and all earlier positions. Walking the
//! combination tree minus-branch first enumerates these channels directly in
//! transform-domain order: the branch choices along the path to leaf `i` are
//! the bits of `i`, most significant first.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::code::CodeSpec;
use crate::{invalid, Result};

/// Default output-alphabet cap (counted in symbols, so half as many
/// conjugate pairs) used by the CLI when none is given.
pub const DEFAULT_FIDELITY: usize = 256;

/// Largest supported transform depth for construction.
const MAX_DEPTH: u32 = 20;

/// A symmetric binary-input channel, stored as conjugate symbol pairs.
///
/// Entry `(a, b)` is a group of output symbols with `a = P(group | 0)` and
/// `b = P(group | 1)`, canonicalized so `a >= b`; the conjugate group is
/// implicit. Masses sum to one over all entries.
#[derive(Clone, Debug)]
struct PairChannel {
    pairs: Vec<(f64, f64)>,
}

impl PairChannel {
    fn bsc(p: f64) -> Self {
        Self {
            pairs: vec![(1.0 - p, p)],
        }
    }

    /// Error probability of a MAP decision on the input, `sum min(a, b)`.
    fn error_bound(&self) -> f64 {
        self.pairs.iter().map(|&(_, b)| b).sum()
    }
}

/// `x * log2(x)`, continuously extended by 0 at the origin.
fn ent(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Mutual-information contribution of one pair entry.
///
/// Expanding `a lg(2a/(a+b)) + b lg(2b/(a+b))` gives the form below; it is
/// homogeneous of degree one, so aggregating equal-likelihood-ratio symbols
/// into one entry does not change the total.
fn capacity_term(a: f64, b: f64) -> f64 {
    (a + b) + ent(a) + ent(b) - ent(a + b)
}

/// Output entries of `W - W` (the check-side kernel combination).
fn combine_minus(w: &PairChannel) -> Vec<(f64, f64)> {
    let ps = &w.pairs;
    let mut out = Vec::with_capacity(ps.len() * (ps.len() + 1) / 2);
    for (k, &(ak, bk)) in ps.iter().enumerate() {
        out.push((ak * ak + bk * bk, 2.0 * ak * bk));
        for &(al, bl) in &ps[k + 1..] {
            out.push((2.0 * (ak * al + bk * bl), 2.0 * (ak * bl + bk * al)));
        }
    }
    out
}

/// Output entries of `W + W` (the variable-side kernel combination, with the
/// earlier input revealed).
fn combine_plus(w: &PairChannel) -> Vec<(f64, f64)> {
    let ps = &w.pairs;
    let mut out = Vec::with_capacity(ps.len() * (ps.len() + 1));
    for (k, &(ak, bk)) in ps.iter().enumerate() {
        out.push((ak * ak, bk * bk));
        out.push((ak * bk, ak * bk));
        for &(al, bl) in &ps[k + 1..] {
            out.push((2.0 * ak * al, 2.0 * bk * bl));
            let cross1 = ak * bl;
            let cross2 = al * bk;
            out.push((2.0 * cross1.max(cross2), 2.0 * cross1.min(cross2)));
        }
    }
    out
}

/// A candidate fusion of two neighboring alphabet entries, ordered so the
/// smallest information loss pops first from a max-heap of `Reverse`d
/// candidates.
#[derive(PartialEq)]
struct Fusion {
    loss: f64,
    left: usize,
    left_version: u32,
    right: usize,
    right_version: u32,
}

impl Eq for Fusion {}

impl Ord for Fusion {
    fn cmp(&self, other: &Self) -> Ordering {
        self.loss
            .total_cmp(&other.loss)
            .then(self.left.cmp(&other.left))
            .then(self.left_version.cmp(&other.left_version))
            .then(self.right.cmp(&other.right))
            .then(self.right_version.cmp(&other.right_version))
    }
}

impl PartialOrd for Fusion {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonicalizes raw kernel-combination output and merges it down to at most
/// `max_pairs` entries, greedily fusing adjacent entries in likelihood-ratio
/// order by least mutual-information loss.
fn degrade(mut entries: Vec<(f64, f64)>, max_pairs: usize) -> PairChannel {
    for e in entries.iter_mut() {
        if e.0 < e.1 {
            *e = (e.1, e.0);
        }
    }
    entries.retain(|&(a, b)| a + b > 0.0);
    let ratio = |(a, b): (f64, f64)| if b == 0.0 { f64::INFINITY } else { a / b };
    entries.sort_unstable_by(|x, y| {
        ratio(*y)
            .total_cmp(&ratio(*x))
            .then(y.0.total_cmp(&x.0))
            .then(y.1.total_cmp(&x.1))
    });
    if entries.len() <= max_pairs {
        return PairChannel { pairs: entries };
    }

    const NONE: usize = usize::MAX;
    struct Node {
        a: f64,
        b: f64,
        prev: usize,
        next: usize,
        version: u32,
        alive: bool,
    }
    let last = entries.len() - 1;
    let mut nodes: Vec<Node> = entries
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| Node {
            a,
            b,
            prev: if i == 0 { NONE } else { i - 1 },
            next: if i == last { NONE } else { i + 1 },
            version: 0,
            alive: true,
        })
        .collect();

    let loss_of = |x: &Node, y: &Node| {
        let c = capacity_term(x.a, x.b) + capacity_term(y.a, y.b)
            - capacity_term(x.a + y.a, x.b + y.b);
        c.max(0.0)
    };
    let mut heap: BinaryHeap<std::cmp::Reverse<Fusion>> = (0..last)
        .map(|i| {
            std::cmp::Reverse(Fusion {
                loss: loss_of(&nodes[i], &nodes[i + 1]),
                left: i,
                left_version: 0,
                right: i + 1,
                right_version: 0,
            })
        })
        .collect();

    let mut alive = nodes.len();
    while alive > max_pairs {
        let std::cmp::Reverse(cand) = heap
            .pop()
            .expect("adjacent fusions exist while two or more entries remain");
        let (i, j) = (cand.left, cand.right);
        if !nodes[i].alive
            || !nodes[j].alive
            || nodes[i].version != cand.left_version
            || nodes[j].version != cand.right_version
        {
            continue;
        }
        nodes[i].a += nodes[j].a;
        nodes[i].b += nodes[j].b;
        nodes[i].version += 1;
        nodes[j].alive = false;
        let after = nodes[j].next;
        nodes[i].next = after;
        if after != NONE {
            nodes[after].prev = i;
        }
        alive -= 1;

        let before = nodes[i].prev;
        if before != NONE {
            heap.push(std::cmp::Reverse(Fusion {
                loss: loss_of(&nodes[before], &nodes[i]),
                left: before,
                left_version: nodes[before].version,
                right: i,
                right_version: nodes[i].version,
            }));
        }
        if after != NONE {
            heap.push(std::cmp::Reverse(Fusion {
                loss: loss_of(&nodes[i], &nodes[after]),
                left: i,
                left_version: nodes[i].version,
                right: after,
                right_version: nodes[after].version,
            }));
        }
    }

    // Fusions fold the right entry into the left, so the leftmost node is
    // never removed; walk the chain from it.
    let mut pairs = Vec::with_capacity(alive);
    let mut at = 0;
    while at != NONE {
        pairs.push((nodes[at].a, nodes[at].b));
        at = nodes[at].next;
    }
    PairChannel { pairs }
}

/// Depth-first evaluation of the `2^depth` leaf channels under `w`, minus
/// branch first, returning their error bounds in tree (leaf) order.
fn evolve_bounds(w: PairChannel, depth: u32, max_pairs: usize) -> Vec<f64> {
    if depth == 0 {
        return vec![w.error_bound()];
    }
    let minus = degrade(combine_minus(&w), max_pairs);
    let plus = degrade(combine_plus(&w), max_pairs);
    drop(w);
    let (mut left, right) = rayon::join(
        || evolve_bounds(minus, depth - 1, max_pairs),
        || evolve_bounds(plus, depth - 1, max_pairs),
    );
    left.extend(right);
    left
}

fn validate_params(n: u32, design_p: f64, fidelity: usize) -> Result<usize> {
    if n == 0 || n > MAX_DEPTH {
        return Err(invalid(format!(
            "transform depth n must be in 1..={MAX_DEPTH}, got {n}"
        )));
    }
    if !(design_p > 0.0 && design_p < 0.5) {
        return Err(invalid(format!(
            "design_p must lie in (0, 0.5), got {design_p}"
        )));
    }
    if fidelity < 2 {
        return Err(invalid(format!(
            "fidelity must be at least 2 symbols, got {fidelity}"
        )));
    }
    Ok(fidelity / 2)
}

/// Upper bounds on the decision-error probability of each synthetic channel,
/// indexed by transform-domain position.
///
/// # Parameters
///
/// * `n` — transform depth, `1..=20`.
/// * `design_p` — BSC crossover probability, in `(0, 0.5)`.
/// * `fidelity` — output-alphabet cap in symbols, at least 2; higher is
///   slower and tighter.
///
/// # Errors
///
/// Returns [`Error::InvalidArgument`](crate::Error::InvalidArgument) for
/// out-of-range parameters.
pub fn synthetic_error_bounds(n: u32, design_p: f64, fidelity: usize) -> Result<Vec<f64>> {
    let max_pairs = validate_params(n, design_p, fidelity)?;
    Ok(evolve_bounds(PairChannel::bsc(design_p), n, max_pairs))
}

/// Bounds are quantized to 12 significant digits before ranking so that
/// channels which are equal by symmetry (and differ only in floating-point
/// noise) tie exactly and fall through to the index tie-break.
fn quantize_bound(pe: f64) -> f64 {
    format!("{pe:.11e}").parse().expect("formatted float reparses")
}

/// Builds the code spec for a BSC(`design_p`) source: picks the `k`
/// transform positions with the smallest error bounds as the information
/// set, breaking ties toward higher positions.
///
/// The returned spec has `l_crc = 0`; add a CRC with
/// [`CodeSpec::with_l_crc`].
///
/// # Errors
///
/// Returns [`Error::InvalidArgument`](crate::Error::InvalidArgument) for
/// out-of-range parameters, including `k` outside `1..2^n`.
pub fn construct_code(n: u32, k: usize, design_p: f64, fidelity: usize) -> Result<CodeSpec> {
    validate_params(n, design_p, fidelity)?;
    let block_len = 1usize << n;
    if k == 0 || k >= block_len {
        return Err(invalid(format!(
            "dimension K must satisfy 0 < K < {block_len}, got {k}"
        )));
    }
    let bounds = synthetic_error_bounds(n, design_p, fidelity)?;
    let quantized: Vec<f64> = bounds.iter().map(|&b| quantize_bound(b)).collect();
    let mut order: Vec<usize> = (0..block_len).collect();
    order.sort_unstable_by(|&i, &j| quantized[i].total_cmp(&quantized[j]).then(j.cmp(&i)));
    let mut info: Vec<usize> = order[..k].to_vec();
    info.sort_unstable();
    CodeSpec::new(n, info, design_p, 0)
}
