//! Systematic polar encoding.
//!
//! A systematic encoder fills in a codeword `x = u · G_N` from two halves of
//! a degrees-of-freedom split: caller-chosen codeword values on the
//! systematic position set `B` and caller-chosen transform values on the
//! frozen set `A^c` (the syndrome). With `B` taken as the bit-reversal image
//! of the information set `A`, the pair `(x_B, u_{A^c})` determines `(x, u)`
//! uniquely for every information set, which is exactly what the
//! nonasymmetric source codec needs: it swaps systematic positions between
//! the two encoders while keeping both blocks inside prescribed cosets.
//!
//! Two implementations are provided. [`AlgebraicEncoder`] materializes the
//! generator matrix and solves for `u_A` by an inverted submatrix; it is the
//! easy-to-trust reference, with `O(N^2)` memory, meant for moderate block
//! lengths and tests. [`systematic_encode_fast`] propagates known values
//! through the butterfly recursion in `O(N log N)` time and no extra
//! allocation beyond the output, and must produce bit-identical results (the
//! tests compare the two exhaustively at small sizes).

use crate::bits::BitVector;
use crate::code::{CodeSpec, Syndrome};
use crate::gf2::BitMatrix;
use crate::transform::{bit_reverse, bit_reversal_permutation, polar_transform};
use crate::{invalid, Error, Result};

/// A code spec extended with the tables the systematic encoders need.
#[derive(Clone, Debug)]
pub struct SystematicSpec {
    base: CodeSpec,
    /// Systematic codeword positions: `{bit_reverse(i) : i in A}`, sorted.
    b_set: Vec<usize>,
    /// For each information-set position (in ascending `A` order), the rank
    /// of its bit-reversed image within the sorted `b_set`.
    b_rank: Vec<usize>,
    info_mask: Vec<bool>,
    frozen_set: Vec<usize>,
    permutation: Vec<usize>,
}

impl SystematicSpec {
    pub fn new(base: CodeSpec) -> Self {
        let n = base.n();
        let mut b_set: Vec<usize> = base
            .info_set()
            .iter()
            .map(|&i| bit_reverse(i, n))
            .collect();
        b_set.sort_unstable();
        let b_rank = base
            .info_set()
            .iter()
            .map(|&i| {
                b_set
                    .binary_search(&bit_reverse(i, n))
                    .expect("image of A member is in B")
            })
            .collect();
        let info_mask = base.info_mask();
        let frozen_set = base.frozen_set();
        let permutation = bit_reversal_permutation(n);
        Self {
            base,
            b_set,
            b_rank,
            info_mask,
            frozen_set,
            permutation,
        }
    }

    pub fn base(&self) -> &CodeSpec {
        &self.base
    }

    /// The systematic position set `B`, ascending.
    pub fn b_set(&self) -> &[usize] {
        &self.b_set
    }

    fn check_inputs(&self, x_b: &BitVector, syndrome: &Syndrome) -> Result<()> {
        if x_b.len() != self.base.dim() {
            return Err(invalid(format!(
                "systematic input length {} does not match K = {}",
                x_b.len(),
                self.base.dim()
            )));
        }
        if syndrome.len() != self.base.frozen_len() {
            return Err(invalid(format!(
                "syndrome length {} does not match N - K = {}",
                syndrome.len(),
                self.base.frozen_len()
            )));
        }
        Ok(())
    }
}

/// Fills `x` and `u` so that `x = u · F^{⊗m}` over this node's range, where
/// positions with `mask` set enter with `x` known and the rest enter with
/// `u` known. The split `x = ((u_L ⊕ u_R) M | u_R M)` makes the right child
/// self-similar; solving it first turns the left child into the same
/// problem for `w = u_L ⊕ u_R`.
fn propagate(x: &mut [u8], u: &mut [u8], mask: &[bool]) {
    if x.len() == 1 {
        if mask[0] {
            u[0] = x[0];
        } else {
            x[0] = u[0];
        }
        return;
    }
    let half = x.len() / 2;
    let (x_left, x_right) = x.split_at_mut(half);
    let (u_left, u_right) = u.split_at_mut(half);
    let (mask_left, mask_right) = mask.split_at(half);
    propagate(x_right, u_right, mask_right);
    for i in 0..half {
        if !mask_left[i] {
            u_left[i] ^= u_right[i];
        }
    }
    propagate(x_left, u_left, mask_left);
    for i in 0..half {
        u_left[i] ^= u_right[i];
    }
}

/// Systematic encoding by certainty propagation through the butterfly.
///
/// # Parameters
///
/// * `x_b` — codeword values at the positions of `b_set`, ascending.
/// * `syndrome` — frozen-set transform values, ascending.
///
/// Returns `(x, u)` with `x = u · G_N`, `x` restricted to `b_set` equal to
/// `x_b`, and `u` restricted to the frozen set equal to the syndrome.
///
/// # Errors
///
/// Returns [`Error::InvalidArgument`](crate::Error::InvalidArgument) on
/// length mismatches.
pub fn systematic_encode_fast(
    x_b: &BitVector,
    syndrome: &Syndrome,
    spec: &SystematicSpec,
) -> Result<(BitVector, BitVector)> {
    spec.check_inputs(x_b, syndrome)?;
    let len = spec.base.block_len();
    // Work in bit-reversed codeword coordinates, where the systematic
    // constraint sits at the positions of A itself.
    let mut x_perm = vec![0u8; len];
    for (t, &i) in spec.base.info_set().iter().enumerate() {
        x_perm[i] = x_b[spec.b_rank[t]];
    }
    let mut u = vec![0u8; len];
    for (rank, &i) in spec.frozen_set.iter().enumerate() {
        u[i] = syndrome.bits()[rank];
    }
    propagate(&mut x_perm, &mut u, &spec.info_mask);
    let mut x = vec![0u8; len];
    for (j, &value) in x_perm.iter().enumerate() {
        x[spec.permutation[j]] = value;
    }
    Ok((BitVector::new(x)?, BitVector::new(u)?))
}

/// Reference systematic encoder built on explicit generator submatrices.
///
/// Solves `u_A = (x_B ⊕ u_{A^c} G_{A^c B}) G_{AB}^{-1}` and re-encodes.
/// Memory is `O(N^2)`; intended for tests and moderate block lengths.
pub struct AlgebraicEncoder {
    spec: SystematicSpec,
    frozen_to_b: BitMatrix,
    info_to_b_inv: BitMatrix,
}

impl AlgebraicEncoder {
    /// Builds the generator submatrices and inverts `G_{AB}`.
    ///
    /// # Errors
    ///
    /// Returns [`Error::Validation`](crate::Error::Validation) if `G_{AB}`
    /// is singular; with `B = bit_reverse(A)` this does not happen, so
    /// hitting it indicates a corrupted spec.
    pub fn new(spec: &SystematicSpec) -> Result<Self> {
        let len = spec.base.block_len();
        let mut generator = BitMatrix::zeros(len, len);
        for row in 0..len {
            let mut basis = BitVector::zeros(len);
            basis.set(row, 1);
            let image = polar_transform(&basis)?;
            for (col, &bit) in image.iter().enumerate() {
                if bit == 1 {
                    generator.set(row, col, 1);
                }
            }
        }
        let frozen_to_b = generator.submatrix(&spec.frozen_set, &spec.b_set);
        let info_to_b = generator.submatrix(spec.base.info_set(), &spec.b_set);
        let info_to_b_inv = info_to_b.invert().ok_or_else(|| {
            Error::Validation("generator submatrix G_AB is singular".into())
        })?;
        Ok(Self {
            spec: spec.clone(),
            frozen_to_b,
            info_to_b_inv,
        })
    }

    /// Same contract as [`systematic_encode_fast`].
    pub fn encode(&self, x_b: &BitVector, syndrome: &Syndrome) -> Result<(BitVector, BitVector)> {
        self.spec.check_inputs(x_b, syndrome)?;
        let frozen_image = self.frozen_to_b.mul_vec(syndrome.bits());
        let rhs = x_b.xor(&frozen_image);
        let u_info = self.info_to_b_inv.mul_vec(&rhs);
        let len = self.spec.base.block_len();
        let mut u = BitVector::zeros(len);
        for (t, &i) in self.spec.base.info_set().iter().enumerate() {
            u.set(i, u_info[t]);
        }
        for (rank, &i) in self.spec.frozen_set.iter().enumerate() {
            u.set(i, syndrome.bits()[rank]);
        }
        let x = polar_transform(&u)?;
        Ok((x, u))
    }
}

/// One-shot reference encode; builds an [`AlgebraicEncoder`] internally.
pub fn systematic_encode(
    x_b: &BitVector,
    syndrome: &Syndrome,
    spec: &SystematicSpec,
) -> Result<(BitVector, BitVector)> {
    AlgebraicEncoder::new(spec)?.encode(x_b, syndrome)
}
