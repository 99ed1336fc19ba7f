//! The polar transform and bit-reversal machinery.
//!
//! The transform is `x = u · G_N` over GF(2), with `G_N = B_N F^{⊗n}` where
//! `F = [[1, 0], [1, 1]]` is the binary kernel and `B_N` the bit-reversal
//! permutation matrix for `N = 2^n`. Applying `B_N` first reduces the product
//! to a plain Kronecker-power multiply, done in place by a butterfly network
//! in `N log2 N` bit operations. `G_N` is its own inverse, so the same
//! routine maps codewords back to transform-domain vectors.

use crate::bits::BitVector;
use crate::{invalid, Result};

/// Reverses the lowest `n` bits of `i`.
///
/// Panics if `i >= 2^n`.
pub fn bit_reverse(i: usize, n: u32) -> usize {
    assert!(n < usize::BITS && i < (1 << n), "index out of range");
    if n == 0 {
        return 0;
    }
    i.reverse_bits() >> (usize::BITS - n)
}

/// The bit-reversal permutation on `2^n` indices: position `j` holds
/// `bit_reverse(j, n)`. The permutation is its own inverse.
pub fn bit_reversal_permutation(n: u32) -> Vec<usize> {
    (0..1usize << n).map(|j| bit_reverse(j, n)).collect()
}

/// Applies `x = u · G_N`.
///
/// # Errors
///
/// Returns [`Error::InvalidArgument`](crate::Error::InvalidArgument) if the
/// length is not a power of two or is zero.
pub fn polar_transform(u: &BitVector) -> Result<BitVector> {
    let len = u.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(invalid(format!(
            "transform length must be a nonzero power of two, got {len}"
        )));
    }
    let n = len.trailing_zeros();
    let mut x: Vec<u8> = (0..len).map(|j| u[bit_reverse(j, n)]).collect();
    kernel_multiply_in_place(&mut x);
    BitVector::new(x)
}

/// In-place `x <- x · F^{⊗n}` in natural bit order. The length must be a
/// power of two.
fn kernel_multiply_in_place(x: &mut [u8]) {
    let len = x.len();
    let mut half = len / 2;
    while half >= 1 {
        for block in (0..len).step_by(2 * half) {
            for i in block..block + half {
                x[i] ^= x[i + half];
            }
        }
        half /= 2;
    }
}
