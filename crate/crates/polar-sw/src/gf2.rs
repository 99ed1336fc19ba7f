//! Dense GF(2) matrices.
//!
//! Rows are packed 64 bits per word, so multiplication and elimination run
//! on whole words. Sizes stay modest (at most a few thousand on a side, used
//! by the algebraic systematic encoder and by tests), so no effort is spent
//! on blocking or bit-slicing beyond the word packing.

use crate::bits::BitVector;

/// A dense matrix over GF(2).
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    /// An all-zero `rows x cols` matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64).max(1);
        Self {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    /// The `n x n` identity.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        assert!(r < self.rows && c < self.cols, "index out of range");
        ((self.data[r * self.words_per_row + c / 64] >> (c % 64)) & 1) as u8
    }

    pub fn set(&mut self, r: usize, c: usize, bit: u8) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        assert!(bit <= 1, "bit value must be 0 or 1");
        let word = &mut self.data[r * self.words_per_row + c / 64];
        let mask = 1u64 << (c % 64);
        if bit == 1 {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let (src_off, dst_off) = (src * self.words_per_row, dst * self.words_per_row);
        for w in 0..self.words_per_row {
            let v = self.data[src_off + w];
            self.data[dst_off + w] ^= v;
        }
    }

    /// Row-vector product `v · M`. Panics if `v.len() != rows`.
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.rows, "vector length must match row count");
        let mut acc = vec![0u64; self.words_per_row];
        for (r, &bit) in v.iter().enumerate() {
            if bit == 1 {
                for (a, w) in acc.iter_mut().zip(self.row(r)) {
                    *a ^= w;
                }
            }
        }
        let bits = (0..self.cols)
            .map(|c| ((acc[c / 64] >> (c % 64)) & 1) as u8)
            .collect();
        BitVector::new(bits).expect("bits are 0/1 by construction")
    }

    /// Matrix product `self · other`. Panics on dimension mismatch.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must match");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_off = r * out.words_per_row;
            for c in 0..self.cols {
                if self.get(r, c) == 1 {
                    let src = other.row(c);
                    for (w, &word) in src.iter().enumerate() {
                        out.data[out_off + w] ^= word;
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) == 1 {
                    out.set(c, r, 1);
                }
            }
        }
        out
    }

    /// The submatrix formed by the listed rows and columns, in the order
    /// given. Panics if any index is out of range.
    pub fn submatrix(&self, row_ids: &[usize], col_ids: &[usize]) -> Self {
        let mut out = Self::zeros(row_ids.len(), col_ids.len());
        for (r, &sr) in row_ids.iter().enumerate() {
            for (c, &sc) in col_ids.iter().enumerate() {
                if self.get(sr, sc) == 1 {
                    out.set(r, c, 1);
                }
            }
        }
        out
    }

    /// The inverse, or `None` if the matrix is singular or not square.
    ///
    /// Gauss–Jordan elimination on the augmented pair `[A | I]`.
    pub fn invert(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut left = self.clone();
        let mut right = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| left.get(r, col) == 1)?;
            if pivot != col {
                left.swap_rows(pivot, col);
                right.swap_rows(pivot, col);
            }
            for r in 0..n {
                if r != col && left.get(r, col) == 1 {
                    left.xor_row_into(col, r);
                    right.xor_row_into(col, r);
                }
            }
        }
        Some(right)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.words_per_row {
            self.data
                .swap(a * self.words_per_row + w, b * self.words_per_row + w);
        }
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{}", self.get(r, c))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
