//! Exact linear algebra over GF(2).
//!
//! Rows are packed into `u64` words, column `c` living in word `c / 64` at
//! bit `c % 64`. Padding bits past `cols` are always zero, so derived
//! equality and hashing compare the semantic content only.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

const WORD_BITS: usize = 64;

#[inline]
fn words_for(cols: usize) -> usize {
    cols.div_ceil(WORD_BITS)
}

/// A rank-deficient square matrix was passed to [`invert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("matrix is singular over GF(2): rank {rank} < {size}")]
pub struct SingularError {
    pub rank: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseMatrixError {
    #[error("line {line}: unexpected character {ch:?} (expected '0' or '1')")]
    BadChar { line: usize, ch: char },
    #[error("line {line}: row has {found} entries, expected {expected}")]
    Ragged {
        line: usize,
        found: usize,
        expected: usize,
    },
}

/// Rectangular matrix over GF(2) with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            words: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, true);
            }
        }
        m
    }

    /// Builds a matrix from rows of 0/1 entries. All rows must have equal length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged row {i}");
            for (j, &b) in row.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Builds a matrix whose rows are given as little-endian packed words
    /// (`cols <= 64`, bit `c` of the word is column `c`).
    pub fn from_row_words(cols: usize, rows: &[u64]) -> Self {
        assert!(cols <= WORD_BITS, "from_row_words supports at most 64 columns");
        let mask = if cols == WORD_BITS {
            u64::MAX
        } else {
            (1u64 << cols) - 1
        };
        let mut m = Self::zeros(rows.len(), cols);
        for (i, &w) in rows.iter().enumerate() {
            assert_eq!(w & !mask, 0, "row {i} has bits beyond column {cols}");
            if m.stride > 0 {
                m.words[i * m.stride] = w;
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        (self.words[r * self.stride + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        let w = &mut self.words[r * self.stride + c / WORD_BITS];
        let bit = 1u64 << (c % WORD_BITS);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        self.words[r * self.stride + c / WORD_BITS] ^= 1u64 << (c % WORD_BITS);
    }

    /// Packed words of row `r`.
    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.words[r * self.stride..(r + 1) * self.stride]
    }

    /// Row `r` as a vector of 0/1 entries.
    pub fn row_bits(&self, r: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(r, c) as u8).collect()
    }

    pub fn row(&self, r: usize) -> BitMatrix {
        let mut m = Self::zeros(1, self.cols);
        m.words.copy_from_slice(self.row_words(r));
        m
    }

    pub fn is_zero_row(&self, r: usize) -> bool {
        self.row_words(r).iter().all(|&w| w == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// XORs row `src` into row `dst`.
    pub fn xor_row(&mut self, dst: usize, src: usize) {
        assert!(dst < self.rows && src < self.rows);
        if dst == src {
            self.words[dst * self.stride..(dst + 1) * self.stride].fill(0);
            return;
        }
        for k in 0..self.stride {
            let v = self.words[src * self.stride + k];
            self.words[dst * self.stride + k] ^= v;
        }
    }

    /// Number of positions where `self` and `other` differ.
    pub fn hamming_distance(&self, other: &BitMatrix) -> usize {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Vertical concatenation.
    pub fn stack(&self, below: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, below.cols, "stack: column mismatch");
        let mut words = Vec::with_capacity(self.words.len() + below.words.len());
        words.extend_from_slice(&self.words);
        words.extend_from_slice(&below.words);
        BitMatrix {
            rows: self.rows + below.rows,
            cols: self.cols,
            stride: self.stride,
            words,
        }
    }

    /// Columns `start..end` of every row.
    pub fn columns(&self, start: usize, end: usize) -> BitMatrix {
        assert!(start <= end && end <= self.cols);
        let mut m = Self::zeros(self.rows, end - start);
        for r in 0..self.rows {
            for c in start..end {
                if self.get(r, c) {
                    m.set(r, c - start, true);
                }
            }
        }
        m
    }

    /// Horizontal concatenation `[self | right]`.
    pub fn hconcat(&self, right: &BitMatrix) -> BitMatrix {
        assert_eq!(self.rows, right.rows, "hconcat: row mismatch");
        let mut m = Self::zeros(self.rows, self.cols + right.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    m.set(r, c, true);
                }
            }
            for c in 0..right.cols {
                if right.get(r, c) {
                    m.set(r, self.cols + c, true);
                }
            }
        }
        m
    }

    /// Keeps only the first `n` rows.
    pub fn truncate_rows(&mut self, n: usize) {
        if n < self.rows {
            self.rows = n;
            self.words.truncate(n * self.stride);
        }
    }

    /// True when the matrix is in reduced row echelon form (zero rows, if
    /// any, at the bottom).
    pub fn is_rref(&self) -> bool {
        let pivots = self.pivot_columns();
        let nonzero = pivots.len();
        if (nonzero..self.rows).any(|r| !self.is_zero_row(r)) {
            return false;
        }
        if pivots.windows(2).any(|w| w[0] >= w[1]) {
            return false;
        }
        pivots
            .iter()
            .enumerate()
            .all(|(r, &c)| (0..self.rows).all(|o| o == r || !self.get(o, c)))
    }

    /// Leading-one column of each row, stopping at the first zero row.
    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            match self.leading_column(r) {
                Some(c) => out.push(c),
                None => break,
            }
        }
        out
    }

    fn leading_column(&self, r: usize) -> Option<usize> {
        self.row_words(r)
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * WORD_BITS + w.trailing_zeros() as usize)
    }
}

/// Gauss-Jordan elimination in place on packed rows; returns the rank.
/// With `full` unset only forward elimination is done (enough for rank).
fn eliminate(words: &mut [u64], rows: usize, cols: usize, stride: usize, full: bool) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let wi = c / WORD_BITS;
        let bit = 1u64 << (c % WORD_BITS);
        let Some(p) = (rank..rows).find(|&r| words[r * stride + wi] & bit != 0) else {
            continue;
        };
        if p != rank {
            for k in 0..stride {
                words.swap(p * stride + k, rank * stride + k);
            }
        }
        let start = if full { 0 } else { rank + 1 };
        for r in start..rows {
            if r != rank && words[r * stride + wi] & bit != 0 {
                // columns before wi are already cleared in the pivot row
                for k in wi..stride {
                    let v = words[rank * stride + k];
                    words[r * stride + k] ^= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of at most 64 rows with at most 64 columns, via an XOR basis.
fn rank_single_word(rows: impl Iterator<Item = u64>) -> usize {
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for mut v in rows {
        for b in &basis[..rank] {
            // each basis vector is keyed by its lowest set bit
            if v & (b & b.wrapping_neg()) != 0 {
                v ^= b;
            }
        }
        if v != 0 {
            // keep the basis fully reduced on the new key
            let key = v & v.wrapping_neg();
            for b in &mut basis[..rank] {
                if *b & key != 0 {
                    *b ^= v;
                }
            }
            basis[rank] = v;
            rank += 1;
        }
    }
    rank
}

/// Reduced row echelon form of `m` together with its rank. Zero rows are
/// kept (at the bottom) so the shape is unchanged.
pub fn rref(m: &BitMatrix) -> (BitMatrix, usize) {
    let mut out = m.clone();
    let rank = eliminate(&mut out.words, out.rows, out.cols, out.stride, true);
    (out, rank)
}

pub fn rank(m: &BitMatrix) -> usize {
    if m.stride == 1 && m.rows <= WORD_BITS {
        return rank_single_word(m.words.iter().copied());
    }
    let mut words = m.words.clone();
    eliminate(&mut words, m.rows, m.cols, m.stride, false)
}

/// Inverse of a square matrix over GF(2).
pub fn invert(a: &BitMatrix) -> Result<BitMatrix, SingularError> {
    assert_eq!(a.rows, a.cols, "invert: matrix is {}x{}, not square", a.rows, a.cols);
    let n = a.rows;
    let mut left = a.clone();
    let mut right = BitMatrix::identity(n);
    let stride = left.stride;
    for c in 0..n {
        let wi = c / WORD_BITS;
        let bit = 1u64 << (c % WORD_BITS);
        let Some(p) = (c..n).find(|&r| left.words[r * stride + wi] & bit != 0) else {
            return Err(SingularError { rank: rank(a), size: n });
        };
        if p != c {
            for k in 0..stride {
                left.words.swap(p * stride + k, c * stride + k);
                right.words.swap(p * stride + k, c * stride + k);
            }
        }
        for r in 0..n {
            if r != c && left.words[r * stride + wi] & bit != 0 {
                for k in 0..stride {
                    let lv = left.words[c * stride + k];
                    left.words[r * stride + k] ^= lv;
                    let rv = right.words[c * stride + k];
                    right.words[r * stride + k] ^= rv;
                }
            }
        }
    }
    Ok(right)
}

/// GF(2) product `a · b`.
pub fn matmul(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    assert_eq!(
        a.cols, b.rows,
        "matmul: {}x{} times {}x{}",
        a.rows, a.cols, b.rows, b.cols
    );
    let mut out = BitMatrix::zeros(a.rows, b.cols);
    let stride = out.stride;
    for i in 0..a.rows {
        for k in 0..a.cols {
            if a.get(i, k) {
                let src = b.row_words(k);
                for (d, s) in out.words[i * stride..(i + 1) * stride].iter_mut().zip(src) {
                    *d ^= s;
                }
            }
        }
    }
    out
}

/// A subspace of F_2^n held by its canonical RREF basis (no zero rows).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    basis: BitMatrix,
}

impl Subspace {
    /// The zero subspace of F_2^n.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            basis: BitMatrix::zeros(0, ambient_dim),
        }
    }

    /// The whole space F_2^n.
    pub fn full(ambient_dim: usize) -> Self {
        Self {
            basis: BitMatrix::identity(ambient_dim),
        }
    }

    /// Row space of `m`.
    pub fn span(m: &BitMatrix) -> Self {
        let (mut basis, rank) = rref(m);
        basis.truncate_rows(rank);
        Self { basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &BitMatrix {
        &self.basis
    }

    pub fn into_basis(self) -> BitMatrix {
        self.basis
    }

    /// Whether the row vector `v` (a 1×n matrix) lies in the subspace.
    pub fn contains(&self, v: &BitMatrix) -> bool {
        assert_eq!(v.rows, 1);
        rank(&self.basis.stack(v)) == self.dim()
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in F_2^{}) ", self.dim(), self.ambient_dim())?;
        fmt::Debug::fmt(&self.basis, f)
    }
}

pub fn row_space(m: &BitMatrix) -> Subspace {
    Subspace::span(m)
}

/// Subspace distance `dim(U+V) - dim(U∩V) = 2·dim(U+V) - dim U - dim V`.
pub fn subspace_distance(u: &Subspace, v: &Subspace) -> usize {
    assert_eq!(
        u.ambient_dim(),
        v.ambient_dim(),
        "subspace_distance: ambient dimensions differ"
    );
    let sum_dim = if u.basis.stride == 1 && u.dim() + v.dim() <= WORD_BITS {
        rank_single_word(u.basis.words.iter().chain(&v.basis.words).copied())
    } else {
        rank(&u.basis.stack(&v.basis))
    };
    2 * sum_dim - u.dim() - v.dim()
}

impl fmt::Display for BitMatrix {
    /// One line per row, entries as '0'/'1'.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            if r + 1 < self.rows {
                f.write_str("\n")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            f.write_str("  ")?;
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            f.write_str("\n")?;
        }
        f.write_str("]")
    }
}

impl FromStr for BitMatrix {
    type Err = ParseMatrixError;

    /// Parses rows of '0'/'1' characters, one per non-empty line. Spaces,
    /// commas and tabs inside a row are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut rows: Vec<Vec<u8>> = Vec::new();
        for (idx, line) in s.lines().enumerate() {
            let mut row = Vec::new();
            for ch in line.chars() {
                match ch {
                    '0' => row.push(0),
                    '1' => row.push(1),
                    ' ' | '\t' | ',' | '\r' => {}
                    _ => return Err(ParseMatrixError::BadChar { line: idx + 1, ch }),
                }
            }
            if row.is_empty() {
                continue;
            }
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(ParseMatrixError::Ragged {
                        line: idx + 1,
                        found: row.len(),
                        expected: first.len(),
                    });
                }
            }
            rows.push(row);
        }
        Ok(BitMatrix::from_rows(&rows))
    }
}
