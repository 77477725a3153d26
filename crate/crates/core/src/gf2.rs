//! Dense GF(2) vectors and matrices.
//!
//! All products use the row-vector-on-the-left convention: `x·A` with `x` of
//! length `A.rows()` and a result of length `A.cols()`. [`solve`] follows the
//! same orientation and finds `x` with `x·A = b`.
//!
//! Besides the general-purpose types this module carries two small packed
//! helpers used on the decoder's hot path: [`MulTable`] (byte-sliced
//! multiplication of a `u64`-packed row vector by a fixed matrix) and
//! [`IncrementalSystem`] (an affine system over at most 63 unknowns that is
//! kept in reduced row echelon form as equations arrive).

use std::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid bit string character {0:?}")]
    InvalidBitChar(char),
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

/// A vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut v = Self::zeros(0);
        for bit in bits {
            v.push(bit);
        }
        v
    }

    /// The low `len` bits of `value`, bit 0 first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = value & low_mask(len);
        }
        v
    }

    /// Parses a string of `0`/`1` characters; `_` and whitespace are ignored.
    pub fn parse(text: &str) -> Result<Self, Gf2Error> {
        let mut v = Self::zeros(0);
        for c in text.chars() {
            match c {
                '0' => v.push(false),
                '1' => v.push(true),
                '_' => {}
                c if c.is_whitespace() => {}
                c => return Err(Gf2Error::InvalidBitChar(c)),
            }
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        (self.words[index / 64] >> (index % 64)) & 1 == 1
    }

    pub fn set(&mut self, index: usize, bit: bool) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        let w = &mut self.words[index / 64];
        if bit {
            *w |= 1 << (index % 64);
        } else {
            *w &= !(1 << (index % 64));
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector, Gf2Error> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<(), Gf2Error> {
        if self.len != other.len {
            return Err(Gf2Error::DimensionMismatch {
                context: "xor",
                expected: self.len,
                found: other.len,
            });
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Concatenation `self.other`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        for bit in other.iter() {
            out.push(bit);
        }
        out
    }

    pub fn slice(&self, start: usize, len: usize) -> BitVector {
        assert!(start + len <= self.len, "slice out of range");
        BitVector::from_bits((start..start + len).map(|i| self.get(i)))
    }

    /// Packs the vector into a `u64`, bit 0 first. Panics beyond 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 supports at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    /// Reads `len` bits starting at `start` into a `u64`.
    pub fn bits_u64(&self, start: usize, len: usize) -> u64 {
        assert!(len <= 64 && start + len <= self.len, "bit range out of range");
        let mut out = 0u64;
        for i in 0..len {
            if self.get(start + i) {
                out |= 1 << i;
            }
        }
        out
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// A dense `rows × cols` matrix over GF(2), stored row by row.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows,
            cols,
            data: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self, Gf2Error> {
        for r in &rows {
            if r.len() != cols {
                return Err(Gf2Error::DimensionMismatch {
                    context: "from_rows",
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        Ok(BitMatrix {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        self.data[r].set(c, bit)
    }

    pub fn row(&self, r: usize) -> &BitVector {
        &self.data[r]
    }

    pub fn column(&self, c: usize) -> BitVector {
        BitVector::from_bits((0..self.rows).map(|r| self.get(r, c)))
    }

    pub fn transpose(&self) -> BitMatrix {
        let data = (0..self.cols).map(|c| self.column(c)).collect();
        BitMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Stacks `other` to the right of `self`; both must have the same row count.
    pub fn hstack(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.rows != other.rows {
            return Err(Gf2Error::DimensionMismatch {
                context: "hstack",
                expected: self.rows,
                found: other.rows,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.concat(b))
            .collect();
        Ok(BitMatrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        })
    }

    pub fn rank(&self) -> usize {
        let mut rows: Vec<BitVector> = self.data.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(c)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(c) {
                    row.xor_assign(&pivot).expect("equal lengths");
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Row vector times matrix: `result[j] = ⊕_i v[i]·G[i][j]`.
pub fn matvec(v: &BitVector, g: &BitMatrix) -> Result<BitVector, Gf2Error> {
    if v.len() != g.rows() {
        return Err(Gf2Error::DimensionMismatch {
            context: "matvec",
            expected: g.rows(),
            found: v.len(),
        });
    }
    let mut out = BitVector::zeros(g.cols());
    for i in 0..v.len() {
        if v.get(i) {
            out.xor_assign(g.row(i))?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unique(BitVector),
    NoSolution,
    Underdetermined,
}

/// Solves `x·A = b` by Gaussian elimination, `x` of length `A.rows()`.
pub fn solve(a: &BitMatrix, b: &BitVector) -> Result<Solution, Gf2Error> {
    if b.len() != a.cols() {
        return Err(Gf2Error::DimensionMismatch {
            context: "solve",
            expected: a.cols(),
            found: b.len(),
        });
    }
    let n = a.rows();
    // Column j of A is the equation Σ_i x_i·A[i][j] = b_j; append b_j as bit n.
    let mut eqs: Vec<BitVector> = (0..a.cols())
        .map(|j| {
            let mut e = a.column(j);
            e.push(b.get(j));
            e
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for var in 0..n {
        let Some(p) = (rank..eqs.len()).find(|&r| eqs[r].get(var)) else {
            continue;
        };
        eqs.swap(rank, p);
        let pivot = eqs[rank].clone();
        for (r, eq) in eqs.iter_mut().enumerate() {
            if r != rank && eq.get(var) {
                eq.xor_assign(&pivot)?;
            }
        }
        pivots.push(var);
        rank += 1;
    }
    if eqs[rank..].iter().any(|e| e.get(n)) {
        return Ok(Solution::NoSolution);
    }
    if rank < n {
        return Ok(Solution::Underdetermined);
    }
    let mut x = BitVector::zeros(n);
    for (r, &var) in pivots.iter().enumerate() {
        x.set(var, eqs[r].get(n));
    }
    Ok(Solution::Unique(x))
}

/// A deterministic pseudo-random stream named by `(seed, label)`.
///
/// The ChaCha8 key is the SHA-256 digest of the little-endian seed followed by
/// the UTF-8 label, so streams are reproducible across platforms and distinct
/// labels give independent streams.
#[derive(Clone, Debug)]
pub struct RngStream {
    rng: ChaCha8Rng,
    seed: u64,
    label: String,
}

impl RngStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        let label = label.into();
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        RngStream {
            rng: ChaCha8Rng::from_seed(key),
            seed,
            label,
        }
    }

    /// A fresh stream whose label is `self.label + "/" + suffix`.
    pub fn substream(&self, suffix: &str) -> RngStream {
        RngStream::new(self.seed, format!("{}/{}", self.label, suffix))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `true` with probability `p` (clamped to `[0, 1]`).
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform on `[0, n)` by rejection; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    /// `len ≤ 64` uniform bits packed bit 0 first.
    pub fn bits(&mut self, len: usize) -> u64 {
        assert!(len <= 64);
        self.next_u64() & low_mask(len)
    }
}

/// Mask with the low `len` bits set (`len ≤ 64`).
pub fn low_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// A `rows × cols` matrix of i.i.d. fair bits drawn row-major from `stream`,
/// one 64-bit draw per 64-column chunk of each row.
pub fn bernoulli_matrix(rows: usize, cols: usize, stream: &mut RngStream) -> BitMatrix {
    let mut m = BitMatrix::zeros(rows, cols);
    for r in 0..rows {
        for chunk in 0..words_for(cols) {
            let word = stream.next_u64();
            let width = (cols - chunk * 64).min(64);
            for bit in 0..width {
                if (word >> bit) & 1 == 1 {
                    m.set(r, chunk * 64 + bit, true);
                }
            }
        }
    }
    m
}

/// Byte-sliced lookup tables for `x ↦ x·G` with `x` and the product packed
/// into `u64`s. Requires `G.rows() ≤ 64` and `G.cols() ≤ 64`.
#[derive(Clone, Debug)]
pub struct MulTable {
    tables: Vec<[u64; 256]>,
    cols: usize,
}

impl MulTable {
    pub fn new(g: &BitMatrix) -> Self {
        assert!(g.rows() <= 64 && g.cols() <= 64, "MulTable needs ≤ 64×64");
        let packed: Vec<u64> = (0..g.rows()).map(|r| g.row(r).to_u64()).collect();
        let tables = packed
            .chunks(8)
            .map(|rows| {
                let mut t = [0u64; 256];
                for (byte, slot) in t.iter_mut().enumerate() {
                    *slot = rows
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| (byte >> i) & 1 == 1)
                        .fold(0, |acc, (_, r)| acc ^ r);
                }
                t
            })
            .collect();
        MulTable {
            tables,
            cols: g.cols(),
        }
    }

    #[inline]
    pub fn mul(&self, x: u64) -> u64 {
        let mut acc = 0;
        for (i, t) in self.tables.iter().enumerate() {
            acc ^= t[((x >> (8 * i)) & 0xff) as usize];
        }
        acc
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// Affine system over at most 63 unknowns, maintained in reduced row echelon
/// form.
///
/// Each row packs the coefficient mask in bits 0..63 and the right-hand side
/// in bit 63. Pivots are the lowest set coefficient bit of each row, and every
/// pivot column is cleared from all other rows.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IncrementalSystem {
    rows: Vec<u64>,
    pivots: u64,
    unknowns: u32,
}

/// Right-hand-side bit of a packed row.
pub const RHS: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    Added,
    Redundant,
    Inconsistent,
}

impl IncrementalSystem {
    pub const MAX_UNKNOWNS: usize = 63;

    pub fn new(unknowns: usize) -> Self {
        assert!(unknowns <= Self::MAX_UNKNOWNS);
        IncrementalSystem {
            rows: Vec::new(),
            pivots: 0,
            unknowns: unknowns as u32,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns as usize
    }

    /// Rebuilds a system from rows already in the fully reduced form this
    /// type maintains (pivot = lowest coefficient bit, cleared elsewhere,
    /// right-hand side in bit 63).
    pub fn from_reduced_rows(unknowns: usize, rows: Vec<u64>) -> Self {
        assert!(unknowns <= Self::MAX_UNKNOWNS);
        let pivots = rows.iter().fold(0, |acc, &r| acc | 1 << (r & !RHS).trailing_zeros());
        IncrementalSystem {
            rows,
            pivots,
            unknowns: unknowns as u32,
        }
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// Widens the system with fresh, unconstrained unknowns.
    pub fn extend_unknowns(&mut self, extra: usize) {
        assert!(self.unknowns as usize + extra <= Self::MAX_UNKNOWNS);
        self.unknowns += extra as u32;
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_determined(&self) -> bool {
        self.rows.len() == self.unknowns as usize
    }

    fn reduce(&self, mut row: u64) -> u64 {
        // Rows are fully reduced: each pivot column is set in its own row
        // only, so a single pass clears every pivot.
        for &r in &self.rows {
            if (row >> (r & !RHS).trailing_zeros()) & 1 == 1 {
                row ^= r;
            }
        }
        row
    }

    /// Would `mask·u = rhs` be consistent with the current rows?
    pub fn is_consistent_with(&self, mask: u64, rhs: bool) -> bool {
        let r = self.reduce(mask | if rhs { RHS } else { 0 });
        r != RHS
    }

    pub fn insert(&mut self, mask: u64, rhs: bool) -> Insert {
        debug_assert!(mask & RHS == 0);
        let r = self.reduce(mask | if rhs { RHS } else { 0 });
        if r & !RHS == 0 {
            return if r == 0 {
                Insert::Redundant
            } else {
                Insert::Inconsistent
            };
        }
        let bit = (r & !RHS).trailing_zeros();
        for row in self.rows.iter_mut() {
            if (*row >> bit) & 1 == 1 {
                *row ^= r;
            }
        }
        self.rows.push(r);
        self.pivots |= 1 << bit;
        Insert::Added
    }

    /// Particular solution with every free unknown set to zero.
    pub fn particular(&self) -> u64 {
        self.rows.iter().fold(0, |acc, &r| {
            if r & RHS != 0 {
                acc | (1 << (r & !RHS).trailing_zeros())
            } else {
                acc
            }
        })
    }

    /// Basis of the solution space of the homogeneous system.
    pub fn kernel(&self) -> Vec<u64> {
        let all = low_mask(self.unknowns as usize);
        let mut free = all & !self.pivots;
        let mut basis = Vec::new();
        while free != 0 {
            let f = free.trailing_zeros();
            free &= free - 1;
            let mut v = 1u64 << f;
            for &r in &self.rows {
                if (r >> f) & 1 == 1 {
                    v |= 1 << (r & !RHS).trailing_zeros();
                }
            }
            basis.push(v);
        }
        basis
    }
}
