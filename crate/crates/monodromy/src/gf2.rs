//! Exact linear algebra over GF(2).
//!
//! Bit-vectors of length 2g and 2g x 2g bit-matrices back every other
//! module: homology classes, transvection matrices, rank and affine
//! solving. Values are immutable after construction and all operations
//! are pure, so everything here is safe to share across threads.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("ragged input: row {row} has length {got}, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("invalid bit character {ch:?} at position {pos}")]
    BadChar { ch: char, pos: usize },
    #[error("matrix is singular")]
    Singular,
}

/// Dense bit-vector over GF(2). Addition is XOR.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        let words = vec![0u64; len.div_ceil(64).max(1)];
        Self { words, len }
    }

    /// Unit vector with a single set bit.
    pub fn unit(len: usize, bit: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(bit, true);
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Low `len` bits of `code`, bit i of the code becoming coordinate i.
    pub fn from_code(len: usize, code: u64) -> Self {
        debug_assert!(len <= 64);
        let mut v = Self::zeros(len);
        v.words[0] = code & mask(len);
        v
    }

    /// Packs coordinates into an integer code (requires len <= 64).
    pub fn to_code(&self) -> u64 {
        debug_assert!(self.len <= 64);
        self.words[0]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        if value {
            self.words[i / 64] |= 1u64 << (i % 64);
        } else {
            self.words[i / 64] &= !(1u64 << (i % 64));
        }
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "xor_assign: length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Componentwise sum over GF(2).
    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the componentwise product, i.e. the standard dot product.
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "dot: length mismatch");
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones() & 1;
        }
        acc & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set bits, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    /// Swaps the first and second halves (even length only); turns the
    /// standard symplectic pairing into a plain dot product.
    pub fn swap_halves(&self) -> Self {
        assert!(self.len.is_multiple_of(2), "swap_halves needs even length");
        let g = self.len / 2;
        let mut out = Self::zeros(self.len);
        for i in 0..g {
            out.set(i, self.get(g + i));
            out.set(g + i, self.get(i));
        }
        out
    }

    pub fn lowest_set_bit(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                let i = wi * 64 + w.trailing_zeros() as usize;
                if i < self.len {
                    return Some(i);
                }
            }
        }
        None
    }
}

fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl fmt::Display for BitVec {
    /// Serializes as a string of '0'/'1' in coordinate order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromStr for BitVec {
    type Err = Gf2Error;

    fn from_str(s: &str) -> Result<Self, Gf2Error> {
        let mut v = BitVec::zeros(s.chars().count());
        for (pos, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(pos, true),
                _ => return Err(Gf2Error::BadChar { ch, pos }),
            }
        }
        Ok(v)
    }
}

impl Serialize for BitVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Row-major bit-matrix; rows all share one length.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: Vec<BitVec>,
}

impl BitMatrix {
    pub fn from_rows(rows: Vec<BitVec>) -> Result<Self, Gf2Error> {
        if let Some(first) = rows.first() {
            let expected = first.len();
            for (i, r) in rows.iter().enumerate() {
                if r.len() != expected {
                    return Err(Gf2Error::Ragged {
                        row: i,
                        expected,
                        got: r.len(),
                    });
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n).map(|i| BitVec::unit(n, i)).collect(),
        }
    }

    pub fn zero(nrows: usize, ncols: usize) -> Self {
        Self {
            rows: (0..nrows).map(|_| BitVec::zeros(ncols)).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, BitVec::len)
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.rows[i].set(j, value);
    }

    pub fn is_identity(&self) -> bool {
        self.nrows() == self.ncols() && *self == Self::identity(self.nrows())
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.ncols(), self.nrows());
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                if self.get(i, j) {
                    out.set(j, i, true);
                }
            }
        }
        out
    }

    /// Matrix product; `self` applied after `other` when acting on columns.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols(), other.nrows(), "mul: inner dimension mismatch");
        let ot = other.transpose();
        let rows = self
            .rows
            .iter()
            .map(|r| BitVec::from_bits(&ot.rows.iter().map(|c| r.dot(c)).collect::<Vec<_>>()))
            .collect();
        Self { rows }
    }

    /// Matrix-vector product (column vector on the right).
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(self.ncols(), v.len(), "mul_vec: dimension mismatch");
        BitVec::from_bits(&self.rows.iter().map(|r| r.dot(v)).collect::<Vec<_>>())
    }

    /// GF(2) row rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        rank(&self.rows).expect("BitMatrix rows are never ragged")
    }

    /// Inverse of a square matrix, if it exists.
    pub fn inverse(&self) -> Result<Self, Gf2Error> {
        let n = self.nrows();
        if n != self.ncols() {
            return Err(Gf2Error::Dimension {
                expected: n,
                got: self.ncols(),
            });
        }
        let mut a = self.rows.clone();
        let mut inv = Self::identity(n).rows;
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r].get(col)).ok_or(Gf2Error::Singular)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && a[r].get(col) {
                    let (src, dst) = if r < col {
                        let (lo, hi) = a.split_at_mut(col);
                        (&hi[0], &mut lo[r])
                    } else {
                        let (lo, hi) = a.split_at_mut(r);
                        (&lo[col], &mut hi[0])
                    };
                    dst.xor_assign(src);
                    let (isrc, idst) = if r < col {
                        let (lo, hi) = inv.split_at_mut(col);
                        (&hi[0], &mut lo[r])
                    } else {
                        let (lo, hi) = inv.split_at_mut(r);
                        (&lo[col], &mut hi[0])
                    };
                    idst.xor_assign(isrc);
                }
            }
        }
        Ok(Self { rows: inv })
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix[")?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

/// GF(2) row rank of a row list. Errors on ragged input.
pub fn rank(rows: &[BitVec]) -> Result<usize, Gf2Error> {
    if rows.is_empty() {
        return Ok(0);
    }
    let width = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(Gf2Error::Ragged {
                row: i,
                expected: width,
                got: r.len(),
            });
        }
    }
    let mut echelon: Vec<BitVec> = Vec::new();
    for row in rows {
        let mut v = row.clone();
        for e in &echelon {
            let p = e.lowest_set_bit().unwrap();
            if v.get(p) {
                v.xor_assign(e);
            }
        }
        if !v.is_zero() {
            echelon.push(v);
        }
    }
    Ok(echelon.len())
}

/// Full description of the solution set of `a x = b` over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AffineSolution {
    Inconsistent,
    /// All solutions are `particular + span(kernel_basis)`.
    Solutions {
        particular: BitVec,
        kernel_basis: Vec<BitVec>,
    },
}

impl AffineSolution {
    pub fn is_consistent(&self) -> bool {
        matches!(self, AffineSolution::Solutions { .. })
    }

    /// Expands the full solution set (2^k elements for a k-dimensional kernel).
    pub fn enumerate(&self) -> Vec<BitVec> {
        match self {
            AffineSolution::Inconsistent => Vec::new(),
            AffineSolution::Solutions {
                particular,
                kernel_basis,
            } => {
                let k = kernel_basis.len();
                assert!(k < 26, "kernel too large to enumerate");
                let mut out = Vec::with_capacity(1 << k);
                for mask in 0u32..(1 << k) {
                    let mut v = particular.clone();
                    for (i, kb) in kernel_basis.iter().enumerate() {
                        if (mask >> i) & 1 == 1 {
                            v.xor_assign(kb);
                        }
                    }
                    out.push(v);
                }
                out
            }
        }
    }
}

/// Solves `a x = b` over GF(2), returning either "inconsistent" or a
/// particular solution together with a basis of the kernel.
pub fn solve_affine(a: &BitMatrix, b: &BitVec) -> Result<AffineSolution, Gf2Error> {
    if a.nrows() != b.len() {
        return Err(Gf2Error::Dimension {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let n = a.ncols();
    // Augmented elimination: carry the b-bit alongside each row.
    let mut rows: Vec<(BitVec, bool)> = a
        .rows()
        .iter()
        .zip((0..b.len()).map(|i| b.get(i)))
        .map(|(r, bi)| (r.clone(), bi))
        .collect();

    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].0.get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        let (pivot_row, pivot_b) = rows[rank].clone();
        for (r, (row, bi)) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot_row);
                *bi ^= pivot_b;
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }
    if rows[rank..].iter().any(|(_, bi)| *bi) {
        return Ok(AffineSolution::Inconsistent);
    }

    let mut particular = BitVec::zeros(n);
    for (r, &col) in pivot_cols.iter().enumerate() {
        particular.set(col, rows[r].1);
    }

    let is_pivot: Vec<bool> = {
        let mut f = vec![false; n];
        for &c in &pivot_cols {
            f[c] = true;
        }
        f
    };
    let mut kernel_basis = Vec::new();
    for free in (0..n).filter(|&c| !is_pivot[c]) {
        let mut v = BitVec::zeros(n);
        v.set(free, true);
        for (r, &col) in pivot_cols.iter().enumerate() {
            if rows[r].0.get(free) {
                v.set(col, true);
            }
        }
        kernel_basis.push(v);
    }
    Ok(AffineSolution::Solutions {
        particular,
        kernel_basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    /// Independent rank oracle: the span of the rows has 2^rank elements.
    fn rank_by_span(rows: &[BitVec]) -> usize {
        let n = rows.len();
        assert!(n <= 20);
        let mut span = HashSet::new();
        for mask in 0u32..(1 << n) {
            let mut v = BitVec::zeros(rows[0].len());
            for (i, r) in rows.iter().enumerate() {
                if (mask >> i) & 1 == 1 {
                    v.xor_assign(r);
                }
            }
            span.insert(v);
        }
        span.len().trailing_zeros() as usize
    }

    #[test]
    fn rank_identity_is_full() {
        assert_eq!(BitMatrix::identity(10).rank(), 10);
    }

    #[test]
    fn rank_unit_vectors() {
        let rows: Vec<BitVec> = (0..5).map(|i| BitVec::unit(10, i)).collect();
        assert_eq!(rank(&rows).unwrap(), 5);
        assert_eq!(rank_by_span(&rows), 5);
    }

    #[test]
    fn rank_rejects_ragged() {
        let rows = vec![bv("1010"), bv("101")];
        assert!(matches!(rank(&rows), Err(Gf2Error::Ragged { row: 1, .. })));
    }

    #[test]
    fn rank_matches_span_oracle_on_random_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let rows: Vec<BitVec> = (0..8)
                .map(|_| BitVec::from_code(10, rng.gen_range(0..1024)))
                .collect();
            assert_eq!(rank(&rows).unwrap(), rank_by_span(&rows));
        }
    }

    #[test]
    fn rank_invariant_under_row_ops() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let mut rows: Vec<BitVec> = (0..6)
                .map(|_| BitVec::from_code(10, rng.gen_range(0..1024)))
                .collect();
            let r0 = rank(&rows).unwrap();
            // random permutation
            rows.shuffle(&mut rng);
            assert_eq!(rank(&rows).unwrap(), r0);
            // add one row into another
            let i = rng.gen_range(0..rows.len());
            let mut j = rng.gen_range(0..rows.len());
            if i == j {
                j = (j + 1) % rows.len();
            }
            let src = rows[i].clone();
            rows[j].xor_assign(&src);
            assert_eq!(rank(&rows).unwrap(), r0);
        }
    }

    #[test]
    fn solve_identity_gives_unique_solution() {
        let a = BitMatrix::identity(10);
        let b = bv("1010010110");
        match solve_affine(&a, &b).unwrap() {
            AffineSolution::Solutions {
                particular,
                kernel_basis,
            } => {
                assert_eq!(particular, b);
                assert!(kernel_basis.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn solve_zero_matrix_inconsistent() {
        let a = BitMatrix::zero(4, 4);
        let b = bv("0100");
        assert_eq!(solve_affine(&a, &b).unwrap(), AffineSolution::Inconsistent);
    }

    #[test]
    fn solve_dimension_mismatch() {
        let a = BitMatrix::zero(4, 4);
        let b = bv("01000");
        assert!(matches!(
            solve_affine(&a, &b),
            Err(Gf2Error::Dimension { .. })
        ));
    }

    #[test]
    fn solutions_satisfy_system_and_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..40 {
            let a = BitMatrix::from_rows(
                (0..6)
                    .map(|_| BitVec::from_code(8, rng.gen_range(0..256)))
                    .collect(),
            )
            .unwrap();
            let b = BitVec::from_code(6, rng.gen_range(0..64));
            let sol = solve_affine(&a, &b).unwrap();
            let brute: HashSet<BitVec> = (0u64..256)
                .map(|c| BitVec::from_code(8, c))
                .filter(|x| a.mul_vec(x) == b)
                .collect();
            let described: HashSet<BitVec> = sol.enumerate().into_iter().collect();
            assert_eq!(described, brute);
            for x in &described {
                assert_eq!(a.mul_vec(x), b);
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut found = 0;
        while found < 10 {
            let m = BitMatrix::from_rows(
                (0..6)
                    .map(|_| BitVec::from_code(6, rng.gen_range(0..64)))
                    .collect(),
            )
            .unwrap();
            if let Ok(inv) = m.inverse() {
                assert!(m.mul(&inv).is_identity());
                assert!(inv.mul(&m).is_identity());
                found += 1;
            }
        }
    }

    #[test]
    fn display_roundtrip() {
        let v = bv("0110010011");
        assert_eq!(v.to_string(), "0110010011");
        assert_eq!(v.to_string().parse::<BitVec>().unwrap(), v);
    }

    proptest! {
        #[test]
        fn xor_assoc_comm_self_inverse(a in 0u64..1024, b in 0u64..1024, c in 0u64..1024) {
            let (u, v, w) = (
                BitVec::from_code(10, a),
                BitVec::from_code(10, b),
                BitVec::from_code(10, c),
            );
            prop_assert_eq!(u.xor(&v).xor(&w), u.xor(&v.xor(&w)));
            prop_assert_eq!(u.xor(&v), v.xor(&u));
            prop_assert!(u.xor(&u).is_zero());
        }

        #[test]
        fn matrix_mul_assoc_and_identity(seed in 0u64..5000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rnd = |rng: &mut ChaCha8Rng| {
                BitMatrix::from_rows(
                    (0..5).map(|_| BitVec::from_code(5, rng.gen_range(0..32))).collect(),
                ).unwrap()
            };
            let (a, b, c) = (rnd(&mut rng), rnd(&mut rng), rnd(&mut rng));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            let id = BitMatrix::identity(5);
            prop_assert_eq!(a.mul(&id), a.clone());
            prop_assert_eq!(id.mul(&a), a);
        }
    }
}
