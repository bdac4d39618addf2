//! Dense linear algebra over F2.
//!
//! Vectors and matrices are packed into 64-bit words, row-major. Bit `j` of a
//! vector lives in word `j / 64` at position `j % 64`; pad bits past `len` are
//! always zero.
//!
//! Index convention: bit 0 of the binary representation of an index is its
//! least significant bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % WORD {
        0 => !0,
        r => (1u64 << r) - 1,
    }
}

/// A packed binary vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { words: vec![0; words_for(len)], len }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVec { words: vec![!0; words_for(len)], len };
        v.clear_tail();
        v
    }

    /// Builds a vector from 0/1 bytes (any nonzero byte is a one).
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.words[i / WORD] |= 1 << (i % WORD);
            }
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.words[i / WORD] |= 1 << (i % WORD);
            }
        }
        v
    }

    /// Vector of length `len` with ones exactly at `indices`.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v = BitVec::zeros(len);
        for i in indices {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, n: len });
            }
            v.set(i, true);
        }
        Ok(v)
    }

    /// The `len` low bits of `value`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD);
        let mut v = BitVec::zeros(len);
        if len > 0 {
            v.words[0] = value & tail_mask(len);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        self.words[i / WORD] ^= 1 << (i % WORD);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Low 64 bits as an integer (vectors of length <= 64).
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product over F2.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let t = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + t)
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    /// Restriction to the given positions, in order.
    pub fn select(&self, positions: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(positions.len());
        for (k, &p) in positions.iter().enumerate() {
            if self.get(p) {
                out.set(k, true);
            }
        }
        out
    }

    fn clear_tail(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.len);
        }
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A packed binary matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    pub fn from_rows(rows: &[BitVec]) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVec::len);
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {r} has length {} but expected {cols}",
                    row.len()
                )));
            }
            m.row_words_mut(r).copy_from_slice(row.words());
        }
        Ok(m)
    }

    /// Square matrix whose row `r` is the low `n` bits of `rows[r]`.
    pub fn from_row_masks(n: usize, rows: &[u64]) -> Self {
        assert!(n <= WORD && rows.len() == n);
        let mut m = BitMatrix::zeros(n, n);
        for (r, &mask) in rows.iter().enumerate() {
            m.data[r * m.stride] = mask & tail_mask(n);
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
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / WORD];
        let mask = 1u64 << (c % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVec {
        BitVec { words: self.row_words(r).to_vec(), len: self.cols }
    }

    /// Row `r` as an integer mask (matrices with at most 64 columns).
    pub fn row_mask(&self, r: usize) -> u64 {
        assert!(self.cols <= WORD);
        self.data[r * self.stride]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row(r).iter_ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Sub-matrix with the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> BitMatrix {
        let mut m = BitMatrix::zeros(rows.len(), cols.len());
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    m.set(ri, ci, true);
                }
            }
        }
        m
    }

    pub fn rank(&self) -> usize {
        RowSpace::new(self).dim()
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        write!(f, "]")
    }
}

/// Kronecker power `G_2^{⊗n}` of the kernel `[[1,0],[1,1]]`.
///
/// Entry `(i, j)` is one exactly when the ones of `j` are a subset of the ones
/// of `i`.
pub fn build_gn(n: usize) -> Result<BitMatrix> {
    if n > 16 {
        return Err(Error::Size(format!("stage count {n} exceeds 16")));
    }
    let size = 1usize << n;
    Ok(BitMatrix::from_fn(size, size, |i, j| j & !i == 0))
}

/// `v · m` over F2.
pub fn f2_mat_vec(v: &BitVec, m: &BitMatrix) -> Result<BitVec> {
    if v.len() != m.rows() {
        return Err(Error::Dimension(format!(
            "vector of length {} times {}x{} matrix",
            v.len(),
            m.rows(),
            m.cols()
        )));
    }
    let mut out = BitVec::zeros(m.cols());
    for r in v.iter_ones() {
        for (o, w) in out.words.iter_mut().zip(m.row_words(r)) {
            *o ^= w;
        }
    }
    Ok(out)
}

/// Matrix product over F2.
pub fn f2_mat_mat(a: &BitMatrix, b: &BitMatrix) -> Result<BitMatrix> {
    if a.cols() != b.rows() {
        return Err(Error::Dimension(format!(
            "{}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut out = BitMatrix::zeros(a.rows(), b.cols());
    for r in 0..a.rows() {
        let lhs = a.row(r);
        for k in lhs.iter_ones() {
            let (src, dst) = (k * b.stride, r * out.stride);
            for w in 0..out.stride {
                out.data[dst + w] ^= b.data[src + w];
            }
        }
    }
    Ok(out)
}

/// Reduced row-echelon basis of a row space, cached for repeated membership
/// queries.
#[derive(Clone, Debug)]
pub struct RowSpace {
    cols: usize,
    /// `(pivot column, row)`; each pivot column is set in exactly one row.
    basis: Vec<(usize, BitVec)>,
}

impl RowSpace {
    pub fn new(generators: &BitMatrix) -> Self {
        let mut space = RowSpace { cols: generators.cols(), basis: Vec::new() };
        for r in 0..generators.rows() {
            space.insert(generators.row(r));
        }
        space
    }

    /// Adds a vector to the space; returns false if it was already contained.
    pub fn insert(&mut self, v: BitVec) -> bool {
        let v = self.reduce(v);
        let Some(pivot) = v.iter_ones().next() else {
            return false;
        };
        for (_, row) in self.basis.iter_mut() {
            if row.get(pivot) {
                row.xor_assign(&v);
            }
        }
        self.basis.push((pivot, v));
        true
    }

    fn reduce(&self, mut v: BitVec) -> BitVec {
        for (pivot, row) in &self.basis {
            if v.get(*pivot) {
                v.xor_assign(row);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        v.len() == self.cols && self.reduce(v.clone()).is_zero()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// True iff `v` is an F2 combination of the rows of `basis`.
pub fn row_space_contains(basis: &BitMatrix, v: &BitVec) -> bool {
    basis.cols() == v.len() && RowSpace::new(basis).contains(v)
}

/// Reverses the `n`-bit binary representation of `i`.
pub fn bit_reversal(i: usize, n: usize) -> Result<usize> {
    if n >= usize::BITS as usize || i >> n != 0 {
        return Err(Error::IndexOutOfRange { index: i, n: 1usize.checked_shl(n as u32).unwrap_or(0) });
    }
    if n == 0 {
        return Ok(0);
    }
    Ok(i.reverse_bits() >> (usize::BITS as usize - n))
}

/// One row of a triangularized parity system: `u[pivot] = XOR of u[sources]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PivotedRow {
    pub pivot: usize,
    pub sources: Vec<usize>,
}

/// Gauss-Jordan reduction of homogeneous parity equations with each pivot at
/// the largest index of its row.
///
/// Zero rows are dropped. The result is ordered by strictly decreasing pivot
/// and no pivot column appears among any row's sources.
pub fn f2_solve_triangularize(constraints: &BitMatrix) -> Vec<PivotedRow> {
    let mut rows: Vec<BitVec> = (0..constraints.rows()).map(|r| constraints.row(r)).collect();
    let mut pivoted: Vec<(usize, usize)> = Vec::new(); // (pivot column, row index)
    let mut used = vec![false; rows.len()];
    for col in (0..constraints.cols()).rev() {
        let Some(p) = (0..rows.len()).find(|&r| !used[r] && rows[r].get(col)) else {
            continue;
        };
        used[p] = true;
        let pivot_row = rows[p].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != p && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivoted.push((col, p));
    }
    pivoted
        .into_iter()
        .map(|(pivot, r)| PivotedRow {
            pivot,
            sources: rows[r].iter_ones().filter(|&j| j != pivot).collect(),
        })
        .collect()
}

const IN_WORD_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

/// In-place `x = u · G_N` on packed words holding a length-`2^n` vector.
///
/// `G_N` is an involution, so the same call also inverts the transform.
pub fn polar_transform_words(words: &mut [u64], n: usize) {
    for (b, &mask) in IN_WORD_MASKS.iter().enumerate().take(n) {
        let step = 1u32 << b;
        for w in words.iter_mut() {
            *w ^= (*w >> step) & mask;
        }
    }
    for b in 6..n {
        let step = 1usize << (b - 6);
        for w in 0..words.len() {
            if w & step == 0 {
                words[w] ^= words[w | step];
            }
        }
    }
}

/// In-place `x = u · G_N` on one-byte-per-bit storage.
pub fn polar_transform_bytes(bits: &mut [u8]) {
    let size = bits.len();
    debug_assert!(size.is_power_of_two());
    let mut step = 1;
    while step < size {
        for i in 0..size {
            if i & step == 0 {
                bits[i] ^= bits[i | step];
            }
        }
        step <<= 1;
    }
}

/// `u · G_N` for a packed vector of power-of-two length.
pub fn polar_transform(u: &BitVec) -> BitVec {
    let n = u.len().trailing_zeros() as usize;
    debug_assert_eq!(1usize << n, u.len());
    let mut x = u.clone();
    polar_transform_words(&mut x.words, n);
    x.clear_tail();
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(bits: &[u8]) -> BitVec {
        BitVec::from_bits(bits)
    }

    #[test]
    fn gn_small_cases() {
        let g0 = build_gn(0).unwrap();
        assert_eq!(g0, BitMatrix::identity(1));
        let g1 = build_gn(1).unwrap();
        assert_eq!(g1, BitMatrix::from_fn(2, 2, |r, c| [[1, 0], [1, 1]][r][c] == 1));
        let g4 = build_gn(4).unwrap();
        assert_eq!(g4.row(15), BitVec::ones(16));
        assert_eq!(g4.row(0), BitVec::from_indices(16, [0]).unwrap());
        assert!(matches!(build_gn(17), Err(Error::Size(_))));
    }

    #[test]
    fn gn_is_involution_up_to_10() {
        for n in 0..=10 {
            let g = build_gn(n).unwrap();
            assert_eq!(f2_mat_mat(&g, &g).unwrap(), BitMatrix::identity(1 << n), "n = {n}");
        }
    }

    #[test]
    fn mat_vec_examples() {
        let g2 = build_gn(1).unwrap();
        assert_eq!(f2_mat_vec(&bv(&[0, 1]), &g2).unwrap(), bv(&[1, 1]));
        let g16 = build_gn(4).unwrap();
        assert!(f2_mat_vec(&BitVec::zeros(16), &g16).unwrap().is_zero());
        let e0 = BitVec::from_indices(16, [0]).unwrap();
        assert_eq!(f2_mat_vec(&e0, &g16).unwrap(), g16.row(0));
        assert!(matches!(f2_mat_vec(&BitVec::zeros(3), &g16), Err(Error::Dimension(_))));
    }

    #[test]
    fn mat_mat_identity_and_mismatch() {
        let a = BitMatrix::from_fn(3, 3, |r, c| (r * 3 + c) % 4 == 1);
        assert_eq!(f2_mat_mat(&a, &BitMatrix::identity(3)).unwrap(), a);
        assert!(f2_mat_mat(&a, &BitMatrix::identity(4)).is_err());
    }

    #[test]
    fn row_space_examples() {
        let g = build_gn(4).unwrap();
        let basis = g.select(&[12, 13, 14], &(0..16).collect::<Vec<_>>());
        for r in 0..3 {
            assert!(row_space_contains(&basis, &basis.row(r)));
        }
        assert!(row_space_contains(&basis, &BitVec::zeros(16)));
        let mut v = g.row(12);
        v.xor_assign(&g.row(14));
        assert!(row_space_contains(&basis, &v));
        assert!(!row_space_contains(&basis, &BitVec::from_indices(16, [0]).unwrap()));
    }

    #[test]
    fn row_space_matches_codebook_enumeration() {
        // Exhaustive codebook of a small random generator versus the cached basis.
        let gens = BitMatrix::from_fn(5, 12, |r, c| (r * 7 + c * 3 + r * c) % 5 < 2);
        let space = RowSpace::new(&gens);
        let mut codebook = std::collections::HashSet::new();
        for m in 0u32..32 {
            let msg = BitVec::from_u64(m as u64, 5);
            codebook.insert(f2_mat_vec(&msg, &gens).unwrap());
        }
        for v in 0u64..(1 << 12) {
            let v = BitVec::from_u64(v, 12);
            assert_eq!(space.contains(&v), codebook.contains(&v));
        }
    }

    #[test]
    fn bit_reversal_examples() {
        assert_eq!(bit_reversal(15, 4).unwrap(), 15);
        assert_eq!(bit_reversal(14, 4).unwrap(), 7);
        let mut z: Vec<usize> = [12, 13, 14, 15].iter().map(|&i| bit_reversal(i, 4).unwrap()).collect();
        z.sort_unstable();
        assert_eq!(z, vec![3, 7, 11, 15]);
        assert!(bit_reversal(16, 4).is_err());
        assert_eq!(bit_reversal(0, 0).unwrap(), 0);
    }

    #[test]
    fn triangularize_examples() {
        let single = BitMatrix::from_fn(1, 16, |_, c| c == 13 || c == 15);
        assert_eq!(
            f2_solve_triangularize(&single),
            vec![PivotedRow { pivot: 15, sources: vec![13] }]
        );
        assert!(f2_solve_triangularize(&BitMatrix::zeros(0, 8)).is_empty());

        // a=0, b=1, c=2: rows {a,c} and {a,b,c}; hand elimination gives
        // u_c = u_a and u_b = 0.
        let m = BitMatrix::from_fn(2, 3, |r, c| [[1, 0, 1], [1, 1, 1]][r][c] == 1);
        assert_eq!(
            f2_solve_triangularize(&m),
            vec![
                PivotedRow { pivot: 2, sources: vec![0] },
                PivotedRow { pivot: 1, sources: vec![] },
            ]
        );
        // Duplicate rows collapse.
        let dup = BitMatrix::from_fn(2, 4, |_, c| c == 1 || c == 3);
        assert_eq!(f2_solve_triangularize(&dup).len(), 1);
    }

    #[test]
    fn word_transform_matches_matrix() {
        for n in 0..=8 {
            let g = build_gn(n).unwrap();
            let size = 1usize << n;
            let u = BitVec::from_bools(&(0..size).map(|i| (i * 37 + 11) % 7 < 3).collect::<Vec<_>>());
            let expected = f2_mat_vec(&u, &g).unwrap();
            assert_eq!(polar_transform(&u), expected, "n = {n}");
            let mut bytes = u.to_bits();
            polar_transform_bytes(&mut bytes);
            assert_eq!(BitVec::from_bits(&bytes), expected);
        }
    }

    proptest! {
        #[test]
        fn encode_is_an_involution(n in 0usize..=10, seed in any::<u64>()) {
            let size = 1usize << n;
            let bits: Vec<u8> = (0..size)
                .map(|i| ((seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(i as u32 % 64) ^ i as u64) & 1) as u8)
                .collect();
            let u = BitVec::from_bits(&bits);
            prop_assert_eq!(polar_transform(&polar_transform(&u)), u);
        }

        #[test]
        fn bit_reversal_is_an_involutive_bijection(n in 0usize..=12) {
            let size = 1usize << n;
            let mut seen = vec![false; size];
            for i in 0..size {
                let r = bit_reversal(i, n).unwrap();
                prop_assert_eq!(bit_reversal(r, n).unwrap(), i);
                prop_assert!(!seen[r]);
                seen[r] = true;
            }
        }

        #[test]
        fn triangularized_rows_are_consistent(rows in proptest::collection::vec(any::<u16>(), 0..8)) {
            let m = BitMatrix::from_fn(rows.len(), 16, |r, c| (rows[r] >> c) & 1 == 1);
            let out = f2_solve_triangularize(&m);
            let pivots: Vec<usize> = out.iter().map(|r| r.pivot).collect();
            prop_assert!(pivots.windows(2).all(|w| w[0] > w[1]));
            prop_assert_eq!(out.len(), m.rank());
            for row in &out {
                prop_assert!(row.sources.iter().all(|&s| s < row.pivot && !pivots.contains(&s)));
                // Every reduced row stays in the original row space.
                let v = BitVec::from_indices(16, row.sources.iter().copied().chain([row.pivot])).unwrap();
                prop_assert!(row_space_contains(&m, &v));
            }
        }
    }
}
