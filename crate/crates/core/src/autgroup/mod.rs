//! Affine automorphisms `z' = A z + b` of `G_N`-coset codes, where `z` is the
//! binary expansion of a position (coordinate `k` is bit `k`).

mod dynamic;
mod oracle;
mod pattern;
mod stats;

pub use dynamic::{derive_dynamic_constraints, DynamicConstraint, DynamicConstraintSet};
pub use oracle::{is_code_automorphism, is_code_automorphism_rref, AutomorphismOracle};
pub use pattern::{
    blta_order, blta_pattern, compute_star_pattern, count_pi, enumerate_pi, sample_pi, Entry, StarPattern,
    SAMPLE_BUDGET,
};
pub use stats::{
    classify_grid, estimate_es, exhaustive_stats, stars_lt, Category, EsEstimate, GridCell, GridSummary,
    GroupStats,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2linalg::{BitMatrix, BitVec};

/// Parity of `a · z` for a packed row `a`.
#[inline]
fn dot(a: u64, z: u64) -> u64 {
    u64::from((a & z).count_ones() & 1 == 1)
}

/// Invertible affine map on `F_2^n` together with the position permutation it
/// induces on `[2^n]`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MapRepr", into = "MapRepr")]
pub struct AffineMap {
    n: usize,
    /// Row `r` of `A` as a bit mask over columns.
    rows: Vec<u64>,
    b: u64,
    perm: Vec<usize>,
    inv_perm: Vec<usize>,
}

impl AffineMap {
    /// Map from packed rows of `A` and a packed translation `b`.
    pub fn from_rows(n: usize, rows: &[u64], b: u64) -> Result<Self> {
        if n == 0 || n > crate::construct::MAX_STAGES || rows.len() != n {
            return Err(Error::Dimension(format!("expected {n} rows for an affine map on F_2^{n}")));
        }
        let full = (1u64 << n) - 1;
        if rows.iter().any(|&r| r & !full != 0) || b & !full != 0 {
            return Err(Error::Dimension("matrix or translation exceeds n bits".into()));
        }
        if !BitMatrix::from_row_masks(n, rows).is_invertible() {
            return Err(Error::Singular);
        }
        let size = 1usize << n;
        let mut perm = vec![0usize; size];
        let mut inv_perm = vec![0usize; size];
        for (i, p) in perm.iter_mut().enumerate() {
            let z = i as u64;
            let mut image = b;
            for (r, &row) in rows.iter().enumerate() {
                image ^= dot(row, z) << r;
            }
            *p = image as usize;
            inv_perm[image as usize] = i;
        }
        Ok(AffineMap { n, rows: rows.to_vec(), b, perm, inv_perm })
    }

    pub fn new(a: &BitMatrix, b: &BitVec) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n || b.len() != n {
            return Err(Error::Dimension(format!("A is {}x{}, b has length {}", a.rows(), a.cols(), b.len())));
        }
        let rows: Vec<u64> = (0..n).map(|r| a.row_mask(r)).collect();
        Self::from_rows(n, &rows, b.to_u64())
    }

    pub fn identity(n: usize) -> Self {
        let rows: Vec<u64> = (0..n).map(|r| 1u64 << r).collect();
        Self::from_rows(n, &rows, 0).expect("identity is invertible")
    }

    /// Map that is linear in complemented coordinates `y = z + 1`:
    /// `y' = A y + c`, i.e. `z' = A z + (A·1 + 1 + c)`.
    pub fn complement_affine(n: usize, rows: &[u64], c: u64) -> Result<Self> {
        let full = (1u64 << n) - 1;
        let mut b = full ^ c;
        for (r, &row) in rows.iter().enumerate() {
            b ^= dot(row, full) << r;
        }
        Self::from_rows(n, rows, b & full)
    }

    /// Recovers a map from an explicit permutation, if it is affine.
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        let size = perm.len();
        if size < 2 || !size.is_power_of_two() {
            return Err(Error::Size(format!("permutation length {size} is not a power of two")));
        }
        let n = size.trailing_zeros() as usize;
        let b = perm[0] as u64;
        let cols: Vec<u64> = (0..n).map(|k| perm[1 << k] as u64 ^ b).collect();
        let rows: Vec<u64> = (0..n)
            .map(|r| (0..n).fold(0u64, |acc, c| acc | (((cols[c] >> r) & 1) << c)))
            .collect();
        let map = Self::from_rows(n, &rows, b)?;
        if map.perm != perm {
            return Err(Error::NotInPool("permutation is not affine".into()));
        }
        Ok(map)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn a(&self) -> BitMatrix {
        BitMatrix::from_row_masks(self.n, &self.rows)
    }

    pub fn b(&self) -> BitVec {
        BitVec::from_u64(self.b, self.n)
    }

    pub fn b_mask(&self) -> u64 {
        self.b
    }

    /// `perm[i]` is the image of position `i`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn inv_perm(&self) -> &[usize] {
        &self.inv_perm
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Image of a position set, sorted.
    pub fn image(&self, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = set.iter().map(|&i| self.perm[i]).collect();
        out.sort_unstable();
        out
    }
}

impl std::fmt::Debug for AffineMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AffineMap {{ n: {}, A: [", self.n)?;
        for (r, row) in self.rows.iter().enumerate() {
            if r > 0 {
                f.write_str(", ")?;
            }
            for c in 0..self.n {
                write!(f, "{}", (row >> c) & 1)?;
            }
        }
        write!(f, "], b: {:0width$b} }}", self.b, width = self.n)
    }
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    #[serde(rename = "A")]
    a: Vec<String>,
    b: String,
}

impl From<AffineMap> for MapRepr {
    fn from(m: AffineMap) -> Self {
        MapRepr { a: m.rows.iter().map(|r| format!("{r:x}")).collect(), b: format!("{:x}", m.b) }
    }
}

impl TryFrom<MapRepr> for AffineMap {
    type Error = Error;

    fn try_from(r: MapRepr) -> Result<Self> {
        let parse = |s: &str| {
            u64::from_str_radix(s.trim_start_matches("0x"), 16).map_err(|e| Error::Parse(format!("{s:?}: {e}")))
        };
        let rows = r.a.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
        AffineMap::from_rows(rows.len(), &rows, parse(&r.b)?)
    }
}

/// Position permutation induced by an affine map.
pub fn perm_from_affine(a: &BitMatrix, b: &BitVec) -> Result<Vec<usize>> {
    Ok(AffineMap::new(a, b)?.perm)
}

/// True iff the map's permutation sends `z` onto itself.
pub fn filter_shortening(map: &AffineMap, z: &[usize]) -> bool {
    let mut set = vec![false; map.perm.len()];
    for &i in z {
        set[i] = true;
    }
    z.iter().all(|&i| set[map.perm[i]])
}
