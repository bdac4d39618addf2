//! Admissible-position ("star") patterns of the linear part `A` and the
//! translation `b`, and the permutation pool they generate.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::oracle::AutomorphismOracle;
use super::AffineMap;
use crate::construct::CodeSpec;
use crate::error::{Error, Result};

/// Rejection budget of [`sample_pi`].
pub const SAMPLE_BUDGET: u64 = 100_000;

/// Largest stage count for exact pool enumeration.
const EXACT_MAX_N: usize = 5;

/// One entry of the pattern of `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entry {
    Zero,
    One,
    Star,
}

/// Pattern of admissible positions.
///
/// Maps are written in complemented coordinates `y = z + 1`, where the pool is
/// `y' = A y + c` with `A` an invertible fill of `a_mask` and `c` supported on
/// the starred translation coordinates. Position `N - 1` (`y = 0`) is the
/// center of every linear part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarPattern {
    pub n: usize,
    /// `a_mask[r][c]` constrains `A(r, c)`.
    pub a_mask: Vec<Vec<Entry>>,
    pub b_mask: Vec<bool>,
    /// Number of starred entries of `A`, diagonal included.
    pub star_count: usize,
}

impl StarPattern {
    fn from_masks(n: usize, a_mask: Vec<Vec<Entry>>, b_mask: Vec<bool>) -> Self {
        let star_count = a_mask.iter().flatten().filter(|&&e| e == Entry::Star).count();
        StarPattern { n, a_mask, b_mask, star_count }
    }

    /// Only the identity linear part; every translation admissible.
    pub fn identity(n: usize) -> Self {
        let a = (0..n).map(|r| (0..n).map(|c| if r == c { Entry::One } else { Entry::Zero }).collect()).collect();
        Self::from_masks(n, a, vec![true; n])
    }

    /// Every position starred (general affine group).
    pub fn full(n: usize) -> Self {
        Self::from_masks(n, vec![vec![Entry::Star; n]; n], vec![true; n])
    }

    pub fn b_star_count(&self) -> usize {
        self.b_mask.iter().filter(|&&b| b).count()
    }

    /// Number of off-diagonal stars.
    pub fn off_diagonal_stars(&self) -> usize {
        self.star_count - (0..self.n).filter(|&r| self.a_mask[r][r] == Entry::Star).count()
    }

    /// Per-row masks of forced ones and of free (starred) entries.
    pub fn row_masks(&self) -> (Vec<u64>, Vec<u64>) {
        let mut ones = vec![0u64; self.n];
        let mut free = vec![0u64; self.n];
        for r in 0..self.n {
            for c in 0..self.n {
                match self.a_mask[r][c] {
                    Entry::One => ones[r] |= 1 << c,
                    Entry::Star => free[r] |= 1 << c,
                    Entry::Zero => {}
                }
            }
        }
        (ones, free)
    }

    pub fn b_star_mask(&self) -> u64 {
        self.b_mask.iter().enumerate().filter(|(_, &b)| b).fold(0, |m, (k, _)| m | 1 << k)
    }

    /// True iff the complemented-coordinate fill `rows` matches the pattern.
    pub fn admits(&self, rows: &[u64], c: u64) -> bool {
        let (ones, free) = self.row_masks();
        rows.len() == self.n
            && rows.iter().zip(ones.iter().zip(&free)).all(|(&row, (&o, &f))| row & !f == o)
            && c & !self.b_star_mask() == 0
    }
}

impl fmt::Display for StarPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, row) in self.a_mask.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                if c > 0 {
                    f.write_str(" ")?;
                }
                f.write_str(match e {
                    Entry::Zero => "0",
                    Entry::One => "1",
                    Entry::Star => "*",
                })?;
            }
            writeln!(f, "  | {}", if self.b_mask[r] { "*" } else { "0" })?;
        }
        Ok(())
    }
}

/// Rank over F2 of packed rows.
pub(crate) fn rank_rows(rows: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::with_capacity(rows.len());
    for &row in rows {
        let mut v = row;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            // Keep the basis sorted by leading bit, descending, so `min` reduces.
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

fn identity_rows(n: usize) -> Vec<u64> {
    (0..n).map(|r| 1u64 << r).collect()
}

/// Computes the admissible positions for the code of `spec`.
///
/// An off-diagonal entry `(r, c)` is starred when the transvection
/// `y_r ← y_r + y_c` (centered at position `N - 1`) maps the code onto
/// itself. A diagonal entry is starred when a pair of mutually starred
/// coordinates can be swapped, which allows a zero on that diagonal. A
/// translation coordinate is starred when flipping it keeps the frozen
/// positions outside the shortening set at zero.
pub fn compute_star_pattern(spec: &CodeSpec) -> StarPattern {
    compute_star_pattern_with(spec, &AutomorphismOracle::new(spec))
}

pub(crate) fn compute_star_pattern_with(spec: &CodeSpec, oracle: &AutomorphismOracle) -> StarPattern {
    let n = spec.n;
    let passes = |rows: &[u64], c: u64, strict: bool| {
        AffineMap::complement_affine(n, rows, c).map(|m| oracle.check(m.perm(), strict)).unwrap_or(false)
    };
    let mut a_mask = vec![vec![Entry::Zero; n]; n];
    for (r, row) in a_mask.iter_mut().enumerate() {
        row[r] = Entry::One;
        for (c, entry) in row.iter_mut().enumerate() {
            if c == r {
                continue;
            }
            let mut rows = identity_rows(n);
            rows[r] |= 1 << c;
            if passes(&rows, 0, true) {
                *entry = Entry::Star;
            }
        }
    }
    for r in 0..n {
        for c in r + 1..n {
            if a_mask[r][c] == Entry::Star && a_mask[c][r] == Entry::Star {
                let mut rows = identity_rows(n);
                rows.swap(r, c);
                if passes(&rows, 0, true) {
                    a_mask[r][r] = Entry::Star;
                    a_mask[c][c] = Entry::Star;
                }
            }
        }
    }
    let b_mask = (0..n).map(|k| passes(&identity_rows(n), 1 << k, false)).collect();
    StarPattern::from_masks(n, a_mask, b_mask)
}

/// Size of the pool `Π` generated by a pattern.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiCount {
    /// Exact size, or the upper bound `2^(stars + b-stars)` (saturating).
    pub count: u128,
    pub exact: bool,
}

/// `|Π|`: exact (invertible fills times translations) for `n ≤ 5`, otherwise
/// the upper bound `2^(|⋆| + b-stars)`.
pub fn count_pi(pattern: &StarPattern) -> PiCount {
    let bits = pattern.b_star_count();
    if pattern.n <= EXACT_MAX_N {
        let (ones, free) = pattern.row_masks();
        let fills = count_invertible_fills(&ones, &free);
        PiCount { count: fills << bits, exact: true }
    } else {
        let e = (pattern.star_count + bits) as u32;
        PiCount { count: 1u128.checked_shl(e).unwrap_or(u128::MAX), exact: false }
    }
}

/// Counts fills whose rows are linearly independent, row by row, tracking
/// the span of the rows chosen so far as a bit set over `F_2^n` (`n ≤ 6`).
fn count_invertible_fills(ones: &[u64], free: &[u64]) -> u128 {
    fn rec(r: usize, span: u64, ones: &[u64], free: &[u64]) -> u128 {
        if r == ones.len() {
            return 1;
        }
        let mut total = 0;
        let mut sub = free[r];
        loop {
            let row = ones[r] | sub;
            if span >> row & 1 == 0 {
                let mut next = span;
                let mut rest = span;
                while rest != 0 {
                    let v = rest.trailing_zeros() as u64;
                    next |= 1 << (v ^ row);
                    rest &= rest - 1;
                }
                total += rec(r + 1, next, ones, free);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free[r];
        }
        total
    }
    rec(0, 1, ones, free)
}

/// Every map of the pool in complemented-coordinate form (`n ≤ 5`, at most
/// `2^22` maps).
pub fn enumerate_pi(pattern: &StarPattern) -> Result<Vec<AffineMap>> {
    let n = pattern.n;
    if n > EXACT_MAX_N {
        return Err(Error::Size(format!("exhaustive pool enumeration needs n <= {EXACT_MAX_N}")));
    }
    let total = count_pi(pattern).count;
    if total > 1 << 22 {
        return Err(Error::Size(format!("pool of {total} maps is too large to enumerate")));
    }
    let (ones, free) = pattern.row_masks();
    let mut fills = Vec::new();
    let mut rows = vec![0u64; n];
    enumerate_fills(0, &ones, &free, &mut rows, &mut fills);
    let bmask = pattern.b_star_mask();
    let mut maps = Vec::with_capacity(total as usize);
    for fill in &fills {
        let mut c = bmask;
        loop {
            maps.push(AffineMap::complement_affine(n, fill, c)?);
            if c == 0 {
                break;
            }
            c = (c - 1) & bmask;
        }
    }
    Ok(maps)
}

fn enumerate_fills(r: usize, ones: &[u64], free: &[u64], rows: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if r == ones.len() {
        if rank_rows(rows) == rows.len() {
            out.push(rows.clone());
        }
        return;
    }
    let mut sub = free[r];
    loop {
        rows[r] = ones[r] | sub;
        if rank_rows(&rows[..=r]) == r + 1 {
            enumerate_fills(r + 1, ones, free, rows, out);
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free[r];
    }
}

/// Uniform sample of the pool: fair coins on the stars, rejection of singular
/// fills, uniform translation on the starred coordinates. Each candidate is
/// re-verified against `oracle` with shortening ignored; failures are
/// rejected too.
pub fn sample_pi<R: Rng + ?Sized>(
    pattern: &StarPattern,
    oracle: &AutomorphismOracle,
    rng: &mut R,
) -> Result<AffineMap> {
    let n = pattern.n;
    let (ones, free) = pattern.row_masks();
    let bmask = pattern.b_star_mask();
    let mut rows = vec![0u64; n];
    for _ in 0..SAMPLE_BUDGET {
        for r in 0..n {
            rows[r] = ones[r] | (rng.random::<u64>() & free[r]);
        }
        let c = rng.random::<u64>() & bmask;
        if rank_rows(&rows) < n {
            continue;
        }
        let map = AffineMap::complement_affine(n, &rows, c)?;
        if oracle.check(map.perm(), false) {
            return Ok(map);
        }
    }
    Err(Error::SamplingBudget { attempts: SAMPLE_BUDGET, reason: "no admissible map found".into() })
}

/// Order of the block-lower-triangular affine group with the given block
/// profile: `2^n · Π |GL(s_i, 2)| · 2^(Σ_{i<j} s_i s_j)`.
pub fn blta_order(n: usize, profile: &[usize]) -> Result<u128> {
    if profile.iter().sum::<usize>() != n || profile.contains(&0) {
        return Err(Error::Profile(format!("block sizes {profile:?} do not partition n = {n}")));
    }
    let overflow = || Error::Size(format!("group order for n = {n} exceeds 128 bits"));
    let mut order: u128 = 1u128.checked_shl(n as u32).ok_or_else(overflow)?;
    for &s in profile {
        for k in 0..s {
            let term = (1u128 << s) - (1u128 << k);
            order = order.checked_mul(term).ok_or_else(overflow)?;
        }
    }
    let mut below = 0u32;
    for i in 0..profile.len() {
        for j in i + 1..profile.len() {
            below += (profile[i] * profile[j]) as u32;
        }
    }
    order.checked_mul(1u128.checked_shl(below).ok_or_else(overflow)?).ok_or_else(overflow)
}

/// Full block-lower-triangular pattern for a profile (all translations
/// admissible).
pub fn blta_pattern(n: usize, profile: &[usize]) -> Result<StarPattern> {
    if profile.iter().sum::<usize>() != n || profile.contains(&0) {
        return Err(Error::Profile(format!("block sizes {profile:?} do not partition n = {n}")));
    }
    let mut block = Vec::with_capacity(n);
    for (b, &s) in profile.iter().enumerate() {
        block.extend(std::iter::repeat_n(b, s));
    }
    let a = (0..n)
        .map(|r| (0..n).map(|c| if block[c] <= block[r] { Entry::Star } else { Entry::Zero }).collect())
        .collect();
    Ok(StarPattern::from_masks(n, a, vec![true; n]))
}
