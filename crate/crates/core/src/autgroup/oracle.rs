//! Membership test deciding whether a position permutation maps a code into
//! a target `G_N`-coset code.

use crate::construct::{CodeSpec, ShortMode};
use crate::f2linalg::{build_gn, BitMatrix, BitVec, RowSpace};

/// Precomputed column-major generator of a code for repeated permutation
/// checks.
///
/// A permutation passes when every permuted generator row `g_i`, `i ∈ I`,
/// has a zero `u`-coefficient on each forbidden index. Two forbidden sets are
/// kept: the relaxed one (`F ∖ Z` in mode `Z ⊆ F`, so the shortened rows may
/// pick up dynamic combinations) and the strict one (`F`).
#[derive(Clone, Debug)]
pub struct AutomorphismOracle {
    big_n: usize,
    stride: usize,
    /// Column `j` of `G_N(I, ·)` as `stride` words over the rows of `I`.
    columns: Vec<u64>,
    relaxed: Vec<usize>,
    strict: Vec<usize>,
}

impl AutomorphismOracle {
    pub fn new(spec: &CodeSpec) -> Self {
        let big_n = spec.big_n;
        let rows = &spec.info_set;
        let stride = rows.len().div_ceil(64).max(1);
        let mut columns = vec![0u64; big_n * stride];
        for (t, &i) in rows.iter().enumerate() {
            // Row i of G_N has ones exactly on the subsets of i.
            let mut j = i;
            loop {
                columns[j * stride + t / 64] |= 1u64 << (t % 64);
                if j == 0 {
                    break;
                }
                j = (j - 1) & i;
            }
        }
        let short = spec.short_mask();
        let strict = spec.frozen_set.clone();
        let relaxed = match spec.mode {
            ShortMode::ZInF => strict.iter().copied().filter(|&f| !short[f]).collect(),
            ShortMode::ZInI => strict.clone(),
        };
        AutomorphismOracle { big_n, stride, columns, relaxed, strict }
    }

    /// Checks `perm` (position `j` moves to `perm[j]`).
    pub fn check(&self, perm: &[usize], respect_shortening: bool) -> bool {
        if perm.len() != self.big_n {
            return false;
        }
        let stride = self.stride;
        let mut work = vec![0u64; self.big_n * stride];
        for (j, &p) in perm.iter().enumerate() {
            work[p * stride..(p + 1) * stride].copy_from_slice(&self.columns[j * stride..(j + 1) * stride]);
        }
        superset_sum(&mut work, self.big_n, stride);
        let forbidden = if respect_shortening { &self.strict } else { &self.relaxed };
        forbidden.iter().all(|&f| work[f * stride..(f + 1) * stride].iter().all(|&w| w == 0))
    }
}

/// In-place `a[i] = XOR of a[j] over j ⊇ i` on `stride`-word entries.
fn superset_sum(a: &mut [u64], size: usize, stride: usize) {
    if stride == 1 {
        let n = size.trailing_zeros() as usize;
        let mut step = 1;
        for _ in 0..n {
            for i in 0..size {
                if i & step == 0 {
                    a[i] ^= a[i | step];
                }
            }
            step <<= 1;
        }
        return;
    }
    let mut step = 1;
    while step < size {
        for i in 0..size {
            if i & step == 0 {
                let (lo, hi) = a.split_at_mut((i | step) * stride);
                for (x, y) in lo[i * stride..(i + 1) * stride].iter_mut().zip(&hi[..stride]) {
                    *x ^= *y;
                }
            }
        }
        step <<= 1;
    }
}

/// Automorphism test of `perm` on the code of `spec`.
///
/// With `respect_shortening` off, the permuted code only has to keep the
/// frozen positions outside the shortening set at zero (the shortened rows may
/// become dynamically frozen). With it on, the permuted code must equal the
/// mother code itself, which on the affine pool is the same as additionally
/// requiring `perm(Z) = Z`.
pub fn is_code_automorphism(perm: &[usize], spec: &CodeSpec, respect_shortening: bool) -> bool {
    AutomorphismOracle::new(spec).check(perm, respect_shortening)
}

/// Reference implementation of [`is_code_automorphism`] through explicit
/// row-space membership of every permuted generator row.
pub fn is_code_automorphism_rref(perm: &[usize], spec: &CodeSpec, respect_shortening: bool) -> bool {
    let g = match build_gn(spec.n) {
        Ok(g) => g,
        Err(_) => return false,
    };
    let short = spec.short_mask();
    let allowed: Vec<BitVec> = (0..spec.big_n)
        .filter(|&i| {
            let info = spec.info_set.binary_search(&i).is_ok();
            info || (!respect_shortening && spec.mode == ShortMode::ZInF && short[i])
        })
        .map(|i| g.row(i))
        .collect();
    let space = match BitMatrix::from_rows(&allowed) {
        Ok(m) => RowSpace::new(&m),
        Err(_) => RowSpace::new(&BitMatrix::zeros(0, spec.big_n)),
    };
    spec.info_set.iter().all(|&i| {
        let row = g.row(i);
        let mut permuted = BitVec::zeros(spec.big_n);
        for j in row.iter_ones() {
            permuted.set(perm[j], true);
        }
        space.contains(&permuted)
    })
}
