//! Dynamic frozen constraints induced by pool maps that move the shortening
//! set.

use serde::{Deserialize, Serialize};

use super::oracle::AutomorphismOracle;
use super::AffineMap;
use crate::construct::{CodeSpec, ShortMode};
use crate::error::{Error, Result};
use crate::f2linalg::{f2_solve_triangularize, polar_transform_bytes, BitMatrix, BitVec};

/// `u[target] = XOR of u[sources]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicConstraint {
    pub target: usize,
    pub sources: Vec<usize>,
}

/// Constraints ordered by increasing target; every source precedes its target.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicConstraintSet {
    pub constraints: Vec<DynamicConstraint>,
}

impl DynamicConstraintSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DynamicConstraint> {
        self.constraints.iter()
    }

    /// Per-position lookup: `Some(sources)` at dynamic targets.
    pub fn by_target(&self, big_n: usize) -> Vec<Option<Vec<usize>>> {
        let mut out = vec![None; big_n];
        for c in &self.constraints {
            out[c.target] = Some(c.sources.clone());
        }
        out
    }

    /// Checks the ordering invariants.
    pub fn is_well_formed(&self) -> bool {
        self.constraints.windows(2).all(|w| w[0].target < w[1].target)
            && self.constraints.iter().all(|c| c.sources.iter().all(|&s| s < c.target))
    }

    /// Fills the dynamic targets of `u` in place, in increasing order.
    pub fn apply(&self, u: &mut [u8]) {
        for c in &self.constraints {
            u[c.target] = c.sources.iter().fold(0, |acc, &s| acc ^ u[s]);
        }
    }
}

/// Constraints the input of the permuted code must satisfy so that the
/// permuted codewords vanish on `map(Z)`.
///
/// The decoder of the permuted frame keeps `F` as its frozen set, but the
/// permuted code lives in the span of the rows `I ∪ Z`, cut down by `S`
/// parity checks (typically the parities `x'_p = 0`, `p ∈ map(Z)`). The
/// checks are taken from the null space of the permuted generator and reduced
/// with the largest index as pivot, which turns each into a rule for one
/// shortened index. Rules with no sources are ordinary frozen zeros
/// and are omitted. In mode `Z ⊂ I` no rules are needed.
pub fn derive_dynamic_constraints(map: &AffineMap, spec: &CodeSpec) -> Result<DynamicConstraintSet> {
    derive_with(map, spec, &AutomorphismOracle::new(spec))
}

pub(crate) fn derive_with(
    map: &AffineMap,
    spec: &CodeSpec,
    oracle: &AutomorphismOracle,
) -> Result<DynamicConstraintSet> {
    if map.n() != spec.n {
        return Err(Error::Dimension(format!("map on n = {} for a code with n = {}", map.n(), spec.n)));
    }
    if spec.mode == ShortMode::ZInI || spec.short_set.is_empty() {
        return Ok(DynamicConstraintSet::empty());
    }
    if !oracle.check(map.perm(), false) {
        return Err(Error::NotInPool("the map does not keep F \\ Z frozen".into()));
    }
    let big_n = spec.big_n;
    let info = spec.info_mask();
    let short = spec.short_mask();
    // Generator of the permuted code in branch input coordinates; the oracle
    // keeps its support inside I ∪ Z.
    let mut generator = Vec::with_capacity(spec.k);
    for &i in &spec.info_set {
        let mut x = vec![0u8; big_n];
        let mut j = i;
        loop {
            x[map.perm()[j]] = 1;
            if j == 0 {
                break;
            }
            j = (j - 1) & i;
        }
        polar_transform_bytes(&mut x);
        generator.push(BitVec::from_bits(&x));
    }
    let echelon = if generator.is_empty() { Vec::new() } else { f2_solve_triangularize(&BitMatrix::from_rows(&generator)?) };
    // Null space over I ∪ Z, one check per non-pivot variable. When the
    // parities x'_{π(Z)} = 0 are independent they span the same space.
    let mut is_pivot = vec![false; big_n];
    for row in &echelon {
        is_pivot[row.pivot] = true;
    }
    let checks: Vec<BitVec> = (0..big_n)
        .filter(|&f| (info[f] || short[f]) && !is_pivot[f])
        .map(|f| {
            let ones = std::iter::once(f)
                .chain(echelon.iter().filter(|row| row.sources.contains(&f)).map(|row| row.pivot));
            BitVec::from_indices(big_n, ones)
        })
        .collect::<Result<_>>()?;
    if checks.len() != spec.s {
        return Err(Error::NotInPool(format!("{} parity checks for S = {}", checks.len(), spec.s)));
    }
    let reduced = if checks.is_empty() { Vec::new() } else { f2_solve_triangularize(&BitMatrix::from_rows(&checks)?) };
    let mut constraints = Vec::new();
    for row in reduced {
        if !short[row.pivot] {
            return Err(Error::NotInPool(format!("pivot {} lands in the information set", row.pivot)));
        }
        if let Some(&s) = row.sources.iter().find(|&&s| !info[s]) {
            return Err(Error::NotInPool(format!("source {s} of pivot {} is not an information index", row.pivot)));
        }
        if !row.sources.is_empty() {
            constraints.push(DynamicConstraint { target: row.pivot, sources: row.sources });
        }
    }
    constraints.sort_by_key(|c| c.target);
    Ok(DynamicConstraintSet { constraints })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autgroup::{compute_star_pattern, enumerate_pi, filter_shortening};
    use crate::construct::{build_shortened_code, ShortPattern};
    use crate::f2linalg::polar_transform_bytes;

    const WORKED_PI: [usize; 16] = [0, 3, 14, 13, 8, 11, 6, 5, 4, 7, 10, 9, 12, 15, 2, 1];

    fn code(pattern: ShortPattern) -> CodeSpec {
        build_shortened_code(4, 3, 4, pattern, ShortMode::ZInF, 0.0).unwrap()
    }

    #[test]
    fn worked_example_gives_one_rule() {
        let spec = code(ShortPattern::BitReversal);
        let map = AffineMap::from_permutation(&WORKED_PI).unwrap();
        let set = derive_dynamic_constraints(&map, &spec).unwrap();
        assert_eq!(set.constraints, vec![DynamicConstraint { target: 15, sources: vec![13] }]);
    }

    #[test]
    fn identity_gives_no_rules() {
        let spec = code(ShortPattern::Block);
        assert!(derive_dynamic_constraints(&AffineMap::identity(4), &spec).unwrap().is_empty());
    }

    #[test]
    fn maps_outside_the_pool_are_rejected() {
        let spec = code(ShortPattern::Block);
        // y_0 += y_1 turns the row y_0 y_2 into one involving y_1 y_2, a row of F \ Z.
        let map = AffineMap::complement_affine(4, &[0b0011, 0b0010, 0b0100, 0b1000], 0).unwrap();
        assert!(matches!(derive_dynamic_constraints(&map, &spec), Err(Error::NotInPool(_))));
    }

    /// Brute force over messages: encode through the permuted code with the
    /// emitted rules and check the shortened and frozen positions.
    fn rules_are_sound(spec: &CodeSpec, map: &AffineMap, set: &DynamicConstraintSet) -> bool {
        let big_n = spec.big_n;
        let info = spec.info_mask();
        (0..1u64 << spec.k).all(|m| {
            let mut u = vec![0u8; big_n];
            for (t, &i) in spec.info_set.iter().enumerate() {
                u[i] = (m >> t & 1) as u8;
            }
            set.apply(&mut u);
            let mut x_perm = u.clone();
            polar_transform_bytes(&mut x_perm);
            // The permuted codeword must be the image of a mother codeword.
            let mut x = vec![0u8; big_n];
            for i in 0..big_n {
                x[i] = x_perm[map.perm()[i]];
            }
            let mut u_back = x.clone();
            polar_transform_bytes(&mut u_back);
            spec.short_set.iter().all(|&z| x[z] == 0) && (0..big_n).all(|i| info[i] || u_back[i] == 0)
        })
    }

    #[test]
    fn exhaustive_pools_at_n4() {
        for pattern in [ShortPattern::Block, ShortPattern::BitReversal] {
            let spec = code(pattern);
            let maps = enumerate_pi(&compute_star_pattern(&spec)).unwrap();
            let mut fixed = 0;
            for map in &maps {
                let set = derive_dynamic_constraints(map, &spec).unwrap();
                assert!(set.is_well_formed());
                assert_eq!(set.is_empty(), filter_shortening(map, &spec.short_set), "{map:?}");
                fixed += usize::from(set.is_empty());
                assert!(rules_are_sound(&spec, map, &set), "{map:?}");
            }
            let expected = if pattern == ShortPattern::Block { 128 } else { 2304 };
            assert_eq!(fixed, expected);
        }
    }

    #[test]
    fn apply_fills_targets_in_order() {
        let set = DynamicConstraintSet {
            constraints: vec![
                DynamicConstraint { target: 2, sources: vec![0, 1] },
                DynamicConstraint { target: 3, sources: vec![2] },
            ],
        };
        let mut u = vec![1, 0, 0, 0];
        set.apply(&mut u);
        assert_eq!(u, vec![1, 0, 1, 1]);
    }
}
