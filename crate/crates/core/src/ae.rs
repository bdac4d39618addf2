//! Automorphism ensemble decoding.
//!
//! A branch decodes the frame seen through a position permutation and maps
//! the candidate back; the ensemble keeps the candidate with the largest
//! correlation. Adjusted ensembles may use pool maps that move the shortening
//! set, in which case the branch decoder tracks the induced dynamic frozen
//! constraints.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autgroup::{
    compute_star_pattern, derive_dynamic_constraints, filter_shortening, sample_pi, AffineMap, AutomorphismOracle,
    DynamicConstraintSet, StarPattern, SAMPLE_BUDGET,
};
use crate::construct::{CodeSpec, ShortMode};
use crate::decoders::{correlation, decode, DecodeOutput, DecoderConfig, LlrFrame};
use crate::error::{Error, Result};
use crate::f2linalg::{polar_transform, BitVec};

/// Everything needed to rebuild an ensemble decoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub m: usize,
    pub adjusted: bool,
    pub maps: Vec<AffineMap>,
    pub base: DecoderConfig,
    /// Seed the maps were drawn with.
    pub seed: u64,
}

impl EnsembleConfig {
    /// Single identity branch.
    pub fn identity(n: usize, base: DecoderConfig) -> Self {
        Self { m: 1, adjusted: false, maps: vec![AffineMap::identity(n)], base, seed: 0 }
    }

    pub fn validate(&self, spec: &CodeSpec) -> Result<()> {
        if self.m == 0 || self.m != self.maps.len() {
            return Err(Error::Config(format!("m = {} with {} maps", self.m, self.maps.len())));
        }
        self.base.validate()?;
        if !self.adjusted && spec.mode == ShortMode::ZInF {
            if let Some(k) = self.maps.iter().position(|m| !filter_shortening(m, &spec.short_set)) {
                return Err(Error::Config(format!("map {k} moves the shortening set; use an adjusted ensemble")));
            }
        }
        Ok(())
    }
}

/// Candidate produced by one permuted decoder, mapped back to the original
/// positions.
///
/// `perm` must already be verified to lie in the pool and `dyn_set` must be
/// its constraint set.
fn run_branch(
    llr: &LlrFrame,
    map: &AffineMap,
    dyn_set: &DynamicConstraintSet,
    spec: &CodeSpec,
    base: &DecoderConfig,
    short_mask: &[bool],
) -> Result<DecodeOutput> {
    if map.is_identity() {
        return decode(llr, spec, dyn_set, base);
    }
    let out = decode(&llr.permuted(map.perm()), spec, dyn_set, base)?;
    let perm = map.perm();
    let x_hat = BitVec::from_bools(&(0..spec.big_n).map(|i| out.x_hat.get(perm[i])).collect::<Vec<_>>());
    let u_hat = polar_transform(&x_hat);
    let score = correlation(&x_hat, &llr.values, short_mask);
    Ok(DecodeOutput { u_hat, x_hat, iterations_used: out.iterations_used, score })
}

/// `map⁻¹(dec(map(y)))`: decodes the permuted frame, with the dynamic frozen
/// constraints of the map attached, and maps the candidate back.
pub fn permuted_decode(llr: &LlrFrame, map: &AffineMap, spec: &CodeSpec, base: &DecoderConfig) -> Result<DecodeOutput> {
    let dyn_set = derive_dynamic_constraints(map, spec)?;
    if spec.mode == ShortMode::ZInI && !AutomorphismOracle::new(spec).check(map.perm(), false) {
        return Err(Error::NotInPool("the map is not an automorphism of the mother code".into()));
    }
    run_branch(llr, map, &dyn_set, spec, base, &spec.short_mask())
}

/// Prepared ensemble decoder: maps verified and constraints derived once.
#[derive(Clone, Debug)]
pub struct Ensemble {
    spec: CodeSpec,
    base: DecoderConfig,
    branches: Vec<(AffineMap, DynamicConstraintSet)>,
    short_mask: Vec<bool>,
}

impl Ensemble {
    pub fn new(cfg: &EnsembleConfig, spec: &CodeSpec) -> Result<Self> {
        cfg.validate(spec)?;
        let oracle = AutomorphismOracle::new(spec);
        let mut branches = Vec::with_capacity(cfg.m);
        for map in &cfg.maps {
            if !oracle.check(map.perm(), false) {
                return Err(Error::NotInPool("ensemble map fails the automorphism check".into()));
            }
            branches.push((map.clone(), derive_dynamic_constraints(map, spec)?));
        }
        Ok(Self { spec: spec.clone(), base: cfg.base, branches, short_mask: spec.short_mask() })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// Dynamic constraints of each branch.
    pub fn constraints(&self) -> impl Iterator<Item = &DynamicConstraintSet> {
        self.branches.iter().map(|b| &b.1)
    }

    /// Every branch output, in branch order.
    pub fn branch_outputs(&self, llr: &LlrFrame) -> Result<Vec<DecodeOutput>> {
        self.branches
            .iter()
            .map(|(map, dyn_set)| run_branch(llr, map, dyn_set, &self.spec, &self.base, &self.short_mask))
            .collect()
    }

    /// Decodes one frame. `iterations_used` of the result is the maximum
    /// over the branches.
    pub fn decode(&self, llr: &LlrFrame) -> Result<DecodeOutput> {
        let outs = self.branch_outputs(llr)?;
        Ok(select_best(outs))
    }
}

/// Largest correlation wins; ties go to the lowest branch index.
fn select_best(outs: Vec<DecodeOutput>) -> DecodeOutput {
    let t_max = outs.iter().map(|o| o.iterations_used).max().unwrap_or(0);
    let mut best: Option<DecodeOutput> = None;
    for o in outs {
        if best.as_ref().is_none_or(|b| o.score > b.score) {
            best = Some(o);
        }
    }
    let mut best = best.expect("ensemble has at least one branch");
    best.iterations_used = t_max;
    best
}

/// One-shot ensemble decoding of a frame.
pub fn ae_decode(llr: &LlrFrame, cfg: &EnsembleConfig, spec: &CodeSpec) -> Result<DecodeOutput> {
    Ensemble::new(cfg, spec)?.decode(llr)
}

/// Pool pattern used for branch selection. In mode `Z ⊂ I` over a Reed-Muller
/// mother every affine map is an automorphism, so the full pattern is used.
pub fn ensemble_pattern(spec: &CodeSpec) -> StarPattern {
    if spec.mode == ShortMode::ZInI && is_reed_muller(spec) {
        StarPattern::full(spec.n)
    } else {
        compute_star_pattern(spec)
    }
}

fn is_reed_muller(spec: &CodeSpec) -> bool {
    let len = spec.info_set.len();
    (0..=spec.n).any(|r| {
        let min_wt = (spec.n - r) as u32;
        let count = (0..spec.big_n).filter(|i| i.count_ones() >= min_wt).count();
        count == len && spec.info_set.iter().all(|i| i.count_ones() >= min_wt)
    })
}

/// Draws `m` distinct branch permutations from the pool of `spec`.
///
/// Non-adjusted ensembles in mode `Z ⊆ F` only keep maps that fix the
/// shortening set. With `force_identity` the first branch is the identity.
pub fn select_ensemble(
    spec: &CodeSpec,
    m: usize,
    adjusted: bool,
    force_identity: bool,
    base: DecoderConfig,
    seed: u64,
) -> Result<EnsembleConfig> {
    if m == 0 {
        return Err(Error::Config("ensemble needs at least one branch".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let oracle = AutomorphismOracle::new(spec);
    let pattern = ensemble_pattern(spec);
    let need_filter = !adjusted && spec.mode == ShortMode::ZInF;
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut maps = Vec::with_capacity(m);
    if force_identity {
        let id = AffineMap::identity(spec.n);
        seen.insert(id.perm().to_vec());
        maps.push(id);
    }
    let (mut draws, mut kept) = (0u64, 0u64);
    while maps.len() < m {
        if draws >= SAMPLE_BUDGET {
            return Err(Error::SamplingBudget {
                attempts: draws,
                reason: format!(
                    "found {} of {m} distinct maps; {kept} of {draws} draws fixed the shortening set \
                     (estimated P = {:.2e}); consider an adjusted ensemble",
                    maps.len(),
                    kept as f64 / draws.max(1) as f64
                ),
            });
        }
        draws += 1;
        let map = sample_pi(&pattern, &oracle, &mut rng)?;
        if need_filter && !filter_shortening(&map, &spec.short_set) {
            continue;
        }
        kept += 1;
        if seen.insert(map.perm().to_vec()) {
            maps.push(map);
        }
    }
    Ok(EnsembleConfig { m, adjusted, maps, base, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_shortened_code, encode, ShortPattern};
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    const WORKED_PI: [usize; 16] = [0, 3, 14, 13, 8, 11, 6, 5, 4, 7, 10, 9, 12, 15, 2, 1];

    fn noisy(x: &BitVec, spec: &CodeSpec, sigma: f64, rng: &mut ChaCha8Rng) -> LlrFrame {
        let noise = Normal::new(0.0, sigma).unwrap();
        let short = spec.short_mask();
        LlrFrame::new(
            (0..spec.big_n)
                .map(|j| {
                    if short[j] {
                        crate::construct::LLR_SAT
                    } else {
                        let y = if x.get(j) { -1.0 } else { 1.0 } + noise.sample(rng);
                        2.0 * y / (sigma * sigma)
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn identity_branch_is_the_base_decoder() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = build_shortened_code(6, 24, 10, ShortPattern::Block, ShortMode::ZInF, 0.0).unwrap();
        let base = DecoderConfig::sc();
        let cfg = EnsembleConfig::identity(6, base);
        for _ in 0..100 {
            let msg = BitVec::from_bools(&(0..24).map(|_| rng.random()).collect::<Vec<_>>());
            let llr = noisy(&encode(&spec, &msg).unwrap(), &spec, 0.8, &mut rng);
            let a = ae_decode(&llr, &cfg, &spec).unwrap();
            let b = decode(&llr, &spec, &DynamicConstraintSet::empty(), &base).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn worked_permutation_under_sc() {
        let spec = build_shortened_code(4, 3, 4, ShortPattern::BitReversal, ShortMode::ZInF, 0.0).unwrap();
        let map = AffineMap::from_permutation(&WORKED_PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let msg = BitVec::from_bools(&(0..3).map(|_| rng.random()).collect::<Vec<_>>());
            let llr = noisy(&encode(&spec, &msg).unwrap(), &spec, 1.0, &mut rng);
            let out = permuted_decode(&llr, &map, &spec, &DecoderConfig::sc()).unwrap();
            assert!(spec.short_set.iter().all(|&z| !out.x_hat.get(z)));
            assert_eq!(polar_transform(&out.u_hat), out.x_hat);
        }
    }

    #[test]
    fn non_adjusted_selection_fixes_z() {
        let spec = build_shortened_code(4, 3, 4, ShortPattern::BitReversal, ShortMode::ZInF, 0.0).unwrap();
        let cfg = select_ensemble(&spec, 4, false, false, DecoderConfig::sc(), 3).unwrap();
        assert_eq!(cfg.maps.len(), 4);
        let perms: HashSet<_> = cfg.maps.iter().map(|m| m.perm().to_vec()).collect();
        assert_eq!(perms.len(), 4);
        for m in &cfg.maps {
            assert_eq!(m.image(&spec.short_set), vec![3, 7, 11, 15]);
        }
        let json = serde_json::to_string(&cfg).unwrap();
        let back: EnsembleConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        assert!(json.contains("\"A\"") && json.contains("\"base\""));
    }

    #[test]
    fn pool_exhaustion_is_reported() {
        // Block (16,3): 128 maps fix Z, so 200 distinct ones cannot exist.
        let spec = build_shortened_code(4, 3, 4, ShortPattern::Block, ShortMode::ZInF, 0.0).unwrap();
        assert!(matches!(
            select_ensemble(&spec, 200, false, false, DecoderConfig::sc(), 0),
            Err(Error::SamplingBudget { .. })
        ));
    }

    #[test]
    fn selection_is_argmax_and_z_stays_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (pattern, adjusted) in [(ShortPattern::Block, true), (ShortPattern::BitReversal, false)] {
            let spec = build_shortened_code(6, 20, 12, pattern, ShortMode::ZInF, 0.0).unwrap();
            let cfg = select_ensemble(&spec, 4, adjusted, false, DecoderConfig::bp(30, true), 5).unwrap();
            let ens = Ensemble::new(&cfg, &spec).unwrap();
            for _ in 0..100 {
                let msg = BitVec::from_bools(&(0..20).map(|_| rng.random()).collect::<Vec<_>>());
                let llr = noisy(&encode(&spec, &msg).unwrap(), &spec, 0.9, &mut rng);
                let outs = ens.branch_outputs(&llr).unwrap();
                let best = ens.decode(&llr).unwrap();
                assert!(outs.iter().all(|o| o.score <= best.score));
                assert_eq!(best.iterations_used, outs.iter().map(|o| o.iterations_used).max().unwrap());
                assert!(spec.short_set.iter().all(|&z| !best.x_hat.get(z)));
            }
        }
    }
}
