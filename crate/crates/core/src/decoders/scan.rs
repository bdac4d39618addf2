use super::{boxplus, check_len, clamp, finish, hard, leaf_roles, DecodeOutput, Leaf, LlrFrame, UpdateRule};
use crate::autgroup::DynamicConstraintSet;
use crate::construct::{CodeSpec, LLR_SAT};

/// Soft-cancellation decoding: `iters` passes of soft message exchange over
/// the SC schedule.
///
/// Frozen leaves feed back `+LLR_SAT`. A dynamic target feeds back `±LLR_SAT`
/// according to the XOR of the hard estimates its sources reached earlier in
/// the same pass. The output takes the sign of each information leaf's
/// final LLR and fills frozen and dynamic positions from it.
///
/// # Panics
///
/// If `llr` does not have `N` entries.
pub fn scan_decode(
    llr: &LlrFrame,
    spec: &CodeSpec,
    dyn_set: &DynamicConstraintSet,
    iters: usize,
    rule: UpdateRule,
) -> DecodeOutput {
    check_len(llr, spec).expect("LLR frame length");
    let n = spec.n;
    let big_n = spec.big_n;
    let roles = leaf_roles(spec, dyn_set);
    let mut ws = Workspace {
        alpha: (0..=n).map(|s| vec![0.0; 1 << s]).collect(),
        beta: vec![vec![0.0; big_n]; n + 1],
        leaf_llr: vec![0.0; big_n],
        roles: &roles,
        rule,
    };
    ws.alpha[n].copy_from_slice(&llr.values);
    let iters = iters.max(1);
    for _ in 0..iters {
        ws.node(n, 0);
    }
    let u = ws.leaf_llr.iter().map(|&l| hard(l)).collect();
    finish(u, &roles, llr, spec, iters)
}

struct Workspace<'a> {
    /// `alpha[s]`: LLRs entering the current node of size `2^s`.
    alpha: Vec<Vec<f64>>,
    /// `beta[s][j]`: feedback of the size-`2^s` node covering leaf `j`.
    beta: Vec<Vec<f64>>,
    leaf_llr: Vec<f64>,
    roles: &'a [Leaf],
    rule: UpdateRule,
}

impl Workspace<'_> {
    fn node(&mut self, s: usize, first: usize) {
        if s == 0 {
            let l = self.alpha[0][0];
            self.leaf_llr[first] = l;
            self.beta[0][first] = match &self.roles[first] {
                Leaf::Frozen => LLR_SAT,
                Leaf::Info => 0.0,
                Leaf::Dynamic(src) => {
                    let bit = src.iter().fold(0, |acc, &j| acc ^ hard(self.leaf_llr[j]));
                    if bit == 0 {
                        LLR_SAT
                    } else {
                        -LLR_SAT
                    }
                }
            };
            return;
        }
        let half = 1 << (s - 1);
        let rule = self.rule;
        let (left, right) = (first, first + half);
        {
            let (lo, hi) = self.alpha.split_at_mut(s);
            let b_right = &self.beta[s - 1][right..right + half];
            for i in 0..half {
                lo[s - 1][i] = boxplus(hi[0][i], clamp(hi[0][half + i] + b_right[i]), rule);
            }
        }
        self.node(s - 1, left);
        {
            let (lo, hi) = self.alpha.split_at_mut(s);
            let b_left = &self.beta[s - 1][left..left + half];
            for i in 0..half {
                lo[s - 1][i] = clamp(hi[0][half + i] + boxplus(hi[0][i], b_left[i], rule));
            }
        }
        self.node(s - 1, right);
        let parent = &self.alpha[s];
        let (lo, hi) = self.beta.split_at_mut(s);
        let children = &lo[s - 1];
        let out = &mut hi[0][first..first + 2 * half];
        for i in 0..half {
            let (ba, bb) = (children[left + i], children[right + i]);
            out[i] = boxplus(ba, clamp(bb + parent[half + i]), rule);
            out[half + i] = clamp(bb + boxplus(ba, parent[i], rule));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_shortened_code, encode, ShortMode, ShortPattern};
    use crate::decoders::sc_decode;
    use crate::f2linalg::BitVec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn noiseless_single_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = build_shortened_code(7, 51, 13, ShortPattern::Block, ShortMode::ZInF, 0.0).unwrap();
        for _ in 0..20 {
            let msg = BitVec::from_bools(&(0..spec.k).map(|_| rng.random()).collect::<Vec<_>>());
            let x = encode(&spec, &msg).unwrap();
            let out = scan_decode(&LlrFrame::noiseless(&x), &spec, &DynamicConstraintSet::empty(), 1, UpdateRule::MinSum);
            assert_eq!(out.x_hat, x);
            assert_eq!(out.iterations_used, 1);
        }
    }

    #[test]
    fn one_pass_on_full_rate_code_matches_sc() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let spec = CodeSpec::from_sets(5, (0..32).collect(), vec![], ShortPattern::None, ShortMode::ZInF, None).unwrap();
        for _ in 0..500 {
            let llr = LlrFrame::new((0..32).map(|_| 1.0 + 2.0 * noise.sample(&mut rng)).collect());
            let a = scan_decode(&llr, &spec, &DynamicConstraintSet::empty(), 1, UpdateRule::MinSum);
            let b = sc_decode(&llr, &spec, &DynamicConstraintSet::empty(), UpdateRule::MinSum);
            assert_eq!(a.u_hat, b.u_hat);
        }
    }
}
