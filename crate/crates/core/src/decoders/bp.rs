use super::{boxplus, check_len, clamp, finish, hard, leaf_roles, DecodeOutput, Leaf, LlrFrame, UpdateRule};
use crate::autgroup::DynamicConstraintSet;
use crate::construct::{CodeSpec, LLR_SAT};
use crate::f2linalg::polar_transform_bytes;

/// Belief propagation on the `n`-stage factor graph.
///
/// Column 0 holds the inputs `u`, column `n` the code bits. One iteration is
/// a full right-to-left sweep followed by a left-to-right sweep. Frozen
/// inputs carry a `+LLR_SAT` prior; dynamic targets get `±LLR_SAT` from the
/// XOR of their sources' current hard estimates, refreshed before every
/// left-to-right sweep.
///
/// With `early_termination`, decoding stops after the first iteration whose
/// hard estimate `û` (frozen and dynamic positions filled) re-encodes to the
/// hard code-bit estimate `x̂`.
///
/// # Panics
///
/// If `llr` does not have `N` entries.
pub fn bp_decode(
    llr: &LlrFrame,
    spec: &CodeSpec,
    dyn_set: &DynamicConstraintSet,
    iters: usize,
    early_termination: bool,
    rule: UpdateRule,
) -> DecodeOutput {
    check_len(llr, spec).expect("LLR frame length");
    let n = spec.n;
    let big_n = spec.big_n;
    let roles = leaf_roles(spec, dyn_set);
    // left[j]: messages towards the inputs, right[j]: towards the code bits.
    let mut left = vec![vec![0.0f64; big_n]; n + 1];
    let mut right = vec![vec![0.0f64; big_n]; n + 1];
    left[n].copy_from_slice(&llr.values);
    for (i, r) in roles.iter().enumerate() {
        if *r == Leaf::Frozen {
            right[0][i] = LLR_SAT;
        }
    }
    let has_dynamic = !dyn_set.is_empty();
    let mut u = vec![0u8; big_n];
    let mut x = vec![0u8; big_n];
    let iters = iters.max(1);
    let mut used = iters;
    for t in 1..=iters {
        for j in (0..n).rev() {
            let step = 1 << j;
            let (lo, hi) = left.split_at_mut(j + 1);
            let (out, inp) = (&mut lo[j], &hi[0]);
            let r = &right[j];
            for p in (0..big_n).step_by(2 * step).flat_map(|base| base..base + step) {
                let q = p | step;
                out[p] = boxplus(inp[p], clamp(inp[q] + r[q]), rule);
                out[q] = clamp(boxplus(inp[p], r[p], rule) + inp[q]);
            }
        }
        if has_dynamic {
            for i in 0..big_n {
                if let Leaf::Dynamic(src) = &roles[i] {
                    let bit = src.iter().fold(0, |acc, &s| acc ^ hard(left[0][s] + right[0][s]));
                    right[0][i] = if bit == 0 { LLR_SAT } else { -LLR_SAT };
                }
            }
        }
        for j in 0..n {
            let step = 1 << j;
            let (lo, hi) = right.split_at_mut(j + 1);
            let (inp, out) = (&lo[j], &mut hi[0]);
            let l = &left[j + 1];
            for p in (0..big_n).step_by(2 * step).flat_map(|base| base..base + step) {
                let q = p | step;
                out[p] = boxplus(inp[p], clamp(l[q] + inp[q]), rule);
                out[q] = clamp(boxplus(inp[p], l[p], rule) + inp[q]);
            }
        }
        if early_termination {
            fill_hard(&mut u, &left[0], &right[0], &roles);
            x.copy_from_slice(&u);
            polar_transform_bytes(&mut x);
            if (0..big_n).all(|i| x[i] == hard(left[n][i] + right[n][i])) {
                used = t;
                break;
            }
        }
    }
    let u = (0..big_n).map(|i| hard(left[0][i] + right[0][i])).collect();
    finish(u, &roles, llr, spec, used)
}

fn fill_hard(u: &mut [u8], left: &[f64], right: &[f64], roles: &[Leaf]) {
    for i in 0..u.len() {
        u[i] = match &roles[i] {
            Leaf::Frozen => 0,
            Leaf::Info => hard(left[i] + right[i]),
            Leaf::Dynamic(src) => src.iter().fold(0, |acc, &s| acc ^ u[s]),
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_shortened_code, encode, ShortMode, ShortPattern};
    use crate::f2linalg::BitVec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn noiseless_stops_after_one_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let spec = build_shortened_code(7, 51, 13, ShortPattern::BitReversal, ShortMode::ZInF, 0.0).unwrap();
        for _ in 0..20 {
            let msg = BitVec::from_bools(&(0..spec.k).map(|_| rng.random()).collect::<Vec<_>>());
            let x = encode(&spec, &msg).unwrap();
            let out = bp_decode(&LlrFrame::noiseless(&x), &spec, &DynamicConstraintSet::empty(), 50, true, UpdateRule::MinSum);
            assert_eq!(out.x_hat, x);
            assert_eq!(out.iterations_used, 1);
        }
    }

    #[test]
    fn budget_contract_and_stopping_is_transparent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let spec = build_shortened_code(6, 20, 8, ShortPattern::Block, ShortMode::ZInF, 0.0).unwrap();
        let empty = DynamicConstraintSet::empty();
        for _ in 0..100 {
            let llr = LlrFrame::new((0..64).map(|_| 1.5 + 1.2 * noise.sample(&mut rng)).collect());
            let full = bp_decode(&llr, &spec, &empty, 30, false, UpdateRule::MinSum);
            assert_eq!(full.iterations_used, 30);
            let early = bp_decode(&llr, &spec, &empty, 30, true, UpdateRule::MinSum);
            assert!(early.iterations_used <= 30);
            // Stopping at t is the same as running exactly t iterations.
            let cut = bp_decode(&llr, &spec, &empty, early.iterations_used, false, UpdateRule::MinSum);
            assert_eq!(cut, early);
        }
    }
}
