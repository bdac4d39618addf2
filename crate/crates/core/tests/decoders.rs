use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shortpolar::ae::{select_ensemble, Ensemble};
use shortpolar::autgroup::DynamicConstraintSet;
use shortpolar::construct::{build_shortened_code, encode, CodeSpec, ShortMode, ShortPattern, SnrConvention};
use shortpolar::decoders::{decode, ml_oracle_decode, scl_decode, DecoderConfig, LlrFrame, UpdateRule};
use shortpolar::f2linalg::{polar_transform, BitVec};
use shortpolar::sim::{transmit, ChannelConfig};

fn all_decoders() -> [DecoderConfig; 5] {
    [DecoderConfig::sc(), DecoderConfig::scl(4), DecoderConfig::scan(3), DecoderConfig::bp(50, true), DecoderConfig::bp(20, false)]
}

fn random_message(rng: &mut ChaCha8Rng, k: usize) -> BitVec {
    BitVec::from_bools(&(0..k).map(|_| rng.random()).collect::<Vec<_>>())
}

fn noisy(spec: &CodeSpec, snr: f64, rng: &mut ChaCha8Rng) -> (BitVec, LlrFrame) {
    let x = encode(spec, &random_message(rng, spec.k)).unwrap();
    let ch = ChannelConfig::for_code(spec, snr, SnrConvention::Snr);
    let llr = transmit(&x, spec, &ch, rng);
    (x, llr)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn noiseless_frames_are_recovered(
        n in 3usize..=7,
        s_frac in 0.0f64..0.45,
        k_frac in 0.05f64..0.95,
        bit_rev in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let big_n = 1usize << n;
        let s = (s_frac * big_n as f64) as usize;
        let k = ((k_frac * (big_n - s) as f64) as usize).max(1);
        let pattern = if bit_rev { ShortPattern::BitReversal } else { ShortPattern::Block };
        let spec = build_shortened_code(n, k, s, pattern, ShortMode::ZInF, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = encode(&spec, &random_message(&mut rng, k)).unwrap();
        let llr = LlrFrame::noiseless(&x);
        for cfg in all_decoders() {
            let out = decode(&llr, &spec, &DynamicConstraintSet::empty(), &cfg).unwrap();
            prop_assert_eq!(&out.x_hat, &x, "{:?}", cfg);
        }
    }

    #[test]
    fn outputs_are_codewords(seed in any::<u64>(), snr in -2.0f64..3.0) {
        let spec = build_shortened_code(6, 24, 10, ShortPattern::BitReversal, ShortMode::ZInF, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, llr) = noisy(&spec, snr, &mut rng);
        for cfg in all_decoders() {
            let out = decode(&llr, &spec, &DynamicConstraintSet::empty(), &cfg).unwrap();
            prop_assert_eq!(polar_transform(&out.u_hat), out.x_hat.clone());
            prop_assert!(spec.frozen_set.iter().all(|&f| !out.u_hat.get(f)));
            prop_assert!(spec.short_set.iter().all(|&z| !out.x_hat.get(z)));
            prop_assert!(out.iterations_used >= 1 && out.iterations_used <= cfg.max_iters.max(1));
        }
    }

    /// Under min-sum the |L| penalties of a path sum to the correlation
    /// discrepancy of its codeword, so a list covering every message is ML.
    #[test]
    fn full_list_is_maximum_likelihood(seed in any::<u64>(), k in 1usize..=5, snr in -3.0f64..2.0) {
        let spec = build_shortened_code(4, k, 3, ShortPattern::BitReversal, ShortMode::ZInF, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, llr) = noisy(&spec, snr, &mut rng);
        let list = scl_decode(&llr, &spec, &DynamicConstraintSet::empty(), 1 << k, UpdateRule::MinSum);
        let ml = ml_oracle_decode(&llr, &spec).unwrap();
        prop_assert!((list.score - ml.score).abs() < 1e-6, "{} vs {}", list.score, ml.score);
    }

    #[test]
    fn ensemble_picks_the_best_branch(seed in any::<u64>(), snr in 0.0f64..3.0) {
        let spec = build_shortened_code(6, 24, 10, ShortPattern::BitReversal, ShortMode::ZInF, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, llr) = noisy(&spec, snr, &mut rng);
        for adjusted in [false, true] {
            let cfg = select_ensemble(&spec, 4, adjusted, false, DecoderConfig::scan(2), seed).unwrap();
            let ens = Ensemble::new(&cfg, &spec).unwrap();
            let branches = ens.branch_outputs(&llr).unwrap();
            let out = ens.decode(&llr).unwrap();
            let best = branches.iter().map(|b| b.score).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(out.score, best);
            prop_assert_eq!(out.iterations_used, branches.iter().map(|b| b.iterations_used).max().unwrap());
            prop_assert!(spec.short_set.iter().all(|&z| !out.x_hat.get(z)));
            prop_assert_eq!(polar_transform(&out.u_hat), out.x_hat.clone());
        }
    }
}

#[test]
fn larger_lists_do_not_lose_likelihood_on_average() {
    let spec = build_shortened_code(7, 51, 13, ShortPattern::Block, ShortMode::ZInF, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let none = DynamicConstraintSet::empty();
    let mut errors = [0u32; 4];
    for _ in 0..3000 {
        let (x, llr) = noisy(&spec, 2.0, &mut rng);
        for (slot, l) in [1, 2, 4, 8].into_iter().enumerate() {
            errors[slot] += u32::from(decode(&llr, &spec, &none, &DecoderConfig::scl(l)).unwrap().x_hat != x);
        }
    }
    assert!(errors.windows(2).all(|w| w[1] <= w[0]), "{errors:?}");
    assert!(errors[3] < errors[0], "{errors:?}");
}

#[test]
fn bp_iterations_shrink_with_snr() {
    let spec = build_shortened_code(7, 51, 13, ShortPattern::Block, ShortMode::ZInF, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let none = DynamicConstraintSet::empty();
    let avg = |snr: f64, rng: &mut ChaCha8Rng| {
        (0..400)
            .map(|_| decode(&noisy(&spec, snr, rng).1, &spec, &none, &DecoderConfig::bp(200, true)).unwrap().iterations_used)
            .sum::<usize>() as f64
            / 400.0
    };
    let (low, high) = (avg(1.0, &mut rng), avg(4.0, &mut rng));
    assert!(high < low, "{low} {high}");
}
