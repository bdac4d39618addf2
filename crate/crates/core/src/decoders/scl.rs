use super::{boxplus, check_len, from_u, g_update, hard, leaf_roles, DecodeOutput, Leaf, LlrFrame, UpdateRule};
use crate::autgroup::DynamicConstraintSet;
use crate::construct::CodeSpec;

#[derive(Clone)]
struct Path {
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<u8>>,
    u: Vec<u8>,
    metric: f64,
}

/// Successive-cancellation list decoding with the LLR-based path metric.
///
/// Each decision against the sign of its LLR costs `|llr|`. The surviving
/// `list_size` paths are the cheapest ones; equal metrics keep the earlier
/// path and prefer bit 0. The cheapest final path is returned (no CRC), so
/// `list_size = 1` reproduces [`sc_decode`](super::sc_decode) exactly.
///
/// # Panics
///
/// If `llr` does not have `N` entries or `list_size` is 0.
pub fn scl_decode(
    llr: &LlrFrame,
    spec: &CodeSpec,
    dyn_set: &DynamicConstraintSet,
    list_size: usize,
    rule: UpdateRule,
) -> DecodeOutput {
    check_len(llr, spec).expect("LLR frame length");
    assert!(list_size >= 1, "list size must be positive");
    let n = spec.n;
    let mut root = Path {
        alpha: (0..=n).map(|s| vec![0.0; 1 << s]).collect(),
        beta: (0..=n).map(|s| vec![0u8; 1 << s]).collect(),
        u: vec![0u8; spec.big_n],
        metric: 0.0,
    };
    root.alpha[n].copy_from_slice(&llr.values);
    let roles = leaf_roles(spec, dyn_set);
    let mut list = List { paths: vec![root], roles: &roles, list_size, rule };
    list.node(n, 0);
    let best = list
        .paths
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.metric.total_cmp(&b.1.metric).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let u = std::mem::take(&mut list.paths[best].u);
    from_u(u, llr, spec, 1)
}

struct List<'a> {
    paths: Vec<Path>,
    roles: &'a [Leaf],
    list_size: usize,
    rule: UpdateRule,
}

impl List<'_> {
    fn node(&mut self, s: usize, first_leaf: usize) {
        if s == 0 {
            self.leaf(first_leaf);
            return;
        }
        let half = 1 << (s - 1);
        let rule = self.rule;
        for p in &mut self.paths {
            let (lo, hi) = p.alpha.split_at_mut(s);
            for i in 0..half {
                lo[s - 1][i] = boxplus(hi[0][i], hi[0][half + i], rule);
            }
        }
        self.node(s - 1, first_leaf);
        for p in &mut self.paths {
            let (lo, hi) = p.beta.split_at_mut(s);
            hi[0][..half].copy_from_slice(&lo[s - 1]);
            let (alo, ahi) = p.alpha.split_at_mut(s);
            for i in 0..half {
                alo[s - 1][i] = g_update(ahi[0][i], ahi[0][half + i], hi[0][i]);
            }
        }
        self.node(s - 1, first_leaf + half);
        for p in &mut self.paths {
            let (lo, hi) = p.beta.split_at_mut(s);
            for i in 0..half {
                hi[0][i] ^= lo[s - 1][i];
                hi[0][half + i] = lo[s - 1][i];
            }
        }
    }

    fn leaf(&mut self, i: usize) {
        match &self.roles[i] {
            Leaf::Info => self.fork(i),
            role => {
                for p in &mut self.paths {
                    let l = p.alpha[0][0];
                    let bit = match role {
                        Leaf::Dynamic(src) => src.iter().fold(0, |acc, &j| acc ^ p.u[j]),
                        _ => 0,
                    };
                    if bit != hard(l) {
                        p.metric += l.abs();
                    }
                    p.u[i] = bit;
                    p.beta[0][0] = bit;
                }
            }
        }
    }

    fn fork(&mut self, i: usize) {
        let mut cands: Vec<(f64, usize, u8)> = Vec::with_capacity(2 * self.paths.len());
        for (k, p) in self.paths.iter().enumerate() {
            let l = p.alpha[0][0];
            for bit in 0..2u8 {
                let penalty = if bit != hard(l) { l.abs() } else { 0.0 };
                cands.push((p.metric + penalty, k, bit));
            }
        }
        // Stable: equal metrics keep candidate order.
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        cands.truncate(self.list_size);
        let mut uses = vec![0usize; self.paths.len()];
        for c in &cands {
            uses[c.1] += 1;
        }
        let mut old: Vec<Option<Path>> = std::mem::take(&mut self.paths).into_iter().map(Some).collect();
        let mut next = Vec::with_capacity(cands.len());
        for (metric, k, bit) in cands {
            uses[k] -= 1;
            let mut p = if uses[k] == 0 { old[k].take().expect("path reused") } else { old[k].clone().expect("path") };
            p.metric = metric;
            p.u[i] = bit;
            p.beta[0][0] = bit;
            next.push(p);
        }
        self.paths = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_polar, build_shortened_code, ShortMode, ShortPattern};
    use crate::decoders::sc_decode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn list_of_one_is_sc() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let spec = build_shortened_code(6, 24, 10, ShortPattern::Block, ShortMode::ZInF, 0.0).unwrap();
        for _ in 0..300 {
            let llr = LlrFrame::new((0..64).map(|_| 2.0 + 2.0 * noise.sample(&mut rng)).collect());
            let a = sc_decode(&llr, &spec, &DynamicConstraintSet::empty(), UpdateRule::MinSum);
            let b = scl_decode(&llr, &spec, &DynamicConstraintSet::empty(), 1, UpdateRule::MinSum);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ml_score_bounds_list_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let spec = build_polar(4, 4, 0.0).unwrap();
        for _ in 0..200 {
            let llr = LlrFrame::new((0..16).map(|_| 1.0 + 1.5 * noise.sample(&mut rng)).collect());
            let ml = crate::decoders::ml_oracle_decode(&llr, &spec).unwrap();
            let scl = scl_decode(&llr, &spec, &DynamicConstraintSet::empty(), 16, UpdateRule::MinSum);
            assert!(ml.score >= scl.score - 1e-9);
        }
    }
}
