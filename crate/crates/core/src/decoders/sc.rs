use super::{boxplus, check_len, from_u, g_update, hard, leaf_roles, Leaf, LlrFrame, UpdateRule, DecodeOutput};
use crate::autgroup::DynamicConstraintSet;
use crate::construct::CodeSpec;

/// Successive-cancellation decoding.
///
/// Frozen inputs decide 0, dynamic targets copy the XOR of their already
/// decided sources, information inputs take the sign of their LLR.
///
/// # Panics
///
/// If `llr` does not have `N` entries.
pub fn sc_decode(llr: &LlrFrame, spec: &CodeSpec, dyn_set: &DynamicConstraintSet, rule: UpdateRule) -> DecodeOutput {
    check_len(llr, spec).expect("LLR frame length");
    let n = spec.n;
    let roles = leaf_roles(spec, dyn_set);
    let mut ws = Workspace {
        alpha: (0..=n).map(|s| vec![0.0; 1 << s]).collect(),
        beta: (0..=n).map(|s| vec![0u8; 1 << s]).collect(),
        u: vec![0u8; spec.big_n],
        roles: &roles,
        rule,
    };
    ws.alpha[n].copy_from_slice(&llr.values);
    ws.node(n, 0);
    from_u(ws.u, llr, spec, 1)
}

struct Workspace<'a> {
    /// `alpha[s]`: LLRs entering the current node at depth `n - s`.
    alpha: Vec<Vec<f64>>,
    /// `beta[s]`: partial sums leaving the current node at depth `n - s`.
    beta: Vec<Vec<u8>>,
    u: Vec<u8>,
    roles: &'a [Leaf],
    rule: UpdateRule,
}

impl Workspace<'_> {
    fn node(&mut self, s: usize, first_leaf: usize) {
        if s == 0 {
            let l = self.alpha[0][0];
            let bit = match &self.roles[first_leaf] {
                Leaf::Frozen => 0,
                Leaf::Info => hard(l),
                Leaf::Dynamic(src) => src.iter().fold(0, |acc, &j| acc ^ self.u[j]),
            };
            self.u[first_leaf] = bit;
            self.beta[0][0] = bit;
            return;
        }
        let half = 1 << (s - 1);
        let (lo, hi) = self.alpha.split_at_mut(s);
        let (parent, child) = (&hi[0], &mut lo[s - 1]);
        for i in 0..half {
            child[i] = boxplus(parent[i], parent[half + i], self.rule);
        }
        self.node(s - 1, first_leaf);
        {
            let (lo, hi) = self.beta.split_at_mut(s);
            hi[0][..half].copy_from_slice(&lo[s - 1]);
        }
        let (lo, hi) = self.alpha.split_at_mut(s);
        let (parent, child) = (&hi[0], &mut lo[s - 1]);
        let left = &self.beta[s][..half];
        for i in 0..half {
            child[i] = g_update(parent[i], parent[half + i], left[i]);
        }
        self.node(s - 1, first_leaf + half);
        let (lo, hi) = self.beta.split_at_mut(s);
        let (out, right) = (&mut hi[0], &lo[s - 1]);
        for (o, &r) in out[..half].iter_mut().zip(&right[..half]) {
            *o ^= r;
        }
        out[half..2 * half].copy_from_slice(&right[..half]);
    }
}
