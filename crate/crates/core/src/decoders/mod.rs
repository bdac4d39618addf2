//! Component decoders for `G_N`-coset codes: SC, SCL, SCAN and BP, plus an
//! exhaustive ML decoder used as a test oracle.
//!
//! Every decoder takes channel LLRs (positive favors 0), the code and an
//! optional set of dynamic frozen constraints. Internal arithmetic is clamped
//! to `±LLR_SAT`.

mod bp;
mod ml;
mod sc;
mod scan;
mod scl;

pub use bp::bp_decode;
pub use ml::{ml_oracle_decode, ML_MAX_K};
pub use sc::sc_decode;
pub use scan::scan_decode;
pub use scl::scl_decode;

use serde::{Deserialize, Serialize};

use crate::autgroup::DynamicConstraintSet;
use crate::construct::{CodeSpec, LLR_SAT};
use crate::error::{Error, Result};
use crate::f2linalg::{polar_transform_bytes, BitVec};

/// Channel LLRs of one frame, one entry per mother-code position.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrFrame {
    pub values: Vec<f64>,
}

impl LlrFrame {
    /// Wraps `values`, clamping every entry to `±LLR_SAT`.
    pub fn new(values: Vec<f64>) -> Self {
        Self { values: values.into_iter().map(clamp).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Noiseless LLRs of a codeword: `+LLR_SAT` for 0, `-LLR_SAT` for 1.
    pub fn noiseless(x: &BitVec) -> Self {
        Self { values: (0..x.len()).map(|i| if x.get(i) { -LLR_SAT } else { LLR_SAT }).collect() }
    }

    /// The frame seen through a position permutation: `out[perm[i]] = self[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for (i, &p) in perm.iter().enumerate() {
            values[p] = self.values[i];
        }
        Self { values }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    #[default]
    Sc,
    Scl,
    Scan,
    Bp,
}

impl std::fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecoderKind::Sc => "sc",
            DecoderKind::Scl => "scl",
            DecoderKind::Scan => "scan",
            DecoderKind::Bp => "bp",
        })
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(DecoderKind::Sc),
            "scl" => Ok(DecoderKind::Scl),
            "scan" => Ok(DecoderKind::Scan),
            "bp" => Ok(DecoderKind::Bp),
            other => Err(Error::Parse(format!("unknown decoder {other:?}"))),
        }
    }
}

/// Check-node rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateRule {
    #[default]
    MinSum,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub kind: DecoderKind,
    pub list_size: usize,
    pub max_iters: usize,
    pub early_termination: bool,
    pub update_rule: UpdateRule,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self { kind: DecoderKind::Sc, list_size: 1, max_iters: 1, early_termination: true, update_rule: UpdateRule::MinSum }
    }
}

impl DecoderConfig {
    pub fn sc() -> Self {
        Self::default()
    }

    pub fn scl(list_size: usize) -> Self {
        Self { kind: DecoderKind::Scl, list_size, ..Self::default() }
    }

    pub fn scan(iters: usize) -> Self {
        Self { kind: DecoderKind::Scan, max_iters: iters, ..Self::default() }
    }

    pub fn bp(iters: usize, early_termination: bool) -> Self {
        Self { kind: DecoderKind::Bp, max_iters: iters, early_termination, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.list_size == 0 || !self.list_size.is_power_of_two() {
            return Err(Error::Config(format!("list size {} is not a power of two", self.list_size)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("iteration budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// A decoded candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutput {
    pub u_hat: BitVec,
    pub x_hat: BitVec,
    /// Iterations run (SCAN/BP); 1 for the single-pass decoders.
    pub iterations_used: usize,
    /// Correlation `Σ (1 - 2 x̂_j) llr_j` over the transmitted positions.
    pub score: f64,
}

/// Runs the decoder selected by `cfg`.
pub fn decode(llr: &LlrFrame, spec: &CodeSpec, dyn_set: &DynamicConstraintSet, cfg: &DecoderConfig) -> Result<DecodeOutput> {
    cfg.validate()?;
    check_len(llr, spec)?;
    Ok(match cfg.kind {
        DecoderKind::Sc => sc_decode(llr, spec, dyn_set, cfg.update_rule),
        DecoderKind::Scl => scl_decode(llr, spec, dyn_set, cfg.list_size, cfg.update_rule),
        DecoderKind::Scan => scan_decode(llr, spec, dyn_set, cfg.max_iters, cfg.update_rule),
        DecoderKind::Bp => bp_decode(llr, spec, dyn_set, cfg.max_iters, cfg.early_termination, cfg.update_rule),
    })
}

/// Correlation of a codeword with the LLRs, skipping shortened positions.
pub fn correlation(x: &BitVec, llr: &[f64], short_mask: &[bool]) -> f64 {
    llr.iter()
        .enumerate()
        .filter(|&(j, _)| !short_mask[j])
        .map(|(j, &l)| if x.get(j) { -l } else { l })
        .sum()
}

pub(crate) fn check_len(llr: &LlrFrame, spec: &CodeSpec) -> Result<()> {
    if llr.len() != spec.big_n {
        return Err(Error::Dimension(format!("{} LLRs for N = {}", llr.len(), spec.big_n)));
    }
    Ok(())
}

#[inline]
pub(crate) fn clamp(x: f64) -> f64 {
    x.clamp(-LLR_SAT, LLR_SAT)
}

/// Hard decision; a zero LLR decides 0.
#[inline]
pub(crate) fn hard(x: f64) -> u8 {
    (x < 0.0) as u8
}

/// Check-node combination `a ⊞ b`.
#[inline]
pub(crate) fn boxplus(a: f64, b: f64, rule: UpdateRule) -> f64 {
    let m = a.abs().min(b.abs());
    let sign_neg = (a < 0.0) != (b < 0.0);
    let mag = match rule {
        UpdateRule::MinSum => m,
        UpdateRule::Exact => {
            let corr = (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p();
            (m + if sign_neg { -corr } else { corr }).max(0.0)
        }
    };
    clamp(if sign_neg { -mag } else { mag })
}

/// Variable-node update of SC: `b + (1 - 2u) a`.
#[inline]
pub(crate) fn g_update(a: f64, b: f64, u: u8) -> f64 {
    clamp(if u == 0 { b + a } else { b - a })
}

/// Role of an input position during decoding.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Leaf {
    Frozen,
    Info,
    Dynamic(Vec<usize>),
}

pub(crate) fn leaf_roles(spec: &CodeSpec, dyn_set: &DynamicConstraintSet) -> Vec<Leaf> {
    let mut roles = vec![Leaf::Info; spec.big_n];
    for &f in &spec.frozen_set {
        roles[f] = Leaf::Frozen;
    }
    for c in dyn_set.iter() {
        roles[c.target] = Leaf::Dynamic(c.sources.clone());
    }
    roles
}

/// Forces frozen and dynamic positions of a hard input estimate, then
/// re-encodes.
pub(crate) fn finish(mut u: Vec<u8>, roles: &[Leaf], llr: &LlrFrame, spec: &CodeSpec, iterations: usize) -> DecodeOutput {
    for i in 0..u.len() {
        match &roles[i] {
            Leaf::Frozen => u[i] = 0,
            Leaf::Dynamic(src) => u[i] = src.iter().fold(0, |acc, &s| acc ^ u[s]),
            Leaf::Info => {}
        }
    }
    from_u(u, llr, spec, iterations)
}

pub(crate) fn from_u(u: Vec<u8>, llr: &LlrFrame, spec: &CodeSpec, iterations: usize) -> DecodeOutput {
    let mut x = u.clone();
    polar_transform_bytes(&mut x);
    let x_hat = BitVec::from_bits(&x);
    let score = correlation(&x_hat, &llr.values, &spec.short_mask());
    DecodeOutput { u_hat: BitVec::from_bits(&u), x_hat, iterations_used: iterations, score }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boxplus_rules() {
        assert_eq!(boxplus(3.0, -2.0, UpdateRule::MinSum), -2.0);
        assert_eq!(boxplus(-3.0, -2.0, UpdateRule::MinSum), 2.0);
        for &(a, b) in &[(3.0, -2.0), (0.5, 0.25), (-7.0, 1.5), (6.0, 9.0), (0.0, 4.0)] {
            let tanh_rule = 2.0 * ((a / 2.0f64).tanh() * (b / 2.0f64).tanh()).atanh();
            assert!((boxplus(a, b, UpdateRule::Exact) - tanh_rule).abs() < 1e-9, "{a} {b}");
        }
        assert!((boxplus(LLR_SAT, LLR_SAT, UpdateRule::Exact) - (LLR_SAT - 2f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        assert!(DecoderConfig::scl(4).validate().is_ok());
        assert!(DecoderConfig::scl(3).validate().is_err());
        assert!(DecoderConfig::bp(0, true).validate().is_err());
        let json = serde_json::to_string(&DecoderConfig::bp(200, true)).unwrap();
        assert!(json.contains("\"kind\":\"bp\"") && json.contains("min-sum"));
    }

    #[test]
    fn permuted_frame() {
        let f = LlrFrame::new(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(f.permuted(&[3, 2, 1, 0]).values, vec![4.0, 3.0, 2.0, 1.0]);
        assert_eq!(f.permuted(&[1, 2, 3, 0]).values, vec![4.0, 1.0, 2.0, 3.0]);
    }
}
