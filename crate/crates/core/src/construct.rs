//! Code design: reliability estimation, polar / Reed-Muller / shortened code
//! construction, the universal partial order, and encoding.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2linalg::{bit_reversal, BitVec};

/// Saturation magnitude for log-likelihood ratios of known bits.
pub const LLR_SAT: f64 = 1000.0;

/// Largest supported stage count for code construction.
pub const MAX_STAGES: usize = 16;

/// Shortening pattern used to pick the shortened positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShortPattern {
    /// The last `S` codeword positions.
    Block,
    /// Bit-reversal images of the last `S` positions.
    #[serde(rename = "br")]
    BitReversal,
    /// No shortening.
    None,
}

impl fmt::Display for ShortPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShortPattern::Block => "block",
            ShortPattern::BitReversal => "br",
            ShortPattern::None => "none",
        })
    }
}

impl std::str::FromStr for ShortPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block" => Ok(ShortPattern::Block),
            "br" | "bit-reversal" => Ok(ShortPattern::BitReversal),
            "none" => Ok(ShortPattern::None),
            other => Err(Error::Parse(format!("unknown pattern {other:?}"))),
        }
    }
}

/// Where the shortened input positions live.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShortMode {
    /// Shortened indices are frozen: `Z ⊆ F`, `|I| = K`.
    #[serde(rename = "frozen")]
    ZInF,
    /// Shortened indices are part of the information set: `Z ⊂ I`,
    /// `|I| = K + S`. They still carry zeros.
    #[serde(rename = "info")]
    ZInI,
}

impl fmt::Display for ShortMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShortMode::ZInF => "frozen",
            ShortMode::ZInI => "info",
        })
    }
}

impl std::str::FromStr for ShortMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frozen" => Ok(ShortMode::ZInF),
            "info" => Ok(ShortMode::ZInI),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// Full description of a (possibly shortened) `G_N`-coset code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    /// Message length.
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "S")]
    pub s: usize,
    pub pattern: ShortPattern,
    pub mode: ShortMode,
    /// `None` for channel-independent constructions.
    pub design_snr_db: Option<f64>,
    pub info_set: Vec<usize>,
    pub frozen_set: Vec<usize>,
    pub short_set: Vec<usize>,
}

impl CodeSpec {
    /// Builds a spec from explicit index sets and checks its invariants.
    pub fn from_sets(
        n: usize,
        info_set: Vec<usize>,
        short_set: Vec<usize>,
        pattern: ShortPattern,
        mode: ShortMode,
        design_snr_db: Option<f64>,
    ) -> Result<Self> {
        if n > MAX_STAGES {
            return Err(Error::Size(format!("stage count {n} exceeds {MAX_STAGES}")));
        }
        let big_n = 1usize << n;
        let mut info_set = info_set;
        info_set.sort_unstable();
        info_set.dedup();
        let mut short_set = short_set;
        short_set.sort_unstable();
        short_set.dedup();
        let mut in_info = vec![false; big_n];
        for &i in &info_set {
            if i >= big_n {
                return Err(Error::IndexOutOfRange { index: i, n: big_n });
            }
            in_info[i] = true;
        }
        let frozen_set = (0..big_n).filter(|&i| !in_info[i]).collect();
        let s = short_set.len();
        let k = match mode {
            ShortMode::ZInF => info_set.len(),
            ShortMode::ZInI => info_set.len().saturating_sub(s),
        };
        let spec = CodeSpec { n, big_n, k, s, pattern, mode, design_snr_db, info_set, frozen_set, short_set };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n > MAX_STAGES || self.big_n != 1 << self.n {
            return Err(Error::Size(format!("N = {} is not 2^{}", self.big_n, self.n)));
        }
        let mut role = vec![0u8; self.big_n];
        for &i in self.info_set.iter().chain(&self.frozen_set) {
            if i >= self.big_n {
                return Err(Error::IndexOutOfRange { index: i, n: self.big_n });
            }
            role[i] += 1;
        }
        if role.iter().any(|&r| r != 1) {
            return Err(Error::Config("info and frozen sets must partition [N]".into()));
        }
        if self.s != self.short_set.len() || (self.s > 0 && 2 * self.s >= self.big_n) {
            return Err(Error::Config(format!("invalid shortening size S = {}", self.s)));
        }
        let info = self.info_mask();
        for &z in &self.short_set {
            if z >= self.big_n {
                return Err(Error::IndexOutOfRange { index: z, n: self.big_n });
            }
            let ok = match self.mode {
                ShortMode::ZInF => !info[z],
                ShortMode::ZInI => info[z],
            };
            if !ok {
                return Err(Error::Config(format!("shortened index {z} violates the {} mode", self.mode)));
            }
        }
        let expected = match self.mode {
            ShortMode::ZInF => self.k,
            ShortMode::ZInI => self.k + self.s,
        };
        if self.info_set.len() != expected {
            return Err(Error::Config(format!(
                "|I| = {} but K = {} in mode {}",
                self.info_set.len(),
                self.k,
                self.mode
            )));
        }
        Ok(())
    }

    /// Transmitted length `N - S`.
    pub fn transmitted_len(&self) -> usize {
        self.big_n - self.s
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.transmitted_len() as f64
    }

    pub fn info_mask(&self) -> Vec<bool> {
        mask(self.big_n, &self.info_set)
    }

    pub fn short_mask(&self) -> Vec<bool> {
        mask(self.big_n, &self.short_set)
    }

    /// Input positions that carry message bits, ascending.
    pub fn message_positions(&self) -> Vec<usize> {
        let short = self.short_mask();
        self.info_set.iter().copied().filter(|&i| !short[i]).collect()
    }

    /// Codeword positions sent over the channel, ascending.
    pub fn transmitted_positions(&self) -> Vec<usize> {
        let short = self.short_mask();
        (0..self.big_n).filter(|&j| !short[j]).collect()
    }

    /// Positions that must stay frozen to zero under any permutation of the
    /// pool: `F` minus the shortened positions (mode `Z ⊆ F`), or `F`.
    pub fn hard_frozen_set(&self) -> Vec<usize> {
        let short = self.short_mask();
        self.frozen_set.iter().copied().filter(|&i| !short[i]).collect()
    }
}

fn mask(len: usize, indices: &[usize]) -> Vec<bool> {
    let mut m = vec![false; len];
    for &i in indices {
        m[i] = true;
    }
    m
}

/// Parameters of a Reed-Muller code `R(r, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RmParams {
    pub r: usize,
    pub n: usize,
}

/// Universal partial order: true iff bit-channel `i` is at least as reliable
/// as `j` on every channel.
///
/// `j` must be reachable from `i` by clearing ones or moving a one to a less
/// significant zero. That closure is equivalent to dominance of the one-counts
/// of every most-significant suffix.
pub fn upo_geq(i: usize, j: usize, n: usize) -> bool {
    (0..n).all(|t| ((i >> t).count_ones()) >= ((j >> t).count_ones()))
}

/// True iff the information set is an up-set of the universal partial order.
pub fn is_polar_like(spec: &CodeSpec) -> bool {
    let info = spec.info_mask();
    let n = spec.n;
    // Closure under the covering moves suffices: set a zero bit, or move a
    // one to the next more significant zero.
    spec.info_set.iter().all(|&j| {
        (0..n).all(|b| {
            let bit = 1usize << b;
            if j & bit == 0 {
                info[j | bit]
            } else if b + 1 < n && j & (bit << 1) == 0 {
                info[(j & !bit) | (bit << 1)]
            } else {
                true
            }
        })
    })
}

/// Per-index reliability from Gaussian-approximation density evolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityProfile {
    pub n: usize,
    pub design_snr_db: f64,
    /// Mean LLR of each synthetic bit-channel.
    pub scores: Vec<f64>,
    /// Mean channel LLR used at each codeword position.
    pub channel_llr: Vec<f64>,
}

impl ReliabilityProfile {
    /// The `k` most reliable indices outside `excluded`, ascending. Equal scores
    /// prefer the larger index.
    pub fn top_k(&self, k: usize, excluded: &[bool]) -> Vec<usize> {
        let mut candidates: Vec<usize> = (0..self.scores.len()).filter(|&i| !excluded[i]).collect();
        candidates.sort_by(|&a, &b| {
            self.scores[b].partial_cmp(&self.scores[a]).unwrap_or(std::cmp::Ordering::Equal).then(b.cmp(&a))
        });
        let mut top: Vec<usize> = candidates.into_iter().take(k).collect();
        top.sort_unstable();
        top
    }
}

/// Convention linking an SNR in dB to the noise variance of the BPSK/AWGN
/// channel (unit symbol energy).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrConvention {
    /// `SNR = 1/σ²`.
    #[default]
    Snr,
    /// `Es/N0`, `σ² = 1 / (2 · Es/N0)`.
    EsN0,
    /// `Eb/N0`, `σ² = 1 / (2 · R · Eb/N0)`.
    EbN0,
}

impl SnrConvention {
    /// Noise variance for `snr_db` at code rate `rate`.
    pub fn noise_variance(self, snr_db: f64, rate: f64) -> f64 {
        let lin = 10f64.powf(snr_db / 10.0);
        match self {
            SnrConvention::Snr => 1.0 / lin,
            SnrConvention::EsN0 => 1.0 / (2.0 * lin),
            SnrConvention::EbN0 => 1.0 / (2.0 * rate * lin),
        }
    }
}

impl fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SnrConvention::Snr => "snr",
            SnrConvention::EsN0 => "esn0",
            SnrConvention::EbN0 => "ebn0",
        })
    }
}

impl std::str::FromStr for SnrConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "snr" => Ok(SnrConvention::Snr),
            "esn0" => Ok(SnrConvention::EsN0),
            "ebn0" => Ok(SnrConvention::EbN0),
            other => Err(Error::Parse(format!("unknown SNR convention {other:?}"))),
        }
    }
}

mod ga {
    /// Below this mean the quadratic segment is used.
    const LOW: f64 = 0.867861;
    /// Point where the middle and upper segments meet, so `φ` stays
    /// continuous and decreasing.
    pub(super) const HIGH: f64 = 14.394352942168403;
    /// Means below this are treated as zero (pure rounding noise).
    const FLUSH: f64 = 1e-12;

    fn mid(x: f64) -> f64 {
        -0.4527 * x.powf(0.86) + 0.0218
    }

    fn upper(x: f64) -> f64 {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }

    /// `ln φ(x)` of the check-node function.
    pub fn ln_phi(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x < LOW {
            0.0564 * x * x - 0.48560 * x
        } else if x < HIGH {
            mid(x)
        } else {
            upper(x)
        }
    }

    pub fn ln_phi_inv(t: f64) -> f64 {
        if t >= 0.0 {
            return 0.0;
        }
        if t >= ln_phi(LOW) {
            // Smaller root of 0.0564 x^2 - 0.4856 x - t = 0.
            let (a, b) = (0.0564, -0.48560);
            return (-b - (b * b + 4.0 * a * t).sqrt()) / (2.0 * a);
        }
        if t >= mid(HIGH) {
            return ((0.0218 - t) / 0.4527).powf(1.0 / 0.86);
        }
        let (mut lo, mut hi) = (HIGH, HIGH * 2.0);
        while upper(hi) > t {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if upper(m) > t {
                lo = m;
            } else {
                hi = m;
            }
            if hi - lo <= 1e-13 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Mean LLR at the output of a check node with input means `a` and `b`.
    pub fn check(a: f64, b: f64) -> f64 {
        let (x, y) = (ln_phi(a), ln_phi(b));
        let (la, lb) = if x >= y { (x, y) } else { (y, x) };
        // ln(φa + φb - φa φb) with φa >= φb.
        let t = la + ((lb - la).exp() - lb.exp()).ln_1p();
        let out = ln_phi_inv(t);
        if out < FLUSH {
            0.0
        } else {
            out
        }
    }

    pub fn evolve(means: &[f64]) -> Vec<f64> {
        if means.len() == 1 {
            return means.to_vec();
        }
        let h = means.len() / 2;
        let minus: Vec<f64> = (0..h).map(|k| check(means[k], means[k + h])).collect();
        let plus: Vec<f64> = (0..h).map(|k| means[k] + means[k + h]).collect();
        let mut out = evolve(&minus);
        out.extend(evolve(&plus));
        out
    }
}

/// Gaussian-approximation density evolution with shortened positions entering
/// as known bits. The design SNR follows [`SnrConvention::Snr`].
pub fn design_reliability(n: usize, short_set: &[usize], design_snr_db: f64) -> Result<ReliabilityProfile> {
    design_reliability_with(n, short_set, design_snr_db, SnrConvention::Snr, 0.5)
}

/// [`design_reliability`] under an explicit SNR convention. Transmitted
/// positions start from the mean LLR `2/σ²` (`4 · R · Eb/N0` in Eb/N0 terms);
/// shortened positions start at [`LLR_SAT`].
pub fn design_reliability_with(
    n: usize,
    short_set: &[usize],
    design_snr_db: f64,
    convention: SnrConvention,
    rate: f64,
) -> Result<ReliabilityProfile> {
    if n > MAX_STAGES {
        return Err(Error::Size(format!("stage count {n} exceeds {MAX_STAGES}")));
    }
    let big_n = 1usize << n;
    if !short_set.is_empty() && 2 * short_set.len() >= big_n {
        return Err(Error::Infeasible(format!("S = {} is not below N/2", short_set.len())));
    }
    if !(rate > 0.0 && rate <= 1.0) || !design_snr_db.is_finite() {
        return Err(Error::Config(format!("invalid design rate {rate} or SNR {design_snr_db}")));
    }
    let base = 2.0 / convention.noise_variance(design_snr_db, rate);
    let mut channel_llr = vec![base; big_n];
    for &z in short_set {
        if z >= big_n {
            return Err(Error::IndexOutOfRange { index: z, n: big_n });
        }
        channel_llr[z] = LLR_SAT;
    }
    let scores = ga::evolve(&channel_llr);
    Ok(ReliabilityProfile { n, design_snr_db, scores, channel_llr })
}

/// Shortened positions for a pattern.
pub fn build_short_set(n: usize, s: usize, pattern: ShortPattern) -> Result<Vec<usize>> {
    if n == 0 || n > MAX_STAGES {
        return Err(Error::Size(format!("stage count {n} out of range")));
    }
    let big_n = 1usize << n;
    if s == 0 || 2 * s >= big_n {
        return Err(Error::Size(format!("S = {s} must satisfy 1 <= S < N/2 = {}", big_n / 2)));
    }
    let mut z: Vec<usize> = match pattern {
        ShortPattern::Block => (big_n - s..big_n).collect(),
        ShortPattern::BitReversal => (0..s).map(|t| bit_reversal(big_n - 1 - t, n)).collect::<Result<_>>()?,
        ShortPattern::None => {
            return Err(Error::Config("a shortening set needs a block or br pattern".into()));
        }
    };
    z.sort_unstable();
    Ok(z)
}

/// Shortened polar code: the `K` most reliable positions outside the
/// shortening set carry data.
///
/// With `s == 0` (pattern ignored) this is an ordinary polar code.
pub fn build_shortened_code(
    n: usize,
    k: usize,
    s: usize,
    pattern: ShortPattern,
    mode: ShortMode,
    design_snr_db: f64,
) -> Result<CodeSpec> {
    if n > MAX_STAGES {
        return Err(Error::Size(format!("stage count {n} exceeds {MAX_STAGES}")));
    }
    let big_n = 1usize << n;
    let (short_set, pattern) = if s == 0 { (Vec::new(), ShortPattern::None) } else { (build_short_set(n, s, pattern)?, pattern) };
    if k > big_n - s {
        return Err(Error::Infeasible(format!("K = {k} exceeds N - S = {}", big_n - s)));
    }
    let profile = design_reliability(n, &short_set, design_snr_db)?;
    let excluded = mask(big_n, &short_set);
    let mut info = profile.top_k(k, &excluded);
    if mode == ShortMode::ZInI {
        info.extend_from_slice(&short_set);
    }
    CodeSpec::from_sets(n, info, short_set, pattern, mode, Some(design_snr_db))
}

/// Plain (unshortened) polar code.
pub fn build_polar(n: usize, k: usize, design_snr_db: f64) -> Result<CodeSpec> {
    build_shortened_code(n, k, 0, ShortPattern::None, ShortMode::ZInF, design_snr_db)
}

/// Reed-Muller code: indices whose binary weight is at least `n - r`.
pub fn build_rm(params: RmParams) -> Result<CodeSpec> {
    let RmParams { r, n } = params;
    if r > n || n > MAX_STAGES {
        return Err(Error::Size(format!("invalid Reed-Muller parameters R({r},{n})")));
    }
    let info = (0..1usize << n).filter(|&i| i.count_ones() as usize + r >= n).collect();
    CodeSpec::from_sets(n, info, Vec::new(), ShortPattern::None, ShortMode::ZInF, None)
}

/// True iff `G_N(I, Z) = 0`, i.e. every shortened position is a combination
/// of frozen inputs only. In mode [`ShortMode::ZInI`] the check covers the
/// message-carrying rows.
pub fn verify_shortening(spec: &CodeSpec) -> bool {
    let rows = match spec.mode {
        ShortMode::ZInF => spec.info_set.clone(),
        ShortMode::ZInI => spec.message_positions(),
    };
    rows.iter().all(|&i| spec.short_set.iter().all(|&z| z & !i != 0))
}

/// Input vector `u` for a message: message bits on the message positions,
/// zeros elsewhere.
pub fn place_message(spec: &CodeSpec, message: &BitVec) -> Result<BitVec> {
    if message.len() != spec.k {
        return Err(Error::MessageLength { got: message.len(), expected: spec.k });
    }
    let mut u = BitVec::zeros(spec.big_n);
    for (bit, pos) in spec.message_positions().into_iter().enumerate() {
        if message.get(bit) {
            u.set(pos, true);
        }
    }
    Ok(u)
}

/// Encodes a length-`K` message into the full length-`N` codeword `u · G_N`.
/// Shortened positions are zero; dropping them gives the transmitted word.
pub fn encode(spec: &CodeSpec, message: &BitVec) -> Result<BitVec> {
    let u = place_message(spec, message)?;
    Ok(crate::f2linalg::polar_transform(&u))
}

/// Byte-per-bit encoder used in the simulation hot path. Returns `(u, x)`.
pub(crate) fn encode_bytes(message_positions: &[usize], message: &[u8], big_n: usize) -> (Vec<u8>, Vec<u8>) {
    let mut u = vec![0u8; big_n];
    for (&pos, &b) in message_positions.iter().zip(message) {
        u[pos] = b;
    }
    let mut x = u.clone();
    crate::f2linalg::polar_transform_bytes(&mut x);
    (u, x)
}
