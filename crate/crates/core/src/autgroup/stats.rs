//! Group-size statistics and the large/small classification over all
//! shortening parameters.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::oracle::AutomorphismOracle;
use super::pattern::{compute_star_pattern_with, count_pi, enumerate_pi, sample_pi};
use super::filter_shortening;
use crate::construct::{build_shortened_code, CodeSpec, ShortMode, ShortPattern};
use crate::error::Result;
use crate::parallel::{map_range, ExecMode};

/// Sizes of the pool and of the automorphism group of a mother code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    /// `|Π|`, exact or the `2^(stars + b-stars)` bound.
    pub pi_size: u128,
    pub pi_exact: bool,
    /// Pool maps that fail the relaxed oracle (zero when the pattern is
    /// closed).
    pub oracle_rejections: u128,
    /// `|A(C_m)|`, exact when `pi_exact`, else `pi_size · es_probability`.
    pub aut_size: f64,
    pub es_probability: f64,
    pub sample_count: u64,
}

/// Exhaustive statistics by enumerating the whole pool (`n ≤ 5`).
pub fn exhaustive_stats(spec: &CodeSpec) -> Result<GroupStats> {
    let oracle = AutomorphismOracle::new(spec);
    let pattern = compute_star_pattern_with(spec, &oracle);
    let maps = enumerate_pi(&pattern)?;
    let mut rejected = 0u128;
    let mut fixed = 0u128;
    for map in &maps {
        if !oracle.check(map.perm(), false) {
            rejected += 1;
        } else if filter_shortening(map, &spec.short_set) {
            fixed += 1;
        }
    }
    let pool = maps.len() as u128;
    let admissible = pool - rejected;
    Ok(GroupStats {
        pi_size: pool,
        pi_exact: true,
        oracle_rejections: rejected,
        aut_size: fixed as f64,
        es_probability: if admissible == 0 { 0.0 } else { fixed as f64 / admissible as f64 },
        sample_count: pool as u64,
    })
}

/// Monte-Carlo estimate of `P(π(Z) = Z)` for uniform `π ∈ Π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsEstimate {
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub pattern: ShortPattern,
    pub samples: u64,
    pub hits: u64,
    pub p_hat: f64,
    /// 95 % Wilson score interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl EsEstimate {
    pub fn group_stats(&self, spec: &CodeSpec) -> GroupStats {
        let oracle = AutomorphismOracle::new(spec);
        let pi = count_pi(&compute_star_pattern_with(spec, &oracle));
        GroupStats {
            pi_size: pi.count,
            pi_exact: pi.exact,
            oracle_rejections: 0,
            aut_size: pi.count as f64 * self.p_hat,
            es_probability: self.p_hat,
            sample_count: self.samples,
        }
    }
}

fn wilson(hits: u64, n: u64) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let p = hits as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let center = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Samples `samples` maps from the pool of `spec` and counts those fixing
/// the shortening set.
pub fn estimate_es<R: Rng + ?Sized>(spec: &CodeSpec, samples: u64, rng: &mut R) -> Result<EsEstimate> {
    let samples = samples.max(1);
    let oracle = AutomorphismOracle::new(spec);
    let pattern = compute_star_pattern_with(spec, &oracle);
    let mut hits = 0u64;
    for _ in 0..samples {
        let map = sample_pi(&pattern, &oracle, rng)?;
        hits += u64::from(filter_shortening(&map, &spec.short_set));
    }
    let (ci_low, ci_high) = wilson(hits, samples);
    Ok(EsEstimate {
        n: spec.n,
        k: spec.k,
        s: spec.s,
        pattern: spec.pattern,
        samples,
        hits,
        p_hat: hits as f64 / samples as f64,
        ci_low,
        ci_high,
    })
}

/// Number of free positions of a lower-triangular `A`: `n(n-1)/2`.
pub fn stars_lt(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Large,
    Small,
    Infeasible,
}

/// One `(S, K')` cell of the classification grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "K_prime")]
    pub k_prime: usize,
    /// `|⋆|`, or 0 for infeasible cells.
    pub stars: usize,
    pub stars_lt: usize,
    pub category: Category,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub n: usize,
    pub pattern: ShortPattern,
    pub design_snr_db: f64,
    /// Row-major over `S = 1..N/2-1`, `K' = 0..N-1`.
    pub cells: Vec<GridCell>,
    /// Feasible cells with `|⋆| > |⋆|_LT`.
    pub large: usize,
    pub feasible: usize,
    /// `(3N/4)(N/2 - 1)`.
    pub pairs: usize,
}

impl GridSummary {
    pub fn large_fraction(&self) -> f64 {
        self.large as f64 / self.pairs as f64
    }
}

/// Classifies every `(S, K')` mother code by its star count. Rows of the
/// grid are computed independently (in parallel under `mode`).
pub fn classify_grid(n: usize, design_snr_db: f64, pattern: ShortPattern, mode: ExecMode) -> Result<GridSummary> {
    let big_n = 1usize << n;
    let lt = stars_lt(n);
    let rows: Vec<Result<Vec<GridCell>>> = map_range(mode, big_n / 2 - 1, |r| {
        let s = r + 1;
        (0..big_n)
            .map(|k_prime| {
                if k_prime > big_n - s {
                    return Ok(GridCell { s, k_prime, stars: 0, stars_lt: lt, category: Category::Infeasible });
                }
                let spec = build_shortened_code(n, k_prime, s, pattern, ShortMode::ZInF, design_snr_db)?;
                let stars = compute_star_pattern_with(&spec, &AutomorphismOracle::new(&spec)).star_count;
                let category = if stars > lt { Category::Large } else { Category::Small };
                Ok(GridCell { s, k_prime, stars, stars_lt: lt, category })
            })
            .collect()
    });
    let mut cells = Vec::with_capacity(big_n * (big_n / 2 - 1));
    for row in rows {
        cells.extend(row?);
    }
    let large = cells.iter().filter(|c| c.category == Category::Large).count();
    let feasible = cells.iter().filter(|c| c.category != Category::Infeasible).count();
    Ok(GridSummary { n, pattern, design_snr_db, cells, large, feasible, pairs: 3 * big_n / 4 * (big_n / 2 - 1) })
}
