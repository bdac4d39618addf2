use super::{check_len, from_u, DecodeOutput, LlrFrame};
use crate::construct::CodeSpec;
use crate::error::{Error, Result};
use crate::f2linalg::polar_transform_bytes;

/// Largest message length accepted by [`ml_oracle_decode`].
pub const ML_MAX_K: usize = 20;

/// Exhaustive maximum-likelihood decoding: the codeword maximizing the
/// correlation with the LLRs on the transmitted positions.
///
/// Codewords are visited in Gray-code order; ties keep the first one seen.
pub fn ml_oracle_decode(llr: &LlrFrame, spec: &CodeSpec) -> Result<DecodeOutput> {
    if spec.k > ML_MAX_K {
        return Err(Error::TooLarge(spec.k));
    }
    check_len(llr, spec)?;
    let big_n = spec.big_n;
    let short = spec.short_mask();
    let weight: Vec<f64> = (0..big_n).map(|j| if short[j] { 0.0 } else { llr.values[j] }).collect();
    let rows: Vec<Vec<usize>> = spec
        .message_positions()
        .iter()
        .map(|&i| {
            let mut u = vec![0u8; big_n];
            u[i] = 1;
            polar_transform_bytes(&mut u);
            (0..big_n).filter(|&j| u[j] == 1).collect()
        })
        .collect();
    let mut x = vec![0u8; big_n];
    let mut score: f64 = weight.iter().sum();
    let mut best = (score, x.clone());
    for step in 1u64..(1u64 << spec.k) {
        let r = step.trailing_zeros() as usize;
        for &j in &rows[r] {
            score += if x[j] == 0 { -2.0 * weight[j] } else { 2.0 * weight[j] };
            x[j] ^= 1;
        }
        if score > best.0 {
            best = (score, x.clone());
        }
    }
    let mut u = best.1;
    polar_transform_bytes(&mut u);
    Ok(from_u(u, llr, spec, 1))
}
