//! BPSK/AWGN Monte-Carlo harness and latency models.
//!
//! Every frame draws its message and noise from a generator keyed by
//! `(seed, snr_index, frame_index)`, and the stopping rule is applied in frame
//! order, so results do not depend on the worker count.

use std::io::{Read, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ae::Ensemble;
use crate::autgroup::DynamicConstraintSet;
use crate::construct::{encode_bytes, CodeSpec, SnrConvention, LLR_SAT};
use crate::decoders::{decode, DecodeOutput, DecoderConfig, LlrFrame};
use crate::error::{Error, Result};
use crate::f2linalg::BitVec;
use crate::parallel::{map_range, ExecMode};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub snr_db: f64,
    /// `K / (N - S)`.
    pub rate: f64,
    pub convention: SnrConvention,
}

impl ChannelConfig {
    pub fn for_code(spec: &CodeSpec, snr_db: f64, convention: SnrConvention) -> Self {
        Self { snr_db, rate: spec.rate(), convention }
    }

    pub fn noise_variance(&self) -> f64 {
        self.convention.noise_variance(self.snr_db, self.rate)
    }
}

/// BPSK over AWGN: LLR `2y/σ²` on transmitted positions, `+LLR_SAT` on the
/// shortened ones.
pub fn transmit<R: Rng + ?Sized>(x: &BitVec, spec: &CodeSpec, ch: &ChannelConfig, rng: &mut R) -> LlrFrame {
    transmit_bits(&x.to_bits(), &spec.short_mask(), ch.noise_variance(), rng)
}

fn transmit_bits<R: Rng + ?Sized>(x: &[u8], short: &[bool], sigma2: f64, rng: &mut R) -> LlrFrame {
    let sigma = sigma2.sqrt();
    let values = x
        .iter()
        .zip(short)
        .map(|(&bit, &shortened)| {
            if shortened {
                LLR_SAT
            } else {
                let n: f64 = StandardNormal.sample(rng);
                let y = if bit == 0 { 1.0 } else { -1.0 } + sigma * n;
                2.0 * y / sigma2
            }
        })
        .collect();
    LlrFrame::new(values)
}

/// Anything that turns a frame into a candidate.
pub trait FrameDecoder: Sync {
    fn decode_frame(&self, llr: &LlrFrame) -> Result<DecodeOutput>;
}

/// A single component decoder without dynamic constraints.
#[derive(Clone, Debug)]
pub struct PlainDecoder {
    pub spec: CodeSpec,
    pub cfg: DecoderConfig,
}

impl FrameDecoder for PlainDecoder {
    fn decode_frame(&self, llr: &LlrFrame) -> Result<DecodeOutput> {
        decode(llr, &self.spec, &DynamicConstraintSet::empty(), &self.cfg)
    }
}

impl FrameDecoder for Ensemble {
    fn decode_frame(&self, llr: &LlrFrame) -> Result<DecodeOutput> {
        self.decode(llr)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { min_errors: 100, max_frames: 10_000_000 }
    }
}

/// Statistics of one SNR point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub snr_db: f64,
    pub frames: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub avg_tmax: f64,
    pub l_avg: f64,
    pub l_scl: u64,
    pub seed: u64,
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// `(L_avg, L_SCL) = ((2n + 2)·E[T_max] + 1, 2N + K)`.
pub fn latency_models(result: &SimResult, n: usize, big_n: usize, k: usize) -> (f64, u64) {
    ((2 * n + 2) as f64 * result.avg_tmax + 1.0, (2 * big_n + k) as u64)
}

/// Generator of frame `frame` at SNR index `point`.
pub fn frame_rng(seed: u64, point: u64, frame: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&point.to_le_bytes());
    key[16..24].copy_from_slice(&frame.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

const FIRST_BATCH: u64 = 64;
const MAX_BATCH: u64 = 8192;

/// Simulates every SNR in `snrs` until `stop.min_errors` block errors or
/// `stop.max_frames` frames. A block error is a wrong message bit.
pub fn run_bler(
    spec: &CodeSpec,
    decoder: &dyn FrameDecoder,
    snrs: &[f64],
    convention: SnrConvention,
    stop: StopRule,
    seed: u64,
    mode: ExecMode,
) -> Result<Vec<SimResult>> {
    if stop.min_errors == 0 || stop.max_frames == 0 {
        return Err(Error::Config("stopping rule needs min_errors >= 1 and max_frames >= 1".into()));
    }
    let positions = spec.message_positions();
    let short = spec.short_mask();
    let mut results = Vec::with_capacity(snrs.len());
    for (point, &snr_db) in snrs.iter().enumerate() {
        let start = Instant::now();
        let sigma2 = ChannelConfig::for_code(spec, snr_db, convention).noise_variance();
        let one_frame = |frame: u64| -> Result<(bool, usize)> {
            let mut rng = frame_rng(seed, point as u64, frame);
            let message: Vec<u8> = (0..spec.k).map(|_| rng.random::<bool>() as u8).collect();
            let (u, x) = encode_bytes(&positions, &message, spec.big_n);
            let llr = transmit_bits(&x, &short, sigma2, &mut rng);
            let out = decoder.decode_frame(&llr)?;
            let wrong = positions.iter().any(|&p| out.u_hat.get(p) != (u[p] == 1));
            Ok((wrong, out.iterations_used))
        };
        let (mut frames, mut errors, mut t_sum) = (0u64, 0u64, 0u64);
        let mut batch = FIRST_BATCH;
        'outer: while frames < stop.max_frames && errors < stop.min_errors {
            let count = batch.min(stop.max_frames - frames);
            let base = frames;
            let outs = map_range(mode, count as usize, |i| one_frame(base + i as u64));
            for o in outs {
                let (wrong, t) = o?;
                frames += 1;
                errors += u64::from(wrong);
                t_sum += t as u64;
                if errors >= stop.min_errors {
                    break 'outer;
                }
            }
            batch = (batch * 2).min(MAX_BATCH);
        }
        let mut r = SimResult {
            snr_db,
            frames,
            block_errors: errors,
            bler: errors as f64 / frames as f64,
            avg_tmax: t_sum as f64 / frames as f64,
            l_avg: 0.0,
            l_scl: 0,
            seed,
            wall_time_s: 0.0,
        };
        (r.l_avg, r.l_scl) = latency_models(&r, spec.n, spec.big_n, spec.k);
        r.wall_time_s = start.elapsed().as_secs_f64();
        results.push(r);
    }
    Ok(results)
}

/// Writes results as CSV with the columns
/// `snr_db, frames, block_errors, bler, avg_tmax, l_avg, l_scl, seed`.
pub fn write_csv<W: Write>(results: &[SimResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SimResult>> {
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}
