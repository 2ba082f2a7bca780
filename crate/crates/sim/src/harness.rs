//! Sweep drivers. Each `run_*` function evaluates every point of the
//! configured σ_η sweep; Monte Carlo work is split into seeded chunks on the
//! current rayon pool.

use crossbar_core::array::{cell_path_config, sample_reads, sample_target_cell, CrossbarArray};
use crossbar_core::ecc::{bch_decode_hdd, bch_encode, BchCode, CodeId};
use crossbar_core::map::{bep_map_quadrature, count_map_errors, log_likelihood_pair, BepEstimate};
use crossbar_core::quantizer::{accumulate_multiread_mi, design_dp, fine_grid_mi, MiEstimate, Observation};
use crossbar_core::stats::{wilson_half_width, MeanAccumulator};
use crossbar_core::threshold::{baseline_single_read_threshold, detect_mean, optimize_threshold_bisection};
use crossbar_core::{Bit, ChannelModel, Error};
use rand::Rng;

use crate::config::{DetectorKind, ExperimentConfig};
use crate::error::{SimError, SimResult};
use crate::output::{BepRow, MiRow, ResultRow};
use crate::rng::{run_chunked, sum_counts};

fn point(sigma_idx: usize, reads_idx: usize, kind: u64) -> u64 {
    ((sigma_idx as u64) << 16) | ((reads_idx as u64) << 8) | kind
}

/// Thresholds for one noise level.
#[derive(Debug, Clone)]
pub struct DetectorSet {
    pub model: ChannelModel,
    pub reads: Vec<usize>,
    pub kinds: Vec<DetectorKind>,
    /// MI-optimal threshold per entry of `reads`.
    pub optimized: Vec<f64>,
    pub baseline: f64,
}

impl DetectorSet {
    pub fn new(model: ChannelModel, cfg: &ExperimentConfig) -> SimResult<Self> {
        let optimized = if cfg.detectors.contains(&DetectorKind::ThresholdOptimized) {
            cfg.reads
                .iter()
                .map(|&n| optimize_threshold_bisection(&model, n, cfg.ns).map(|d| d.t1))
                .collect::<Result<_, _>>()?
        } else {
            Vec::new()
        };
        let baseline = if cfg.detectors.contains(&DetectorKind::ThresholdBaseline) {
            baseline_single_read_threshold(&model)?
        } else {
            f64::NAN
        };
        Ok(DetectorSet { model, reads: cfg.reads.clone(), kinds: cfg.detectors.clone(), optimized, baseline })
    }

    /// Number of (reads, detector) pairs.
    pub fn len(&self) -> usize {
        self.reads.len() * self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the decision of every (reads, detector) pair for one cell, using
    /// the leading `N` entries of `reads`.
    pub fn decide_all(&self, reads: &[f64], mut out: impl FnMut(usize, Bit)) {
        for (ni, &n) in self.reads.iter().enumerate() {
            let prefix = &reads[..n];
            let mean = prefix.iter().sum::<f64>() / n as f64;
            for (di, kind) in self.kinds.iter().enumerate() {
                let bit = match kind {
                    DetectorKind::ThresholdOptimized => detect_mean(mean, self.optimized[ni]),
                    DetectorKind::ThresholdBaseline => detect_mean(mean, self.baseline),
                    DetectorKind::Map => {
                        let (l0, l1) = log_likelihood_pair(prefix, &self.model);
                        Bit::from(l1 > l0)
                    }
                };
                out(ni * self.kinds.len() + di, bit);
            }
        }
    }
}

/// Designed-quantizer MI for every `(σ_η, N, q)`, the fine-grid MI of the
/// read average, and (when `mi_samples > 0`) the Monte Carlo MI of the full
/// read vector.
pub fn run_mi_sweep(cfg: &ExperimentConfig) -> SimResult<Vec<MiRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (si, &sigma) in cfg.sweep.iter().enumerate() {
        let model = ChannelModel::new(cfg.params.with_sigma(sigma))?;
        for (ni, &n) in cfg.reads.iter().enumerate() {
            for &q in &cfg.quant_bits {
                let design = design_dp(&model, n, q, cfg.h)?;
                rows.push(MiRow {
                    sigma_eta: sigma,
                    n_reads: n,
                    q: Some(q),
                    mi_bits: design.mi_bits,
                    method: "dp".into(),
                });
            }
            let fine = fine_grid_mi(&model, n, cfg.h)?;
            rows.push(MiRow { sigma_eta: sigma, n_reads: n, q: None, mi_bits: fine, method: "fine-grid".into() });
            if cfg.mi_samples > 0 {
                let est = exact_mi(&model, n, cfg.mi_samples, cfg.seed, point(si, ni, 0))?;
                rows.push(MiRow {
                    sigma_eta: sigma,
                    n_reads: n,
                    q: None,
                    mi_bits: est.mi_bits,
                    method: "exact-mc".into(),
                });
            }
        }
    }
    Ok(rows)
}

/// Sharded Monte Carlo MI of the unquantized `N`-read vector.
pub fn exact_mi(model: &ChannelModel, n_reads: usize, samples: u64, seed: u64, stream: u64) -> SimResult<MiEstimate> {
    let parts = run_chunked(seed, stream, samples, |rng, count| {
        let mut acc = MeanAccumulator::default();
        accumulate_multiread_mi(model, n_reads, Observation::Unquantized, count, rng, &mut acc).map(|_| acc)
    });
    let mut total = MeanAccumulator::default();
    for part in parts {
        total.merge(&part?);
    }
    Ok(MiEstimate::from_accumulator(&total))
}

/// Uncoded BER by exact per-cell simulation: each trial draws a target cell's
/// bit and sneak-path network, `max N` reads, and applies every configured
/// detector to the leading `N` reads of the same trial.
pub fn run_uncoded_ber(cfg: &ExperimentConfig) -> SimResult<Vec<ResultRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (si, &sigma) in cfg.sweep.iter().enumerate() {
        let set = DetectorSet::new(ChannelModel::new(cfg.params.with_sigma(sigma))?, cfg)?;
        let errors = simulate_ber(&set, cfg.trials, cfg.seed, point(si, 0, 1))?;
        push_rate_rows(&mut rows, &set, sigma, None, "ber", &errors, cfg.trials);
    }
    Ok(rows)
}

/// Error counts per (reads, detector) pair over `trials` simulated cells.
pub fn simulate_ber(set: &DetectorSet, trials: u64, seed: u64, stream: u64) -> SimResult<Vec<u64>> {
    let params = *set.model.params();
    let n_max = set.reads.iter().copied().max().unwrap_or(1);
    let parts = run_chunked(seed, stream, trials, |rng, count| -> SimResult<Vec<u64>> {
        let mut errors = vec![0u64; set.len()];
        for _ in 0..count {
            let (bit, config) = sample_target_cell(&params, rng);
            let reads = sample_reads(bit, &config, n_max, &params, rng)?;
            set.decide_all(reads.reads(), |k, b| errors[k] += u64::from(b != bit));
        }
        Ok(errors)
    });
    Ok(sum_counts(parts.into_iter().collect::<SimResult<_>>()?, set.len()))
}

/// Coded FER: each frame is one array whose first 127 row-major cells hold a
/// BCH codeword and whose remaining cells are random filler. Every cell of the
/// codeword is read `max N` times and detected; the hard decisions are decoded
/// and a frame is in error when the decoded message differs from the sent one.
pub fn run_coded_fer(cfg: &ExperimentConfig) -> SimResult<Vec<ResultRow>> {
    cfg.validate()?;
    let code = BchCode::new(cfg.code.unwrap_or(CodeId::Bch127_113));
    if cfg.params.m * cfg.params.n < code.n() {
        return Err(SimError::Config("array has fewer cells than the code length".into()));
    }
    let mut rows = Vec::new();
    for (si, &sigma) in cfg.sweep.iter().enumerate() {
        let set = DetectorSet::new(ChannelModel::new(cfg.params.with_sigma(sigma))?, cfg)?;
        let errors = simulate_fer(&set, &code, cfg.frames, cfg.seed, point(si, 0, 2))?;
        push_rate_rows(&mut rows, &set, sigma, Some(code.id()), "fer", &errors, cfg.frames);
    }
    Ok(rows)
}

/// Frame-error counts per (reads, detector) pair.
pub fn simulate_fer(set: &DetectorSet, code: &BchCode, frames: u64, seed: u64, stream: u64) -> SimResult<Vec<u64>> {
    let params = *set.model.params();
    let n_max = set.reads.iter().copied().max().unwrap_or(1);
    let parts = run_chunked(seed, stream, frames, |rng, count| -> SimResult<Vec<u64>> {
        let mut errors = vec![0u64; set.len()];
        let mut array = CrossbarArray::new(params.m, params.n);
        let mut words = vec![vec![0 as Bit; code.n()]; set.len()];
        for _ in 0..count {
            let message: Vec<Bit> = (0..code.k()).map(|_| Bit::from(rng.random_bool(0.5))).collect();
            let codeword = bch_encode(&message, code)?;
            array.resample(&params, rng);
            for (idx, &b) in codeword.iter().enumerate() {
                array.set_bit(idx / params.n, idx % params.n, b);
            }
            for (idx, &bit) in codeword.iter().enumerate() {
                let config = cell_path_config(&array, idx / params.n, idx % params.n);
                let reads = sample_reads(bit, &config, n_max, &params, rng)?;
                set.decide_all(reads.reads(), |k, b| words[k][idx] = b);
            }
            for (k, word) in words.iter().enumerate() {
                if bch_decode_hdd(word, code)?.message != message {
                    errors[k] += 1;
                }
            }
        }
        Ok(errors)
    });
    Ok(sum_counts(parts.into_iter().collect::<SimResult<_>>()?, set.len()))
}

fn push_rate_rows(
    rows: &mut Vec<ResultRow>,
    set: &DetectorSet,
    sigma: f64,
    code: Option<CodeId>,
    metric: &str,
    errors: &[u64],
    trials: u64,
) {
    for (ni, &n) in set.reads.iter().enumerate() {
        for (di, kind) in set.kinds.iter().enumerate() {
            let e = errors[ni * set.kinds.len() + di];
            rows.push(ResultRow {
                sigma_eta: sigma,
                n_reads: n,
                q: kind.quant_bits(),
                detector: kind.as_str().into(),
                code: code.map(|c| c.as_str().into()),
                metric: metric.into(),
                value: e as f64 / trials as f64,
                ci95: wilson_half_width(e, trials),
                trials,
            });
        }
    }
}

/// MAP bit-error probability per `(σ_η, N)`: deterministic quadrature over the
/// read average and a Monte Carlo estimate drawn from the mixture model.
pub fn run_bep_map(cfg: &ExperimentConfig) -> SimResult<Vec<BepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (si, &sigma) in cfg.sweep.iter().enumerate() {
        let model = ChannelModel::new(cfg.params.with_sigma(sigma))?;
        for (ni, &n) in cfg.reads.iter().enumerate() {
            match bep_map_quadrature(&model, n) {
                Ok(q) => rows.push(BepRow::new(sigma, n, &q)),
                Err(Error::TooManyRoots(_)) => {}
                Err(e) => return Err(e.into()),
            }
            let mc = bep_map_sharded(&model, n, cfg.trials, cfg.seed, point(si, ni, 3));
            rows.push(BepRow::new(sigma, n, &mc));
        }
    }
    Ok(rows)
}

/// Sharded Monte Carlo MAP bit-error probability.
pub fn bep_map_sharded(model: &ChannelModel, n_reads: usize, trials: u64, seed: u64, stream: u64) -> BepEstimate {
    let errors: u64 =
        run_chunked(seed, stream, trials, |rng, count| count_map_errors(model, n_reads, count, rng)).into_iter().sum();
    BepEstimate::from_counts(errors, trials)
}
