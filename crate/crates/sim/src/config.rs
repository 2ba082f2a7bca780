//! Experiment configuration, loadable from JSON.

use std::path::{Path, PathBuf};

use crossbar_core::ecc::CodeId;
use crossbar_core::ChannelParams;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorKind {
    /// Threshold on the read average, MI-optimized for each `N`.
    #[serde(rename = "threshold-optimized")]
    ThresholdOptimized,
    /// Single-read BEP-optimal threshold reused for every `N`.
    #[serde(rename = "threshold-baseline")]
    ThresholdBaseline,
    #[serde(rename = "map")]
    Map,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] =
        [DetectorKind::ThresholdOptimized, DetectorKind::ThresholdBaseline, DetectorKind::Map];

    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorKind::ThresholdOptimized => "threshold-optimized",
            DetectorKind::ThresholdBaseline => "threshold-baseline",
            DetectorKind::Map => "map",
        }
    }

    /// Quantizer resolution of the detector output, if it is a threshold.
    pub fn quant_bits(&self) -> Option<u32> {
        match self {
            DetectorKind::Map => None,
            _ => Some(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub params: ChannelParams,
    /// Noise levels σ_η in ohm.
    pub sweep: Vec<f64>,
    pub reads: Vec<usize>,
    pub quant_bits: Vec<u32>,
    pub detectors: Vec<DetectorKind>,
    pub code: Option<CodeId>,
    /// Cells per point for BER and MAP BEP.
    pub trials: u64,
    pub frames: u64,
    /// Samples for the exact multi-read MI estimate; 0 skips it.
    pub mi_samples: u64,
    /// Fine-grid size for quantizer design.
    pub h: usize,
    /// Samples for the threshold bisection.
    pub ns: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: ChannelParams::default(),
            sweep: (2..=12).map(|k| 10.0 * k as f64).collect(),
            reads: vec![1, 2, 4],
            quant_bits: vec![1, 3],
            detectors: DetectorKind::ALL.to_vec(),
            code: None,
            trials: 1_000_000,
            frames: 10_000,
            mi_samples: 100_000,
            h: 1000,
            ns: 128,
            seed: 1,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> SimResult<()> {
        let bad = |msg: &str| Err(SimError::Config(msg.to_owned()));
        if self.sweep.is_empty() {
            return bad("sweep must list at least one sigma_eta");
        }
        if self.sweep.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return bad("sweep values must be positive");
        }
        if self.reads.is_empty() || self.reads.contains(&0) {
            return bad("reads must be a non-empty list of positive counts");
        }
        if self.quant_bits.iter().any(|&q| q == 0 || q > 16) {
            return bad("quant_bits must lie in 1..=16");
        }
        if self.trials == 0 || self.frames == 0 {
            return bad("trials and frames must be at least 1");
        }
        if self.detectors.is_empty() {
            return bad("at least one detector is required");
        }
        self.params.validate()?;
        Ok(())
    }

    pub fn max_reads(&self) -> usize {
        self.reads.iter().copied().max().unwrap_or(1)
    }
}
