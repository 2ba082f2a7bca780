//! Exact crossbar sampling: stored bits, selector failures, sneak-path
//! configurations and noisy reads.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{rho, solve_alpha, ChannelParams, PathConfig, PathTypeKey};
use crate::{Bit, Error, Result};

/// Bits and selector states of one `m × n` array, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossbarArray {
    rows: usize,
    cols: usize,
    bits: Vec<Bit>,
    failed: Vec<bool>,
}

impl CrossbarArray {
    pub fn new(rows: usize, cols: usize) -> Self {
        CrossbarArray { rows, cols, bits: vec![0; rows * cols], failed: vec![false; rows * cols] }
    }

    /// Builds an array from explicit bit and selector-failure matrices.
    pub fn from_parts(rows: usize, cols: usize, bits: Vec<Bit>, failed: Vec<bool>) -> Result<Self> {
        let cells = rows * cols;
        if bits.len() != cells {
            return Err(Error::LengthMismatch { expected: cells, actual: bits.len() });
        }
        if failed.len() != cells {
            return Err(Error::LengthMismatch { expected: cells, actual: failed.len() });
        }
        Ok(CrossbarArray { rows, cols, bits, failed })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bit(&self, i: usize, j: usize) -> Bit {
        self.bits[i * self.cols + j]
    }

    pub fn set_bit(&mut self, i: usize, j: usize, bit: Bit) {
        self.bits[i * self.cols + j] = bit;
    }

    pub fn selector_failed(&self, i: usize, j: usize) -> bool {
        self.failed[i * self.cols + j]
    }

    pub fn set_selector_failed(&mut self, i: usize, j: usize, failed: bool) {
        self.failed[i * self.cols + j] = failed;
    }

    pub fn bits(&self) -> &[Bit] {
        &self.bits
    }

    /// Redraws every cell in place: bits i.i.d. Bernoulli(`q1`), selector
    /// failures i.i.d. Bernoulli(`p_f`).
    pub fn resample<R: Rng + ?Sized>(&mut self, params: &ChannelParams, rng: &mut R) {
        self.rows = params.m;
        self.cols = params.n;
        let cells = params.m * params.n;
        self.bits.resize(cells, 0);
        self.failed.resize(cells, false);
        for (bit, failed) in self.bits.iter_mut().zip(self.failed.iter_mut()) {
            *bit = Bit::from(rng.random_bool(params.q1));
            *failed = rng.random_bool(params.p_f);
        }
    }
}

/// Draws a fresh array.
pub fn sample_array<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> CrossbarArray {
    let mut array = CrossbarArray::new(params.m, params.n);
    array.resample(params, rng);
    array
}

/// Active sneak-path cells for target `(i, j)`: cells `(l, c)` with `l ≠ i`,
/// `c ≠ j`, `A[i][c] = A[l][c] = A[l][j] = 1` and a failed selector at `(l, c)`.
pub fn cell_path_config(array: &CrossbarArray, i: usize, j: usize) -> PathConfig {
    let mut cells = Vec::new();
    for l in (0..array.rows).filter(|&l| l != i && array.bit(l, j) == 1) {
        for c in (0..array.cols).filter(|&c| c != j && array.bit(i, c) == 1) {
            if array.bit(l, c) == 1 && array.selector_failed(l, c) {
                cells.push((l, c));
            }
        }
    }
    // cells are generated sorted and distinct
    PathConfig::new(cells).expect("distinct cells")
}

/// Draws the stored bit and sneak-path configuration of one target cell.
///
/// Only the target's row and column bits and the intersection cells are
/// drawn, which gives the same joint law as [`sample_array`] followed by
/// [`cell_path_config`] at a uniformly random target. Rows and columns of the
/// returned configuration index the `m − 1` other rows and `n − 1` other
/// columns.
pub fn sample_target_cell<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> (Bit, PathConfig) {
    let bit = Bit::from(rng.random_bool(params.q1));
    let rows: Vec<usize> = (0..params.m - 1).filter(|_| rng.random_bool(params.q1)).collect();
    let cols: Vec<usize> = (0..params.n - 1).filter(|_| rng.random_bool(params.q1)).collect();
    let active = params.q1 * params.p_f;
    let mut cells = Vec::new();
    for &l in &rows {
        for &c in &cols {
            if rng.random_bool(active) {
                cells.push((l, c));
            }
        }
    }
    (bit, PathConfig::new(cells).expect("distinct cells"))
}

/// `N` noisy measurements of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadVector {
    reads: Vec<f64>,
}

impl ReadVector {
    pub fn new(reads: Vec<f64>) -> Result<Self> {
        if reads.is_empty() {
            return Err(Error::InvalidArgument("read vector needs at least one read"));
        }
        if reads.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidArgument("reads must be finite"));
        }
        Ok(ReadVector { reads })
    }

    pub fn reads(&self) -> &[f64] {
        &self.reads
    }

    pub fn len(&self) -> usize {
        self.reads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reads.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.reads.iter().sum::<f64>() / self.reads.len() as f64
    }

    /// Read vector restricted to its first `n` reads.
    pub fn prefix(&self, n: usize) -> Result<ReadVector> {
        if n == 0 || n > self.reads.len() {
            return Err(Error::InvalidArgument("prefix length out of range"));
        }
        Ok(ReadVector { reads: self.reads[..n].to_vec() })
    }
}

/// `N` reads of a cell whose sneak-path state is fixed across reads; only the
/// noise is redrawn.
pub fn sample_reads<R: Rng + ?Sized>(
    bit: Bit,
    config: &PathConfig,
    n_reads: usize,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<ReadVector> {
    if n_reads == 0 {
        return Err(Error::InvalidArgument("at least one read is required"));
    }
    let alpha = if config.is_empty() { None } else { Some(solve_alpha(config)?) };
    let mean = rho(bit, alpha, params)?;
    Ok(sample_reads_around(mean, n_reads, params.sigma_eta, rng))
}

pub(crate) fn sample_reads_around<R: Rng + ?Sized>(mean: f64, n_reads: usize, sigma: f64, rng: &mut R) -> ReadVector {
    let reads = (0..n_reads).map(|_| mean + sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    ReadVector { reads }
}

/// Empirical sneak-path type distribution over uniformly random target cells
/// of independently drawn arrays.
pub fn mc_type_histogram<R: Rng + ?Sized>(
    params: &ChannelParams,
    trials: u64,
    rng: &mut R,
) -> Result<BTreeMap<PathTypeKey, f64>> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required"));
    }
    let mut counts: BTreeMap<PathTypeKey, u64> = BTreeMap::new();
    let mut array = CrossbarArray::new(params.m, params.n);
    for _ in 0..trials {
        array.resample(params, rng);
        let i = rng.random_range(0..params.m);
        let j = rng.random_range(0..params.n);
        *counts.entry(cell_path_config(&array, i, j).key()).or_insert(0) += 1;
    }
    Ok(counts.into_iter().map(|(k, c)| (k, c as f64 / trials as f64)).collect())
}
