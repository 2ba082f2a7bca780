//! Read quantizers that maximize the mutual information between the stored
//! bit and the quantized (averaged) readback.
//!
//! With `N` reads averaged, each mixture component of the read density becomes
//! a Gaussian with variance `σ²/N`, so every quantized transition probability
//! is a weighted sum of Gaussian interval masses. The optimal `s`-level
//! quantizer is found by dynamic programming over the thresholds of a uniform
//! `h`-level fine grid, minimizing `H(A | r̃)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::sample_reads_around;
use crate::channel::ChannelModel;
use crate::map::log_likelihood_pair;
use crate::special::{log_sum_exp, normal_interval_mass, xlog2_ratio};
use crate::stats::MeanAccumulator;
use crate::{Bit, Error, Result};

/// Largest number of boundary subsets `design_exhaustive` will visit.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Costs closer than this are treated as ties; ties keep the smaller index.
const TIE_TOLERANCE: f64 = 1e-12;

/// A `q`-bit quantizer: `2^q − 1` increasing boundaries, with implicit outer
/// boundaries at `±∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuantizerRepr", into = "QuantizerRepr")]
pub struct Quantizer {
    bits: u32,
    boundaries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct QuantizerRepr {
    q: u32,
    boundaries_ohm: Vec<f64>,
}

impl TryFrom<QuantizerRepr> for Quantizer {
    type Error = Error;

    fn try_from(repr: QuantizerRepr) -> Result<Self> {
        Quantizer::new(repr.q, repr.boundaries_ohm)
    }
}

impl From<Quantizer> for QuantizerRepr {
    fn from(q: Quantizer) -> Self {
        QuantizerRepr { q: q.bits, boundaries_ohm: q.boundaries }
    }
}

impl Quantizer {
    pub fn new(bits: u32, boundaries: Vec<f64>) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::InvalidArgument("quantizer bits must be in 1..=16"));
        }
        let expected = (1usize << bits) - 1;
        if boundaries.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: boundaries.len() });
        }
        if boundaries.iter().any(|b| !b.is_finite()) || boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("boundaries must be finite and strictly increasing"));
        }
        Ok(Quantizer { bits, boundaries })
    }

    /// Single-bit quantizer, i.e. a threshold detector.
    pub fn threshold(t1: f64) -> Result<Self> {
        Quantizer::new(1, vec![t1])
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn levels(&self) -> usize {
        self.boundaries.len() + 1
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Output symbol of a read: the number of boundaries at or below it.
    pub fn symbol(&self, r: f64) -> usize {
        self.boundaries.partition_point(|&t| t <= r)
    }

    /// Interval edges `t_0 = −∞, t_1, …, t_s = +∞`.
    pub fn edges(&self) -> Vec<f64> {
        let mut edges = Vec::with_capacity(self.boundaries.len() + 2);
        edges.push(f64::NEG_INFINITY);
        edges.extend_from_slice(&self.boundaries);
        edges.push(f64::INFINITY);
        edges
    }
}

/// Transition matrix `Pr(r̃_j | A = b)` of a quantized channel.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedChannel {
    trans: [Vec<f64>; 2],
}

impl QuantizedChannel {
    pub fn new(given_zero: Vec<f64>, given_one: Vec<f64>) -> Result<Self> {
        if given_zero.len() != given_one.len() || given_zero.len() < 2 {
            return Err(Error::InvalidArgument("channel rows must have equal length >= 2"));
        }
        for row in [&given_zero, &given_one] {
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidArgument("transition probabilities must lie in [0, 1]"));
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument("transition rows must sum to 1"));
            }
        }
        Ok(QuantizedChannel { trans: [given_zero, given_one] })
    }

    pub fn row(&self, bit: Bit) -> &[f64] {
        &self.trans[usize::from(bit != 0)]
    }

    pub fn outputs(&self) -> usize {
        self.trans[0].len()
    }
}

/// Per-interval Gaussian masses for a component mean and an effective noise.
fn interval_masses(edges: &[f64], mean: f64, sigma: f64) -> impl Iterator<Item = f64> + '_ {
    edges.windows(2).map(move |w| normal_interval_mass((w[0] - mean) / sigma, (w[1] - mean) / sigma))
}

fn mixture_interval_probs(edges: &[f64], model: &ChannelModel, bit: Bit, n_reads: usize) -> Vec<f64> {
    let sigma = model.sigma() / libm::sqrt(n_reads as f64);
    let mut row = vec![0.0; edges.len() - 1];
    for c in model.components() {
        for (p, mass) in row.iter_mut().zip(interval_masses(edges, c.mean(bit), sigma)) {
            *p += c.weight * mass;
        }
    }
    row
}

/// `Pr(r̃_j | A = bit)` for the average of `n_reads` reads.
pub fn quantized_transition(quantizer: &Quantizer, bit: Bit, model: &ChannelModel, n_reads: usize) -> Result<Vec<f64>> {
    if n_reads == 0 {
        return Err(Error::InvalidArgument("at least one read is required"));
    }
    Ok(mixture_interval_probs(&quantizer.edges(), model, bit, n_reads))
}

/// Both transition rows of a quantizer.
pub fn quantized_channel(quantizer: &Quantizer, model: &ChannelModel, n_reads: usize) -> Result<QuantizedChannel> {
    Ok(QuantizedChannel {
        trans: [
            quantized_transition(quantizer, 0, model, n_reads)?,
            quantized_transition(quantizer, 1, model, n_reads)?,
        ],
    })
}

/// `I(A; r̃)` in bits for equiprobable inputs.
pub fn mutual_information(chan: &QuantizedChannel) -> f64 {
    let mi: f64 = chan.trans[0]
        .iter()
        .zip(&chan.trans[1])
        .map(|(&p0, &p1)| {
            let pj = 0.5 * (p0 + p1);
            0.5 * (xlog2_ratio(p0, pj) + xlog2_ratio(p1, pj))
        })
        .sum();
    mi.clamp(0.0, 1.0)
}

/// Contribution `φ` of one output interval with masses `p0`, `p1` to
/// `H(A | r̃)`, in bits.
pub fn interval_cond_entropy(p0: f64, p1: f64) -> f64 {
    let s = p0 + p1;
    -0.5 * (xlog2_ratio(p0, s) + xlog2_ratio(p1, s))
}

/// Uniform fine grid `u_0 < … < u_h` over the read axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FineGrid {
    thresholds: Vec<f64>,
}

impl FineGrid {
    /// Number of fine intervals `h`.
    pub fn levels(&self) -> usize {
        self.thresholds.len() - 1
    }

    /// All thresholds `u_0, …, u_h`.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Thresholds `u_1, …, u_{h−1}` that can become quantizer boundaries.
    pub fn interior(&self) -> &[f64] {
        &self.thresholds[1..self.thresholds.len() - 1]
    }

    /// Interval edges with the outermost thresholds pushed to `±∞`, so the
    /// fine cells partition the whole read axis.
    fn edges(&self) -> Vec<f64> {
        let mut edges = self.thresholds.clone();
        edges[0] = f64::NEG_INFINITY;
        *edges.last_mut().unwrap() = f64::INFINITY;
        edges
    }
}

/// Uniform `h`-interval grid over `[min ρ(1, ·) − 6σ, R(0) + 6σ]`.
pub fn fine_grid(model: &ChannelModel, h: usize) -> Result<FineGrid> {
    if h < 2 {
        return Err(Error::InvalidArgument("fine grid needs at least 2 intervals"));
    }
    let sigma = model.sigma();
    let lo = model.mean_range(1).0 - 6.0 * sigma;
    let hi = model.params().r0 + 6.0 * sigma;
    let step = (hi - lo) / h as f64;
    let thresholds = (0..=h).map(|i| if i == h { hi } else { lo + step * i as f64 }).collect();
    Ok(FineGrid { thresholds })
}

/// Fine-grid cell masses with prefix sums, answering merged-interval costs in
/// constant time.
#[derive(Debug, Clone)]
pub struct CostTable {
    cells: [Vec<f64>; 2],
    prefix: [Vec<f64>; 2],
}

impl CostTable {
    pub fn new(grid: &FineGrid, model: &ChannelModel, n_reads: usize) -> Result<Self> {
        if n_reads == 0 {
            return Err(Error::InvalidArgument("at least one read is required"));
        }
        let edges = grid.edges();
        let cells =
            [mixture_interval_probs(&edges, model, 0, n_reads), mixture_interval_probs(&edges, model, 1, n_reads)];
        let prefix = cells.clone().map(|row| {
            let mut acc = 0.0;
            core::iter::once(0.0)
                .chain(row.into_iter().map(|p| {
                    acc += p;
                    acc
                }))
                .collect()
        });
        Ok(CostTable { cells, prefix })
    }

    /// Number of fine cells `h`.
    pub fn levels(&self) -> usize {
        self.cells[0].len()
    }

    pub fn cell_probs(&self, bit: Bit) -> &[f64] {
        &self.cells[usize::from(bit != 0)]
    }

    /// Masses of the merged interval `[u_g, u_o)` under each input.
    pub fn merged(&self, g: usize, o: usize) -> (f64, f64) {
        let p0 = (self.prefix[0][o] - self.prefix[0][g]).max(0.0);
        let p1 = (self.prefix[1][o] - self.prefix[1][g]).max(0.0);
        (p0, p1)
    }

    /// Partial conditional entropy of quantizing fine cells `g..o` into a single
    /// output level, in bits.
    pub fn partial_cond_entropy(&self, g: usize, o: usize) -> f64 {
        let (p0, p1) = self.merged(g, o);
        interval_cond_entropy(p0, p1)
    }

    /// `H(A | r̃)` of the fine grid itself, as a sum over its cells.
    pub fn fine_cond_entropy(&self) -> f64 {
        self.cells[0].iter().zip(&self.cells[1]).map(|(&a, &b)| interval_cond_entropy(a, b)).sum()
    }

    /// Fine-grid transition matrix.
    pub fn channel(&self) -> QuantizedChannel {
        QuantizedChannel { trans: self.cells.clone() }
    }

    /// `H(A | r̃)` of the partition with the given boundary indices, summed
    /// from the last interval backwards (same order as the DP).
    fn partition_cost(&self, cuts: &[usize]) -> f64 {
        let h = self.levels();
        let mut total = 0.0;
        let mut upper = h;
        for &cut in cuts.iter().rev() {
            total += self.partial_cond_entropy(cut, upper);
            upper = cut;
        }
        self.partial_cond_entropy(0, upper) + total
    }
}

/// An optimized quantizer and its mutual information.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerDesign {
    pub quantizer: Quantizer,
    pub mi_bits: f64,
    /// Indices `i` of the chosen grid thresholds `u_i`.
    pub grid_indices: Vec<usize>,
}

fn check_sizes(bits: u32, h: usize) -> Result<usize> {
    if !(1..=16).contains(&bits) {
        return Err(Error::InvalidArgument("quantizer bits must be in 1..=16"));
    }
    let s = 1usize << bits;
    if s > h {
        return Err(Error::InvalidArgument("fine grid must have at least 2^q intervals"));
    }
    Ok(s)
}

fn design_from_cuts(grid: &FineGrid, bits: u32, cuts: Vec<usize>, cost: f64) -> Result<QuantizerDesign> {
    let boundaries = cuts.iter().map(|&i| grid.thresholds()[i]).collect();
    Ok(QuantizerDesign {
        quantizer: Quantizer::new(bits, boundaries)?,
        mi_bits: (1.0 - cost).clamp(0.0, 1.0),
        grid_indices: cuts,
    })
}

/// MI-optimal `q`-bit quantizer whose boundaries are fine-grid thresholds,
/// by dynamic programming in `O(s h²)`.
pub fn design_dp(model: &ChannelModel, n_reads: usize, bits: u32, h: usize) -> Result<QuantizerDesign> {
    let s = check_sizes(bits, h)?;
    let grid = fine_grid(model, h)?;
    let table = CostTable::new(&grid, model, n_reads)?;
    design_dp_on(&grid, &table, bits, s)
}

fn design_dp_on(grid: &FineGrid, table: &CostTable, bits: u32, s: usize) -> Result<QuantizerDesign> {
    let h = table.levels();
    // best[i]: minimal cost of splitting cells i..h into k levels
    let mut best: Vec<f64> = (0..=h).map(|i| table.partial_cond_entropy(i, h)).collect();
    let mut choice: Vec<Vec<usize>> = Vec::with_capacity(s);
    for k in 2..=s {
        let starts = if k == s { 0..=0 } else { 0..=h - k };
        let mut next = vec![f64::INFINITY; h + 1];
        let mut pick = vec![usize::MAX; h + 1];
        for i in starts {
            for (j, &tail) in best.iter().enumerate().take(h + 2 - k).skip(i + 1) {
                let cost = table.partial_cond_entropy(i, j) + tail;
                if cost < next[i] - TIE_TOLERANCE {
                    next[i] = cost;
                    pick[i] = j;
                }
            }
        }
        best = next;
        choice.push(pick);
    }
    let mut cuts = Vec::with_capacity(s - 1);
    let mut at = 0;
    for pick in choice.iter().rev() {
        at = pick[at];
        cuts.push(at);
    }
    design_from_cuts(grid, bits, cuts, best[0])
}

/// Brute-force optimum over all `C(h−1, s−1)` boundary subsets of the grid.
pub fn design_exhaustive(model: &ChannelModel, n_reads: usize, bits: u32, h: usize) -> Result<QuantizerDesign> {
    let s = check_sizes(bits, h)?;
    let total = binomial_u128(h as u128 - 1, s as u128 - 1);
    if total > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge { size: total, limit: EXHAUSTIVE_LIMIT });
    }
    let grid = fine_grid(model, h)?;
    let table = CostTable::new(&grid, model, n_reads)?;
    let k = s - 1;
    let mut cuts: Vec<usize> = (1..=k).collect();
    let mut best_cost = f64::INFINITY;
    let mut best_cuts = cuts.clone();
    loop {
        let cost = table.partition_cost(&cuts);
        if cost < best_cost - TIE_TOLERANCE {
            best_cost = cost;
            best_cuts.clone_from(&cuts);
        }
        // next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&p| cuts[p] < h - k + p) else { break };
        cuts[pos] += 1;
        for p in pos + 1..k {
            cuts[p] = cuts[p - 1] + 1;
        }
    }
    design_from_cuts(&grid, bits, best_cuts, best_cost)
}

fn binomial_u128(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// MI of the `h`-level fine-grid quantizer, the stand-in for unquantized
/// averaged reads.
pub fn fine_grid_mi(model: &ChannelModel, n_reads: usize, h: usize) -> Result<f64> {
    let grid = fine_grid(model, h)?;
    let table = CostTable::new(&grid, model, n_reads)?;
    Ok((1.0 - table.fine_cond_entropy()).clamp(0.0, 1.0))
}

/// How the `N` reads are observed by the exact multi-read MI estimator.
#[derive(Debug, Clone, Copy)]
pub enum Observation<'a> {
    /// The full real-valued read vector.
    Unquantized,
    /// Each read quantized separately (the `N`-fold product channel).
    Quantized(&'a Quantizer),
}

/// Monte Carlo estimate with a 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub mi_bits: f64,
    pub ci95: f64,
    pub trials: u64,
}

impl MiEstimate {
    pub fn from_accumulator(acc: &MeanAccumulator) -> Self {
        MiEstimate { mi_bits: acc.mean(), ci95: acc.ci95(), trials: acc.count() }
    }
}

/// Adds `trials` samples of `log2 Pr(obs | A) / Pr(obs)` to `acc`, using the
/// exact joint density of the `N` reads (no averaging).
pub fn accumulate_multiread_mi<R: Rng + ?Sized>(
    model: &ChannelModel,
    n_reads: usize,
    observation: Observation<'_>,
    trials: u64,
    rng: &mut R,
    acc: &mut MeanAccumulator,
) -> Result<()> {
    if n_reads == 0 {
        return Err(Error::InvalidArgument("at least one read is required"));
    }
    let table = match observation {
        Observation::Unquantized => None,
        Observation::Quantized(q) => Some(ProductChannel::new(q, model)),
    };
    let mut symbols = vec![0usize; n_reads];
    for _ in 0..trials {
        let bit = Bit::from(rng.random_bool(0.5));
        let mean = model.sample_component(rng).mean(bit);
        let reads = sample_reads_around(mean, n_reads, model.sigma(), rng);
        let (l0, l1) = match (&table, observation) {
            (Some(t), Observation::Quantized(q)) => {
                for (s, &r) in symbols.iter_mut().zip(reads.reads()) {
                    *s = q.symbol(r);
                }
                (t.log_prob(&symbols, 0), t.log_prob(&symbols, 1))
            }
            _ => log_likelihood_pair(reads.reads(), model),
        };
        let own = if bit == 0 { l0 } else { l1 };
        let marginal = log_sum_exp(&[l0, l1]) - LN_2;
        acc.push((own - marginal) / LN_2);
    }
    Ok(())
}

/// `I(A; r̲)` estimated by Monte Carlo from the exact `N`-read joint density.
pub fn mi_multiread_exact_mc<R: Rng + ?Sized>(
    model: &ChannelModel,
    n_reads: usize,
    observation: Observation<'_>,
    trials: u64,
    rng: &mut R,
) -> Result<MiEstimate> {
    if trials < 1000 {
        return Err(Error::InvalidArgument("at least 1000 trials are required"));
    }
    let mut acc = MeanAccumulator::default();
    accumulate_multiread_mi(model, n_reads, observation, trials, rng, &mut acc)?;
    Ok(MiEstimate::from_accumulator(&acc))
}

/// Per-component log interval probabilities of a single read.
struct ProductChannel {
    log_weights: Vec<f64>,
    // [component][bit][symbol]
    log_probs: Vec<[Vec<f64>; 2]>,
}

impl ProductChannel {
    fn new(quantizer: &Quantizer, model: &ChannelModel) -> Self {
        let edges = quantizer.edges();
        let sigma = model.sigma();
        let row = |mean: f64| interval_masses(&edges, mean, sigma).map(libm::log).collect::<Vec<_>>();
        ProductChannel {
            log_weights: model.components().iter().map(|c| libm::log(c.weight)).collect(),
            log_probs: model.components().iter().map(|c| [row(c.mean(0)), row(c.mean(1))]).collect(),
        }
    }

    fn log_prob(&self, symbols: &[usize], bit: Bit) -> f64 {
        let b = usize::from(bit != 0);
        let terms: Vec<f64> = self
            .log_weights
            .iter()
            .zip(&self.log_probs)
            .map(|(lw, lp)| lw + symbols.iter().map(|&s| lp[b][s]).sum::<f64>())
            .collect();
        log_sum_exp(&terms)
    }
}
