//! Maximum a-posteriori detection on `N` reads and its bit-error probability.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::{sample_reads_around, ReadVector};
use crate::channel::{ChannelModel, MixtureComponent};
use crate::special::{ln_2pi, log_sum_exp, normal_interval_mass};
use crate::stats::{wilson_interval, Z95};
use crate::{Bit, Error, Result};

/// How a [`BepEstimate`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BepMethod {
    Mc,
    Quadrature,
}

impl BepMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BepMethod::Mc => "mc",
            BepMethod::Quadrature => "quadrature",
        }
    }
}

/// Bit-error probability with its 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BepEstimate {
    pub value: f64,
    /// Half-width of the 95% interval (zero for quadrature).
    pub ci95: f64,
    pub lower: f64,
    pub upper: f64,
    pub trials: u64,
    pub method: BepMethod,
}

impl BepEstimate {
    /// Estimate from an error count with a Wilson interval.
    pub fn from_counts(errors: u64, trials: u64) -> Self {
        let (lower, upper) = wilson_interval(errors, trials);
        BepEstimate {
            value: if trials == 0 { 0.0 } else { errors as f64 / trials as f64 },
            ci95: 0.5 * (upper - lower),
            lower,
            upper,
            trials,
            method: BepMethod::Mc,
        }
    }

    fn exact(value: f64) -> Self {
        BepEstimate { value, ci95: 0.0, lower: value, upper: value, trials: 0, method: BepMethod::Quadrature }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Whether the two 95% intervals intersect.
    pub fn overlaps(&self, other: &BepEstimate) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

/// `(ln Pr(r̲ | 0), ln Pr(r̲ | 1))` for a read vector.
///
/// Uses `Σ (r_k − μ)² = Σ (r_k − r̄)² + N (r̄ − μ)²`, so the per-component cost
/// is constant in `N`.
pub fn log_likelihood_pair(reads: &[f64], model: &ChannelModel) -> (f64, f64) {
    let n = reads.len() as f64;
    let mean = reads.iter().sum::<f64>() / n;
    let scatter: f64 = reads.iter().map(|r| (r - mean) * (r - mean)).sum();
    let var = model.sigma() * model.sigma();
    let base = -0.5 * n * (ln_2pi() + libm::log(var)) - scatter / (2.0 * var);
    let scale = n / (2.0 * var);
    // streaming log-sum-exp over components, both bits at once
    let mut max = [f64::NEG_INFINITY; 2];
    let mut sum = [0.0f64; 2];
    for c in model.components() {
        for bit in 0..2 {
            let d = mean - c.means[bit];
            let x = c.ln_weight - scale * d * d;
            if x > max[bit] {
                sum[bit] = sum[bit] * libm::exp(max[bit] - x) + 1.0;
                max[bit] = x;
            } else {
                sum[bit] += libm::exp(x - max[bit]);
            }
        }
    }
    (base + max[0] + libm::log(sum[0]), base + max[1] + libm::log(sum[1]))
}

/// `ln Pr(r̲ | A = bit)` under the Gaussian mixture.
pub fn log_likelihood(reads: &ReadVector, bit: Bit, model: &ChannelModel) -> f64 {
    let (l0, l1) = log_likelihood_pair(reads.reads(), model);
    if bit == 0 {
        l0
    } else {
        l1
    }
}

/// `Pr(r̲ | A = bit)`; may underflow for long read vectors, prefer
/// [`log_likelihood`].
pub fn likelihood(reads: &ReadVector, bit: Bit, model: &ChannelModel) -> f64 {
    libm::exp(log_likelihood(reads, bit, model))
}

/// MAP (= ML for uniform inputs) decision; ties decide 0.
pub fn map_detect(reads: &ReadVector, model: &ChannelModel) -> Bit {
    map_detect_slice(reads.reads(), model)
}

pub(crate) fn map_detect_slice(reads: &[f64], model: &ChannelModel) -> Bit {
    let (l0, l1) = log_likelihood_pair(reads, model);
    Bit::from(l1 > l0)
}

/// Sampling design for [`bep_map_mc`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    /// Draw the sneak-path state from the mixture.
    #[default]
    Plain,
    /// Split trials evenly between the no-path state and the sneak-path
    /// states, then reweight.
    Stratified,
}

/// Adds MAP decision errors over `trials` model-drawn cells; returns the
/// error count.
pub fn count_map_errors<R: Rng + ?Sized>(model: &ChannelModel, n_reads: usize, trials: u64, rng: &mut R) -> u64 {
    let mut errors = 0;
    for _ in 0..trials {
        let bit = Bit::from(rng.random_bool(0.5));
        let mean = model.sample_component(rng).mean(bit);
        let reads = sample_reads_around(mean, n_reads, model.sigma(), rng);
        errors += u64::from(map_detect_slice(reads.reads(), model) != bit);
    }
    errors
}

/// Monte Carlo MAP bit-error probability: draw a bit and a sneak-path state,
/// `N` reads from the conditional Gaussian, and count MAP errors.
pub fn bep_map_mc<R: Rng + ?Sized>(
    model: &ChannelModel,
    n_reads: usize,
    trials: u64,
    sampling: Sampling,
    rng: &mut R,
) -> Result<BepEstimate> {
    if n_reads == 0 {
        return Err(Error::InvalidArgument("at least one read is required"));
    }
    if trials < 1000 {
        return Err(Error::InvalidArgument("at least 1000 trials are required"));
    }
    let comps = model.components();
    let w0 = if comps[0].alpha.is_none() { comps[0].weight } else { 0.0 };
    if sampling == Sampling::Plain || w0 <= 0.0 || w0 >= 1.0 {
        return Ok(BepEstimate::from_counts(count_map_errors(model, n_reads, trials, rng), trials));
    }

    let strata: [&[MixtureComponent]; 2] = [&comps[..1], &comps[1..]];
    let mut estimate = 0.0;
    let mut variance = 0.0;
    for (k, stratum) in strata.iter().enumerate() {
        let n = if k == 0 { trials / 2 } else { trials - trials / 2 };
        let weight = if k == 0 { w0 } else { 1.0 - w0 };
        let total: f64 = stratum.iter().map(|c| c.weight).sum();
        let cumulative: Vec<f64> = stratum
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c.weight / total;
                Some(*acc)
            })
            .collect();
        let mut errors = 0u64;
        for _ in 0..n {
            let bit = Bit::from(rng.random_bool(0.5));
            let u = rng.random::<f64>();
            let idx = cumulative.partition_point(|&c| c <= u).min(stratum.len() - 1);
            let reads = sample_reads_around(stratum[idx].mean(bit), n_reads, model.sigma(), rng);
            errors += u64::from(map_detect_slice(reads.reads(), model) != bit);
        }
        let p = errors as f64 / n as f64;
        estimate += weight * p;
        // floor the per-stratum variance at one pseudo-error
        let p_var = p.max(1.0 / n as f64);
        variance += weight * weight * p_var * (1.0 - p_var) / n as f64;
    }
    let ci95 = Z95 * libm::sqrt(variance);
    Ok(BepEstimate {
        value: estimate,
        ci95,
        lower: (estimate - ci95).max(0.0),
        upper: (estimate + ci95).min(1.0),
        trials,
        method: BepMethod::Mc,
    })
}

/// Deterministic MAP bit-error probability for a single read.
pub fn bep_map_quadrature_1d(model: &ChannelModel) -> Result<BepEstimate> {
    bep_map_quadrature(model, 1)
}

const MAX_DECISION_ROOTS: usize = 8;
const ROOT_SCAN_POINTS: usize = 50_000;

/// Deterministic MAP bit-error probability for `N` reads.
///
/// Within a sneak-path state the reads are i.i.d. Gaussian with a common
/// variance, so the MAP decision depends on the reads only through their mean
/// `r̄ ~ N(ρ, σ²/N)`. The decision boundary is located by scanning the
/// log-likelihood ratio of `r̄` on a fine grid and refining each sign change by
/// bisection; error mass is then accumulated per component exactly.
pub fn bep_map_quadrature(model: &ChannelModel, n_reads: usize) -> Result<BepEstimate> {
    if n_reads == 0 {
        return Err(Error::InvalidArgument("at least one read is required"));
    }
    let sigma = model.sigma() / libm::sqrt(n_reads as f64);
    let comps = model.components();
    let log_ratio = |x: f64| {
        let mut t0 = Vec::with_capacity(comps.len());
        let mut t1 = Vec::with_capacity(comps.len());
        for c in comps {
            let lw = libm::log(c.weight);
            let (d0, d1) = ((x - c.means[0]) / sigma, (x - c.means[1]) / sigma);
            t0.push(lw - 0.5 * d0 * d0);
            t1.push(lw - 0.5 * d1 * d1);
        }
        log_sum_exp(&t0) - log_sum_exp(&t1)
    };
    let decides_zero = |x: f64| log_ratio(x) >= 0.0;

    let (lo0, hi0) = model.mean_range(0);
    let (lo1, hi1) = model.mean_range(1);
    let lo = lo0.min(lo1) - 12.0 * sigma;
    let hi = hi0.max(hi1) + 12.0 * sigma;
    let step = (hi - lo) / ROOT_SCAN_POINTS as f64;

    let mut roots = Vec::new();
    let mut prev_x = lo;
    let mut prev = decides_zero(lo);
    for k in 1..=ROOT_SCAN_POINTS {
        let x = lo + step * k as f64;
        let cur = decides_zero(x);
        if cur != prev {
            let (mut a, mut b) = (prev_x, x);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if decides_zero(mid) == prev {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
            if roots.len() > MAX_DECISION_ROOTS {
                return Err(Error::TooManyRoots(roots.len()));
            }
        }
        prev = cur;
        prev_x = x;
    }

    // decision regions between consecutive roots, extended to ±∞
    let mut edges = Vec::with_capacity(roots.len() + 2);
    edges.push(f64::NEG_INFINITY);
    edges.extend_from_slice(&roots);
    edges.push(f64::INFINITY);
    let mut region_zero = decides_zero(lo);
    let mut error = [0.0f64; 2];
    for w in edges.windows(2) {
        for c in comps {
            // a region deciding 0 is an error for bit 1, and vice versa
            let bit = usize::from(region_zero);
            let mean = c.means[bit];
            error[bit] += c.weight * normal_interval_mass((w[0] - mean) / sigma, (w[1] - mean) / sigma);
        }
        region_zero = !region_zero;
    }
    Ok(BepEstimate::exact(0.5 * (error[0] + error[1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelParams;
    use crate::special::{normal_pdf, q_function};
    use crate::threshold::threshold_detect;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(p_f: f64, sigma: f64) -> ChannelModel {
        ChannelModel::new(ChannelParams { p_f, ..ChannelParams::default() }.with_sigma(sigma)).unwrap()
    }

    fn rv(xs: &[f64]) -> ReadVector {
        ReadVector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn single_component_likelihood_is_gaussian() {
        let m = model(0.0, 50.0);
        for r in [60.0, 100.0, 300.0] {
            let expect = normal_pdf((r - 100.0) / 50.0) / 50.0;
            assert!((likelihood(&rv(&[r]), 1, &m) / expect - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn repeated_reads_double_the_exponent() {
        let m = model(0.0, 50.0);
        let r = 170.0;
        let one = log_likelihood(&rv(&[r]), 0, &m);
        let two = log_likelihood(&rv(&[r, r]), 0, &m);
        assert!((two - 2.0 * one).abs() < 1e-10);
    }

    #[test]
    fn log_domain_matches_direct_sum() {
        let m = model(0.01, 60.0);
        let reads = [220.0, 260.0, 241.0];
        for bit in [0u8, 1] {
            let var: f64 = 3600.0;
            let direct: f64 = m
                .components()
                .iter()
                .map(|c| {
                    let mu = c.mean(bit);
                    let ss: f64 = reads.iter().map(|r| (r - mu) * (r - mu)).sum();
                    c.weight * libm::exp(-ss / (2.0 * var)) / libm::pow(2.0 * core::f64::consts::PI * var, 1.5)
                })
                .sum();
            let got = likelihood(&rv(&reads), bit, &m);
            assert!((got / direct - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn low_reads_dominated_by_single_sneak_path() {
        let m = model(0.001, 20.0);
        let reads = [230.0, 235.0];
        let sigma2 = 400.0;
        let per_component: Vec<f64> = m
            .components()
            .iter()
            .map(|c| {
                let ss: f64 = reads.iter().map(|r| (r - c.means[0]) * (r - c.means[0])).sum();
                c.weight * libm::exp(-ss / (2.0 * sigma2))
            })
            .collect();
        let total: f64 = per_component.iter().sum();
        let (idx, top) = per_component.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert_eq!(m.components()[idx].alpha, Some(3.0));
        assert!(top / total > 0.99);
        assert_eq!(map_detect(&rv(&reads), &m), 0);
    }

    #[test]
    fn map_decisions_at_extremes() {
        let m = model(0.001, 60.0);
        assert_eq!(map_detect(&rv(&[101.0, 99.0, 100.0]), &m), 1);
        assert_eq!(map_detect(&rv(&[1001.0, 998.0]), &m), 0);
    }

    proptest! {
        #[test]
        fn map_equals_midpoint_threshold_without_sneak_paths(
            reads in proptest::collection::vec(-200.0f64..1500.0, 1..6),
        ) {
            let m = model(0.0, 80.0);
            let r = rv(&reads);
            prop_assert_eq!(map_detect(&r, &m), threshold_detect(&r, 550.0));
        }
    }

    #[test]
    fn quadrature_closed_form_without_sneak_paths() {
        for sigma in [60.0, 100.0, 225.0] {
            let m = model(0.0, sigma);
            let q = bep_map_quadrature_1d(&m).unwrap();
            let expect = q_function(450.0 / sigma);
            assert!((q.value / expect - 1.0).abs() < 1e-9, "sigma={sigma}");
            let q2 = bep_map_quadrature(&m, 4).unwrap();
            assert!((q2.value / q_function(900.0 / sigma) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sneak_paths_increase_bep() {
        let clean = bep_map_quadrature_1d(&model(0.0, 80.0)).unwrap().value;
        let dirty = bep_map_quadrature_1d(&model(0.001, 80.0)).unwrap().value;
        assert!(dirty > clean);
    }

    #[test]
    fn mc_matches_closed_form() {
        let m = model(0.0, 225.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let est = bep_map_mc(&m, 1, 400_000, Sampling::Plain, &mut rng).unwrap();
        assert!(est.contains(q_function(2.0)), "{est:?}");
        assert!(bep_map_mc(&m, 1, 10, Sampling::Plain, &mut rng).is_err());
    }

    #[test]
    fn stratified_mc_matches_quadrature() {
        let m = model(0.001, 60.0);
        let exact = bep_map_quadrature_1d(&m).unwrap().value;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let est = bep_map_mc(&m, 1, 400_000, Sampling::Stratified, &mut rng).unwrap();
        assert!((est.value - exact).abs() <= est.ci95 * 1.5, "{est:?} vs {exact}");
    }

    #[test]
    fn estimate_interval_helpers() {
        let a = BepEstimate::from_counts(10, 1000);
        let b = BepEstimate::from_counts(12, 1000);
        assert!(a.overlaps(&b));
        assert!(a.contains(0.01));
        let c = BepEstimate::from_counts(300, 1000);
        assert!(!a.overlaps(&c));
        let _ = vec![a];
    }
}
