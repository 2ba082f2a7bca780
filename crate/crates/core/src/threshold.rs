//! Single-bit (threshold) detector on the average of `N` reads.
//!
//! A threshold `t1` turns the channel into a binary asymmetric channel (BAC).
//! Its MI has a single stationary point on `[R(1), R(0)]`, located by
//! bisection on the analytic derivative.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::array::ReadVector;
use crate::channel::ChannelModel;
use crate::special::{normal_pdf, q_function, xlog2_ratio};
use crate::{Bit, Error, Result};

/// Crossovers `p0 = Pr(Â=1 | A=0)` and `p1 = Pr(Â=0 | A=1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacChannel {
    pub p0: f64,
    pub p1: f64,
}

impl BacChannel {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) || !(0.0..=1.0).contains(&p1) {
            return Err(Error::InvalidArgument("crossover probabilities must lie in [0, 1]"));
        }
        Ok(BacChannel { p0, p1 })
    }

    /// Bit-error probability `(p0 + p1) / 2` for equiprobable inputs.
    pub fn bep(&self) -> f64 {
        0.5 * (self.p0 + self.p1)
    }
}

/// A threshold detector for `N`-read averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDetector {
    pub t1: f64,
    pub n_reads: usize,
}

impl ThresholdDetector {
    pub fn detect(&self, reads: &ReadVector) -> Bit {
        threshold_detect(reads, self.t1)
    }
}

/// Decides 0 when the read average is at or above `t1`.
pub fn threshold_detect(reads: &ReadVector, t1: f64) -> Bit {
    detect_mean(reads.mean(), t1)
}

pub fn detect_mean(mean: f64, t1: f64) -> Bit {
    Bit::from(mean < t1)
}

fn effective_sigma(model: &ChannelModel, n_reads: usize) -> Result<f64> {
    if n_reads == 0 {
        return Err(Error::InvalidArgument("at least one read is required"));
    }
    Ok(model.sigma() / libm::sqrt(n_reads as f64))
}

/// Crossovers of the `N`-read threshold detector.
pub fn bac_from_threshold(t1: f64, model: &ChannelModel, n_reads: usize) -> Result<BacChannel> {
    let s = effective_sigma(model, n_reads)?;
    let mut p0 = 0.0;
    let mut p1 = 0.0;
    for c in model.components() {
        p0 += c.weight * q_function((c.means[0] - t1) / s);
        p1 += c.weight * q_function((t1 - c.means[1]) / s);
    }
    Ok(BacChannel { p0: p0.clamp(0.0, 1.0), p1: p1.clamp(0.0, 1.0) })
}

/// MI of a BAC with equiprobable inputs, in bits.
pub fn bac_mi(chan: &BacChannel) -> f64 {
    let BacChannel { p0, p1 } = *chan;
    let out_one = 0.5 * (p0 + 1.0 - p1);
    let out_zero = 0.5 * (1.0 - p0 + p1);
    let mi = 0.5
        * (xlog2_ratio(1.0 - p0, out_zero)
            + xlog2_ratio(p0, out_one)
            + xlog2_ratio(p1, out_zero)
            + xlog2_ratio(1.0 - p1, out_one));
    mi.clamp(0.0, 1.0)
}

/// `dI/dt1` of the `N`-read threshold channel, in bits per ohm.
///
/// The crossover derivatives carry the `√N/σ` factor of the averaged reads.
pub fn mi_derivative(t1: f64, model: &ChannelModel, n_reads: usize) -> Result<f64> {
    let s = effective_sigma(model, n_reads)?;
    let BacChannel { p0, p1 } = bac_from_threshold(t1, model, n_reads)?;
    let mut dp0 = 0.0;
    let mut dp1 = 0.0;
    for c in model.components() {
        dp0 += c.weight * normal_pdf((t1 - c.means[0]) / s) / s;
        dp1 -= c.weight * normal_pdf((t1 - c.means[1]) / s) / s;
    }
    let ln_out_zero = libm::log1p(p1 - p0);
    let ln_out_one = libm::log1p(p0 - p1);
    let term = |dp: f64, p: f64, num: f64, den: f64| {
        if dp == 0.0 || p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            0.5 * dp * (libm::log(p) - libm::log1p(-p) + num - den) / core::f64::consts::LN_2
        }
    };
    Ok(term(dp0, p0, ln_out_zero, ln_out_one) + term(dp1, p1, ln_out_one, ln_out_zero))
}

/// Result of the threshold design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDesign {
    pub t1: f64,
    pub n_reads: usize,
    pub mi_bits: f64,
    pub bac: BacChannel,
    /// The derivative had no sign change on `[R(1), R(0)]`; `t1` is the
    /// best of the sampled thresholds instead.
    pub degenerate: bool,
}

impl ThresholdDesign {
    pub fn detector(&self) -> ThresholdDetector {
        ThresholdDetector { t1: self.t1, n_reads: self.n_reads }
    }
}

/// MI-optimal threshold on `[R(1), R(0)]`.
///
/// The range is sampled at `ns + 1` points and the sign change of the MI
/// derivative is bracketed by bisection over the sample indices (`O(log ns)`
/// evaluations). The bracket is then bisected further to a width of
/// `1e-9 · (R(0) − R(1))`. Without a sign change the best sample is returned
/// and flagged degenerate.
pub fn optimize_threshold_bisection(model: &ChannelModel, n_reads: usize, ns: usize) -> Result<ThresholdDesign> {
    if ns < 2 {
        return Err(Error::InvalidArgument("at least 2 samples are required"));
    }
    let (lo, hi) = (model.params().r1, model.params().r0);
    let width = (hi - lo) / ns as f64;
    let at = |k: usize| if k == ns { hi } else { lo + width * k as f64 };
    let deriv = |t: f64| mi_derivative(t, model, n_reads);

    let finish = |t1: f64, degenerate: bool| -> Result<ThresholdDesign> {
        let bac = bac_from_threshold(t1, model, n_reads)?;
        Ok(ThresholdDesign { t1, n_reads, mi_bits: bac_mi(&bac), bac, degenerate })
    };

    if !(deriv(lo)? > 0.0 && deriv(hi)? < 0.0) {
        let samples: Vec<f64> = (0..=ns).map(at).collect();
        let mut best = (f64::NEG_INFINITY, lo);
        for t in samples {
            let mi = bac_mi(&bac_from_threshold(t, model, n_reads)?);
            if mi > best.0 {
                best = (mi, t);
            }
        }
        return finish(best.1, true);
    }

    let (mut a, mut b) = (0usize, ns);
    while b - a > 1 {
        let mid = (a + b) / 2;
        if deriv(at(mid))? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let (mut ta, mut tb) = (at(a), at(b));
    let tolerance = 1e-9 * (hi - lo);
    while tb - ta > tolerance {
        let mid = 0.5 * (ta + tb);
        if deriv(mid)? > 0.0 {
            ta = mid;
        } else {
            tb = mid;
        }
    }
    finish(0.5 * (ta + tb), false)
}

/// Threshold minimizing the single-read bit-error probability, found on a
/// 1024-point grid over `[R(1), R(0)]` and refined by golden-section search
/// between the neighbours of the best grid point. Reused unchanged for
/// averaged multi-read detection, it serves as the comparison baseline.
pub fn baseline_single_read_threshold(model: &ChannelModel) -> Result<f64> {
    const GRID: usize = 1024;
    let (lo, hi) = (model.params().r1, model.params().r0);
    let step = (hi - lo) / (GRID - 1) as f64;
    let bep = |t: f64| bac_from_threshold(t, model, 1).map(|c| c.bep());
    let mut best = (f64::INFINITY, 0usize);
    for k in 0..GRID {
        let v = bep(lo + step * k as f64)?;
        if v < best.0 {
            best = (v, k);
        }
    }
    let k = best.1;
    let mut a = lo + step * k.saturating_sub(1) as f64;
    let mut b = lo + step * (k + 1).min(GRID - 1) as f64;
    let inv_phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (bep(c)?, bep(d)?);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = bep(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = bep(d)?;
        }
    }
    let t = 0.5 * (a + b);
    // keep the grid point if refinement did not improve on it
    Ok(if bep(t)? <= best.0 { t } else { lo + step * k as f64 })
}
