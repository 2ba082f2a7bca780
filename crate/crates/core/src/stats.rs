//! Confidence intervals for Monte Carlo estimates.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval `(lo, hi)` at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Half-width of the Wilson interval.
pub fn wilson_half_width(successes: u64, trials: u64) -> f64 {
    let (lo, hi) = wilson_interval(successes, trials);
    0.5 * (hi - lo)
}

/// Running mean with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAccumulator {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    /// Combines two accumulators as if all samples had been pushed into one.
    pub fn merge(&mut self, other: &MeanAccumulator) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// 95% half-width of the mean.
    pub fn ci95(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        let n = self.count as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        Z95 * libm::sqrt(var / n)
    }
}
