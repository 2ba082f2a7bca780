//! Scalar special functions shared by the channel and detector code.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

/// `1 / sqrt(2π)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian tail probability `Q(x) = P(Z > x)` for a standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// Standard normal mass on `[a, b]`, evaluated on whichever tail keeps the
/// subtraction well conditioned. Infinite endpoints are allowed.
pub fn normal_interval_mass(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mass = if a >= 0.0 {
        q_function(a) - q_function(b)
    } else if b <= 0.0 {
        q_function(-b) - q_function(-a)
    } else {
        1.0 - q_function(-a) - q_function(b)
    };
    mass.max(0.0)
}

/// `ln(Σ exp(x_i))` without overflow. Returns `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| libm::exp(x - max)).sum();
    max + libm::log(sum)
}

/// `ln(2π)`.
pub(crate) fn ln_2pi() -> f64 {
    libm::log(2.0 * PI)
}

/// Binomial coefficient as `f64`; exact while the result fits in 53 bits.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    if acc < 9.0e15 {
        libm::round(acc)
    } else {
        acc
    }
}

/// Binomial probability mass `C(n,k) p^k (1-p)^(n-k)`, computed in the log
/// domain so large `n` does not overflow.
pub fn binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let ln_choose = libm::lgamma((n + 1) as f64) - libm::lgamma((k + 1) as f64) - libm::lgamma((n - k + 1) as f64);
    libm::exp(ln_choose + k as f64 * libm::log(p) + (n - k) as f64 * libm::log1p(-p))
}

/// `p · log2(p / q)` with the `0 · log 0 = 0` convention.
pub(crate) fn xlog2_ratio(p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * libm::log2(p / q)
    }
}
