//! The analytical channel model against exact array simulation.

use crossbar_core::array::{cell_path_config, mc_type_histogram, sample_array, sample_reads, CrossbarArray};
use crossbar_core::channel::{type_probability, PathTypeKey};
use crossbar_core::special::normal_interval_mass;
use crossbar_core::{ChannelModel, ChannelParams, PathConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ones_fraction_concentrates() {
    let p = ChannelParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut ones = 0u64;
    let arrays = 100_000;
    for _ in 0..arrays {
        ones += sample_array(&p, &mut rng).bits().iter().map(|&b| u64::from(b)).sum::<u64>();
    }
    let frac = ones as f64 / (arrays * 256) as f64;
    assert!((frac - 0.5).abs() < 0.005, "{frac}");
}

#[test]
fn single_path_probability_matches_simulation() {
    let p = ChannelParams::default();
    let trials = 1_000_000u64;
    let hist = mc_type_histogram(&p, trials, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
    for key in [PathTypeKey::NONE, PathTypeKey::new(1, 1, 1)] {
        let analytic = type_probability(&p, key).unwrap();
        let se = (analytic * (1.0 - analytic) / trials as f64).sqrt();
        let empirical = hist.get(&key).copied().unwrap_or(0.0);
        assert!((empirical - analytic).abs() <= 3.0 * se, "{key:?}: {empirical} vs {analytic} (se {se})");
    }
}

#[test]
fn small_array_histogram_matches_model() {
    let p = ChannelParams { m: 4, n: 4, p_f: 0.5, l_max: 6, ..ChannelParams::default() };
    let model = ChannelModel::new(p).unwrap();
    let analytic = model.type_distribution();
    let hist = mc_type_histogram(&p, 1_000_000, &mut ChaCha8Rng::seed_from_u64(12)).unwrap();
    let mut l1 = 0.0;
    for (key, prob) in &analytic {
        l1 += (prob - hist.get(key).copied().unwrap_or(0.0)).abs();
    }
    for (key, freq) in &hist {
        if !analytic.contains_key(key) {
            l1 += freq;
        }
    }
    assert!(l1 <= 0.01, "L1 = {l1}");
}

#[test]
fn mean_read_with_one_sneak_path() {
    let p = ChannelParams::default();
    let config = PathConfig::new(vec![(1, 1)]).unwrap();
    let reads = sample_reads(0, &config, 1_000_000, &p, &mut ChaCha8Rng::seed_from_u64(13)).unwrap();
    let expected = 3000.0 / 13.0;
    assert!((reads.mean() - expected).abs() <= 3.0 * p.sigma_eta / 1e3);
}

#[test]
fn read_histogram_matches_transition_density() {
    let p = ChannelParams::default();
    let model = ChannelModel::new(p).unwrap();
    let (lo, width, bins) = (-400.0, 10.0, 200usize);
    let mut counts = vec![0u64; bins + 2];
    let cells = 1_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut array = CrossbarArray::new(p.m, p.n);
    for _ in 0..cells {
        array.resample(&p, &mut rng);
        let (i, j) = (rng.random_range(0..p.m), rng.random_range(0..p.n));
        let config = cell_path_config(&array, i, j);
        let r = sample_reads(array.bit(i, j), &config, 1, &p, &mut rng).unwrap().reads()[0];
        let idx = ((r - lo) / width).floor();
        let slot = if idx < 0.0 {
            0
        } else if idx >= bins as f64 {
            bins + 1
        } else {
            idx as usize + 1
        };
        counts[slot] += 1;
    }
    let edge = |k: usize| lo + width * k as f64;
    let mass = |a: f64, b: f64| -> f64 {
        let s = model.sigma();
        model
            .components()
            .iter()
            .map(|c| {
                (0..2u8)
                    .map(|bit| 0.5 * c.weight * normal_interval_mass((a - c.mean(bit)) / s, (b - c.mean(bit)) / s))
                    .sum::<f64>()
            })
            .sum()
    };
    let mut l1 = 0.0;
    for (slot, &count) in counts.iter().enumerate() {
        let (a, b) = match slot {
            0 => (f64::NEG_INFINITY, edge(0)),
            s if s == bins + 1 => (edge(bins), f64::INFINITY),
            s => (edge(s - 1), edge(s)),
        };
        l1 += (count as f64 / cells as f64 - mass(a, b)).abs();
    }
    assert!(l1 <= 0.02, "L1 = {l1}");
}
