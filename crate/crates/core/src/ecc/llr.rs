//! Per-symbol log-likelihood ratios for external soft decoders.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelModel;
use crate::quantizer::{quantized_channel, Quantizer};
use crate::{Error, Result};

/// Floor applied to transition probabilities before taking logs.
pub const LLR_PROB_FLOOR: f64 = 1e-30;

/// `ln Pr(r̃_j | 0) − ln Pr(r̃_j | 1)` in nats for quantizer output `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlrSymbol {
    pub symbol: usize,
    pub llr: f64,
}

/// LLR of one quantizer output for `N`-read averages.
pub fn llr_from_symbol(
    symbol: usize,
    quantizer: &Quantizer,
    model: &ChannelModel,
    n_reads: usize,
) -> Result<LlrSymbol> {
    if symbol >= quantizer.levels() {
        return Err(Error::InvalidArgument("symbol index out of range"));
    }
    Ok(llr_table(quantizer, model, n_reads)?[symbol])
}

/// LLRs of every quantizer output.
pub fn llr_table(quantizer: &Quantizer, model: &ChannelModel, n_reads: usize) -> Result<Vec<LlrSymbol>> {
    let chan = quantized_channel(quantizer, model, n_reads)?;
    Ok(chan
        .row(0)
        .iter()
        .zip(chan.row(1))
        .enumerate()
        .map(|(symbol, (&p0, &p1))| LlrSymbol {
            symbol,
            llr: libm::log(p0.max(LLR_PROB_FLOOR)) - libm::log(p1.max(LLR_PROB_FLOOR)),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelParams;
    use crate::quantizer::design_dp;

    fn model(p_f: f64, sigma: f64) -> ChannelModel {
        ChannelModel::new(ChannelParams { p_f, ..ChannelParams::default() }.with_sigma(sigma)).unwrap()
    }

    #[test]
    fn sign_convention() {
        let m = model(0.0, 100.0);
        let q = Quantizer::threshold(550.0).unwrap();
        assert!(llr_from_symbol(1, &q, &m, 1).unwrap().llr > 0.0);
        assert!(llr_from_symbol(0, &q, &m, 1).unwrap().llr < 0.0);
        assert!(llr_from_symbol(2, &q, &m, 1).is_err());
    }

    #[test]
    fn balanced_symbol_has_zero_llr() {
        let m = model(0.0, 100.0);
        let q = Quantizer::new(2, vec_of(&[300.0, 550.0, 800.0])).unwrap();
        let table = llr_table(&q, &m, 1).unwrap();
        // symmetric channel: outputs 1 and 2 mirror each other
        assert!((table[1].llr + table[2].llr).abs() < 1e-12);
        let far = Quantizer::threshold(1e7).unwrap();
        let t = llr_table(&far, &model(0.0, 100.0), 1).unwrap();
        assert!(t[1].llr.abs() < 1e-9 && t[1].llr.is_finite());
    }

    fn vec_of(xs: &[f64]) -> Vec<f64> {
        xs.to_vec()
    }

    #[test]
    fn monotone_in_symbol_index() {
        let m = model(0.001, 80.0);
        let design = design_dp(&m, 3, 3, 1000).unwrap();
        let table = llr_table(&design.quantizer, &m, 3).unwrap();
        assert!(table.windows(2).all(|w| w[1].llr > w[0].llr));
        assert!(table[0].llr < 0.0 && table[7].llr > 0.0);
        assert!(table.iter().all(|s| s.llr.is_finite()));
    }

    #[test]
    fn magnitudes_grow_with_reads() {
        let m = model(0.001, 80.0);
        let q = design_dp(&m, 1, 3, 1000).unwrap().quantizer;
        let mut prev_edges = (0.0, 0.0);
        let mut prev_mean = 0.0;
        for n in 1..=4 {
            let table = llr_table(&q, &m, n).unwrap();
            let edges = (table[0].llr.abs(), table[7].llr.abs());
            assert!(edges.0 > prev_edges.0 && edges.1 > prev_edges.1);
            let chan = quantized_channel(&q, &m, n).unwrap();
            let mean: f64 =
                table.iter().map(|s| 0.5 * (chan.row(0)[s.symbol] + chan.row(1)[s.symbol]) * s.llr.abs()).sum();
            assert!(mean > prev_mean);
            prev_edges = edges;
            prev_mean = mean;
        }
    }
}
