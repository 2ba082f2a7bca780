//! Hard-decision BCH coding over detected bits and per-symbol LLR export.

mod bch;
mod gf;
mod llr;

pub use bch::{bch_decode_hdd, bch_encode, BchCode, CodeId, HddOutcome};
pub use gf::Gf128;
pub use llr::{llr_from_symbol, llr_table, LlrSymbol, LLR_PROB_FLOOR};
