//! Monte Carlo experiment harness for crossbar read channels: MI sweeps,
//! uncoded BER, BCH-coded FER and MAP bit-error probability, with seeded
//! reproducibility and CSV / gnuplot output.

pub mod config;
pub mod error;
pub mod harness;
pub mod output;
pub mod rng;

pub use config::{DetectorKind, ExperimentConfig};
pub use error::{SimError, SimResult};
pub use harness::{run_bep_map, run_coded_fer, run_mi_sweep, run_uncoded_ber};
pub use output::{emit_plot_script, BepRow, MiRow, ResultRow};
