use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use crossbar_core::ecc::CodeId;
use crossbar_core::quantizer::design_dp;
use crossbar_core::threshold::optimize_threshold_bisection;
use crossbar_core::ChannelModel;
use crossbar_sim::output::write_csv_to;
use crossbar_sim::{emit_plot_script, run_bep_map, run_coded_fer, run_mi_sweep, run_uncoded_ber, ExperimentConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "crossbar-sim", version, about = "Crossbar read-channel quantizer design and detector simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// MI-optimal q-bit quantizer for the N-read average (JSON).
    DesignQuantizer {
        #[command(flatten)]
        common: Common,
        /// Quantizer bits q.
        #[arg(long, default_value_t = 3)]
        bits: u32,
    },
    /// MI-optimal single-bit threshold by bisection (JSON).
    DesignThreshold {
        #[command(flatten)]
        common: Common,
    },
    /// MI of designed quantizers over the sigma sweep (CSV).
    MiSweep {
        #[command(flatten)]
        common: Common,
        /// Exact multi-read MI samples per point; 0 skips the estimate.
        #[arg(long)]
        mi_samples: Option<u64>,
    },
    /// Uncoded BER by per-cell simulation (CSV).
    Ber {
        #[command(flatten)]
        common: Common,
    },
    /// BCH-coded FER by per-array simulation (CSV).
    Fer {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_code)]
        code: Option<CodeId>,
        #[arg(long)]
        frames: Option<u64>,
    },
    /// MAP bit-error probability by quadrature and Monte Carlo (CSV).
    BepMap {
        #[command(flatten)]
        common: Common,
    },
    /// Sneak-path types with their equivalent resistance and probability (CSV).
    AlphaTable {
        #[command(flatten)]
        common: Common,
    },
    /// Gnuplot script for a result CSV.
    Plot {
        /// Result CSV to plot.
        csv: PathBuf,
        /// Script destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment config (channel parameters plus experiment fields).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    jobs: Option<usize>,
    /// Noise level(s) sigma_eta in ohm, comma separated.
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    /// Read count(s) N, comma separated.
    #[arg(long, value_delimiter = ',')]
    reads: Option<Vec<usize>>,
    /// Quantizer bits for the MI sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    quant_bits: Option<Vec<u32>>,
    #[arg(long)]
    trials: Option<u64>,
    /// Threshold bisection samples.
    #[arg(long)]
    ns: Option<usize>,
    /// Fine-grid size for quantizer design.
    #[arg(long)]
    h: Option<usize>,
}

fn parse_code(s: &str) -> Result<CodeId, String> {
    CodeId::parse(s).map_err(|e| e.to_string())
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(sigma) = &self.sigma {
            cfg.sweep = sigma.clone();
        }
        if let Some(reads) = &self.reads {
            cfg.reads = reads.clone();
        }
        if let Some(bits) = &self.quant_bits {
            cfg.quant_bits = bits.clone();
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if let Some(ns) = self.ns {
            cfg.ns = ns;
        }
        if let Some(h) = self.h {
            cfg.h = h;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        Ok(cfg)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(jobs) = self.jobs {
            builder = builder.num_threads(jobs.max(1));
        }
        Ok(builder.build()?)
    }
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct QuantizerOut {
    q: u32,
    boundaries_ohm: Vec<f64>,
    mi_bits: f64,
    n_reads: usize,
    sigma_eta_ohm: f64,
}

#[derive(Serialize)]
struct ThresholdOut {
    t1_star_ohm: f64,
    mi_bits: f64,
    p0: f64,
    p1: f64,
    n_reads: usize,
    sigma_eta_ohm: f64,
    degenerate: bool,
}

#[derive(Serialize)]
struct AlphaRow {
    #[serde(rename = "L")]
    paths: usize,
    k_l: usize,
    k_c: usize,
    alpha: f64,
    probability: f64,
}

fn first_point(cfg: &ExperimentConfig) -> (f64, usize) {
    (cfg.sweep.first().copied().unwrap_or(cfg.params.sigma_eta), cfg.reads.first().copied().unwrap_or(1))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::DesignQuantizer { common, bits } => {
            let cfg = common.load()?;
            let (sigma, n) = first_point(&cfg);
            let model = ChannelModel::new(cfg.params.with_sigma(sigma))?;
            let design = design_dp(&model, n, bits, cfg.h)?;
            let out = QuantizerOut {
                q: bits,
                boundaries_ohm: design.quantizer.boundaries().to_vec(),
                mi_bits: design.mi_bits,
                n_reads: n,
                sigma_eta_ohm: sigma,
            };
            write_json(&out, cfg.out.as_deref())
        }
        Command::DesignThreshold { common } => {
            let cfg = common.load()?;
            let (sigma, n) = first_point(&cfg);
            let model = ChannelModel::new(cfg.params.with_sigma(sigma))?;
            let d = optimize_threshold_bisection(&model, n, cfg.ns)?;
            let out = ThresholdOut {
                t1_star_ohm: d.t1,
                mi_bits: d.mi_bits,
                p0: d.bac.p0,
                p1: d.bac.p1,
                n_reads: n,
                sigma_eta_ohm: sigma,
                degenerate: d.degenerate,
            };
            write_json(&out, cfg.out.as_deref())
        }
        Command::MiSweep { common, mi_samples } => {
            let mut cfg = common.load()?;
            if let Some(s) = mi_samples {
                cfg.mi_samples = s;
            }
            let rows = common.pool()?.install(|| run_mi_sweep(&cfg))?;
            Ok(write_csv_to(&rows, cfg.out.as_deref())?)
        }
        Command::Ber { common } => {
            let cfg = common.load()?;
            let rows = common.pool()?.install(|| run_uncoded_ber(&cfg))?;
            Ok(write_csv_to(&rows, cfg.out.as_deref())?)
        }
        Command::Fer { common, code, frames } => {
            let mut cfg = common.load()?;
            if code.is_some() {
                cfg.code = code;
            }
            if let Some(f) = frames {
                cfg.frames = f;
            }
            let rows = common.pool()?.install(|| run_coded_fer(&cfg))?;
            Ok(write_csv_to(&rows, cfg.out.as_deref())?)
        }
        Command::BepMap { common } => {
            let cfg = common.load()?;
            let rows = common.pool()?.install(|| run_bep_map(&cfg))?;
            Ok(write_csv_to(&rows, cfg.out.as_deref())?)
        }
        Command::AlphaTable { common } => {
            let cfg = common.load()?;
            let model = ChannelModel::new(cfg.params)?;
            let rows: Vec<AlphaRow> = model
                .types()
                .iter()
                .map(|t| AlphaRow { paths: t.paths, k_l: t.rows, k_c: t.cols, alpha: t.alpha, probability: t.prob })
                .collect();
            let mut wtr: csv::Writer<Box<dyn std::io::Write>> = match &cfg.out {
                Some(p) => csv::Writer::from_writer(Box::new(std::fs::File::create(p)?)),
                None => csv::Writer::from_writer(Box::new(std::io::stdout().lock())),
            };
            for row in &rows {
                wtr.serialize(row)?;
            }
            wtr.flush()?;
            Ok(())
        }
        Command::Plot { csv, out } => {
            let script = emit_plot_script(&csv)?;
            match out {
                Some(p) => std::fs::write(&p, script).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{script}"),
            }
            Ok(())
        }
    }
}
