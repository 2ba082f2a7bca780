//! Result rows, CSV writing and gnuplot script generation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crossbar_core::map::BepEstimate;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

/// Rows with a fixed CSV header.
pub trait CsvRow: Serialize {
    const HEADER: &'static [&'static str];
}

/// One BER or FER point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sigma_eta: f64,
    #[serde(rename = "N")]
    pub n_reads: usize,
    pub q: Option<u32>,
    pub detector: String,
    pub code: Option<String>,
    pub metric: String,
    pub value: f64,
    pub ci95: f64,
    pub trials: u64,
}

impl CsvRow for ResultRow {
    const HEADER: &'static [&'static str] =
        &["sigma_eta", "N", "q", "detector", "code", "metric", "value", "ci95", "trials"];
}

/// One mutual-information point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiRow {
    pub sigma_eta: f64,
    #[serde(rename = "N")]
    pub n_reads: usize,
    pub q: Option<u32>,
    pub mi_bits: f64,
    pub method: String,
}

impl CsvRow for MiRow {
    const HEADER: &'static [&'static str] = &["sigma_eta", "N", "q", "mi_bits", "method"];
}

/// One MAP bit-error probability point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BepRow {
    pub sigma_eta: f64,
    #[serde(rename = "N")]
    pub n_reads: usize,
    pub bep: f64,
    pub ci95: f64,
    pub trials: u64,
    pub method: String,
}

impl BepRow {
    pub fn new(sigma_eta: f64, n_reads: usize, est: &BepEstimate) -> Self {
        BepRow {
            sigma_eta,
            n_reads,
            bep: est.value,
            ci95: est.ci95,
            trials: est.trials,
            method: est.method.as_str().into(),
        }
    }
}

impl CsvRow for BepRow {
    const HEADER: &'static [&'static str] = &["sigma_eta", "N", "bep", "ci95", "trials", "method"];
}

/// Writes the header and rows; the header is written even with no rows.
pub fn write_csv<T: CsvRow, W: Write>(rows: &[T], out: W) -> SimResult<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    wtr.write_record(T::HEADER)?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush().map_err(|e| SimError::io("<csv>", e))?;
    Ok(())
}

/// Writes rows to `path`, or to stdout when `path` is `None`.
pub fn write_csv_to<T: CsvRow>(rows: &[T], path: Option<&Path>) -> SimResult<()> {
    match path {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|e| SimError::io(p, e))?;
            write_csv(rows, std::io::BufWriter::new(file))
        }
        None => write_csv(rows, std::io::stdout().lock()),
    }
}

/// Gnuplot script for a result CSV. Rate metrics (BER, FER, BEP) get a log
/// y axis, MI a linear one. Each series becomes an inline data block.
pub fn emit_plot_script(csv_path: &Path) -> SimResult<String> {
    let text = std::fs::read_to_string(csv_path).map_err(|e| SimError::io(csv_path, e))?;
    plot_script_from_csv(&text, &csv_path.display().to_string())
}

/// [`emit_plot_script`] on CSV text already in memory.
pub fn plot_script_from_csv(text: &str, title: &str) -> SimResult<String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> =
        if text.trim().is_empty() { Vec::new() } else { rdr.headers()?.iter().map(str::to_owned).collect() };
    let col = |name: &str| header.iter().position(|h| h == name);
    let (y_col, ylabel) = if let Some(c) = col("mi_bits") {
        (Some(c), "MI (bits)".to_owned())
    } else if let Some(c) = col("bep") {
        (Some(c), "BEP".to_owned())
    } else {
        (col("value"), String::new())
    };
    let label_cols: Vec<usize> =
        ["detector", "code", "metric", "method", "N", "q"].iter().filter_map(|n| col(n)).collect();

    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut metrics = Vec::new();
    if let (Some(x), Some(y)) = (col("sigma_eta"), y_col) {
        for record in rdr.records() {
            let record = record?;
            let parse = |i: usize| record.get(i).and_then(|s| s.parse::<f64>().ok());
            let (Some(xv), Some(yv)) = (parse(x), parse(y)) else { continue };
            let label = label_cols
                .iter()
                .filter_map(|&i| {
                    let v = record.get(i)?;
                    (!v.is_empty()).then(|| format!("{}={}", header[i], v))
                })
                .collect::<Vec<_>>()
                .join(" ");
            if let Some(m) = col("metric").and_then(|i| record.get(i)) {
                if !metrics.iter().any(|x: &String| x == m) {
                    metrics.push(m.to_owned());
                }
            }
            series.entry(label).or_default().push((xv, yv));
        }
    }
    let ylabel = if ylabel.is_empty() { metrics.join("/").to_uppercase() } else { ylabel };
    let log_y = col("mi_bits").is_none();

    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script for {title}");
    let _ = writeln!(s, "set datafile separator \",\"");
    let _ = writeln!(s, "set xlabel \"sigma_eta (ohm)\"");
    let _ = writeln!(s, "set ylabel \"{ylabel}\"");
    let _ = writeln!(s, "set key outside right");
    let _ = writeln!(s, "set grid");
    if log_y {
        let _ = writeln!(s, "set logscale y");
        let _ = writeln!(s, "set format y \"10^{{%L}}\"");
    } else {
        let _ = writeln!(s, "unset logscale y");
    }
    let mut plots = Vec::new();
    for (k, (label, mut points)) in series.into_iter().enumerate() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let _ = writeln!(s, "$s{k} << EOD");
        for (x, y) in points {
            if log_y && y <= 0.0 {
                continue;
            }
            let _ = writeln!(s, "{x},{y}");
        }
        let _ = writeln!(s, "EOD");
        plots.push(format!("$s{k} using 1:2 with linespoints title \"{label}\""));
    }
    if !plots.is_empty() {
        let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    }
    Ok(s)
}
