//! Chain traces on disk: one CSV row per kept post-warm-up iteration, plus
//! JSON metadata and summaries.

use std::io;
use std::path::Path;

use latentmc_core::diagnostics::{summarize, ChainTrace};
use serde::{Deserialize, Serialize};

use crate::error::{csv_err, io_err, json_err, Error, Result};

pub const META_COLUMNS: [&str; 6] = ["iter", "accepted", "log_rho", "H_start", "H_end", "log_volume_factor"];

/// Write the trace. `columns` selects which coordinates become the
/// `q_<j>` columns; `None` writes all of them.
pub fn write_trace_to<W: io::Write>(writer: W, trace: &ChainTrace, columns: Option<&[usize]>) -> Result<(), csv::Error> {
    let all: Vec<usize>;
    let cols = match columns {
        Some(c) => c,
        None => {
            all = (0..trace.dim).collect();
            &all
        }
    };
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = META_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(cols.iter().map(|j| format!("q_{j}")));
    w.write_record(&header)?;
    let kept = trace
        .records
        .iter()
        .filter(|r| !r.warmup)
        .enumerate()
        .filter(|(k, _)| k % trace.thin.max(1) == 0)
        .map(|(_, r)| r);
    for (r, q) in kept.zip(&trace.samples) {
        let mut rec = vec![
            r.iter.to_string(),
            u8::from(r.accepted).to_string(),
            r.log_rho.to_string(),
            r.hamiltonian_start.to_string(),
            r.hamiltonian_end.to_string(),
            r.log_volume_factor.to_string(),
        ];
        rec.extend(cols.iter().map(|&j| q[j].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv(path: impl AsRef<Path>, trace: &ChainTrace, columns: Option<&[usize]>) -> Result<()> {
    let path = path.as_ref();
    if let Some(&bad) = columns.and_then(|c| c.iter().find(|&&j| j >= trace.dim)) {
        return Err(Error::Config(format!(
            "trace column {bad} is out of range for dimension {}",
            trace.dim
        )));
    }
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    write_trace_to(io::BufWriter::new(file), trace, columns).map_err(csv_err(path))
}

/// Header and numeric rows of a trace CSV.
pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = rdr.headers().map_err(csv_err(path))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(path))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::Data(format!("{}: bad number `{f}`", path.display()))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Per-parameter posterior summary as written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub index: usize,
    pub mean: f64,
    pub sd: f64,
    pub ess: Option<f64>,
    pub lower: f64,
    pub upper: f64,
}

pub fn param_records(trace: &ChainTrace, level: f64) -> Vec<ParamRecord> {
    summarize(&trace.samples, level)
        .into_iter()
        .enumerate()
        .map(|(index, s)| ParamRecord {
            index,
            mean: s.mean,
            sd: s.sd,
            ess: s.ess,
            lower: s.lower,
            upper: s.upper,
        })
        .collect()
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value).map_err(json_err(path))?;
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(json_err(path))
}
