//! Trace files: a CSV with a `time` column followed by one column per
//! channel, and the run metadata as JSON next to it.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use cosim::{Channel, RunMeta, TraceSet};

use crate::error::HarnessError;

pub fn write_csv<W: Write>(trace: &TraceSet, out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["time".to_string()];
    header.extend(trace.channels.iter().map(|c| c.name.clone()));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for (i, t) in trace.time.iter().enumerate() {
        row.clear();
        row.push(t.to_string());
        row.extend(trace.channels.iter().map(|c| c.values[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R, label: &str) -> Result<TraceSet, HarnessError> {
    let fmt = |message: String| HarnessError::Format { path: label.to_string(), message };
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(|e| fmt(e.to_string()))?.clone();
    if header.get(0) != Some("time") {
        return Err(fmt("first column must be `time`".into()));
    }
    let mut trace = TraceSet::new(header.iter().skip(1).map(str::to_string));
    let mut row = Vec::with_capacity(header.len() - 1);
    for (n, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| fmt(e.to_string()))?;
        let mut vals = rec.iter().map(|s| {
            s.parse::<f64>()
                .map_err(|_| fmt(format!("row {}: `{s}` is not a number", n + 2)))
        });
        let t = vals.next().ok_or_else(|| fmt(format!("row {} is empty", n + 2)))??;
        row.clear();
        for v in vals {
            row.push(v?);
        }
        trace.push_row(t, &row);
    }
    Ok(trace)
}

/// Metadata file belonging to a trace CSV: `x.csv` -> `x.meta.json`.
pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

/// Writes the CSV and its metadata file.
pub fn save(trace: &TraceSet, path: &Path) -> Result<(), HarnessError> {
    let f = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_csv(trace, std::io::BufWriter::new(f)).map_err(|e| HarnessError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let meta = meta_path(path);
    let json = serde_json::to_string_pretty(&trace.meta).expect("metadata serializes");
    std::fs::write(&meta, json + "\n").map_err(|e| HarnessError::io(&meta, e))
}

/// Reads a CSV trace and, when present, its metadata file.
pub fn load(path: &Path) -> Result<TraceSet, HarnessError> {
    let f = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut trace = read_csv(std::io::BufReader::new(f), &path.display().to_string())?;
    let meta = meta_path(path);
    if meta.exists() {
        let text = std::fs::read_to_string(&meta).map_err(|e| HarnessError::io(&meta, e))?;
        trace.meta = serde_json::from_str::<RunMeta>(&text).map_err(|e| HarnessError::Format {
            path: meta.display().to_string(),
            message: e.to_string(),
        })?;
    }
    Ok(trace)
}

/// Looks up a channel or reports it as unknown.
pub fn channel<'a>(trace: &'a TraceSet, name: &str) -> Result<&'a [f64], HarnessError> {
    trace.channel(name).ok_or_else(|| HarnessError::UnknownChannel(name.to_string()))
}

/// Trace restricted to the listed channels, in the given order.
pub fn select(trace: &TraceSet, names: &[String]) -> Result<TraceSet, HarnessError> {
    let channels = names
        .iter()
        .map(|n| Ok(Channel { name: n.clone(), values: channel(trace, n)?.to_vec() }))
        .collect::<Result<_, HarnessError>>()?;
    Ok(TraceSet { time: trace.time.clone(), channels, meta: trace.meta.clone() })
}
