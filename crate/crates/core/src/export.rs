//! CSV, raw binary and JSON sidecar writers and readers.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::filterbank::{bin_frequency, Filterbank};
use crate::scattering::{MaskingCoefficient, ScatteringFeature, ScatteringLayer};

/// `%g`-style formatting with six significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Shortest string that parses back to the same `f64`.
pub fn format_value(x: f64) -> String {
    format!("{x}")
}

/// `<path>.json`
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Header plus string rows, RFC 4180 quoting.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return invalid(format!(
                "CSV row has {} fields, header has {}",
                row.len(),
                header.len()
            ));
        }
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per signal: `signal, S0, S1:…, S2:…:…`.
pub fn write_feature_csv(path: &Path, features: &[ScatteringFeature]) -> Result<()> {
    let Some(first) = features.first() else {
        return invalid("no features to write");
    };
    let labels = first.labels();
    if features.iter().any(|f| f.labels() != labels) {
        return invalid("features do not share one path set");
    }
    let header: Vec<String> = std::iter::once("signal".to_string()).chain(labels).collect();
    let rows: Vec<Vec<String>> = features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            std::iter::once(i.to_string())
                .chain(f.to_vector().into_iter().map(format_value))
                .collect()
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Same row layout as [`write_feature_csv`] with `MFCC{k}` columns.
pub fn write_mfcc_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let Some(first) = rows.first() else {
        return invalid("no features to write");
    };
    let header: Vec<String> = std::iter::once("signal".to_string())
        .chain((0..first.len()).map(|k| format!("MFCC{k}")))
        .collect();
    let rows: Vec<Vec<String>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            std::iter::once(i.to_string())
                .chain(r.iter().map(|&v| format_value(v)))
                .collect()
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Columns `signal, lambda1, lambda2, s2_tilde`.
pub fn write_masking_table(path: &Path, tables: &[Vec<MaskingCoefficient>]) -> Result<()> {
    let header: Vec<String> = ["signal", "lambda1", "lambda2", "s2_tilde"]
        .map(String::from)
        .to_vec();
    let rows: Vec<Vec<String>> = tables
        .iter()
        .enumerate()
        .flat_map(|(i, t)| {
            t.iter().map(move |c| {
                vec![
                    i.to_string(),
                    format_sig6(c.lambdas.0),
                    format_sig6(c.lambdas.1),
                    format_value(c.value),
                ]
            })
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Columns `filter, lambda, bin, nu, magnitude` for every filter and bin.
pub fn write_filter_magnitudes(path: &Path, fb: &Filterbank) -> Result<()> {
    let n = fb.signal_len();
    let header: Vec<String> = ["filter", "lambda", "bin", "nu", "magnitude"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::with_capacity(fb.len() * n);
    for (j, (filter, &lambda)) in fb.filters().iter().zip(fb.lambdas()).enumerate() {
        for (k, h) in filter.iter().enumerate() {
            rows.push(vec![
                j.to_string(),
                format_sig6(lambda),
                k.to_string(),
                format_value(bin_frequency(k, n)),
                format_value(h.norm()),
            ]);
        }
    }
    write_csv(path, &header, &rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalFormat {
    /// One row per sample, one column per signal.
    Csv,
    /// Little-endian f64, signal-major.
    Binary,
}

impl SignalFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SignalFormat::Csv => "csv",
            SignalFormat::Binary => "bin",
        }
    }

    /// Binary unless the extension is `.csv`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => SignalFormat::Csv,
            _ => SignalFormat::Binary,
        }
    }
}

/// Sidecar written next to every signal file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSidecar {
    pub format: SignalFormat,
    pub n_signals: usize,
    pub signal_len: usize,
    pub dtype: String,
    /// Generator parameters, one entry per signal or one for the batch.
    pub metadata: serde_json::Value,
}

/// Writes the signals plus `<path>.json`.
pub fn write_signals(
    path: &Path,
    signals: &[Vec<f64>],
    format: SignalFormat,
    metadata: serde_json::Value,
) -> Result<()> {
    let Some(first) = signals.first() else {
        return invalid("no signals to write");
    };
    let len = first.len();
    if let Some(s) = signals.iter().find(|s| s.len() != len) {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: s.len(),
        });
    }
    match format {
        SignalFormat::Csv => {
            let header: Vec<String> = (0..signals.len()).map(|i| format!("signal_{i}")).collect();
            let rows: Vec<Vec<String>> = (0..len)
                .map(|t| signals.iter().map(|s| format_value(s[t])).collect())
                .collect();
            write_csv(path, &header, &rows)?;
        }
        SignalFormat::Binary => {
            let mut w = BufWriter::new(File::create(path)?);
            for v in signals.iter().flatten() {
                w.write_all(&v.to_le_bytes())?;
            }
            w.flush()?;
        }
    }
    write_json(
        &sidecar_path(path),
        &SignalSidecar {
            format,
            n_signals: signals.len(),
            signal_len: len,
            dtype: "f64le".into(),
            metadata,
        },
    )
}

fn read_f64_le(path: &Path) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Format(format!(
            "{} is not a whole number of f64 values ({} bytes)",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

/// Reads a signal file written by [`write_signals`].
///
/// CSV files need no sidecar; binary files take their shape from it.
pub fn read_signals(path: &Path) -> Result<Vec<Vec<f64>>> {
    match SignalFormat::from_path(path) {
        SignalFormat::Csv => {
            let mut r = csv::Reader::from_path(path)?;
            let n = r.headers()?.len();
            let mut signals = vec![Vec::new(); n];
            for rec in r.records() {
                let rec = rec?;
                for (i, field) in rec.iter().enumerate() {
                    let v: f64 = field.trim().parse().map_err(|_| {
                        Error::Format(format!("{}: not a number: {field:?}", path.display()))
                    })?;
                    signals[i].push(v);
                }
            }
            if signals.is_empty() || signals[0].is_empty() {
                return Err(Error::Format(format!("{} holds no samples", path.display())));
            }
            Ok(signals)
        }
        SignalFormat::Binary => {
            let side: SignalSidecar = read_json(&sidecar_path(path))?;
            let data = read_f64_le(path)?;
            if side.signal_len == 0 || data.len() != side.n_signals * side.signal_len {
                return Err(Error::Format(format!(
                    "{} holds {} values, sidecar declares {} × {}",
                    path.display(),
                    data.len(),
                    side.n_signals,
                    side.signal_len
                )));
            }
            Ok(data.chunks(side.signal_len).map(<[f64]>::to_vec).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDumpEntry {
    pub depth: usize,
    /// `[n_paths, signal_len]`
    pub shape: [usize; 2],
    /// Byte offset of the layer in the dump.
    pub offset: usize,
    pub paths: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDumpSidecar {
    pub dtype: String,
    pub layers: Vec<LayerDumpEntry>,
}

/// `U_1 … U_M` back to back as little-endian f64, plus `<path>.json`.
pub fn write_layer_dump(path: &Path, layers: &[ScatteringLayer]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut offset = 0;
    let mut entries = Vec::with_capacity(layers.len());
    for layer in layers {
        let len = layer.data().first().map_or(0, Vec::len);
        for v in layer.data().iter().flatten() {
            w.write_all(&v.to_le_bytes())?;
        }
        entries.push(LayerDumpEntry {
            depth: layer.depth(),
            shape: [layer.len(), len],
            offset,
            paths: layer.paths().iter().map(|p| p.label()).collect(),
        });
        offset += layer.len() * len * 8;
    }
    w.flush()?;
    write_json(
        &sidecar_path(path),
        &LayerDumpSidecar {
            dtype: "f64le".into(),
            layers: entries,
        },
    )
}

/// Reads a dump back as `(sidecar, per-layer row-major values)`.
pub fn read_layer_dump(path: &Path) -> Result<(LayerDumpSidecar, Vec<Vec<f64>>)> {
    let side: LayerDumpSidecar = read_json(&sidecar_path(path))?;
    let data = read_f64_le(path)?;
    let mut out = Vec::with_capacity(side.layers.len());
    for e in &side.layers {
        let start = e.offset / 8;
        let end = start + e.shape[0] * e.shape[1];
        if end > data.len() {
            return Err(Error::Format(format!("{} is truncated", path.display())));
        }
        out.push(data[start..end].to_vec());
    }
    Ok((side, out))
}
