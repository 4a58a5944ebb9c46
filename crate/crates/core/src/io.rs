//! Plain-text formats: CSV tables and TOML sidecars.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` bit for bit. Rendering functions return strings so that callers can
//! assemble byte-stable artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regularization::RegularizedSweep;
use crate::spectra::{Mode, ModeSpectrum, Potential1D};

/// `x` with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Reads a CSV file with exactly the given header into rows of strings.
fn read_table(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| parse_err(path, e.to_string()))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(parse_err(
            path,
            format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    reader
        .records()
        .map(|r| r.map_err(|e| parse_err(path, e.to_string())))
        .collect()
}

fn field<T: std::str::FromStr>(path: &Path, row: &csv::StringRecord, line: usize, col: usize) -> Result<T> {
    let raw = row.get(col).unwrap_or("");
    raw.parse()
        .map_err(|_| parse_err(path, format!("row {line}: cannot parse `{raw}`")))
}

fn read_pairs(path: &Path, header: &[&str]) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = read_table(path, header)?;
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        xs.push(field(path, row, i + 1, 0)?);
        ys.push(field(path, row, i + 1, 1)?);
    }
    Ok((xs, ys))
}

fn render_pairs(header: &str, rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut out = format!("{header}\n");
    for (x, y) in rows {
        let _ = writeln!(out, "{},{}", format_f64(x), format_f64(y));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumMeta {
    pub dimension: u32,
    pub uv_valid_count: usize,
    pub coverage: f64,
    pub label: String,
}

/// The sidecar path of a spectrum CSV: `modes.csv` → `modes.meta.toml`.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.toml")
}

pub fn render_spectrum(spectrum: &ModeSpectrum) -> (String, String) {
    let mut csv = String::from("omega,multiplicity\n");
    for m in spectrum.modes() {
        let _ = writeln!(csv, "{},{}", format_f64(m.omega), m.multiplicity);
    }
    let meta = SpectrumMeta {
        dimension: spectrum.dimension(),
        uv_valid_count: spectrum.uv_valid_count(),
        coverage: spectrum.coverage(),
        label: spectrum.label().to_string(),
    };
    let meta = toml::to_string(&meta).expect("spectrum metadata serializes");
    (csv, meta)
}

/// Writes `omega,multiplicity` rows and the metadata sidecar.
pub fn write_spectrum(spectrum: &ModeSpectrum, csv_path: &Path) -> Result<()> {
    let (csv, meta) = render_spectrum(spectrum);
    write_text(csv_path, &csv)?;
    write_text(&meta_path(csv_path), &meta)
}

/// Reads a spectrum written by [`write_spectrum`]. The frequencies become the
/// base of the loaded spectrum, so its mass shift is zero.
pub fn read_spectrum(csv_path: &Path) -> Result<ModeSpectrum> {
    let meta_file = meta_path(csv_path);
    let meta: SpectrumMeta =
        toml::from_str(&read_text(&meta_file)?).map_err(|e| parse_err(&meta_file, e.to_string()))?;
    let rows = read_table(csv_path, &["omega", "multiplicity"])?;
    let mut modes = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        modes.push(Mode {
            omega: field(csv_path, row, i + 1, 0)?,
            multiplicity: field(csv_path, row, i + 1, 1)?,
        });
    }
    if modes.windows(2).any(|w| w[1].omega < w[0].omega) {
        return Err(parse_err(csv_path, "frequencies must be sorted"));
    }
    ModeSpectrum::new(modes, meta.dimension, meta.uv_valid_count, meta.coverage, meta.label)
}

/// `omega_cutoff,value` rows.
pub fn render_sweep(sweep: &RegularizedSweep) -> String {
    render_pairs(
        "omega_cutoff,value",
        sweep.omega_grid.iter().copied().zip(sweep.values.iter().copied()),
    )
}

/// `t,K` rows.
pub fn render_trace(t: &[f64], k: &[f64]) -> String {
    render_pairs("t,K", t.iter().copied().zip(k.iter().copied()))
}

/// `xi,g` rows.
pub fn render_weight(xi: &[f64], g: &[f64]) -> String {
    render_pairs("xi,g", xi.iter().copied().zip(g.iter().copied()))
}

/// Reads a tabulated weight `xi,g`.
pub fn read_weight_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    read_pairs(path, &["xi", "g"])
}

/// Reads a tabulated potential `x,V` and interpolates it linearly, holding
/// the end values outside the table.
pub fn read_potential(path: &Path) -> Result<Potential1D> {
    let (xs, vs) = read_pairs(path, &["x", "V"])?;
    if xs.len() < 2 {
        return Err(parse_err(path, "a potential table needs at least two rows"));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(parse_err(path, "x values must be strictly increasing"));
    }
    if xs.iter().chain(&vs).any(|v| !v.is_finite()) {
        return Err(parse_err(path, "potential table values must be finite"));
    }
    Ok(Arc::new(move |x: f64| {
        let j = xs.partition_point(|v| *v <= x).clamp(1, xs.len() - 1);
        let t = ((x - xs[j - 1]) / (xs[j] - xs[j - 1])).clamp(0.0, 1.0);
        vs[j - 1] + t * (vs[j] - vs[j - 1])
    }))
}
