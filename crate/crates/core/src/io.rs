//! File formats: CSV text and little-endian raw `f64` with a JSON sidecar.
//!
//! CSV holds either one sample per row (a single signal) or one A-line per
//! column under a header row. Columns named `r{y}c{x}` that cover a full
//! raster in row-major order load as that raster; any other header loads as a
//! `1 x ncols` grid. CSV carries no sample rate, so the caller supplies one.
//!
//! RAW files are bare little-endian `f64` values. The sidecar at
//! `<path>.meta.json` records dtype, byte order, sample rate and either
//! `length` or `ny`/`nx`/`nt`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Data, ScanGrid};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Raw,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Raw => "raw",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "raw" | "bin" => Ok(Format::Raw),
            _ => Err(Error::InvalidParameter(format!(
                "unknown format {s:?}; expected csv or raw"
            ))),
        }
    }
}

/// Sidecar contents for RAW files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMeta {
    pub dtype: String,
    pub byte_order: String,
    pub sample_rate_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nt: Option<usize>,
}

impl RawMeta {
    fn for_data(data: &Data<f64>) -> Self {
        let mut meta = RawMeta {
            dtype: "f64".into(),
            byte_order: "little".into(),
            sample_rate_hz: data.sample_rate_hz(),
            length: None,
            ny: None,
            nx: None,
            nt: None,
        };
        match data {
            Data::Signal(s) => meta.length = Some(s.len()),
            Data::Grid(g) => {
                meta.ny = Some(g.ny());
                meta.nx = Some(g.nx());
                meta.nt = Some(g.nt());
            }
        }
        meta
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn load_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Load {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// `fs_hz` is required for CSV. For RAW the sidecar rate is used, and a
/// conflicting `fs_hz` is rejected.
pub fn load(path: &Path, format: Format, fs_hz: Option<f64>) -> Result<Data<f64>> {
    match format {
        Format::Csv => {
            let fs = fs_hz.ok_or_else(|| {
                Error::InvalidParameter("CSV carries no sample rate; one must be supplied".into())
            })?;
            let text = fs::read_to_string(path)
                .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            parse_csv(&text, fs).map_err(|e| match e {
                Error::Load { message, .. } => load_err(path, message),
                other => other,
            })
        }
        Format::Raw => load_raw(path, fs_hz),
    }
}

pub fn save(path: &Path, data: &Data<f64>, format: Format) -> Result<()> {
    match format {
        Format::Csv => fs::write(path, to_csv(data))
            .map_err(|e| Error::io(format!("writing {}", path.display()), e)),
        Format::Raw => save_raw(path, data),
    }
}

fn parse_field(tok: &str, line: usize, col: usize) -> Result<f64> {
    let v: f64 = tok.trim().parse().map_err(|_| Error::Load {
        path: String::new(),
        message: format!("line {line}, column {col}: cannot parse {:?} as a number", tok.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Load {
            path: String::new(),
            message: format!("line {line}, column {col}: non-finite value {v}"),
        });
    }
    Ok(v)
}

fn raster_header(names: &[&str]) -> Option<(usize, usize)> {
    let parse = |n: &str| -> Option<(usize, usize)> {
        let rest = n.trim().strip_prefix('r')?;
        let (y, x) = rest.split_once('c')?;
        Some((y.parse().ok()?, x.parse().ok()?))
    };
    let cells: Vec<(usize, usize)> = names.iter().map(|n| parse(n)).collect::<Option<_>>()?;
    let nx = cells.iter().map(|c| c.1).max()? + 1;
    let ny = cells.iter().map(|c| c.0).max()? + 1;
    if ny * nx != cells.len() {
        return None;
    }
    let row_major = cells.iter().enumerate().all(|(i, &(y, x))| y == i / nx && x == i % nx);
    row_major.then_some((ny, nx))
}

/// Parses CSV text; errors name the 1-based line and column.
pub fn parse_csv(text: &str, fs_hz: f64) -> Result<Data<f64>> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let err = |message: String| Error::Load {
        path: String::new(),
        message,
    };
    let &(first_line, first) = rows.peek().ok_or_else(|| err("no samples".into()))?;
    let first_fields: Vec<&str> = first.split(',').collect();
    let has_header = first_fields.iter().any(|f| f.trim().parse::<f64>().is_err());
    let header: Option<Vec<&str>> = if has_header {
        rows.next();
        Some(first_fields.clone())
    } else {
        None
    };
    let ncols = first_fields.len();
    if header.is_none() && ncols != 1 {
        return Err(err(format!(
            "line {first_line}: {ncols} columns without a header row; multi-column CSV needs one"
        )));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); ncols];
    for (line, row) in rows {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != ncols {
            return Err(err(format!(
                "line {line} has {} fields, expected {ncols}",
                fields.len()
            )));
        }
        for (c, f) in fields.iter().enumerate() {
            columns[c].push(parse_field(f, line, c + 1)?);
        }
    }
    if columns[0].is_empty() {
        return Err(err("no samples".into()));
    }
    match header {
        None => Ok(Data::Signal(Signal::new(columns.pop().unwrap_or_default(), fs_hz)?)),
        Some(names) => {
            let (ny, nx) = match raster_header(&names) {
                Some(shape) => shape,
                None if ncols == 1 => {
                    return Ok(Data::Signal(Signal::new(
                        columns.pop().unwrap_or_default(),
                        fs_hz,
                    )?))
                }
                None => (1, ncols),
            };
            let nt = columns[0].len();
            let data: Vec<f64> = columns.into_iter().flatten().collect();
            Ok(Data::Grid(ScanGrid::new(ny, nx, nt, fs_hz, data)?))
        }
    }
}

/// `{:?}` formatting is the shortest text that parses back to the same bits.
pub fn to_csv(data: &Data<f64>) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    match data {
        Data::Signal(s) => {
            for v in s.samples() {
                let _ = writeln!(out, "{v:?}");
            }
        }
        Data::Grid(g) => {
            let names: Vec<String> = (0..g.ny())
                .flat_map(|y| (0..g.nx()).map(move |x| format!("r{y}c{x}")))
                .collect();
            out.push_str(&names.join(","));
            out.push('\n');
            for t in 0..g.nt() {
                for i in 0..g.lines() {
                    if i > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{:?}", g.line(i)[t]);
                }
                out.push('\n');
            }
        }
    }
    out
}

fn load_raw(path: &Path, fs_hz: Option<f64>) -> Result<Data<f64>> {
    let meta_path = sidecar_path(path);
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| {
        load_err(path, format!("missing or unreadable sidecar {}: {e}", meta_path.display()))
    })?;
    let meta: RawMeta = serde_json::from_str(&meta_text)
        .map_err(|e| load_err(&meta_path, format!("bad sidecar: {e}")))?;
    if !matches!(meta.dtype.as_str(), "f64" | "float64") {
        return Err(load_err(&meta_path, format!("unsupported dtype {:?}; only f64", meta.dtype)));
    }
    if !matches!(meta.byte_order.as_str(), "little" | "le" | "little-endian") {
        return Err(load_err(
            &meta_path,
            format!("unsupported byte order {:?}; only little", meta.byte_order),
        ));
    }
    if let Some(fs) = fs_hz {
        if fs != meta.sample_rate_hz {
            return Err(Error::InvalidParameter(format!(
                "sample rate {fs} Hz conflicts with {} Hz recorded in {}",
                meta.sample_rate_hz,
                meta_path.display()
            )));
        }
    }
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    if bytes.len() % 8 != 0 {
        let whole = bytes.len() / 8 * 8;
        return Err(load_err(
            path,
            format!(
                "{} bytes is not a whole number of 8-byte values; {} trailing bytes at offset {whole}",
                bytes.len(),
                bytes.len() - whole
            ),
        ));
    }
    let mut values = Vec::with_capacity(bytes.len() / 8);
    for (i, chunk) in bytes.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("chunk of 8"));
        if !v.is_finite() {
            return Err(load_err(path, format!("non-finite value {v} at byte offset {}", i * 8)));
        }
        values.push(v);
    }
    let declared = match (meta.length, meta.ny, meta.nx, meta.nt) {
        (Some(n), None, None, None) => n,
        (None, Some(ny), Some(nx), Some(nt)) => ny * nx * nt,
        _ => {
            return Err(load_err(
                &meta_path,
                "sidecar must give either length or all of ny, nx, nt",
            ))
        }
    };
    if declared != values.len() {
        return Err(load_err(
            path,
            format!(
                "dimension mismatch: sidecar declares {declared} values but file holds {}",
                values.len()
            ),
        ));
    }
    let fs = meta.sample_rate_hz;
    Ok(match (meta.ny, meta.nx, meta.nt) {
        (Some(ny), Some(nx), Some(nt)) => Data::Grid(ScanGrid::new(ny, nx, nt, fs, values)?),
        _ => Data::Signal(Signal::new(values, fs)?),
    })
}

fn save_raw(path: &Path, data: &Data<f64>) -> Result<()> {
    let mut bytes = Vec::with_capacity(data.samples().len() * 8);
    for v in data.samples() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    let meta = serde_json::to_string_pretty(&RawMeta::for_data(data))
        .map_err(|e| Error::InvalidParameter(format!("serializing sidecar: {e}")))?;
    let meta_path = sidecar_path(path);
    fs::write(&meta_path, meta + "\n")
        .map_err(|e| Error::io(format!("writing {}", meta_path.display()), e))
}
