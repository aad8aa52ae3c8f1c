use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::OracleDistribution;
use crate::trajectory::TrajectoryPoint;

pub const CSV_HEADER: [&str; 15] = [
    "method",
    "n0",
    "gamma_P",
    "mean_np",
    "mean_ne",
    "g2_0",
    "rin",
    "corr_ratio",
    "err_np",
    "err_g2",
    "err_rin",
    "steps",
    "wallclock_s",
    "seed",
    "status",
];

/// One line of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub n0: u32,
    pub gamma_p: f64,
    pub mean_np: Option<f64>,
    pub mean_ne: Option<f64>,
    pub g2_0: Option<f64>,
    pub rin: Option<f64>,
    pub corr_ratio: Option<f64>,
    pub err_np: Option<f64>,
    pub err_g2: Option<f64>,
    pub err_rin: Option<f64>,
    pub steps: u64,
    pub wallclock_s: Option<f64>,
    pub seed: u64,
    pub status: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Shortest decimal that parses back to the same value.
fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Serializes rows (header included) into CSV bytes.
pub fn results_to_bytes(rows: &[ResultRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.n0.to_string(),
            fmt_float(r.gamma_p),
            fmt_opt(r.mean_np),
            fmt_opt(r.mean_ne),
            fmt_opt(r.g2_0),
            fmt_opt(r.rin),
            fmt_opt(r.corr_ratio),
            fmt_opt(r.err_np),
            fmt_opt(r.err_g2),
            fmt_opt(r.err_rin),
            r.steps.to_string(),
            fmt_opt(r.wallclock_s),
            r.seed.to_string(),
            r.status.clone(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_bytes(path, &results_to_bytes(rows))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, bytes).map_err(io)
}

fn parse_field<T: std::str::FromStr>(field: &str, column: &str, line: u64) -> Result<T> {
    field.parse().map_err(|_| {
        Error::Format(format!(
            "line {line}: column `{column}` has invalid value `{field}`"
        ))
    })
}

fn parse_opt(field: &str, column: &str, line: u64) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_field(field, column, line).map(Some)
    }
}

/// Parses CSV text with the exact results header.
pub fn parse_results<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header = r
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Format(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let rec = record.map_err(|e| Error::Format(e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let f = |i: usize| &rec[i];
        rows.push(ResultRow {
            method: f(0).to_string(),
            n0: parse_field(f(1), "n0", line)?,
            gamma_p: parse_field(f(2), "gamma_P", line)?,
            mean_np: parse_opt(f(3), "mean_np", line)?,
            mean_ne: parse_opt(f(4), "mean_ne", line)?,
            g2_0: parse_opt(f(5), "g2_0", line)?,
            rin: parse_opt(f(6), "rin", line)?,
            corr_ratio: parse_opt(f(7), "corr_ratio", line)?,
            err_np: parse_opt(f(8), "err_np", line)?,
            err_g2: parse_opt(f(9), "err_g2", line)?,
            err_rin: parse_opt(f(10), "err_rin", line)?,
            steps: parse_field(f(11), "steps", line)?,
            wallclock_s: parse_opt(f(12), "wallclock_s", line)?,
            seed: parse_field(f(13), "seed", line)?,
            status: f(14).to_string(),
        });
    }
    Ok(rows)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_results(file)
}

/// Metadata written next to a results file as `<file>.meta.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: Vec<serde_json::Value>,
    pub runs: Vec<serde_json::Value>,
}

impl Sidecar {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            artifact: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            seeds: Vec::new(),
            runs: Vec::new(),
        }
    }

    pub fn path_for(results: &Path) -> PathBuf {
        let mut name = results
            .file_name()
            .map(|n| n.to_os_string())
            .unwrap_or_default();
        name.push(".meta.json");
        results.with_file_name(name)
    }
}

pub fn write_sidecar(results: &Path, sidecar: &Sidecar) -> Result<PathBuf> {
    let path = Sidecar::path_for(results);
    let text = serde_json::to_string_pretty(sidecar).map_err(|e| Error::Format(e.to_string()))?;
    write_bytes(&path, text.as_bytes())?;
    Ok(path)
}

fn write_table<W: Write>(
    w: W,
    header: &[&str],
    rows: impl Iterator<Item = [String; 3]>,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// `t,n_p,n_e` rows.
pub fn write_trajectory(path: &Path, points: &[TrajectoryPoint]) -> Result<()> {
    let rows = points
        .iter()
        .map(|p| [fmt_float(p.t), fmt_float(p.n_p), fmt_float(p.n_e)]);
    write_table(create(path)?, &["t", "n_p", "n_e"], rows).map_err(csv_err(path))
}

/// `n_p,n_e,probability` rows for every grid state.
pub fn write_distribution(path: &Path, dist: &OracleDistribution) -> Result<()> {
    let rows = dist
        .rows()
        .map(|(p, e, x)| [p.to_string(), e.to_string(), fmt_float(x)]);
    write_table(create(path)?, &["n_p", "n_e", "probability"], rows).map_err(csv_err(path))
}
