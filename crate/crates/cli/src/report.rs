use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// JSON has no NaN; failed cells are written as null.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

pub const CSV_HEADER: [&str; 9] = ["experiment", "t", "N", "lhs_raw", "lhs_extrapolated", "lhs_err", "rhs", "abs_diff", "pass"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    #[serde(with = "nan_as_null")]
    pub t: f64,
    #[serde(rename = "N")]
    pub n_core: usize,
    #[serde(with = "nan_as_null")]
    pub lhs_raw: f64,
    #[serde(with = "nan_as_null")]
    pub lhs_extrapolated: f64,
    #[serde(with = "nan_as_null")]
    pub lhs_err: f64,
    #[serde(with = "nan_as_null")]
    pub rhs: f64,
    #[serde(with = "nan_as_null")]
    pub abs_diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub experiment: String,
    pub n: usize,
    pub fs: Vec<String>,
    pub gs: Vec<String>,
    pub tolerance: f64,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// 17 significant digits, enough to round-trip any double.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source: std::io::Error::other(e) }
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        for r in &self.rows {
            out.write_record([
                r.experiment.clone(),
                num(r.t),
                r.n_core.to_string(),
                num(r.lhs_raw),
                num(r.lhs_extrapolated),
                num(r.lhs_err),
                num(r.rhs),
                num(r.abs_diff),
                r.pass.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// One (x, y) series per curve: raw and extrapolated LHS per core
    /// degree, and the RHS, all against t.
    pub fn write_plot<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["curve", "x", "y"])?;
        let mut degrees: Vec<usize> = self.rows.iter().map(|r| r.n_core).collect();
        degrees.sort_unstable();
        degrees.dedup();
        for d in &degrees {
            let curves: [(&str, fn(&Row) -> f64); 2] = [("lhs_raw", |r| r.lhs_raw), ("lhs_extrapolated", |r| r.lhs_extrapolated)];
            for (name, get) in curves {
                for r in self.rows.iter().filter(|r| r.n_core == *d) {
                    out.write_record([format!("{name} N={d}"), num(r.t), num(get(r))])?;
                }
            }
        }
        if let Some(&d) = degrees.first() {
            for r in self.rows.iter().filter(|r| r.n_core == d) {
                out.write_record(["rhs".to_string(), num(r.t), num(r.rhs)])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Writes `<experiment>.csv|json` and `<experiment>_plot.csv` into `dir`.
    pub fn emit(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let main = dir.join(format!("{}.{}", self.experiment, if format == Format::Csv { "csv" } else { "json" }));
        let file = File::create(&main).map_err(io_err(&main))?;
        match format {
            Format::Csv => self.write_csv(file).map_err(|e| csv_err(&main, e))?,
            Format::Json => serde_json::to_writer_pretty(file, self).map_err(|e| CliError::Io {
                path: main.display().to_string(),
                source: std::io::Error::other(e),
            })?,
        }
        let plot = dir.join(format!("{}_plot.csv", self.experiment));
        let file = File::create(&plot).map_err(io_err(&plot))?;
        self.write_plot(file).map_err(|e| csv_err(&plot, e))?;
        Ok(vec![main, plot])
    }
}
