//! Report serialisation. Every float is written as `{:.16e}` (17 significant
//! digits) in both CSV and JSON so that outputs are reproducible byte for byte.

use std::path::Path;

use anyhow::{Context, Result};
use charmat::Cplx;
use nalgebra::DMatrix;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// A float serialised in fixed scientific notation; non-finite values become `null`.
#[derive(Debug, Clone, Copy)]
pub struct Sci(pub f64);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        RawValue::from_string(sci(self.0))
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

pub fn sci_vec(xs: &[f64]) -> Vec<Sci> {
    xs.iter().copied().map(Sci).collect()
}

/// Complex matrix split into real and imaginary parts, row-major.
#[derive(Debug, Serialize)]
pub struct ComplexMatrix {
    pub re: Vec<Vec<Sci>>,
    pub im: Vec<Vec<Sci>>,
}

impl From<&DMatrix<Cplx<f64>>> for ComplexMatrix {
    fn from(m: &DMatrix<Cplx<f64>>) -> Self {
        let part = |f: fn(&Cplx<f64>) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| Sci(f(&m[(i, j)]))).collect())
                .collect()
        };
        Self {
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(Sci),
    Flag(bool),
    Missing,
}

impl Cell {
    pub fn opt(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, |x| Cell::Num(Sci(x)))
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(Sci(x)) if x.is_finite() => sci(*x),
            Cell::Flag(b) => b.to_string(),
            _ => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(Sci(x))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => to_json(self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}
