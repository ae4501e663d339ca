//! Plain-text inputs and CSV outputs.
//!
//! Samples are one decimal value per line (blank lines and `#` comments are
//! skipped). Constraint matrices are CSV with a header row naming the
//! columns. Every CSV written here has a header, `.` decimals and LF line
//! endings.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::data::{ConstraintSet, Sample};
use crate::error::{Error, Result};
use crate::measure::InformedMeasure;
use crate::montecarlo::{Distribution, MedianPathRow};

pub fn parse_sample<R: BufRead>(reader: R) -> Result<Sample> {
    let mut values = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: '{t}' is not a number", lineno + 1)))?;
        values.push(v);
    }
    Sample::new(values)
}

pub fn read_sample(path: &Path) -> Result<Sample> {
    let file = std::fs::File::open(path)?;
    parse_sample(std::io::BufReader::new(file))
}

/// Reads an `n × m` matrix from CSV with a header; returns the column names
/// and an uncentered set with the given target.
pub fn parse_constraint_csv<R: Read>(reader: R, target: &[f64]) -> Result<(Vec<String>, ConstraintSet)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("row {}: '{s}' is not a number", i + 1))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if names.len() != target.len() {
        return Err(Error::InvalidInput(format!(
            "constraint file has {} columns but target has {} entries",
            names.len(),
            target.len()
        )));
    }
    Ok((names, ConstraintSet::from_rows(&rows, target.to_vec())?))
}

pub fn read_constraint_csv(path: &Path, target: &[f64]) -> Result<(Vec<String>, ConstraintSet)> {
    parse_constraint_csv(std::fs::File::open(path)?, target)
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("'{t}' is not a number"))))
        .collect()
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// `index,x,<one column per weight vector>`.
pub fn write_weights_csv<W: Write>(
    out: W,
    x: Option<&[f64]>,
    columns: &[(&str, &[f64])],
) -> Result<()> {
    let mut w = writer(out);
    let mut header = vec!["index".to_string(), "x".to_string()];
    header.extend(columns.iter().map(|(name, _)| name.to_string()));
    w.write_record(&header)?;
    let n = columns.first().map_or(0, |c| c.1.len());
    for i in 0..n {
        let mut row = vec![i.to_string(), x.map_or(String::new(), |x| x[i].to_string())];
        row.extend(columns.iter().map(|(_, c)| c[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `t,F_n,F_n_I,F` over the grid; `F` is empty without a reference law.
pub fn write_ecdf_csv<W: Write>(
    out: W,
    grid: &[f64],
    informed: &InformedMeasure,
    reference: Option<Distribution>,
) -> Result<()> {
    let classical = InformedMeasure::uniform(informed.sample().clone());
    let mut w = writer(out);
    w.write_record(["t", "F_n", "F_n_I", "F"])?;
    for &t in grid {
        w.write_record([
            t.to_string(),
            classical.ecdf(t).to_string(),
            informed.ecdf(t).to_string(),
            reference.map_or(String::new(), |d| d.cdf(t).to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `n,classical,informed`; `informed` is empty where undefined.
pub fn write_median_path_csv<W: Write>(out: W, rows: &[MedianPathRow]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["n", "classical", "informed"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.classical.to_string(),
            r.informed.map_or(String::new(), |v| v.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
    }
}
