//! File ingestion and emission: CSV in, JSON and TSV out.
//!
//! Every floating-point number is written with 17 significant digits so that
//! it parses back to the identical `f64`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::CliError;

/// `f64` in scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact JSON followed by a newline. Non-finite numbers become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// A TSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Tab-separated table with a header row.
pub fn to_tsv(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = header.join("\t");
    out.push('\n');
    for row in rows {
        for (k, cell) in row.iter().enumerate() {
            if k > 0 {
                out.push('\t');
            }
            match cell {
                Cell::Num(v) => out.push_str(&fmt_f64(*v)),
                Cell::Text(t) => out.push_str(t),
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_rows(path: &Path) -> Result<Vec<Vec<String>>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Input {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

/// Parses numeric rows, skipping a non-numeric first row as a header.
fn numeric_rows(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let rows = read_rows(path)?;
    let parse = |row: &[String]| row.iter().map(|c| c.parse::<f64>()).collect::<Result<Vec<_>, _>>();
    let mut out = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        match parse(row) {
            Ok(v) => out.push(v),
            Err(_) if k == 0 => {}
            Err(e) => {
                return Err(CliError::Input {
                    path: path.to_path_buf(),
                    message: format!("line {}: {e}", k + 1),
                })
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Input {
            path: path.to_path_buf(),
            message: "no numeric rows".into(),
        });
    }
    Ok(out)
}

/// One value per line (first column).
pub fn read_column(path: &Path) -> Result<Vec<f64>, CliError> {
    Ok(numeric_rows(path)?.into_iter().map(|r| r[0]).collect())
}

/// Sample points for box counting.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTable {
    pub dim: usize,
    pub coords: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

/// Coordinate columns, with the last column read as a weight when
/// `weighted` is set.
pub fn read_points(path: &Path, weighted: bool) -> Result<PointTable, CliError> {
    let rows = numeric_rows(path)?;
    let width = rows[0].len();
    if let Some(k) = rows.iter().position(|r| r.len() != width) {
        return Err(CliError::Input {
            path: path.to_path_buf(),
            message: format!("row {} has {} columns, expected {width}", k + 1, rows[k].len()),
        });
    }
    let dim = if weighted { width.saturating_sub(1) } else { width };
    if dim == 0 {
        return Err(CliError::Input {
            path: path.to_path_buf(),
            message: "no coordinate columns".into(),
        });
    }
    let coords = rows.iter().flat_map(|r| r[..dim].iter().copied()).collect();
    let weights = weighted.then(|| rows.iter().map(|r| r[dim]).collect());
    Ok(PointTable { dim, coords, weights })
}

/// Human-readable listing used in error messages.
pub fn list(values: &[f64]) -> String {
    let mut s = String::new();
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn json_numbers_use_seventeen_digits() {
        let json = to_json(&serde_json::json!({ "x": 0.1, "n": 3, "bad": f64::NAN }));
        assert_eq!(json, "{\"bad\":null,\"n\":3,\"x\":1.0000000000000001e-1}\n");
    }

    #[test]
    fn tsv_layout() {
        let t = to_tsv(&["a", "b"], &[vec![Cell::Num(0.5), "x".into()]]);
        assert_eq!(t, "a\tb\n5.0000000000000000e-1\tx\n");
    }
}
