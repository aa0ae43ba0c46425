//! Plain-text matrix serialization.
//!
//! Format: one header line `rows,cols`, then `rows` lines of `cols`
//! comma-separated values printed with 17 significant digits, enough to
//! round-trip any `f64` exactly.

use std::fmt::Write as _;

use nalgebra::DMatrix;

/// Round-trip-exact float formatting used across all text output.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{},{}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let mut first = true;
        for j in 0..m.ncols() {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{}", format_f64(m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<DMatrix<f64>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty matrix file")?;
    let mut dims = header.split(',');
    let rows: usize = dims
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| format!("bad header line {header:?}"))?;
    let cols: usize = dims
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| format!("bad header line {header:?}"))?;
    if dims.next().is_some() {
        return Err(format!("bad header line {header:?}"));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| format!("bad value {field:?} on data line {}", lineno + 1))?;
            data.push(v);
        }
    }
    if data.len() != rows * cols {
        return Err(format!(
            "expected {rows}x{cols} = {} values, found {}",
            rows * cols,
            data.len()
        ));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}
