//! Plain-text matrix format: a `rows cols` header followed by one line per row.
//!
//! Values are written with 17 significant digits so a write/read cycle is exact.
//! The reader accepts any whitespace layout as long as the value count matches.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{from_row_major, Matrix};

pub fn write_matrix<W: Write>(mut w: W, m: &Matrix) -> Result<()> {
    writeln!(w, "{} {}", m.nrows(), m.ncols())?;
    let mut line = String::new();
    for i in 0..m.nrows() {
        line.clear();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{:.16e}", m[(i, j)]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        let tok = tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what} in header")))?;
        tok.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad {what} '{tok}'")))
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    if rows == 0 || cols == 0 {
        return Err(Error::Parse(format!("matrix must be non-empty, got {rows}x{cols}")));
    }
    let values = tokens
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad value '{t}'"))))
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} values for {rows}x{cols}, found {}",
            rows * cols,
            values.len()
        )));
    }
    from_row_major(rows, cols, &values)
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<Matrix> {
    let mut s = String::new();
    r.read_to_string(&mut s)?;
    parse_matrix(&s)
}

pub fn load_matrix(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn save_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let mut buf = Vec::new();
    write_matrix(&mut buf, m)?;
    fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = Matrix::from_row_slice(2, 3, &[0.1, -1.0 / 3.0, 1e-300, 2.5e17, -0.0, 7.0]);
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        let back = read_matrix(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn reader_accepts_loose_whitespace() {
        let m = parse_matrix("2 2\n1 2\t3\n\n  4  \n").unwrap();
        assert_eq!(m, Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
    }

    #[test]
    fn reader_rejects_bad_input() {
        assert!(parse_matrix("2 2\n1 2 3").is_err());
        assert!(parse_matrix("2 1\n1 NaN").is_err());
        assert!(parse_matrix("1 1\nx").is_err());
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("0 3").is_err());
    }
}
