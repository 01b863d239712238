//! CSV and JSON writers for study results.
//!
//! CSV output starts with a `# generated_unix=<seconds>` line; everything
//! after it depends only on the rows, so two runs of the same study produce
//! identical bytes apart from that line.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn write_csv_stamped<W: Write, T: Serialize>(mut w: W, rows: &[T], stamp: u64) -> Result<()> {
    writeln!(w, "# generated_unix={stamp}")?;
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    write_csv_stamped(w, rows, unix_now())
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Drop the leading timestamp line of a CSV produced here.
pub fn strip_stamp(csv: &str) -> &str {
    match csv.split_once('\n') {
        Some((first, rest)) if first.starts_with("# generated_unix=") => rest,
        _ => csv,
    }
}
