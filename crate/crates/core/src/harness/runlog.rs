//! CSV run logs.
//!
//! A log is a block of `# ` comment lines followed by a header row and one
//! row per iteration. Columns are fixed: see [`RUN_COLUMNS`]. Floats are
//! written with 17 significant digits so they parse back bit-for-bit.

use std::io::{Read, Write};

use crate::safe::IterationRecord;
use crate::{Result, SpgError};

pub const RUN_COLUMNS: [&str; 8] = [
    "iteration",
    "batch_size",
    "alpha",
    "grad_norm",
    "J_hat",
    "guaranteed_improvement",
    "cumulative_trajectories",
    "stalled",
];

/// `x` with 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `x` with `digits` significant digits, keeping trailing zeros
/// (like C's `%#.*g`).
pub fn format_significant(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci[sci.find('e').map_or(sci.len(), |i| i + 1)..].parse().unwrap_or(0);
    if exp < -5 || exp >= digits as i32 {
        sci
    } else {
        format!("{:.*}", (digits as i32 - 1 - exp) as usize, x)
    }
}

pub(crate) fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub(crate) fn write_preamble<W: Write>(w: &mut W, lines: &[String]) -> Result<()> {
    for line in lines {
        for part in line.lines() {
            if part.is_empty() {
                writeln!(w, "#")?;
            } else {
                writeln!(w, "# {part}")?;
            }
        }
    }
    Ok(())
}

/// Writes `preamble` as comment lines, then the header and one row per record.
pub fn write_run_log<W: Write>(mut w: W, preamble: &[String], records: &[IterationRecord]) -> Result<()> {
    write_preamble(&mut w, preamble)?;
    let mut out = csv_writer(w);
    out.write_record(RUN_COLUMNS)?;
    for r in records {
        out.write_record([
            r.iteration.to_string(),
            r.batch_size.to_string(),
            format_float(r.alpha),
            format_float(r.grad_norm),
            format_float(r.j_hat),
            format_float(r.guaranteed_improvement),
            r.cumulative_trajectories.to_string(),
            r.stalled.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a log written by [`write_run_log`], checking the header.
pub fn read_run_log<R: Read>(r: R) -> Result<Vec<IterationRecord>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let header = reader.headers()?.clone();
    if header.iter().ne(RUN_COLUMNS.iter().copied()) {
        return Err(SpgError::config(format!("unexpected run log header: {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let bad = |i: usize| SpgError::config(format!("bad {} value {:?}", RUN_COLUMNS[i], field(i)));
        let int = |i: usize| field(i).parse::<usize>().map_err(|_| bad(i));
        let float = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        records.push(IterationRecord {
            iteration: int(0)?,
            batch_size: int(1)?,
            alpha: float(2)?,
            grad_norm: float(3)?,
            j_hat: float(4)?,
            guaranteed_improvement: float(5)?,
            cumulative_trajectories: int(6)?,
            stalled: field(7).parse().map_err(|_| bad(7))?,
        });
    }
    Ok(records)
}
