//! Plain-text matrix format used for test fixtures.
//!
//! ```text
//! dims: A=2 B=2
//! 5e-1+0e0j 0e0+0e0j ...
//! ...
//! ```
//! One line per row, whitespace-separated `re+imj` entries. Square operators
//! only; the header lists labels and dimensions in tensor order.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use super::dense::{c64, DenseOperator, C64};
use super::dims::SystemDims;
use crate::error::{Error, Result};

pub fn write_operator<W: Write>(op: &DenseOperator, mut w: W) -> Result<()> {
    if !op.is_square() {
        return Err(Error::DimensionMismatch(
            "text format holds square operators only".into(),
        ));
    }
    writeln!(w, "dims: {}", op.dims())?;
    let m = op.matrix();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format_entry(m[(r, c)])).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn read_operator<R: BufRead>(r: R) -> Result<DenseOperator> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty input".into()))??;
    let decl = header
        .trim()
        .strip_prefix("dims:")
        .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))?;
    let mut systems = Vec::new();
    for tok in decl.split_whitespace() {
        let (label, dim) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad subsystem `{tok}`")))?;
        let dim: usize = dim
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension in `{tok}`")))?;
        systems.push((label.to_string(), dim));
    }
    let dims = SystemDims::new(systems)?;
    let n = dims.total();
    let mut entries = Vec::with_capacity(n * n);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<C64> = line
            .split_whitespace()
            .map(parse_entry)
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(Error::Parse(format!("row has {} entries, expected {n}", row.len())));
        }
        entries.extend(row);
    }
    if entries.len() != n * n {
        return Err(Error::Parse(format!(
            "found {} rows, expected {n}",
            entries.len() / n.max(1)
        )));
    }
    DenseOperator::square(DMatrix::from_row_slice(n, n, &entries), dims)
}

fn format_entry(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:e}{}{:e}j", z.re, sign, z.im.abs())
}

fn parse_entry(tok: &str) -> Result<C64> {
    let bad = || Error::Parse(format!("bad entry `{tok}`"));
    let body = tok.strip_suffix('j').ok_or_else(bad)?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].parse().map_err(|_| bad())?;
    Ok(c64(re, im))
}
