//! Binary field snapshots.
//!
//! A record is the ASCII header `fracmhd-field v1 d=<d> n=<n>\n` followed by
//! `n^d` little-endian `(f32 re, f32 im)` pairs in spectral storage order.
//! Vector fields are written as one record per component.

use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex64;

use super::field::{SpectralField, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};

const MAGIC: &str = "fracmhd-field v1";

pub fn write_field<W: Write>(out: &mut W, f: &SpectralField) -> Result<()> {
    let g = f.grid();
    writeln!(out, "{MAGIC} d={} n={}", g.d(), g.n())?;
    let mut buf = Vec::with_capacity(8 * f.coeffs().len());
    for c in f.coeffs() {
        buf.extend_from_slice(&(c.re as f32).to_le_bytes());
        buf.extend_from_slice(&(c.im as f32).to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn write_fields<W: Write>(out: &mut W, fields: &[&VectorField]) -> Result<()> {
    for v in fields {
        for c in v.components() {
            write_field(out, c)?;
        }
    }
    Ok(())
}

/// Read every record until end of input.
pub fn read_fields<R: Read>(input: R) -> Result<Vec<SpectralField>> {
    let mut reader = BufReader::new(input);
    let mut out = Vec::new();
    loop {
        let mut header = String::new();
        if reader.read_line(&mut header)? == 0 {
            break;
        }
        let grid = parse_header(header.trim_end_matches('\n'))?;
        let mut raw = vec![0u8; 8 * grid.len()];
        reader
            .read_exact(&mut raw)
            .map_err(|_| Error::Snapshot("truncated coefficient data".into()))?;
        let coeffs = raw
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
                Complex64::new(re as f64, im as f64)
            })
            .collect();
        out.push(SpectralField::from_coeffs(grid, coeffs)?);
    }
    Ok(out)
}

/// Read `count` vector fields written with [`write_fields`].
///
/// Values pass through `f32`, so the divergence is recomputed after a Leray
/// projection to restore the solenoidal certificate.
pub fn read_vector_fields<R: Read>(input: R, count: usize) -> Result<Vec<VectorField>> {
    let parts = read_fields(input)?;
    let d = parts
        .first()
        .map(|p| p.grid().d())
        .ok_or_else(|| Error::Snapshot("no records".into()))?;
    if parts.len() != count * d {
        return Err(Error::Snapshot(format!(
            "expected {} records, found {}",
            count * d,
            parts.len()
        )));
    }
    let mut it = parts.into_iter();
    (0..count)
        .map(|_| VectorField::new(it.by_ref().take(d).collect()))
        .collect()
}

fn parse_header(line: &str) -> Result<Grid> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Snapshot(format!("bad header {line:?}")))?;
    let mut d = None;
    let mut n = None;
    for tok in rest.split_whitespace() {
        match tok.split_once('=') {
            Some(("d", v)) => d = v.parse().ok(),
            Some(("n", v)) => n = v.parse().ok(),
            _ => return Err(Error::Snapshot(format!("unexpected token {tok:?}"))),
        }
    }
    match (d, n) {
        (Some(d), Some(n)) => Grid::new(d, n),
        _ => Err(Error::Snapshot(format!("header missing d or n: {line:?}"))),
    }
}
