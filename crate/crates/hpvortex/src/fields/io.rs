//! Flat field layouts: a header `(kind, L, n)` followed by row-major values.

use std::io::{BufRead, Read, Write};

use super::field::ScalarField;
use super::grid::{DomainKind, Grid2D};
use crate::error::{Error, Result};
use crate::scalar::{FieldValue, Real};

const MAGIC: &[u8; 4] = b"HPVF";

fn kind_code(k: DomainKind) -> u8 {
    match k {
        DomainKind::Half => 0,
        DomainKind::Whole => 1,
    }
}

fn kind_from(code: u8) -> Result<DomainKind> {
    match code {
        0 => Ok(DomainKind::Half),
        1 => Ok(DomainKind::Whole),
        c => Err(Error::Format(format!("unknown domain code {c}"))),
    }
}

pub fn write_binary<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>, mut out: impl Write) -> Result<()> {
    let g = f.grid();
    out.write_all(MAGIC)?;
    out.write_all(&[kind_code(g.kind()), V::IS_COMPLEX as u8])?;
    out.write_all(&g.half_width().as_f64().to_le_bytes())?;
    out.write_all(&(g.n() as u64).to_le_bytes())?;
    for v in f.values() {
        out.write_all(&v.re().as_f64().to_le_bytes())?;
        if V::IS_COMPLEX {
            out.write_all(&v.im().as_f64().to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_binary<T: Real, V: FieldValue<T>>(mut r: impl Read) -> Result<ScalarField<T, V>> {
    let mut head = [0u8; 6];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let kind = kind_from(head[4])?;
    if (head[5] == 1) != V::IS_COMPLEX {
        return Err(Error::Format("value type mismatch".into()));
    }
    let l = read_f64(&mut r)?;
    let mut nb = [0u8; 8];
    r.read_exact(&mut nb)?;
    let n = u64::from_le_bytes(nb) as usize;
    let grid = Grid2D::new(kind, T::lit(l), n)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = T::lit(read_f64(&mut r)?);
        let im = if V::IS_COMPLEX { T::lit(read_f64(&mut r)?) } else { T::zero() };
        values.push(V::from_parts(re, im));
    }
    ScalarField::from_vec(grid, values)
}

/// Text layout: header line `kind,L,n`, then one value (`re` or `re,im`) per line.
pub fn write_csv<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>, mut out: impl Write) -> Result<()> {
    let g = f.grid();
    writeln!(out, "{},{:?},{}", g.kind().as_str(), g.half_width().as_f64(), g.n())?;
    for v in f.values() {
        if V::IS_COMPLEX {
            writeln!(out, "{:?},{:?}", v.re().as_f64(), v.im().as_f64())?;
        } else {
            writeln!(out, "{:?}", v.re().as_f64())?;
        }
    }
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{s:?}: {e}")))
}

pub fn read_csv<T: Real, V: FieldValue<T>>(r: impl BufRead) -> Result<ScalarField<T, V>> {
    let mut lines = r.lines();
    let head = lines.next().ok_or_else(|| Error::Format("empty input".into()))??;
    let parts: Vec<&str> = head.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Format(format!("bad header {head:?}")));
    }
    let kind = match parts[0].trim() {
        "half" => DomainKind::Half,
        "whole" => DomainKind::Whole,
        k => return Err(Error::Format(format!("unknown domain {k:?}"))),
    };
    let l = parse_f64(parts[1])?;
    let n: usize = parts[2].trim().parse().map_err(|e| Error::Format(format!("{e}")))?;
    let grid = Grid2D::new(kind, T::lit(l), n)?;
    let mut values = Vec::with_capacity(grid.len());
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let re = parse_f64(it.next().unwrap_or(""))?;
        let im = match it.next() {
            Some(s) => parse_f64(s)?,
            None => 0.0,
        };
        values.push(V::from_parts(T::lit(re), T::lit(im)));
    }
    ScalarField::from_vec(grid, values)
}
