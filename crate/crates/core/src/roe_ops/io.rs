//! Sparse triplet text format for block operators.
//!
//! ```text
//! # roelab block operator
//! d L N
//! periodic <0|1> ... (one flag per axis)
//! x y re im      (N*N lines per stored block, row-major inside the block)
//! ```
//!
//! Blocks appear in increasing `(x, y)` order. Floats use Rust's shortest
//! round-trip formatting, so writing and reading back is exact. Positions
//! are not stored: the reader rebuilds the lattice geometry of the window.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;

use super::{Block, BlockOperator};
use crate::error::{Error, Result};
use crate::lattice::{Geometry, Window};

pub fn write_operator(t: &BlockOperator, mut out: impl Write) -> Result<()> {
    let g = t.geometry();
    let w = g.window();
    let l = w.half_width();
    if w.half_widths().iter().any(|&h| h != l) {
        return Err(Error::invalid("only cubic windows can be written"));
    }
    let n = t.internal_dim();
    writeln!(out, "# roelab block operator")?;
    writeln!(out, "{} {} {}", w.dim(), l, n)?;
    let flags: Vec<&str> = g.periodic().iter().map(|&p| if p { "1" } else { "0" }).collect();
    writeln!(out, "periodic {}", flags.join(" "))?;
    for (&(x, y), b) in t.blocks() {
        for i in 0..n {
            for j in 0..n {
                let z = b[(i, j)];
                writeln!(out, "{x} {y} {} {}", z.re, z.im)?;
            }
        }
    }
    Ok(())
}

fn parse_err(line: usize, detail: impl Into<String>) -> Error {
    Error::Parse { line, detail: detail.into() }
}

pub fn read_operator(input: impl BufRead) -> Result<BlockOperator> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next_content = || -> Result<Option<(usize, String)>> {
        for (no, l) in lines.by_ref() {
            let l = l?;
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(Some((no, t.to_string())));
        }
        Ok(None)
    };
    let (hno, header) = next_content()?.ok_or_else(|| parse_err(0, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(hno, "header must be `d L N`"));
    }
    let num = |s: &str| s.parse::<i64>().map_err(|e| parse_err(hno, e.to_string()));
    let (d, l, n) = (num(fields[0])?, num(fields[1])?, num(fields[2])?);
    if d < 1 || n < 1 {
        return Err(parse_err(hno, "d and N must be positive"));
    }
    let (d, n) = (d as usize, n as usize);
    let (pno, pline) = next_content()?.ok_or_else(|| parse_err(hno, "missing periodic line"))?;
    let mut pf = pline.split_whitespace();
    if pf.next() != Some("periodic") {
        return Err(parse_err(pno, "expected `periodic` flags"));
    }
    let periodic = pf
        .map(|f| match f {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(parse_err(pno, format!("bad periodic flag `{other}`"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    let window = Window::new(d, l).map_err(|e| parse_err(hno, e.to_string()))?;
    let geometry = Arc::new(Geometry::lattice(window, periodic).map_err(|e| parse_err(pno, e.to_string()))?);
    let sites = geometry.len();

    let mut blocks: BTreeMap<(usize, usize), Block> = BTreeMap::new();
    let mut pending: Option<(usize, usize, Vec<Complex64>)> = None;
    while let Some((no, line)) = next_content()? {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(parse_err(no, "entry must be `x y re im`"));
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|e| parse_err(no, e.to_string()));
        let val = |s: &str| s.parse::<f64>().map_err(|e| parse_err(no, e.to_string()));
        let (x, y) = (idx(f[0])?, idx(f[1])?);
        if x >= sites || y >= sites {
            return Err(parse_err(no, format!("site index out of range (window has {sites} sites)")));
        }
        let z = Complex64::new(val(f[2])?, val(f[3])?);
        let (px, py, mut vals) = pending.take().unwrap_or((x, y, Vec::with_capacity(n * n)));
        if (px, py) != (x, y) {
            return Err(parse_err(no, format!("block ({px},{py}) has fewer than {} entries", n * n)));
        }
        vals.push(z);
        if vals.len() == n * n {
            if blocks.insert((x, y), Block::from_row_slice(n, n, &vals)).is_some() {
                return Err(parse_err(no, format!("duplicate block ({x},{y})")));
            }
        } else {
            pending = Some((x, y, vals));
        }
    }
    if let Some((x, y, _)) = pending {
        return Err(parse_err(0, format!("truncated block ({x},{y})")));
    }
    let mut op = BlockOperator::zero(geometry, n);
    for ((x, y), b) in blocks {
        op.set_block(x, y, b)?;
    }
    if op.hermitian_deviation() <= super::HERMITIAN_TOL {
        op.mark_hermitian()?;
    }
    Ok(op)
}
