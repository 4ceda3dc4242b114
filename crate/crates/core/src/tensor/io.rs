//! Coordinate text format.
//!
//! ```text
//! # comment
//! m d1 d2 ... dm
//! i1 i2 ... im w
//! ```
//!
//! Indices are zero-based unless [`IndexBase::One`] is requested.

use std::io::{BufRead, Write};

use super::{SparseTensor, TensorBuilder};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexBase {
    #[default]
    Zero,
    One,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn load_coordinate<R: BufRead>(reader: R, base: IndexBase) -> Result<SparseTensor> {
    let shift = match base {
        IndexBase::Zero => 0,
        IndexBase::One => 1,
    };
    let mut builder: Option<TensorBuilder> = None;
    let mut index = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();

        let Some(b) = builder.as_mut() else {
            let nums = fields
                .iter()
                .map(|f| f.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| parse_err(lineno, format!("bad header: {e}")))?;
            let (&m, dims) = nums
                .split_first()
                .ok_or_else(|| parse_err(lineno, "empty header"))?;
            if m < 2 || dims.len() != m {
                return Err(parse_err(
                    lineno,
                    format!("header declares {m} modes but lists {} dimensions", dims.len()),
                ));
            }
            builder = Some(TensorBuilder::new(dims.to_vec()));
            continue;
        };

        let m = b.dims().len();
        if fields.len() != m + 1 {
            return Err(parse_err(lineno, format!("expected {} fields, found {}", m + 1, fields.len())));
        }
        index.clear();
        for (mode, f) in fields[..m].iter().enumerate() {
            let raw: usize = f
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad index '{f}' in mode {mode}")))?;
            let dim = b.dims()[mode];
            if raw < shift || raw - shift >= dim {
                return Err(Error::IndexOutOfRange {
                    line: lineno,
                    mode,
                    index: raw,
                    dim,
                });
            }
            index.push(raw - shift);
        }
        let weight: f64 = fields[m]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad weight '{}'", fields[m])))?;
        if !weight.is_finite() {
            return Err(parse_err(lineno, format!("weight {weight} is not finite")));
        }
        if weight < 0.0 {
            return Err(Error::NegativeWeight { line: lineno, weight });
        }
        b.push(&index, weight).map_err(|e| parse_err(lineno, e.to_string()))?;
    }

    builder
        .map(TensorBuilder::build)
        .ok_or_else(|| parse_err(0, "missing header line"))
}

pub fn write_coordinate<W: Write>(t: &SparseTensor, mut out: W) -> Result<()> {
    write!(out, "{}", t.order())?;
    for d in t.dims() {
        write!(out, " {d}")?;
    }
    writeln!(out)?;
    for (idx, w) in t.iter() {
        for i in idx {
            write!(out, "{i} ")?;
        }
        writeln!(out, "{w}")?;
    }
    Ok(())
}
