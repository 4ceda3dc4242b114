//! Label files: one `index<TAB>cluster` line per index, or
//! `class<TAB>index<TAB>cluster` when indices come from several mode classes.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRecord {
    pub class: Option<String>,
    pub index: usize,
    pub cluster: usize,
}

pub fn write_labels<W: Write>(mut w: W, labels: &[usize]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        writeln!(w, "{i}\t{l}")?;
    }
    Ok(())
}

/// Writes labels of the embedded index space split back into classes.
/// `classes` holds `(name, size)` in embedding order.
pub fn write_class_labels<W: Write>(mut w: W, classes: &[(String, usize)], labels: &[usize]) -> Result<()> {
    let total: usize = classes.iter().map(|c| c.1).sum();
    if total != labels.len() {
        return Err(Error::LengthMismatch {
            expected: total,
            actual: labels.len(),
        });
    }
    let mut offset = 0;
    for (name, size) in classes {
        for i in 0..*size {
            writeln!(w, "{name}\t{i}\t{}", labels[offset + i])?;
        }
        offset += size;
    }
    Ok(())
}

pub fn read_label_records<R: BufRead>(r: R) -> Result<Vec<LabelRecord>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| parse_err(format!("bad integer {s:?}: {e}")))
        };
        let rec = match fields.as_slice() {
            [i, c] => LabelRecord {
                class: None,
                index: num(i)?,
                cluster: num(c)?,
            },
            [name, i, c] => LabelRecord {
                class: Some(name.to_string()),
                index: num(i)?,
                cluster: num(c)?,
            },
            _ => return Err(parse_err(format!("expected 2 or 3 fields, got {}", fields.len()))),
        };
        out.push(rec);
    }
    Ok(out)
}

/// Reads a label file into a flat vector. Records are ordered by class in
/// first-appearance order and then by index; every index of every class
/// must appear exactly once.
pub fn read_labels<R: BufRead>(r: R) -> Result<Vec<usize>> {
    let records = read_label_records(r)?;
    let mut classes: Vec<Option<String>> = Vec::new();
    let mut per_class: Vec<Vec<Option<usize>>> = Vec::new();
    for rec in records {
        let c = match classes.iter().position(|c| *c == rec.class) {
            Some(c) => c,
            None => {
                classes.push(rec.class.clone());
                per_class.push(Vec::new());
                classes.len() - 1
            }
        };
        let slot = &mut per_class[c];
        if slot.len() <= rec.index {
            slot.resize(rec.index + 1, None);
        }
        if slot[rec.index].replace(rec.cluster).is_some() {
            return Err(Error::InvalidEntry(format!("index {} labelled twice", rec.index)));
        }
    }
    let mut out = Vec::new();
    for (c, slot) in per_class.into_iter().enumerate() {
        for (i, l) in slot.into_iter().enumerate() {
            out.push(l.ok_or_else(|| {
                Error::InvalidEntry(format!("index {i} of class {:?} has no label", classes[c]))
            })?);
        }
    }
    Ok(out)
}
