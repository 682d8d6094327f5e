//! Tab-separated tuple files: one tuple per line, an optional trailing
//! numeric value column for valued contexts.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use polyclust_core::{ContextBuilder, PolyContext};

use crate::{Error, Result};

pub fn read_tsv(path: impl AsRef<Path>, arity: usize, valued: bool) -> Result<PolyContext> {
    let path = path.as_ref();
    let file = File::open(path).map_err(Error::file(path))?;
    read_tsv_from(BufReader::new(file), arity, valued)
}

/// Blank lines are skipped; errors carry 1-based line numbers.
pub fn read_tsv_from(reader: impl BufRead, arity: usize, valued: bool) -> Result<PolyContext> {
    let mut builder = ContextBuilder::new(arity)?;
    if valued {
        builder = builder.valued();
    }
    let expected = arity + usize::from(valued);
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let mut fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != expected {
            return Err(Error::parse(
                line_no,
                format!("expected {expected} tab-separated fields, found {}", fields.len()),
            ));
        }
        let value = if valued {
            let raw = fields.pop().expect("value column").trim();
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Some(v),
                _ => return Err(Error::parse(line_no, format!("value {raw:?} is not a finite number"))),
            }
        } else {
            None
        };
        builder
            .push(&fields, value)
            .map_err(|source| Error::Row { line: line_no, source })?;
    }
    Ok(builder.build())
}

pub fn write_tsv(ctx: &PolyContext, writer: impl Write) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let values = ctx.values();
    for (pos, t) in ctx.tuples().iter().enumerate() {
        for (k, &id) in t.iter().enumerate() {
            let name = ctx.dictionary(k).name(id).expect("interned id");
            if name.contains(['\t', '\n', '\r']) {
                return Err(Error::Usage(format!(
                    "entity {name:?} cannot be written as a TSV field"
                )));
            }
            if k > 0 {
                w.write_all(b"\t")?;
            }
            w.write_all(name.as_bytes())?;
        }
        if let Some(values) = values {
            write!(w, "\t{}", values[pos])?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tsv_file(ctx: &PolyContext, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(Error::file(path))?;
    write_tsv(ctx, file)
}
