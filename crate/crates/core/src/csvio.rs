//! CSV emission with a versioned schema comment on the first line.
//!
//! Floats are written in shortest round-trip form, so the same rows always
//! produce the same bytes.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Result;

/// Writes `# <schema>` followed by a header row and one record per item.
pub fn write_csv<W: Write, T: Serialize>(mut out: W, schema: &str, rows: &[T]) -> Result<()> {
    writeln!(out, "# {schema}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_csv`], skipping `#` comment lines.
pub fn read_csv<R: Read, T: DeserializeOwned>(input: R) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

/// First line of a CSV written by [`write_csv`], without the `# ` prefix.
pub fn schema_of(text: &str) -> Option<&str> {
    text.lines().next()?.strip_prefix("# ")
}
