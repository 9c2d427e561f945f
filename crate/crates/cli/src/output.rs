//! Atomic output: everything is rendered to memory first, then written to a
//! temporary file in the destination directory and renamed into place, so a
//! failed command never leaves a partial file behind.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

pub const SCHEMA: &str = "dmrg-lab/v1";

/// Wraps a payload with the schema tag as its first key.
#[derive(Serialize)]
pub struct Versioned<'a, T: Serialize> {
    pub schema: &'static str,
    #[serde(flatten)]
    pub body: &'a T,
}

pub fn json<T: Serialize>(body: &T) -> std::io::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(&Versioned {
        schema: SCHEMA,
        body,
    })?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn csv_rows<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> std::io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

/// Writes to `path` atomically, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> std::io::Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}

/// JSON has no infinity; infinite values travel as the string `"inf"`.
#[derive(Serialize)]
#[serde(untagged)]
pub enum Real {
    Finite(f64),
    Text(&'static str),
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        if x == f64::INFINITY {
            Real::Text("inf")
        } else if x == f64::NEG_INFINITY {
            Real::Text("-inf")
        } else if x.is_nan() {
            Real::Text("nan")
        } else {
            Real::Finite(x)
        }
    }
}
