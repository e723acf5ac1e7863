use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// Pretty JSON to `path`, or to stdout when no path is given.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => {
            let mut f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            writeln!(f, "{text}")?;
        }
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(())
}

/// A header and string records, written only when a CSV path was requested.
pub struct Table {
    header: Vec<&'static str>,
    records: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), records: Vec::new() }
    }

    pub fn push<I, S>(&mut self, record: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.records.push(record.into_iter().map(|s| s.to_string()).collect());
    }

    pub fn write(&self, path: Option<&Path>) -> Result<()> {
        let Some(path) = path else {
            return Ok(());
        };
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.header)?;
        for r in &self.records {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}
