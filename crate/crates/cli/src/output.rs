//! CSV output with a leading provenance comment.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn open_sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Resolved run configuration, written as the first line of every CSV.
#[derive(Debug, Clone, Default)]
pub struct RunRecord {
    command: String,
    pairs: Vec<(String, String)>,
}

impl RunRecord {
    pub fn new(command: &str) -> Self {
        RunRecord { command: command.into(), pairs: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        // keep values on one line and free of the separator
        let v = value.to_string().replace(['\n', '\r'], " ").replace(' ', "_");
        self.pairs.push((key.into(), v));
        self
    }

    pub fn line(&self) -> String {
        let mut s = format!("# fracgrav {}", self.command);
        for (k, v) in &self.pairs {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }
}

/// Writes the comment line, then hands back a CSV writer on the same sink.
pub fn csv_writer(mut sink: Box<dyn Write>, record: &RunRecord, header: &[&str]) -> CliResult<csv::Writer<Box<dyn Write>>> {
    writeln!(sink, "{}", record.line())?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(header)?;
    Ok(w)
}

/// Shortest round-trip scientific form.
pub fn sci(x: f64) -> String {
    format!("{x:e}")
}
