use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Full-precision decimal with a fixed number of significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Short form for grid coordinates such as SNR points.
pub fn coord(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

pub fn bits(label: u32, width: u32) -> String {
    format!("{label:0w$b}", w = width as usize)
}

/// Output target opened before any computation so that an unwritable path
/// fails early.
pub enum Sink {
    Stdout,
    File(PathBuf, File),
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Sink::Stdout),
            Some(p) => {
                let f = File::create(p).with_context(|| format!("cannot write output file {}", p.display()))?;
                Ok(Sink::File(p.to_path_buf(), f))
            }
        }
    }

    pub fn write_all(self, bytes: &[u8]) -> Result<()> {
        match self {
            Sink::Stdout => match io::stdout().lock().write_all(bytes) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                other => other.context("cannot write to stdout"),
            },
            Sink::File(p, mut f) => f
                .write_all(bytes)
                .with_context(|| format!("cannot write output file {}", p.display())),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Sink::Stdout => "stdout".into(),
            Sink::File(p, _) => p.display().to_string(),
        }
    }
}

/// CSV with `#` metadata lines and a header row.
pub struct Table {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(command: &str, header: &[&str]) -> Self {
        Self {
            meta: vec![("command".into(), command.into())],
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }

    pub fn write(&self, sink: Sink) -> Result<()> {
        sink.write_all(&self.to_bytes()?)
    }
}
