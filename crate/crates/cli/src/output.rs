use std::io::Write;
use std::path::{Path, PathBuf};

use cas_core::info::nats_to_bits;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(&path).map_err(|e| CliError::io(&path, e.error))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

pub fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| CliError::io(dir.join(name), std::io::Error::other(e)))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::io(dir.join(name), std::io::Error::other(e.to_string())))?;
    write_atomic(dir, name, &bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    /// Information, converted by `--bits`.
    Nats,
    Distortion,
    Power,
    Count,
    Flag,
}

#[derive(Debug, Clone, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub unit: String,
}

/// Headline numbers of a run, printed as a table and saved as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub mode: &'static str,
    pub units: &'static str,
    pub quantities: Vec<Quantity>,
    #[serde(skip)]
    bits: bool,
}

impl Summary {
    pub fn new(mode: &'static str, bits: bool) -> Self {
        Self {
            mode,
            units: if bits { "bits" } else { "nats" },
            quantities: Vec::new(),
            bits,
        }
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64, unit: Unit) {
        let (value, unit) = match unit {
            Unit::Nats if self.bits => (nats_to_bits(value), "bits"),
            Unit::Nats => (value, "nats"),
            Unit::Distortion => (value, ""),
            Unit::Power => (value, "power"),
            Unit::Count => (value, "count"),
            Unit::Flag => (value, "flag"),
        };
        self.quantities.push(Quantity {
            name: name.into(),
            value,
            unit: unit.to_string(),
        });
    }

    pub fn render(&self) -> String {
        let width = self.quantities.iter().map(|q| q.name.len()).max().unwrap_or(0).max(8);
        let mut out = format!("{:<width$}  {:>14}  unit\n", "quantity", "value");
        for q in &self.quantities {
            let value = if q.unit == "count" || q.unit == "flag" {
                format!("{}", q.value)
            } else {
                format!("{:.6}", q.value)
            };
            out.push_str(&format!("{:<width$}  {:>14}  {}\n", q.name, value, q.unit));
        }
        out
    }
}
