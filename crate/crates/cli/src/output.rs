//! Artifact plumbing shared by the commands: reproducibility headers and
//! CSV writers. Floats print in Rust's shortest round-trip form, so equal
//! runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
struct RunHeader<'a, C: Serialize> {
    command: &'a str,
    version: &'a str,
    seed: Option<u64>,
    config: &'a C,
    /// Abbreviated SHA-256 of the serialized config; identical runs share it.
    config_hash: String,
}

/// Stamp the output directory with the exact invocation, so every artifact
/// traces back to the run that made it.
pub fn write_header<C: Serialize>(
    out: &Path,
    command: &str,
    seed: Option<u64>,
    config: &C,
) -> Result<()> {
    let canonical = serde_json::to_string(config).context("serializing run config")?;
    let digest = Sha256::digest(canonical.as_bytes());
    let mut config_hash = String::with_capacity(16);
    for byte in &digest[..8] {
        write!(config_hash, "{byte:02x}").expect("writing to a string cannot fail");
    }
    let header = RunHeader {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config,
        config_hash,
    };
    let path = out.join("header.json");
    let text = serde_json::to_string_pretty(&header).context("serializing run header")?;
    fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Labeled-row matrix CSV: `label,prefix_1,…,prefix_k` per row.
pub fn write_labeled_matrix_csv(
    path: &Path,
    label_header: &str,
    labels: &[String],
    col_prefix: &str,
    ncols: usize,
    value: impl Fn(usize, usize) -> f64,
) -> Result<()> {
    let file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec![label_header.to_owned()];
    header.extend((1..=ncols).map(|k| format!("{col_prefix}_{k}")));
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(ncols + 1);
    for (row, label) in labels.iter().enumerate() {
        record.clear();
        record.push(label.clone());
        record.extend((0..ncols).map(|col| value(row, col).to_string()));
        w.write_record(&record)?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
}

/// Plain records CSV with a header row.
pub fn write_records_csv<I, R, F>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    F: AsRef<str>,
    R: IntoIterator<Item = F>,
{
    let file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().map(|f| f.as_ref().to_owned()))?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
}
