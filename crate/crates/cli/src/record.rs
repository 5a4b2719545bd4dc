use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mbmlab::numeric::sha256_hex;
use serde::{Deserialize, Serialize};

use crate::args::Command;

pub const RUN_FILE: &str = "run.json";
pub const RUN_FORMAT_VERSION: u32 = 1;

/// What a command produced, before anything touches the disk.
#[derive(Debug, Default)]
pub struct Outcome {
    /// File name (relative to the output directory) and contents.
    pub outputs: Vec<(String, Vec<u8>)>,
    /// Input label (absolute path or table tag) and its digest.
    pub inputs: BTreeMap<String, String>,
    /// Printed on success.
    pub stdout: String,
}

impl Outcome {
    pub fn output(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.outputs.push((name.into(), bytes.into()));
    }

    pub fn input_file(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    fn output_digests(&self) -> BTreeMap<String, String> {
        self.outputs.iter().map(|(name, bytes)| (name.clone(), sha256_hex(bytes))).collect()
    }
}

/// The provenance record written as run.json.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub format_version: u32,
    pub library_version: String,
    pub cli_version: String,
    pub output_dir: PathBuf,
    pub config: Command,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// Writes every output and the run record into `dir`.
pub fn commit(dir: &Path, config: &Command, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, bytes) in &outcome.outputs {
        write_file(&dir.join(name), bytes)?;
    }
    let record = RunRecord {
        format_version: RUN_FORMAT_VERSION,
        library_version: mbmlab::VERSION.to_string(),
        cli_version: env!("CARGO_PKG_VERSION").to_string(),
        output_dir: dir.to_path_buf(),
        config: config.clone(),
        inputs: outcome.inputs.clone(),
        outputs: outcome.output_digests(),
    };
    let mut json = serde_json::to_string_pretty(&record)?;
    json.push('\n');
    write_file(&dir.join(RUN_FILE), json.as_bytes())
}

pub fn read_record(path: &Path) -> Result<RunRecord> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let record: RunRecord = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if record.format_version != RUN_FORMAT_VERSION {
        bail!("run record version {} is not supported (expected {RUN_FORMAT_VERSION})", record.format_version);
    }
    Ok(record)
}

/// Compares a fresh outcome with the record; on success restores any
/// output missing from the recorded directory.
pub fn verify(record: &RunRecord, outcome: &Outcome) -> Result<usize> {
    let mut problems = Vec::new();
    for (label, digest) in &record.inputs {
        match outcome.inputs.get(label) {
            Some(d) if d == digest => {}
            Some(_) => problems.push(format!("input changed: {label}")),
            None => problems.push(format!("input no longer used: {label}")),
        }
    }
    let fresh = outcome.output_digests();
    for (name, digest) in &record.outputs {
        match fresh.get(name) {
            Some(d) if d == digest => {}
            Some(_) => problems.push(format!("digest mismatch: {name}")),
            None => problems.push(format!("not produced: {name}")),
        }
    }
    for name in fresh.keys().filter(|n| !record.outputs.contains_key(*n)) {
        problems.push(format!("unexpected output: {name}"));
    }
    if !problems.is_empty() {
        bail!("reproduction failed:\n  {}", problems.join("\n  "));
    }
    fs::create_dir_all(&record.output_dir)?;
    for (name, bytes) in &outcome.outputs {
        let target = record.output_dir.join(name);
        if !target.exists() {
            write_file(&target, bytes)?;
        }
    }
    Ok(fresh.len())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
