//! Reports: per-check verdicts, a digest that ignores timings, atomic writes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use casimir_core::models::family::Check;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub args: Vec<String>,
    pub seed: u64,
    pub status: String,
    pub checks: Vec<Check>,
    pub result: Value,
    pub notes: Vec<String>,
    pub timings: BTreeMap<String, f64>,
    pub digest: String,
}

#[derive(Serialize)]
struct Stable<'a> {
    command: &'a str,
    args: &'a [String],
    seed: u64,
    status: &'a str,
    checks: &'a [Check],
    result: &'a Value,
    notes: &'a [String],
}

impl Report {
    pub fn new(command: &str, args: Vec<String>, seed: u64) -> Self {
        Report {
            command: command.to_string(),
            args,
            seed,
            status: String::new(),
            checks: Vec::new(),
            result: Value::Null,
            notes: Vec::new(),
            timings: BTreeMap::new(),
            digest: String::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// Sets the status and the SHA-256 digest of everything except timings.
    pub fn seal(&mut self) {
        self.status = if self.passed() { "pass" } else { "fail" }.to_string();
        let stable = Stable {
            command: &self.command,
            args: &self.args,
            seed: self.seed,
            status: &self.status,
            checks: &self.checks,
            result: &self.result,
            notes: &self.notes,
        };
        let bytes = serde_json::to_vec(&stable).expect("report serializes");
        self.digest = hex::encode(Sha256::digest(&bytes));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}
