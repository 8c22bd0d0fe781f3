//! Run manifests: one text file per command recording the invocation,
//! a digest of the effective configuration (seeds included), the input
//! and output artifacts with their hashes, and wall-clock timings.
//!
//! Everything above the timing lines is a pure function of the
//! invocation, so the config digest is stable across reruns; timings are
//! wall-clock and sit on clearly labeled trailing lines. Data outputs
//! (CSV, RTF1, RTM1, SVG) are byte-reproducible; the manifest is the one
//! file that is not.

use std::fmt::Display;
use std::path::Path;
use std::time::Duration;

use cctp_core::io::atomic_write;
use cctp_core::Result;
use sha2::{Digest, Sha256};

pub struct Manifest {
    tool: &'static str,
    command: String,
    config: Vec<(String, String)>,
    inputs: Vec<(String, String, u64)>,
    outputs: Vec<(String, String, u64)>,
    timings: Vec<(String, Duration)>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

fn file_entry(path: &Path) -> Result<(String, String, u64)> {
    let bytes = std::fs::read(path)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok((name, sha256_hex(&bytes), bytes.len() as u64))
}

impl Manifest {
    pub fn new(tool: &'static str) -> Self {
        let command = std::env::args().collect::<Vec<_>>().join(" ");
        Manifest {
            tool,
            command,
            config: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl Display) {
        self.config.push((key.to_string(), value.to_string()));
    }

    /// Records an input artifact by content hash.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        let entry = file_entry(path)?;
        self.inputs.push(entry);
        Ok(())
    }

    /// Records an already-written output artifact by content hash.
    pub fn output(&mut self, path: &Path) -> Result<()> {
        let entry = file_entry(path)?;
        self.outputs.push(entry);
        Ok(())
    }

    pub fn timing(&mut self, stage: &str, elapsed: Duration) {
        self.timings.push((stage.to_string(), elapsed));
    }

    /// Digest over the effective configuration only: stable across
    /// reruns of the same invocation regardless of where or when.
    pub fn config_digest(&self) -> String {
        let mut canon = String::new();
        canon.push_str(self.tool);
        canon.push('\n');
        for (k, v) in &self.config {
            canon.push_str(k);
            canon.push('=');
            canon.push_str(v);
            canon.push('\n');
        }
        sha256_hex(canon.as_bytes())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("tool: {} v{}\n", self.tool, env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("command: {}\n", self.command));
        out.push_str(&format!("config_digest: sha256:{}\n", self.config_digest()));
        for (k, v) in &self.config {
            out.push_str(&format!("config {k}: {v}\n"));
        }
        for (name, sha, bytes) in &self.inputs {
            out.push_str(&format!("input {name}: sha256:{sha} bytes={bytes}\n"));
        }
        for (name, sha, bytes) in &self.outputs {
            out.push_str(&format!("output {name}: sha256:{sha} bytes={bytes}\n"));
        }
        for (stage, elapsed) in &self.timings {
            out.push_str(&format!("timing {stage}: {:.6}s\n", elapsed.as_secs_f64()));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.render().as_bytes())
    }
}
