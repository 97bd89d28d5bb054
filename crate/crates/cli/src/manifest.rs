use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Value,
    pub fold: Option<String>,
    pub seeds: Value,
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Collects run metadata; `write` drops one manifest next to each output.
pub struct Recorder {
    subcommand: &'static str,
    started: u64,
    pub config: Value,
    pub fold: Option<String>,
    pub seeds: Value,
}

impl Recorder {
    pub fn new(subcommand: &'static str) -> Self {
        Self {
            subcommand,
            started: unix_now(),
            config: Value::Null,
            fold: None,
            seeds: Value::Object(Default::default()),
        }
    }

    pub fn write(&self, outputs: &[&Path]) -> anyhow::Result<()> {
        let manifest = RunManifest {
            subcommand: self.subcommand.to_string(),
            config: self.config.clone(),
            fold: self.fold.clone(),
            seeds: self.seeds.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self.started,
            finished_unix: unix_now(),
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        for out in outputs {
            let path = manifest_path(out);
            std::fs::write(&path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("/tmp/x/params.txt")), Path::new("/tmp/x/params.txt.manifest.json"));
    }
}
