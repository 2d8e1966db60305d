//! Run manifests: every report embeds the command, the statistical
//! configuration, the seed, the library version, and a digest of each
//! input file, so a report can be traced back to exactly what produced
//! it and re-running the same invocation reproduces it byte for byte.
//! Execution-only knobs (thread count, output locations) are not part of
//! the manifest because they cannot change the results.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        seed: Option<u64>,
        config: serde_json::Value,
        input_paths: &[&Path],
    ) -> CliResult<Self> {
        let inputs = input_paths
            .iter()
            .map(|p| {
                Ok(InputDigest {
                    path: p.display().to_string(),
                    sha256: digest_file(p)?,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            inputs,
        })
    }
}

pub fn digest_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex::encode(hasher.finalize()))
}

/// Extracts the manifest from a report file, accepting both report
/// flavors: JSON reports carry a `manifest` key, CSV reports carry a
/// leading `# manifest: {...}` comment line.
pub fn manifest_from_report(path: &Path) -> CliResult<RunManifest> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let json = if let Some(line) = text.lines().next().and_then(|l| l.strip_prefix("# manifest: "))
    {
        line.to_string()
    } else {
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: not a report: {e}", path.display())))?;
        value
            .get("manifest")
            .ok_or_else(|| {
                CliError::Validation(format!("{}: report has no manifest", path.display()))
            })?
            .to_string()
    };
    serde_json::from_str(&json)
        .map_err(|e| CliError::Validation(format!("{}: malformed manifest: {e}", path.display())))
}
