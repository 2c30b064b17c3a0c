//! Run manifests: every artifact-producing command writes one next to its
//! output so a run can be reproduced exactly. Re-running with an identical
//! manifest and seed yields byte-identical artifacts (nothing time- or
//! host-dependent goes in here).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use metonym_core::features::FeatureConfig;
use metonym_core::svm::SvmParams;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub lexicons: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svm: Option<SvmParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            corpus: None,
            test: None,
            lexicons: BTreeMap::new(),
            features: None,
            svm: None,
            seed: None,
            baseline: None,
            threshold: None,
            outputs: BTreeMap::new(),
        }
    }

    /// Record an output artifact path.
    pub fn output(&mut self, role: &str, path: &Path) {
        self.outputs.insert(role.to_string(), display_path(path));
    }

    /// Write the manifest as `<artifact>.manifest.json`.
    pub fn write_next_to(&self, artifact: &Path) -> anyhow::Result<PathBuf> {
        let path = manifest_path(artifact);
        let file = std::fs::File::create(&path)?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(path)
    }
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

/// Canonicalize when possible so the manifest names the actual file.
pub fn display_path(path: &Path) -> String {
    std::fs::canonicalize(path)
        .unwrap_or_else(|_| path.to_path_buf())
        .display()
        .to_string()
}
