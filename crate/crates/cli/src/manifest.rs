//! Run manifest written alongside every output set. Re-running the recorded
//! command with the recorded configuration reproduces the outputs
//! byte-identically; the manifest is the audit trail that makes that claim
//! checkable.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// Input file paths by role.
    pub inputs: BTreeMap<String, String>,
    /// Effective configuration, flag defaults included.
    pub config: BTreeMap<String, serde_json::Value>,
    /// Files this run produces, manifest excluded.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        RunManifest {
            tool: crate::TOOL_NAME,
            version: crate::TOOL_VERSION,
            command,
            inputs: BTreeMap::new(),
            config: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, role: &str, path: impl AsRef<std::path::Path>) {
        self.inputs
            .insert(role.to_string(), path.as_ref().display().to_string());
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.config.insert(
            key.to_string(),
            serde_json::to_value(value).expect("manifest values serialize"),
        );
    }

    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }
}
