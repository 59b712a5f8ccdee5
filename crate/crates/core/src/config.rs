//! Versioned experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{ExperimentSpec, MeshSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub mesh: MeshSpec,
    /// Run the `(K, J+1)` and `(K+2, J+2)` companions.
    #[serde(default = "yes")]
    pub refine: bool,
    #[serde(default)]
    pub experiments: Vec<ExperimentSpec>,
}

fn yes() -> bool {
    true
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.mesh.domain()?;
        let mut names = std::collections::BTreeSet::new();
        for e in &self.experiments {
            if e.name.is_empty()
                || !e
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(Error::Config(format!(
                    "experiment name '{}' must be nonempty [A-Za-z0-9_-]",
                    e.name
                )));
            }
            if !names.insert(e.name.as_str()) {
                return Err(Error::Config(format!("duplicate experiment name '{}'", e.name)));
            }
            if let Some(m) = &e.mesh {
                m.domain()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"schema_version":1,"mesh":{"n":1,"box_level":2,"mesh_level":6}}"#;

    #[test]
    fn defaults() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert!(c.refine);
        assert!(c.experiments.is_empty());
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        let extra = MINIMAL.replace("\"schema_version\":1", "\"schema_version\":1,\"extra\":0");
        assert!(matches!(RunConfig::from_json(&extra), Err(Error::Config(_))));
        let old = MINIMAL.replace("\"schema_version\":1", "\"schema_version\":0");
        assert!(RunConfig::from_json(&old).is_err());
    }

    #[test]
    fn rejects_bad_names() {
        let text = r#"{"schema_version":1,"mesh":{"n":1,"box_level":2,"mesh_level":6},
            "experiments":[{"name":"a/b","variant":{"kind":"theorem1"},
            "u":{"kind":"const","c":1},"v":{"kind":"const","c":1},"f":{"kind":"zero"}}]}"#;
        assert!(RunConfig::from_json(text).is_err());
    }
}
