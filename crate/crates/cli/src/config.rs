use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use screenkit::bench::BaselineConfig;
use screenkit::curation::CurationSettings;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub records: Option<PathBuf>,
    pub hierarchy: Option<PathBuf>,
    pub sdf: Option<PathBuf>,
    pub properties: Option<PathBuf>,
    pub descriptors: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub scheme: String,
    pub k: usize,
    pub ratio: [u32; 3],
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            scheme: "cv".into(),
            k: 5,
            ratio: [3, 1, 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureConfig {
    pub kind: String,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { kind: "2d".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub list: Vec<String>,
    pub tie_seed: u64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            list: ["logauc", "bedroc", "ef100", "dcg100"].map(String::from).to_vec(),
            tie_seed: 0,
        }
    }
}

/// The run configuration file. Relative paths resolve against the file's
/// directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version_tag: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub curation: CurationSettings,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub baseline: BaselineConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))?;
        const METRICS: [&str; 4] = ["logauc", "bedroc", "ef100", "dcg100"];
        if let Some(m) = cfg.metrics.list.iter().find(|m| !METRICS.contains(&m.as_str())) {
            return Err(CliError::new("config", format!("unknown metric {m:?}")));
        }
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn path(&self, p: &Option<PathBuf>) -> Option<PathBuf> {
        p.as_ref().map(|p| self.base_dir.join(p))
    }
}
