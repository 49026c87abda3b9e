//! Run configuration: a TOML file mirrored by CLI flags (flags win).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::RegionSpec;
use crate::spectra::{Precision, SpectrumRequest};
use crate::stability::DetectorConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RunConfig {
    /// Trajectory source: multi-model PDB file or a directory of frames.
    pub input: PathBuf,
    /// Output directory for the store, decisions and reports.
    pub out: PathBuf,
    /// Stand-in for the persistent parallel file system; persisted frames
    /// are copied here by watch mode.
    pub persist_dir: Option<PathBuf>,
    pub regions: Vec<RegionSpec>,
    /// Request a spectrum over the whole protein.
    pub full: bool,
    /// Request one spectrum per named region.
    pub per_region: bool,
    /// Request one inter-structure spectrum per region pair.
    pub pairwise: bool,
    pub detector: DetectorConfig,
    pub precision: Precision,
    /// Store all five retained eigenvalues instead of just the largest.
    pub full5: bool,
    /// Request id whose series drives retention decisions.
    pub driving: String,
    /// Drop a frame only when every series marks it stable.
    pub conjunction: bool,
    pub watch_poll_ms: u64,
    /// Watch mode: delete dropped frames from the staging directory once
    /// their region closes. Off by default; dropped frames are only listed.
    pub delete_dropped: bool,
    /// Reject non-GLY residues without a CB record.
    pub strict_beta: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            out: PathBuf::from("out"),
            persist_dir: None,
            regions: Vec::new(),
            full: true,
            per_region: true,
            pairwise: true,
            detector: DetectorConfig::default(),
            precision: Precision::Double,
            full5: false,
            driving: "full".to_string(),
            conjunction: false,
            watch_poll_ms: 500,
            delete_dropped: false,
            strict_beta: true,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// The request set implied by the region list and flags: full protein,
    /// then one per region, then one per region pair.
    pub fn requests(&self) -> Vec<SpectrumRequest> {
        let mut requests = Vec::new();
        if self.full {
            requests.push(SpectrumRequest::full());
        }
        if self.per_region {
            for r in &self.regions {
                requests.push(SpectrumRequest::sub(r.clone()));
            }
        }
        if self.pairwise {
            for i in 0..self.regions.len() {
                for j in (i + 1)..self.regions.len() {
                    requests.push(SpectrumRequest::inter(
                        self.regions[i].clone(),
                        self.regions[j].clone(),
                    ));
                }
            }
        }
        requests
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.detector
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let requests = self.requests();
        if requests.is_empty() {
            return Err(ConfigError::Invalid("no spectrum requests configured".into()));
        }
        if !requests.iter().any(|r| r.request_id == self.driving) {
            return Err(ConfigError::Invalid(format!(
                "driving series '{}' is not among the configured requests",
                self.driving
            )));
        }
        let mut names: Vec<&str> = self.regions.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.regions.len() {
            return Err(ConfigError::Invalid("duplicate region names".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_toml() {
        let mut cfg = RunConfig::default();
        cfg.input = PathBuf::from("traj");
        cfg.regions = vec![
            RegionSpec::new("s1", 8, 13),
            RegionSpec::new("s2", 17, 23),
            RegionSpec::new("s3", 26, 30),
        ];
        cfg.precision = Precision::Single;
        cfg.detector.window = 25;
        let text = cfg.to_toml();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn three_regions_give_seven_requests() {
        let mut cfg = RunConfig::default();
        cfg.regions = vec![
            RegionSpec::new("s1", 8, 13),
            RegionSpec::new("s2", 17, 23),
            RegionSpec::new("s3", 26, 30),
        ];
        let requests = cfg.requests();
        assert_eq!(requests.len(), 7);
        let ids: Vec<&str> = requests.iter().map(|r| r.request_id.as_str()).collect();
        assert_eq!(ids, vec!["full", "s1", "s2", "s3", "s1-s2", "s1-s3", "s2-s3"]);
    }

    #[test]
    fn driving_series_must_exist() {
        let mut cfg = RunConfig::default();
        cfg.driving = "nope".to_string();
        assert!(cfg.validate().is_err());
        cfg.driving = "full".to_string();
        assert!(cfg.validate().is_ok());
    }
}
