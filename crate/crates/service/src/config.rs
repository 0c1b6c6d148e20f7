use std::path::{Path, PathBuf};

use graphlet_lens::census::CensusPolicy;
use graphlet_lens::{Error, Result};
use serde::{Deserialize, Serialize};

pub const ENV_PREFIX: &str = "GA_";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    /// Directory of dataset JSON files; the file stem is the dataset id.
    pub data_dir: PathBuf,
    /// Per-dataset artifact directories live under here.
    pub artifact_dir: PathBuf,
    pub census: CensusPolicy,
    /// Swap projection axes (embedding PC1 on x).
    pub swap_axes: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            data_dir: PathBuf::from("data"),
            artifact_dir: PathBuf::from("artifacts"),
            census: CensusPolicy::default(),
            swap_axes: false,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {ENV_PREFIX}{key}={value:?}")))
}

impl ServiceConfig {
    /// Reads the JSON file if given, then applies `GA_*` environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let base = match path {
            Some(p) => graphlet_lens::io::read_json(p)?,
            None => ServiceConfig::default(),
        };
        base.with_env(std::env::vars())
    }

    pub fn with_env(mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        for (k, v) in vars {
            let Some(key) = k.strip_prefix(ENV_PREFIX) else { continue };
            match key {
                "HOST" => self.host = v,
                "PORT" => self.port = parse(key, &v)?,
                "DATA_DIR" => self.data_dir = PathBuf::from(v),
                "ARTIFACT_DIR" => self.artifact_dir = PathBuf::from(v),
                "EXHAUSTIVE_MAX_NODES" => self.census.exhaustive_max_nodes = parse(key, &v)?,
                "SAMPLES" => self.census.samples = parse(key, &v)?,
                "SEED" => self.census.seed = parse(key, &v)?,
                "SWAP_AXES" => self.swap_axes = parse(key, &v)?,
                _ => {}
            }
        }
        Ok(self)
    }
}
