//! JSON configuration for dataset generation.
//!
//! Unknown keys are rejected and every error carries the JSON pointer of the
//! offending value. Relative paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::augment::{AnomalySourcePool, Category, OperatorParams};
use crate::dataset::SimulationPlan;
use crate::profile::{resolve_profile, AugmentationProfile, ProfileOverrides};

pub const DEFAULT_PER_CATEGORY_COUNT: usize = 100;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
}

impl ConfigError {
    fn at(pointer: &str, message: impl Into<String>) -> Self {
        ConfigError::Schema {
            pointer: pointer.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourcePoolConfig {
    External { dir: PathBuf },
    SelfPatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationConfig {
    pub dataset_root: PathBuf,
    pub class_name: String,
    pub categories: Vec<Category>,
    #[serde(default = "default_count")]
    pub per_category_count: usize,
    pub master_seed: u64,
    pub source_pool: SourcePoolConfig,
    #[serde(default)]
    pub profile: ProfileOverrides,
    #[serde(default)]
    pub enforce_profile: bool,
    #[serde(default)]
    pub operators: OperatorParams,
    pub out_dir: PathBuf,
}

fn default_count() -> usize {
    DEFAULT_PER_CATEGORY_COUNT
}

/// A parsed, validated configuration with everything needed to run.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: GenerationConfig,
    pub profile: AugmentationProfile,
    pub pool: AnomalySourcePool,
    /// SHA-256 of the raw config bytes, hex encoded.
    pub digest: String,
    pub raw: Vec<u8>,
}

impl LoadedConfig {
    pub fn plan(&self, jobs: usize) -> SimulationPlan {
        SimulationPlan {
            categories: self.config.categories.clone(),
            per_category_count: self.config.per_category_count,
            master_seed: self.config.master_seed,
            operators: self.config.operators.clone(),
            enforce_profile: self.config.enforce_profile,
            config_digest: self.digest.clone(),
            jobs,
        }
    }
}

fn to_pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        use serde_path_to_error::Segment;
        let part = match seg {
            Segment::Seq { index } => index.to_string(),
            Segment::Map { key } => key.clone(),
            Segment::Enum { variant } => variant.clone(),
            Segment::Unknown => continue,
        };
        out.push('/');
        out.push_str(&part.replace('~', "~0").replace('/', "~1"));
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}

/// Appends the unknown key named in a serde error to its parent pointer.
fn refine_pointer(pointer: String, message: &str) -> String {
    let Some(rest) = message.strip_prefix("unknown field `") else {
        return pointer;
    };
    let Some(key) = rest.split('`').next() else {
        return pointer;
    };
    if pointer.rsplit('/').next() == Some(key) {
        pointer
    } else if pointer == "/" {
        format!("/{key}")
    } else {
        format!("{pointer}/{key}")
    }
}

pub fn parse_config(bytes: &[u8]) -> Result<GenerationConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let message = e.inner().to_string();
        let pointer = refine_pointer(to_pointer(e.path()), &message);
        ConfigError::Schema { pointer, message }
    })
}

pub fn digest_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Reads, parses and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<LoadedConfig, ConfigError> {
    let path = path.as_ref();
    let raw = std::fs::read(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config = parse_config(&raw)?;
    let base = path.parent().unwrap_or(Path::new("."));
    config.dataset_root = resolve(base, &config.dataset_root);
    config.out_dir = resolve(base, &config.out_dir);
    if let SourcePoolConfig::External { dir } = &mut config.source_pool {
        *dir = resolve(base, dir);
    }

    if config.class_name.is_empty() {
        return Err(ConfigError::at("/class_name", "must not be empty"));
    }
    let class_dir = config.dataset_root.join(&config.class_name);
    if !class_dir.is_dir() {
        return Err(ConfigError::at(
            "/dataset_root",
            format!("class directory {} does not exist", class_dir.display()),
        ));
    }
    if config.categories.is_empty() {
        return Err(ConfigError::at(
            "/categories",
            "must list at least one category",
        ));
    }
    if let Some(i) = config
        .categories
        .iter()
        .position(|&c| c == Category::Rotation)
    {
        return Err(ConfigError::at(
            &format!("/categories/{i}"),
            "rotation is a normal-sample augmentation, not a benchmark category",
        ));
    }
    config
        .operators
        .validate()
        .map_err(|e| ConfigError::at("/operators", e.to_string()))?;
    let profile = resolve_profile(&config.class_name, &config.profile)
        .map_err(|e| ConfigError::at("/profile", e.to_string()))?;
    let pool = match &config.source_pool {
        SourcePoolConfig::SelfPatch => AnomalySourcePool::SelfPatch,
        SourcePoolConfig::External { dir } => {
            if !dir.is_dir() {
                return Err(ConfigError::at(
                    "/source_pool/dir",
                    format!("{} does not exist", dir.display()),
                ));
            }
            AnomalySourcePool::from_dir(dir)
                .map_err(|e| ConfigError::at("/source_pool/dir", e.to_string()))?
        }
    };

    Ok(LoadedConfig {
        digest: digest_hex(&raw),
        config,
        profile,
        pool,
        raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dataset_root": "data",
        "class_name": "bottle",
        "categories": ["opaque", "nda"],
        "master_seed": 7,
        "source_pool": {"mode": "self_patch"},
        "out_dir": "out"
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse_config(MINIMAL.as_bytes()).unwrap();
        assert_eq!(c.per_category_count, DEFAULT_PER_CATEGORY_COUNT);
        assert_eq!(c.categories, vec![Category::Opaque, Category::Ndaa]);
        assert_eq!(c.operators, OperatorParams::default());
        assert_eq!(c.source_pool, SourcePoolConfig::SelfPatch);
    }

    #[test]
    fn unknown_nested_key_reports_pointer() {
        let text = MINIMAL.replace(
            r#""out_dir": "out""#,
            r#""out_dir": "out", "operators": {"transparent": {"betta_range": [0.1, 0.2]}}"#,
        );
        match parse_config(text.as_bytes()) {
            Err(ConfigError::Schema { pointer, message }) => {
                assert_eq!(pointer, "/operators/transparent/betta_range");
                assert!(message.contains("betta_range"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_top_level_key() {
        let text = MINIMAL.replace(
            r#""out_dir": "out""#,
            r#""out_dir": "out", "betta_range": 1"#,
        );
        match parse_config(text.as_bytes()) {
            Err(ConfigError::Schema { pointer, .. }) => assert_eq!(pointer, "/betta_range"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_category_value() {
        let text = MINIMAL.replace(r#"["opaque", "nda"]"#, r#"["opaque", "blur"]"#);
        match parse_config(text.as_bytes()) {
            Err(ConfigError::Schema { pointer, .. }) => assert_eq!(pointer, "/categories/1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn partial_operator_overrides_keep_other_defaults() {
        let text = MINIMAL.replace(
            r#""out_dir": "out""#,
            r#""out_dir": "out", "operators": {"ndaa": {"block_size": 4}, "poisson": {"tol": 1e-3}}"#,
        );
        let c = parse_config(text.as_bytes()).unwrap();
        let d = OperatorParams::default();
        assert_eq!(c.operators.ndaa.block_size, 4);
        assert_eq!(c.operators.ndaa.amplitude_range, d.ndaa.amplitude_range);
        assert_eq!(c.operators.poisson.tol, 1e-3);
        assert_eq!(c.operators.poisson.max_iters, d.poisson.max_iters);
        assert_eq!(c.operators.mask, d.mask);
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            digest_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
