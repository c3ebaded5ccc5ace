//! Experiment config files.

use std::fmt;
use std::path::{Path, PathBuf};

use dmnn::architecture::{ArchError, ArchitectureSpec};
use dmnn::training::{Algorithm, TrainConfig};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_path_to_error::{Path as DePath, Segment};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub architecture: ArchitectureSpec,
    pub train: TrainConfig,
    #[serde(default)]
    pub init: InitConfig,
    pub data: DataConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    /// Random moves applied to every coordinate of the identity point.
    #[serde(default)]
    pub perturbation: usize,
    /// Start from this params file instead.
    #[serde(default)]
    pub params: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub train_dir: PathBuf,
    #[serde(default)]
    pub val_dir: Option<PathBuf>,
}

/// A config problem at a JSON-pointer location.
#[derive(Debug)]
pub struct ConfigError {
    pub file: PathBuf,
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{}: at {at}: {}", self.file.display(), self.message)
    }
}

impl std::error::Error for ConfigError {}

fn pointer(path: &DePath) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Parse `text` as `T`, reporting failures with a JSON pointer.
pub fn parse_json<T: DeserializeOwned>(file: &Path, text: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer(e.path());
        let message = e.into_inner().to_string();
        ConfigError {
            file: file.to_path_buf(),
            pointer,
            message,
        }
    })
}

impl ExperimentConfig {
    /// Parse and check everything that does not need the data on disk.
    pub fn parse(file: &Path, text: &str) -> Result<Self, ConfigError> {
        let c: ExperimentConfig = parse_json(file, text)?;
        let err = |pointer: &str, message: String| ConfigError {
            file: file.to_path_buf(),
            pointer: pointer.to_string(),
            message,
        };
        c.architecture.check().map_err(|e| match e {
            ArchError::Spec {
                layer: Some(l),
                message,
            } => err(&format!("/architecture/layers/{l}"), message),
            other => err("/architecture/layers", other.to_string()),
        })?;
        let t = &c.train;
        if t.epochs == 0 {
            return Err(err("/train/epochs", "epochs must be at least 1".into()));
        }
        if t.algorithm == Algorithm::Slda {
            if t.batch_size == 0 {
                return Err(err("/train/batch_size", "batch_size must be at least 1".into()));
            }
            if t.neighbors == 0 {
                return Err(err("/train/neighbors", "neighbors must be at least 1".into()));
            }
        }
        Ok(c)
    }

    /// Resolve relative paths against the directory of the config file.
    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data.train_dir);
        if let Some(v) = self.data.val_dir.as_mut() {
            fix(v);
        }
        if let Some(p) = self.init.params.as_mut() {
            fix(p);
        }
        if let Some(o) = self.output_dir.as_mut() {
            fix(o);
        }
    }

    /// Check the data directories exist.
    pub fn check_paths(&self, file: &Path) -> Result<(), ConfigError> {
        let missing = |pointer: &str, p: &Path| ConfigError {
            file: file.to_path_buf(),
            pointer: pointer.to_string(),
            message: format!("directory {} does not exist", p.display()),
        };
        if !self.data.train_dir.is_dir() {
            return Err(missing("/data/train_dir", &self.data.train_dir));
        }
        if let Some(v) = &self.data.val_dir {
            if !v.is_dir() {
                return Err(missing("/data/val_dir", v));
            }
        }
        if let Some(p) = &self.init.params {
            if !p.is_file() {
                return Err(ConfigError {
                    file: file.to_path_buf(),
                    pointer: "/init/params".into(),
                    message: format!("file {} does not exist", p.display()),
                });
            }
        }
        Ok(())
    }
}
