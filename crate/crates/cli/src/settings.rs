//! Config files and their merge with command-line flags.

use std::path::{Path, PathBuf};

use labelforge_core::corpus::PreprocessConfig;
use labelforge_core::training::TrainConfig;
use labelforge_core::ModelConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::failure::{io_failure, require, Failure};

pub const RESOLVED_PREPROCESS: &str = "preprocess_config.json";
pub const RESOLVED_TRAIN: &str = "train_config.json";

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(require(path)?).map_err(|e| io_failure(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::other("config", format!("{}: {e}", path.display())))
}

/// Recursively overlays `patch` onto `base`; objects merge, everything else
/// replaces. Keys absent from `base` are typos and rejected.
fn merge(base: &mut Value, patch: Value, at: &str) -> Result<(), Failure> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                let path = format!("{at}.{k}");
                let slot = b
                    .get_mut(&k)
                    .ok_or_else(|| Failure::other("config", format!("unknown setting {path}")))?;
                merge(slot, v, &path)?;
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

pub fn preprocess_config(file: Option<&Path>, seed: Option<u64>, min_count: Option<usize>) -> Result<PreprocessConfig, Failure> {
    let mut cfg = match file {
        Some(p) => serde_json::from_value(read_json(p)?)
            .map_err(|e| Failure::other("config", format!("{}: {e}", p.display())))?,
        None => PreprocessConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(m) = min_count {
        cfg.min_count = m;
    }
    Ok(cfg)
}

/// The train config file as written by users.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainFile {
    manifest: Option<PathBuf>,
    out: Option<PathBuf>,
    /// `"tiny"` or `"base"`; fields under `model` override it.
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    model: Option<Value>,
    #[serde(default)]
    train: Option<Value>,
}

/// Fully resolved training run; echoed into the output directory.
#[derive(Debug, Clone, Serialize)]
pub struct TrainSettings {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub preset: String,
    pub model: ModelConfig,
    pub train: TrainConfig,
}

pub struct TrainFlags<'a> {
    pub config: Option<&'a Path>,
    pub manifest: Option<&'a Path>,
    pub out: Option<&'a Path>,
    pub seed: Option<u64>,
    pub warmup: Option<u64>,
}

fn preset(name: &str) -> Result<ModelConfig, Failure> {
    match name {
        // vocab_size is replaced once the vocabulary is known
        "tiny" => Ok(ModelConfig::tiny(4)),
        "base" => Ok(ModelConfig::default()),
        other => Err(Failure::other("config", format!("unknown model preset {other:?}; use tiny or base"))),
    }
}

pub fn train_settings(flags: TrainFlags<'_>) -> Result<TrainSettings, Failure> {
    let (file, base_dir) = match flags.config {
        Some(p) => {
            let file: TrainFile = serde_json::from_value(read_json(p)?)
                .map_err(|e| Failure::other("config", format!("{}: {e}", p.display())))?;
            (file, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (TrainFile::default(), PathBuf::new()),
    };
    // paths inside a config file are relative to that file
    let from_file = |p: Option<PathBuf>| p.map(|p| if p.is_absolute() { p } else { base_dir.join(p) });

    let preset_name = file.preset.unwrap_or_else(|| "tiny".into());
    let mut model = serde_json::to_value(preset(&preset_name)?)?;
    if let Some(patch) = file.model {
        merge(&mut model, patch, "model")?;
    }
    let model: ModelConfig = serde_json::from_value(model).map_err(|e| Failure::other("config", format!("model: {e}")))?;

    let mut train = serde_json::to_value(TrainConfig::default())?;
    if let Some(patch) = file.train {
        merge(&mut train, patch, "train")?;
    }
    let mut train: TrainConfig = serde_json::from_value(train).map_err(|e| Failure::other("config", format!("train: {e}")))?;
    if let Some(s) = flags.seed {
        train.seed = s;
    }
    if let Some(w) = flags.warmup {
        train.warmup_steps = w;
    }
    train.validate()?;

    let manifest = flags
        .manifest
        .map(Path::to_path_buf)
        .or_else(|| from_file(file.manifest))
        .ok_or_else(|| Failure::usage("no manifest given; pass --manifest or set it in --config"))?;
    let out = flags
        .out
        .map(Path::to_path_buf)
        .or_else(|| from_file(file.out))
        .ok_or_else(|| Failure::usage("no output directory given; pass --out or set it in --config"))?;
    Ok(TrainSettings {
        manifest,
        out,
        preset: preset_name,
        model,
        train,
    })
}
