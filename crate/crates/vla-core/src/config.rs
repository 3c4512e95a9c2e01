//! Run configuration: one TOML file with sections for the vocabulary, the
//! observation grids, nav quantization, simulator geometry, domain
//! randomization, model and training hyperparameters, and episode counts.
//! Every report and dataset manifest embeds a snapshot of this struct.

use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub vocab: VocabConfig,
    pub obs: ObsConfig,
    pub nav: NavConfig,
    pub sim: SimConfig,
    pub dr: DrConfig,
    pub chunk_size: usize,
    pub model: ModelConfig,
    pub train: TrainParams,
    pub data: DataConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            vocab: VocabConfig::default(),
            obs: ObsConfig::default(),
            nav: NavConfig::default(),
            sim: SimConfig::default(),
            dr: DrConfig::default(),
            chunk_size: 5,
            model: ModelConfig::default(),
            train: TrainParams::default(),
            data: DataConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VocabConfig {
    pub n_bins: usize,
    pub palette_size: usize,
    pub version: String,
}

impl Default for VocabConfig {
    fn default() -> Self {
        Self {
            n_bins: 256,
            palette_size: 16,
            version: crate::VOCAB_VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObsConfig {
    pub alloc_h: usize,
    pub alloc_w: usize,
    pub ego_h: usize,
    pub ego_w: usize,
    /// World units per egocentric pixel.
    pub ego_scale: f64,
}

impl Default for ObsConfig {
    fn default() -> Self {
        Self {
            alloc_h: 8,
            alloc_w: 8,
            ego_h: 4,
            ego_w: 8,
            ego_scale: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NavConfig {
    /// Max forward distance per step: one arena cell diagonal.
    pub d_max: f64,
    /// Max rotation per step, radians.
    pub theta_max: f64,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            d_max: std::f64::consts::SQRT_2,
            theta_max: std::f64::consts::FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Square arena side, world units (cells).
    pub arena_size: f64,
    pub grasp_eps: f64,
    pub place_eps: f64,
    /// Height above the table a lifted object must reach.
    pub lift_threshold: f64,
    /// Hinge travel needed to count as open.
    pub open_threshold: f64,
    pub horizon_fixed: usize,
    pub horizon_mobile: usize,
    /// Gripper reach from its shoulder, fixed-base bodies.
    pub reach_fixed: f64,
    /// Gripper reach from its shoulder, mobile bodies.
    pub reach_mobile: f64,
    /// Seen-setting placement jitter, world units.
    pub jitter_seen: f64,
    /// Resampling bound for unsolvable resets.
    pub max_reset_attempts: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            arena_size: 16.0,
            grasp_eps: 0.5,
            place_eps: 0.5,
            lift_threshold: 1.0,
            open_threshold: 1.0,
            horizon_fixed: 60,
            horizon_mobile: 120,
            reach_fixed: 8.0,
            reach_mobile: 3.0,
            jitter_seen: 0.25,
            max_reset_attempts: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DrConfig {
    pub enabled: bool,
    pub distractors_min: usize,
    pub distractors_max: usize,
    /// Placement jitter under DR, world units.
    pub layout_jitter: f64,
    /// Remap background/fixture palette ids (lighting + texture analogue).
    pub palette_remap: bool,
    /// Max table surface height offset.
    pub table_height_max: f64,
}

impl Default for DrConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            distractors_min: 1,
            distractors_max: 3,
            layout_jitter: 0.45,
            palette_remap: true,
            table_height_max: 0.4,
        }
    }
}

impl DrConfig {
    pub fn off() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn on() -> Self {
        Self {
            enabled: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub context_window: usize,
    pub embed_dim: usize,
    pub blocks: usize,
    pub heads: usize,
    pub seed: u64,
    /// Ablation flag: replace proprio tokens with one projected embedding.
    pub mlp_proprio: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            context_window: 256,
            embed_dim: 64,
            blocks: 2,
            heads: 4,
            seed: 0,
            mlp_proprio: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainParams {
    pub post_epochs: usize,
    pub finetune_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            post_epochs: 2,
            finetune_epochs: 8,
            batch_size: 16,
            learning_rate: 0.25,
            optimizer: Optimizer::Sgd,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    pub demos_per_task: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { demos_per_task: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub episodes_per_task: usize,
    pub chains: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            episodes_per_task: 100,
            chains: 200,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            detail: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        let text = toml::to_string_pretty(self).expect("config serializes");
        std::fs::write(path, text).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {detail}")]
    Io { path: String, detail: String },
    #[error("cannot parse config {path}: {detail}")]
    Parse { path: String, detail: String },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip_preserves_defaults() {
        let cfg = RunConfig::default();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg: RunConfig = toml::from_str("chunk_size = 12\n[vocab]\nn_bins = 1024\n").unwrap();
        assert_eq!(cfg.chunk_size, 12);
        assert_eq!(cfg.vocab.n_bins, 1024);
        assert_eq!(cfg.model.embed_dim, 64);
    }
}
