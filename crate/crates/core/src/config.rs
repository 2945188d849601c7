//! Run configuration: one flat TOML table holding every hyperparameter,
//! with defaults at the published settings.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::model::ModelConfig;
use crate::trainer::{AdamConfig, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: PathBuf,
    pub out: PathBuf,
    /// Train, validation, test fractions.
    pub ratios: [f64; 3],
    pub seed: u64,
    pub vocab_size: usize,
    pub max_len: usize,
    pub embed_dim: usize,
    pub conv_filters: usize,
    pub kernel_size: usize,
    pub pool_size: usize,
    pub gru_units: usize,
    pub attention_width: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_clip_norm: Option<f64>,
    pub parallelism: Parallelism,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: PathBuf::from("Suicide_Detection.csv"),
            out: PathBuf::from("runs"),
            ratios: [0.8, 0.1, 0.1],
            seed: 42,
            vocab_size: 10_000,
            max_len: 100,
            embed_dim: 128,
            conv_filters: 128,
            kernel_size: 5,
            pool_size: 2,
            gru_units: 128,
            attention_width: 64,
            dropout: 0.5,
            learning_rate: 0.001,
            epochs: 40,
            batch_size: 512,
            patience: 4,
            grad_clip_norm: None,
            parallelism: Parallelism::default(),
        }
    }
}

/// Named epoch budgets. `paper-iii` trains for 40 epochs, `paper-iv` for 10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    PaperIii,
    PaperIv,
}

impl Preset {
    pub fn apply(self, config: &mut RunConfig) {
        config.epochs = match self {
            Preset::PaperIii => 40,
            Preset::PaperIv => 10,
        };
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-iii" => Ok(Preset::PaperIii),
            "paper-iv" => Ok(Preset::PaperIv),
            other => Err(Error::InvalidArgument(format!(
                "unknown preset '{other}' (expected paper-iii or paper-iv)"
            ))),
        }
    }
}

impl RunConfig {
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            vocab_size: self.vocab_size,
            max_len: self.max_len,
            embed_dim: self.embed_dim,
            conv_filters: self.conv_filters,
            kernel_size: self.kernel_size,
            pool_size: self.pool_size,
            gru_units: self.gru_units,
            attention_width: self.attention_width,
            dropout: self.dropout,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            patience: self.patience,
            seed: self.seed,
            adam: AdamConfig {
                learning_rate: self.learning_rate,
                ..AdamConfig::default()
            },
            grad_clip_norm: self.grad_clip_norm,
            parallelism: self.parallelism,
        }
    }

    pub fn ratios(&self) -> (f64, f64, f64) {
        (self.ratios[0], self.ratios[1], self.ratios[2])
    }

    pub fn validate(&self) -> Result<()> {
        self.model_config().validate()?;
        self.train_config().validate()?;
        if self.ratios.iter().any(|r| !r.is_finite() || *r <= 0.0) || (self.ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "split ratios {:?} must be positive and sum to 1",
                self.ratios
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serialises")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("run config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }
}
