use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, ModelConfig};
use crate::textprep::EncodedSplit;
use crate::trainer::{train, TrainConfig};

/// Candidate values for the recurrent layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub gru_units: Vec<usize>,
    pub dropout: Vec<f64>,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid {
            gru_units: vec![64, 128, 256],
            dropout: vec![0.3, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchEntry {
    pub gru_units: usize,
    pub dropout: f64,
    pub val_loss: f64,
    pub param_count: usize,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: SearchEntry,
    /// One entry per grid point, in grid order.
    pub log: Vec<SearchEntry>,
}

impl SearchOutcome {
    pub fn best_model_config(&self, base: &ModelConfig) -> ModelConfig {
        ModelConfig {
            gru_units: self.best.gru_units,
            dropout: self.best.dropout,
            ..*base
        }
    }
}

/// Trains every grid point with `budget.epochs` epochs (early stopping
/// still applies) and keeps the one with the lowest restored validation
/// loss; ties go to the smaller model, then to grid order.
pub fn hyper_search(
    base: &ModelConfig,
    grid: &SearchGrid,
    data: &EncodedSplit,
    budget: &TrainConfig,
) -> Result<SearchOutcome> {
    if grid.gru_units.is_empty() || grid.dropout.is_empty() {
        return Err(Error::InvalidArgument("search grid is empty".into()));
    }
    let mut log = Vec::new();
    for &gru_units in &grid.gru_units {
        for &dropout in &grid.dropout {
            let config = ModelConfig {
                gru_units,
                dropout,
                ..*base
            };
            let model = Model::<f32>::new(config, budget.seed)?;
            let param_count = model.param_count();
            let (_, history) = train(model, data, budget, |_| {})?;
            log::info!(
                "search gru_units={gru_units} dropout={dropout}: val_loss={:.6}",
                history.best_val_loss
            );
            log.push(SearchEntry {
                gru_units,
                dropout,
                val_loss: history.best_val_loss,
                param_count,
                best_epoch: history.best_epoch,
            });
        }
    }
    let best = log
        .iter()
        .min_by(|a, b| {
            a.val_loss
                .total_cmp(&b.val_loss)
                .then(a.param_count.cmp(&b.param_count))
        })
        .expect("grid is non-empty")
        .clone();
    Ok(SearchOutcome { best, log })
}
