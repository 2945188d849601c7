//! Binary cross-entropy, Adam, the mini-batch training loop with early
//! stopping, and the grid search over GRU width and dropout.
//!
//! Batches are cut into fixed chunks of [`GRAD_CHUNK`] examples. Each chunk
//! accumulates its gradient sequentially; chunk gradients are then summed in
//! chunk order. The reduction tree depends only on the batch size, so
//! parallel and sequential runs give bitwise-identical parameters.

mod adam;
mod early_stopping;
mod loss;
mod search;

use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use adam::{AdamConfig, AdamState};
pub use early_stopping::{replay, EarlyStopping, Verdict};
pub use loss::{bce_logit_grad, bce_loss, LOSS_CLAMP};
pub use search::{hyper_search, SearchEntry, SearchGrid, SearchOutcome};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, map_range, Parallelism};
use crate::model::{Model, ModelParams};
use crate::num::{Real, RngState, Stream};
use crate::textprep::{EncodedExample, EncodedSplit};

/// Examples per gradient-accumulation chunk.
pub const GRAD_CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    /// Global-norm clipping threshold; `None` disables clipping.
    pub grad_clip_norm: Option<f64>,
    pub parallelism: Parallelism,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 40,
            batch_size: 512,
            patience: 4,
            seed: 42,
            adam: AdamConfig::default(),
            grad_clip_norm: None,
            parallelism: Parallelism::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.patience == 0 {
            return Err(Error::InvalidArgument(
                "epochs, batch_size and patience must be positive".into(),
            ));
        }
        if !self.adam.learning_rate.is_finite() || self.adam.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if let Some(c) = self.grad_clip_norm {
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::InvalidArgument("grad_clip_norm must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EarlyStopped,
    EpochsExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose weights were restored.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stop_reason: StopReason,
}

impl TrainHistory {
    /// SHA-256 over the per-epoch losses and accuracies (timings excluded),
    /// so identical runs give identical digests.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for e in &self.epochs {
            h.update(e.epoch.to_le_bytes());
            h.update(e.train_loss.to_le_bytes());
            h.update(e.val_loss.to_le_bytes());
            h.update(e.val_accuracy.to_le_bytes());
        }
        h.update(self.best_epoch.to_le_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Mean loss and accuracy (threshold 0.5) in evaluation mode.
pub fn evaluate<F: Real>(model: &Model<F>, data: &[EncodedExample], par: Parallelism) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate an empty dataset".into()));
    }
    let probs = predict_all(model, data, par)?;
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (p, ex) in probs.iter().zip(data) {
        let y = ex.label as f64;
        loss += bce_loss(*p, y).0;
        if (*p >= 0.5) == (ex.label == 1) {
            correct += 1;
        }
    }
    Ok((loss / data.len() as f64, correct as f64 / data.len() as f64))
}

/// Evaluation-mode probabilities, in input order.
pub fn predict_all<F: Real>(model: &Model<F>, data: &[EncodedExample], par: Parallelism) -> Result<Vec<f64>> {
    map_indexed(data, par, |_, ex| model.predict(&ex.ids).map(|p| p.f64()))
        .into_iter()
        .collect()
}

/// Owns the model and optimiser state across epochs.
pub struct Trainer<F> {
    pub model: Model<F>,
    pub adam: AdamState<F>,
    pub config: TrainConfig,
    epoch: usize,
}

impl<F: Real> Trainer<F> {
    pub fn new(model: Model<F>, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let adam = AdamState::new(config.adam, &model.params.tensors());
        Ok(Trainer {
            model,
            adam,
            config,
            epoch: 0,
        })
    }

    pub fn epochs_run(&self) -> usize {
        self.epoch
    }

    /// One pass over `train` in seeded shuffled order. Returns the mean
    /// per-example training loss (dropout active).
    pub fn train_epoch(&mut self, train: &[EncodedExample]) -> Result<f64> {
        if train.is_empty() {
            return Err(Error::InvalidArgument("training split is empty".into()));
        }
        self.epoch += 1;
        let rng = RngState::new(self.config.seed);
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut rng.substream(Stream::Shuffle, self.epoch as u64));

        let mut total_loss = 0.0;
        for (b, batch) in order.chunks(self.config.batch_size).enumerate() {
            let offset = b * self.config.batch_size;
            let (mut grads, loss_sum) = self.batch_gradient(train, batch, offset)?;
            if !loss_sum.is_finite() || !grads.is_finite() {
                return Err(Error::Diverged {
                    epoch: self.epoch,
                    batch: b + 1,
                });
            }
            grads.scale(F::of(1.0 / batch.len() as f64));
            if let Some(max_norm) = self.config.grad_clip_norm {
                let norm = grads.sum_sq().f64().sqrt();
                if norm > max_norm {
                    grads.scale(F::of(max_norm / norm));
                }
            }
            self.adam.apply(self.model.params.tensors_mut(), &grads.tensors())?;
            total_loss += loss_sum;
        }
        Ok(total_loss / train.len() as f64)
    }

    /// Summed gradient and summed loss over one batch.
    fn batch_gradient(
        &self,
        data: &[EncodedExample],
        batch: &[usize],
        offset: usize,
    ) -> Result<(ModelParams<F>, f64)> {
        let rng = RngState::new(self.config.seed);
        let epoch_key = (self.epoch as u64) << 32;
        let model = &self.model;
        let chunks: Vec<&[usize]> = batch.chunks(GRAD_CHUNK).collect();
        let partials = map_range(chunks.len(), self.config.parallelism, |c| -> Result<(ModelParams<F>, f64)> {
            let mut grads = ModelParams::zeros(&model.config);
            let mut loss_sum = 0.0;
            for (i, &idx) in chunks[c].iter().enumerate() {
                let position = (offset + c * GRAD_CHUNK + i) as u64;
                let mut drop_rng = rng.substream(Stream::Dropout, epoch_key | position);
                let ex = &data[idx];
                let trace = model.forward(&ex.ids, Some(&mut drop_rng))?;
                let y = F::of(ex.label as f64);
                let (loss, _) = bce_loss(trace.prob, y);
                loss_sum += loss.f64();
                model.backward(&trace, bce_logit_grad(trace.prob, y), &mut grads);
            }
            Ok((grads, loss_sum))
        });
        let mut iter = partials.into_iter();
        let (mut grads, mut loss_sum) = iter.next().expect("batch is non-empty")?;
        for part in iter {
            let (g, l) = part?;
            grads.add_assign(&g)?;
            loss_sum += l;
        }
        Ok((grads, loss_sum))
    }
}

/// Full training run: epoch loop, validation after each epoch, early
/// stopping on validation loss, and restoration of the best weights.
/// `progress` is called once per finished epoch.
pub fn train<F: Real>(
    model: Model<F>,
    data: &EncodedSplit,
    config: &TrainConfig,
    mut progress: impl FnMut(&EpochRecord),
) -> Result<(Model<F>, TrainHistory)> {
    if data.train.is_empty() || data.validation.is_empty() {
        return Err(Error::InvalidArgument(
            "training needs non-empty train and validation splits".into(),
        ));
    }
    let start = Instant::now();
    let mut trainer = Trainer::new(model, *config)?;
    let mut stopper = EarlyStopping::new(config.patience);
    let mut best_params = trainer.model.params.clone();
    let mut epochs = Vec::new();
    let mut stop_reason = StopReason::EpochsExhausted;
    for epoch in 1..=config.epochs {
        let train_loss = trainer.train_epoch(&data.train)?;
        let (val_loss, val_accuracy) = evaluate(&trainer.model, &data.validation, config.parallelism)?;
        if !val_loss.is_finite() {
            return Err(Error::Diverged { epoch, batch: 0 });
        }
        let record = EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_accuracy,
            elapsed_secs: start.elapsed().as_secs_f64(),
        };
        progress(&record);
        epochs.push(record);
        match stopper.observe(epoch, val_loss) {
            Verdict::Improved => best_params = trainer.model.params.clone(),
            Verdict::Continue => {}
            Verdict::Stop => {
                stop_reason = StopReason::EarlyStopped;
                break;
            }
        }
    }
    let (best_epoch, best_val_loss) = stopper.best().expect("at least one epoch ran");
    let mut model = trainer.model;
    model.params = best_params;
    Ok((
        model,
        TrainHistory {
            epochs,
            best_epoch,
            best_val_loss,
            stop_reason,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;

    fn toy_config() -> ModelConfig {
        ModelConfig {
            vocab_size: 10,
            max_len: 6,
            embed_dim: 3,
            conv_filters: 3,
            kernel_size: 2,
            pool_size: 2,
            gru_units: 3,
            attention_width: 2,
            dropout: 0.2,
        }
    }

    fn toy_data(n: usize) -> Vec<EncodedExample> {
        (0..n)
            .map(|i| {
                let label = (i % 2) as u8;
                let base = if label == 1 { 2 } else { 6 };
                EncodedExample {
                    ids: (0..6).map(|t| base + ((i + t) % 4) as u32).collect(),
                    label,
                }
            })
            .collect()
    }

    #[test]
    fn restored_weights_reproduce_best_loss() {
        let data = EncodedSplit {
            train: toy_data(40),
            validation: toy_data(10),
            test: vec![],
        };
        let cfg = TrainConfig {
            epochs: 6,
            batch_size: 8,
            patience: 2,
            ..TrainConfig::default()
        };
        let model = Model::<f32>::new(toy_config(), 5).unwrap();
        let (best, hist) = train(model, &data, &cfg, |_| {}).unwrap();
        let (loss, _) = evaluate(&best, &data.validation, Parallelism::Sequential).unwrap();
        assert!((loss - hist.best_val_loss).abs() <= 1e-6);
        let min = hist.epochs.iter().map(|e| e.val_loss).fold(f64::INFINITY, f64::min);
        assert_eq!(min, hist.best_val_loss);
        assert!(hist.epochs.len() <= cfg.epochs);
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let data = EncodedSplit {
            train: toy_data(50),
            validation: toy_data(6),
            test: vec![],
        };
        let run = |par| {
            let cfg = TrainConfig {
                epochs: 2,
                batch_size: 20,
                parallelism: par,
                ..TrainConfig::default()
            };
            train(Model::<f32>::new(toy_config(), 9).unwrap(), &data, &cfg, |_| {})
                .unwrap()
                .0
        };
        let a = run(Parallelism::Sequential);
        let b = run(Parallelism::Threads);
        assert_eq!(a, b);
    }

    #[test]
    fn empty_split_is_rejected() {
        let data = EncodedSplit::default();
        let model = Model::<f32>::new(toy_config(), 1).unwrap();
        assert!(train(model, &data, &TrainConfig::default(), |_| {}).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let mut model = Model::<f32>::new(toy_config(), 1).unwrap();
        model.params.out_w.data_mut()[0] = f32::NAN;
        let mut t = Trainer::new(model, TrainConfig { batch_size: 4, ..TrainConfig::default() }).unwrap();
        assert!(matches!(
            t.train_epoch(&toy_data(8)),
            Err(Error::Diverged { epoch: 1, batch: 1 })
        ));
    }
}
