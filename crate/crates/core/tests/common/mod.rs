#![allow(dead_code)]

use std::path::PathBuf;

use ideation_core::textprep::{EncodedExample, EncodedSplit};
use ideation_core::trainer::{AdamConfig, TrainConfig};
use ideation_core::{ModelConfig, Parallelism};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

/// Tokens 2..=9 only ever appear in positive examples and 10..=17 only in
/// negative ones.
pub fn separable_corpus(n: usize, max_len: usize, seed: u64) -> Vec<EncodedExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = (i % 2) as u8;
            let base = if label == 1 { 2 } else { 10 };
            let len = rng.gen_range(3..=max_len);
            let mut ids: Vec<u32> = (0..len).map(|_| base + rng.gen_range(0..8)).collect();
            ids.resize(max_len, 0);
            EncodedExample { ids, label }
        })
        .collect()
}

pub fn separable_split(seed: u64) -> EncodedSplit {
    EncodedSplit {
        train: separable_corpus(64, 8, seed),
        validation: separable_corpus(16, 8, seed + 1),
        test: separable_corpus(16, 8, seed + 2),
    }
}

pub fn toy_model_config() -> ModelConfig {
    ModelConfig {
        vocab_size: 18,
        max_len: 8,
        embed_dim: 4,
        conv_filters: 4,
        kernel_size: 3,
        pool_size: 2,
        gru_units: 4,
        attention_width: 4,
        dropout: 0.2,
    }
}

pub fn toy_train_config(epochs: usize, parallelism: Parallelism) -> TrainConfig {
    TrainConfig {
        epochs,
        batch_size: 16,
        patience: epochs,
        seed: 17,
        adam: AdamConfig {
            learning_rate: 0.01,
            ..AdamConfig::default()
        },
        grad_clip_norm: None,
        parallelism,
    }
}
