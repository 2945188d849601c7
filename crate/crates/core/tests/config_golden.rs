mod common;

use ideation_core::config::RunConfig;
use ideation_core::trainer::TrainConfig;
use ideation_core::ModelConfig;

#[test]
fn default_config_serialises_to_the_golden_file() {
    let golden = std::fs::read_to_string(common::data_dir().join("default_run.toml")).unwrap();
    assert_eq!(RunConfig::default().to_toml(), golden);
    assert_eq!(RunConfig::from_toml(&golden).unwrap(), RunConfig::default());
}

#[test]
fn default_config_feeds_the_published_settings_downstream() {
    let c = RunConfig::default();
    assert_eq!(c.model_config(), ModelConfig::paper());
    let t = c.train_config();
    assert_eq!(t, TrainConfig { seed: 42, ..TrainConfig::default() });
    assert_eq!(t.adam.learning_rate, 0.001);
    assert_eq!((t.adam.beta1, t.adam.beta2, t.adam.epsilon), (0.9, 0.999, 1e-8));
}
