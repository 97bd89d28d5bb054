use std::collections::BTreeMap;

use eventea_core::dataset::toy_fixture;
use eventea_core::embeddings::ProviderChain;
use eventea_core::kg::{Link, NamePolicy};
use eventea_core::tae::feature_table;
use eventea_core::train::{train, TrainConfig, TrainInput, TrainOutcome};

fn toy_config(seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 32,
        batch_size: 5,
        learning_rate: 0.01,
        margin: 1.0,
        max_epochs: 50,
        patience: 50,
        seed,
        ..TrainConfig::default()
    }
}

fn run(seed: u64) -> TrainOutcome {
    let (kg1, kg2, alignment) = toy_fixture(20, seed);
    let provider = ProviderChain::fallback(32, seed);
    let config = toy_config(seed);
    let ids = |g: &eventea_core::kg::KnowledgeGraph| g.entities().iter().cloned().collect::<Vec<_>>();
    let policy = NamePolicy::default();
    let src: BTreeMap<_, _> = feature_table(&kg1, &ids(&kg1), &provider, &policy, config.encoder_options()).unwrap();
    let tgt = feature_table(&kg2, &ids(&kg2), &provider, &policy, config.encoder_options()).unwrap();
    let train_links: Vec<Link> = alignment.train().cloned().collect();
    let valid_links: Vec<Link> = alignment.valid().cloned().collect();
    let input = TrainInput { source: &src, target: &tgt, train: &train_links, valid: &valid_links };
    train(&input, &config).unwrap()
}

#[test]
fn toy_reaches_perfect_validation() {
    for seed in 0..5 {
        let out = run(seed);
        assert!(out.log.iter().any(|l| l.valid_hits_at_1 == 1.0), "seed {seed}");
        assert!(out.log.len() <= 51);
        assert_eq!(out.best_valid_hits_at_1, 1.0);
    }
}

#[test]
fn toy_training_is_reproducible() {
    let a = run(3);
    let b = run(3);
    assert_eq!(a.log, b.log);
    assert_eq!(a.params, b.params);
}
