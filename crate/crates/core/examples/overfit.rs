// scratch: tune the overfit experiment
use std::time::Instant;
use dsmention::corpus::CorpusSplit;
use dsmention::eval::span_prf;
use dsmention::fixtures::{generate, NamePool};
use dsmention::model::{build_model, ModelConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lr: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.003);
    let batch: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(16);
    let epochs: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(50);

    let train = generate(200, NamePool::Train, 42);
    let heldout = generate(50, NamePool::Heldout, 43);
    let split = CorpusSplit {
        train: train.clone(),
        validation: train.clone(),
        test: vec![],
        seed: 42,
    };
    let config = ModelConfig {
        word_dim: 25,
        char_dim: 16,
        char_hidden: 16,
        encoder_hidden: 32,
        encoder_layers: 1,
        dropout: 0.0,
        lr,
        l2: 0.0,
        batch_size: batch,
        max_epochs: epochs,
        patience: epochs,
        seed: 7,
        ..ModelConfig::default()
    };
    let t0 = Instant::now();
    let (mut model, _) = build_model(config, &train, None).unwrap();
    let history = model.train(&split).unwrap();
    let wall = t0.elapsed().as_secs_f64();

    let train_pred = model.predict_sentences(&train).unwrap();
    let train_gold: Vec<_> = train.iter().map(|s| s.spans()).collect();
    let train_m = span_prf(&train_gold, &train_pred).unwrap();

    let held_pred = model.predict_sentences(&heldout).unwrap();
    let held_gold: Vec<_> = heldout.iter().map(|s| s.spans()).collect();
    let held_m = span_prf(&held_gold, &held_pred).unwrap();

    println!("epochs run: {}", history.epochs.len());
    println!("best epoch: {} (val F1 {:.4})", history.best_epoch,
             history.best().map(|r| r.f1).unwrap_or(0.0));
    println!("train F1 {:.4}  heldout F1 {:.4}  wall {:.1}s", train_m.f1, held_m.f1, wall);
    for r in history.epochs.iter().take(12) {
        println!("  epoch {:2}: loss {:.4} f1 {:.4} ({:.2}s)", r.epoch, r.train_loss, r.f1, r.wall_seconds);
    }
}
