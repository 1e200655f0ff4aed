//! Multi-aspect training end to end: split, warm-up, train, evaluate.
//!
//! ```bash
//! cargo run --release --example train_link_prediction
//! ```

use aspect_embed::eval::{evaluate_store, split_edges, EdgeOperator, LogRegOptions};
use aspect_embed::synth::overlapping_communities;
use aspect_embed::trainer::{train_deepwalk, train_on_corpus, TrainerConfig};
use aspect_embed::walk::WalkCorpus;

fn main() -> aspect_embed::Result<()> {
    // nodes belong to two of six communities each
    let graph = overlapping_communities(240, 6, 2, 0.35, 0.002, 3)?;
    let split = split_edges(&graph, 0)?;
    let config = TrainerConfig {
        dim: 16,
        aspects: 4,
        epochs: 3,
        log_every: 200,
        ..TrainerConfig::default()
    };
    let corpus = WalkCorpus::generate(&split.residual, config.walks_per_node, config.walk_length, config.seed)?;

    let (mut store, report) = train_on_corpus(&split.residual, &corpus, &config)?;
    println!("{} windows per epoch on {} worker(s)", report.windows_per_epoch, report.workers);
    for r in report.records.iter().rev().take(3).rev() {
        println!("{}", r.to_line());
    }
    let options = LogRegOptions::default();
    let multi = evaluate_store(&mut store, &split, EdgeOperator::Hadamard, &options)?;

    let single = TrainerConfig {
        dim: config.dim * config.aspects,
        ..config.clone()
    };
    let (mut base, _) = train_deepwalk(&split.residual, &corpus, &single)?;
    let plain = evaluate_store(&mut base, &split, EdgeOperator::Hadamard, &options)?;

    println!("multi-aspect d={} K={}: AUC {:.4}", config.dim, config.aspects, multi.auc);
    println!("single embedding d={}: AUC {:.4}", single.dim, plain.auc);
    println!("classifier converged in {} iterations", multi.classifier.iterations);
    Ok(())
}
