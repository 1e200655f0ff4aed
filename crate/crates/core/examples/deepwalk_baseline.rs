//! Single-embedding skip-gram baseline on a held-out edge split.
//!
//! ```bash
//! cargo run --release --example deepwalk_baseline
//! ```

use aspect_embed::eval::{evaluate_store, split_edges, EdgeOperator, LogRegOptions};
use aspect_embed::synth::planted_partition;
use aspect_embed::trainer::{train_deepwalk, TrainerConfig};
use aspect_embed::walk::WalkCorpus;

fn main() -> aspect_embed::Result<()> {
    let graph = planted_partition(4, 50, 0.2, 0.01, 1)?;
    let split = split_edges(&graph, 0)?;
    println!(
        "{} edges: {} train, {} held out, {} + {} negatives",
        graph.edge_count(),
        split.train_pos.len(),
        split.test_pos.len(),
        split.train_neg.len(),
        split.test_neg.len()
    );

    let config = TrainerConfig {
        epochs: 3,
        ..TrainerConfig::deepwalk(32)
    };
    let corpus = WalkCorpus::generate(&split.residual, config.walks_per_node, config.walk_length, config.seed)?;
    let (mut store, report) = train_deepwalk(&split.residual, &corpus, &config)?;
    for r in &report.records {
        println!("epoch {} loss {:.4}", r.epoch, r.mean_loss);
    }
    for op in EdgeOperator::ALL {
        let eval = evaluate_store(&mut store, &split, op, &LogRegOptions::default())?;
        println!("{op:<9} test AUC {:.4} (train {:.4})", eval.auc, eval.train_auc);
    }
    Ok(())
}
