//! How the aspect-similarity penalty spreads the aspect embeddings apart.
//!
//! ```bash
//! cargo run --release --example regularizer_heatmap
//! ```

use aspect_embed::synth::planted_partition;
use aspect_embed::trainer::{
    aspect_distribution_stats, aspect_heatmap, mean_offdiag_abs_cosine, train_on_corpus, TrainerConfig,
};
use aspect_embed::walk::WalkCorpus;

fn main() -> aspect_embed::Result<()> {
    let graph = planted_partition(4, 40, 0.2, 0.01, 2)?;
    let base = TrainerConfig {
        dim: 16,
        aspects: 4,
        epochs: 3,
        ..TrainerConfig::default()
    };
    let corpus = WalkCorpus::generate(&graph, base.walks_per_node, base.walk_length, base.seed)?;

    for (name, config) in [
        ("no penalty", TrainerConfig { reg_enabled: false, ..base.clone() }),
        ("eps 0.9", base.clone()),
        ("eps 0.1", TrainerConfig { epsilon: 0.1, ..base.clone() }),
    ] {
        let (store, _) = train_on_corpus(&graph, &corpus, &config)?;
        let stats = aspect_distribution_stats(&store, &corpus, config.window);
        let variance = stats.iter().map(|s| s.variance).sum::<f64>() / stats.len() as f64;
        println!(
            "{name}: mean off-diagonal |cos| {:.3}, mean selection variance {variance:.5}",
            mean_offdiag_abs_cosine(&store)
        );
        for row in aspect_heatmap(&store) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>6.2}")).collect();
            println!("  {}", cells.join(" "));
        }
    }
    Ok(())
}
