//! Save a trained model, reload it, and write word2vec text files.
//!
//! ```bash
//! cargo run --release --example export_embeddings -- /tmp/model
//! ```

use aspect_embed::store::{EmbeddingStore, Matrix};
use aspect_embed::synth::two_cliques;
use aspect_embed::trainer::{train, TrainerConfig};

fn main() -> aspect_embed::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("aspect-embed-export"));
    let graph = two_cliques(8)?;
    let config = TrainerConfig {
        dim: 6,
        aspects: 2,
        epochs: 2,
        ..TrainerConfig::default()
    };
    let store = train(&graph, &config)?;
    store.save_dir(&dir, graph.labels())?;
    println!("wrote {}", dir.display());

    let loaded = EmbeddingStore::load_dir(&dir, config.aspects, |s| graph.node_id(s), graph.node_count())?;
    let drift = store
        .final_embeddings()
        .unwrap()
        .iter()
        .zip(loaded.final_embeddings().unwrap())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f32, f32::max);
    println!("max change after reload {drift:.2e}");

    let mut text = Vec::new();
    loaded.write_matrix(Matrix::Aspect(1), graph.labels(), &mut text)?;
    for line in String::from_utf8_lossy(&text).lines().take(3) {
        println!("{line}");
    }
    Ok(())
}
