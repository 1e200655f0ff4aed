//! Uniform random walks and the skip-gram windows they produce.
//!
//! ```bash
//! cargo run --example random_walks
//! ```

use aspect_embed::synth::planted_partition;
use aspect_embed::walk::WalkCorpus;

fn main() -> aspect_embed::Result<()> {
    let graph = planted_partition(3, 20, 0.3, 0.02, 4)?;
    let corpus = WalkCorpus::generate(&graph, 10, 80, 42)?;
    println!("{} walks, {} tokens", corpus.len(), corpus.token_count());

    let first: Vec<String> = corpus.walk(0).iter().take(15).map(|v| v.to_string()).collect();
    println!("walk 0 starts {}", first.join(" "));

    // a walk mostly stays inside its community
    let community = |v: u32| v / 20;
    let (mut same, mut steps) = (0usize, 0usize);
    for walk in corpus.iter() {
        for pair in walk.windows(2) {
            steps += 1;
            same += usize::from(community(pair[0]) == community(pair[1]));
        }
    }
    println!("{:.1}% of steps stay in the community", 100.0 * same as f64 / steps as f64);

    for w in corpus.windows(3).take(3) {
        println!("target {:>3} context {:?}", w.target, w.context);
    }

    let freqs = corpus.node_frequencies(graph.node_count());
    let busiest = (0..freqs.len()).max_by_key(|&v| freqs[v]).unwrap();
    println!("node {busiest} appears {} times (degree {})", freqs[busiest], graph.degree(busiest as u32));

    // same seed, same corpus, regardless of thread count
    let again = WalkCorpus::generate(&graph, 10, 80, 42)?;
    assert!(corpus.iter().eq(again.iter()));

    let mut cache = Vec::new();
    corpus.write_cache(&mut cache, &graph.content_hash())?;
    let restored = WalkCorpus::read_cache(cache.as_slice(), &graph, 10, 80, 42)?;
    println!("cache round trip: {} walks", restored.len());
    Ok(())
}
