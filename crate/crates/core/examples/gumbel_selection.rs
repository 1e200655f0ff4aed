//! Aspect selection for one window: readout scores, Gumbel noise, and the
//! effect of the temperature.
//!
//! ```bash
//! cargo run --example gumbel_selection
//! ```

use aspect_embed::trainer::{aspect_logits, gumbel_softmax, sample_gumbel, softmax};
use aspect_embed::EmbeddingStore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> aspect_embed::Result<()> {
    let store = EmbeddingStore::init_random(6, 8, 4, 3, Some(1.0))?;
    let target = 0;
    let context = [1, 2, 4];

    let scores = aspect_logits(&store, target, &context)?;
    println!("scores   {scores:.3?}");
    println!("softmax  {:.3?}", softmax(&scores)?);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = sample_gumbel(&mut rng, scores.len());
    for tau in [5.0, 1.0, 0.5, 0.1, 0.01] {
        let d = gumbel_softmax(&scores, tau, &noise)?;
        println!("tau {tau:<5} {:.3?}", d.probs);
    }

    // fresh noise per draw: how often each aspect wins at tau = 0.5
    let mut wins = vec![0usize; scores.len()];
    for _ in 0..10_000 {
        let g = sample_gumbel(&mut rng, scores.len());
        let d = gumbel_softmax(&scores, 0.5, &g)?;
        let best = (0..d.probs.len()).max_by(|&a, &b| d.probs[a].total_cmp(&d.probs[b])).unwrap();
        wins[best] += 1;
    }
    let freq: Vec<f64> = wins.iter().map(|&w| w as f64 / 10_000.0).collect();
    println!("argmax frequency {freq:.3?} (matches softmax above)");
    Ok(())
}
