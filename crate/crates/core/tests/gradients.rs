mod common;

use aspect_embed::store::EmbeddingStore;
use aspect_embed::trainer::{window_loss, AspectWeights, WindowSpec};
use common::*;

#[test]
fn window_and_regularizer_gradients_match_finite_differences() {
    gradient_suite().unwrap();
}

#[test]
fn two_type_toy_gradients() {
    // nodes 0..3 are type A, 3..6 type B; the target is an A node whose
    // selection context keeps only the B neighbours
    let store = EmbeddingStore::init_random(6, 4, 2, 5, Some(0.8)).unwrap();
    let x = Params::from_store(&store);
    for (target, mode) in [(0, Mode::Softmax), (1, Mode::Pooled)] {
        let w = Window {
            target,
            context: vec![3, 2, 4],
            negatives: vec![5, 1, 0],
            m: 1,
            selection: vec![3, 4],
            mode,
        };
        let (_, analytic) = analytic_window_gradient(&store, &w);
        let numeric = numeric_gradient(&x, |y| oracle_loss(y, &w));
        for (a, b) in analytic.iter().zip(&numeric) {
            assert!(rel_err(*a, *b) < 1e-4, "{a} vs {b}");
        }
    }
}

#[test]
fn hard_sample_forward_uses_the_argmax_aspect() {
    let store = EmbeddingStore::init_random(5, 3, 3, 9, Some(1.0)).unwrap();
    let x = Params::from_store(&store);
    let noise = [0.3, -0.2, 1.5];
    let context = [1, 2];
    let negatives = [3, 4];
    let g = window_loss(
        &store,
        &WindowSpec {
            target: 0,
            context: &context,
            negatives: &negatives,
            negatives_per_pair: 1,
            selection_context: &context,
            weights: AspectWeights::Gumbel { tau: 0.5, noise: &noise, hard: true },
        },
    )
    .unwrap();
    let best = (0..3).max_by(|&a, &b| g.probs[a].total_cmp(&g.probs[b])).unwrap();
    let mut onehot = vec![0.0; 3];
    onehot[best] = 1.0;
    let w = Window {
        target: 0,
        context: context.to_vec(),
        negatives: negatives.to_vec(),
        m: 1,
        selection: context.to_vec(),
        mode: Mode::Fixed(onehot),
    };
    assert!(rel_err(g.loss, oracle_loss(&x, &w)) < 1e-12);
}
