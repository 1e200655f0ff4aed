//! Post-training views of the aspect structure: how peaked each node's
//! aspect distribution is, and how similar its aspect rows are.

use serde::Serialize;

use crate::graph::NodeId;
use crate::store::{EmbeddingStore, RowSource};
use crate::walk::{context_of, WalkCorpus};

use super::regularizer::cosine;
use super::selection::{dot, readout_into, softmax_in_place};

/// One row of the aspect-distribution table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeAspectStats {
    pub node: NodeId,
    /// Occurrences as a window target.
    pub frequency: u64,
    /// Variance of the node's mean aspect-probability vector.
    pub variance: f64,
}

/// Per node: the aspect probabilities of every window it is the target of
/// (noise-free softmax of the readout scores) are averaged, and the
/// population variance of that K-vector is reported. Nodes never seen as a
/// target get frequency 0 and variance 0.
pub fn aspect_distribution_stats(store: &EmbeddingStore, corpus: &WalkCorpus, window: usize) -> Vec<NodeAspectStats> {
    let (n, k, d) = (store.node_count(), store.aspects(), store.dim());
    let mut sums = vec![0.0; n * k];
    let mut freq = vec![0u64; n];
    let mut context = Vec::new();
    let mut p = vec![0.0; d];
    let mut acc = vec![0.0; d];
    let mut row = vec![0.0; d];
    let mut probs = vec![0.0; k];
    for walk in corpus.iter() {
        for t in 0..walk.len() {
            context_of(walk, t, window, &mut context);
            if context.is_empty() {
                continue;
            }
            let target = walk[t];
            store.read_target(target, &mut p);
            for (s, z) in probs.iter_mut().enumerate() {
                readout_into(store, &context, s, &mut acc, &mut row);
                *z = dot(&p, &acc);
            }
            softmax_in_place(&mut probs);
            freq[target as usize] += 1;
            for (a, z) in sums[target as usize * k..(target as usize + 1) * k].iter_mut().zip(&probs) {
                *a += z;
            }
        }
    }
    (0..n)
        .map(|v| {
            let variance = if freq[v] == 0 {
                0.0
            } else {
                let mean_vec: Vec<f64> = sums[v * k..(v + 1) * k].iter().map(|x| x / freq[v] as f64).collect();
                population_variance(&mean_vec)
            };
            NodeAspectStats {
                node: v as NodeId,
                frequency: freq[v],
                variance,
            }
        })
        .collect()
}

pub(crate) fn population_variance(x: &[f64]) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.len() as f64
}

/// `K x K` matrix of mean (signed) cosine similarity between aspect rows,
/// averaged over nodes. The diagonal is 1.
pub fn aspect_heatmap(store: &EmbeddingStore) -> Vec<Vec<f64>> {
    let k = store.aspects();
    let mut out = vec![vec![0.0; k]; k];
    let (sums, nodes) = pairwise(store, |f| f);
    for i in 0..k {
        out[i][i] = 1.0;
        for j in i + 1..k {
            let v = if nodes == 0 { 0.0 } else { sums[i * k + j] / nodes as f64 };
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// Mean of `|cos|` over all nodes and aspect pairs `i < j`; 0 when `K < 2`.
pub fn mean_offdiag_abs_cosine(store: &EmbeddingStore) -> f64 {
    let k = store.aspects();
    if k < 2 {
        return 0.0;
    }
    let (sums, nodes) = pairwise(store, f64::abs);
    let total: f64 = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).map(|(i, j)| sums[i * k + j]).sum();
    let pairs = k * (k - 1) / 2;
    total / (pairs * nodes.max(1)) as f64
}

fn pairwise(store: &EmbeddingStore, f: impl Fn(f64) -> f64) -> (Vec<f64>, usize) {
    let (n, k, d) = (store.node_count(), store.aspects(), store.dim());
    let mut sums = vec![0.0; k * k];
    let mut rows = vec![0.0; k * d];
    for h in 0..n as NodeId {
        for s in 0..k {
            store.read_context(s, h, &mut rows[s * d..(s + 1) * d]);
        }
        for i in 0..k {
            for j in i + 1..k {
                let c = cosine(&rows[i * d..(i + 1) * d], &rows[j * d..(j + 1) * d]).unwrap_or(0.0);
                sums[i * k + j] += f(c);
            }
        }
    }
    (sums, n)
}
