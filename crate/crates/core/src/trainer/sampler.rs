use rand::Rng;

use crate::graph::{NodeId, NodeTypes};

/// Exponent applied to corpus frequencies for the noise distribution.
pub const UNIGRAM_POWER: f64 = 0.75;

#[derive(Debug, Clone)]
struct Bucket {
    nodes: Vec<NodeId>,
    cdf: Vec<f64>,
}

impl Bucket {
    fn new(nodes: Vec<NodeId>, freqs: &[u64], power: f64) -> Self {
        let mut weights: Vec<f64> = nodes.iter().map(|&v| (freqs[v as usize] as f64).powf(power)).collect();
        if weights.iter().all(|&w| w == 0.0) {
            weights.iter_mut().for_each(|w| *w = 1.0);
        }
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Self { nodes, cdf }
    }

    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c <= u).min(self.nodes.len() - 1);
        self.nodes[i]
    }
}

/// Noise distribution `freq^0.75` over nodes, optionally split by node type
/// so that negatives share the type of the context node they contrast.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    buckets: Vec<Bucket>,
}

impl NegativeSampler {
    pub fn unigram(freqs: &[u64]) -> Self {
        let nodes = (0..freqs.len() as NodeId).collect();
        Self {
            buckets: vec![Bucket::new(nodes, freqs, UNIGRAM_POWER)],
        }
    }

    pub fn by_type(freqs: &[u64], types: &NodeTypes) -> Self {
        let mut per_type: Vec<Vec<NodeId>> = vec![Vec::new(); types.len()];
        for v in 0..freqs.len() as NodeId {
            per_type[types.of(v) as usize].push(v);
        }
        let buckets = per_type
            .into_iter()
            .map(|nodes| {
                if nodes.is_empty() {
                    // a declared type without nodes is never a context type
                    Bucket { nodes: vec![0], cdf: vec![1.0] }
                } else {
                    Bucket::new(nodes, freqs, UNIGRAM_POWER)
                }
            })
            .collect();
        Self { buckets }
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Probability mass assigned to `node` within `bucket`.
    pub fn probability(&self, bucket: usize, node: NodeId) -> f64 {
        let b = &self.buckets[bucket];
        b.nodes
            .iter()
            .position(|&v| v == node)
            .map(|i| b.cdf[i] - if i == 0 { 0.0 } else { b.cdf[i - 1] })
            .unwrap_or(0.0)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, bucket: usize, rng: &mut R) -> NodeId {
        self.buckets[bucket].sample(rng)
    }
}
