//! Masked aspect-diversity regularizer.
//!
//! For each node `h` and aspect pair `i < j`, the penalty is
//! `w * |cos(Q_h(i), Q_h(j))|` with the gate `w = 1` iff `|cos| >= epsilon`.
//! The gate is a constant in the gradient; `|.|` uses `sign(cos)` with
//! subgradient zero at `cos = 0`.

use crate::graph::NodeId;
use crate::store::RowSource;

use super::objective::RowKey;
use super::selection::dot;

/// Cosine similarity; zero when either vector has zero norm.
pub fn aspect_similarity(a: &[f32], b: &[f32]) -> f64 {
    let a: Vec<f64> = a.iter().map(|&x| x as f64).collect();
    let b: Vec<f64> = b.iter().map(|&x| x as f64).collect();
    cosine(&a, &b).unwrap_or(0.0)
}

/// `None` when a norm is zero.
#[inline]
pub(crate) fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Value and gradients of the regularizer over a node subset.
#[derive(Debug, Clone, Default)]
pub struct RegularizerOutput {
    pub value: f64,
    /// Pairs whose `|cos| >= epsilon` (penalized).
    pub active_pairs: usize,
    /// Pairs skipped because an aspect row had zero norm.
    pub zero_norm_pairs: usize,
    pub grads: Vec<(RowKey, Vec<f64>)>,
}

/// Evaluates the regularizer over `nodes` (each listed node counted once per
/// occurrence). Returns zero when the store has a single aspect.
pub fn regularizer<S: RowSource + ?Sized>(store: &S, epsilon: f64, nodes: &[NodeId]) -> RegularizerOutput {
    let k = store.aspects();
    let d = store.dim();
    let mut out = RegularizerOutput::default();
    if k < 2 {
        return out;
    }
    let mut scratch = RegScratch::new(k, d);
    for &h in nodes {
        let stats = node_regularizer(store, epsilon, h, &mut scratch);
        out.value += stats.value;
        out.active_pairs += stats.active_pairs;
        out.zero_norm_pairs += stats.zero_norm_pairs;
        for s in 0..k {
            out.grads.push((RowKey { aspect: s, node: h }, scratch.grad(s).to_vec()));
        }
    }
    out
}

pub(crate) struct RegScratch {
    k: usize,
    d: usize,
    rows: Vec<f64>,
    grads: Vec<f64>,
    norms: Vec<f64>,
}

impl RegScratch {
    pub(crate) fn new(k: usize, d: usize) -> Self {
        Self {
            k,
            d,
            rows: vec![0.0; k * d],
            grads: vec![0.0; k * d],
            norms: vec![0.0; k],
        }
    }

    pub(crate) fn grad(&self, aspect: usize) -> &[f64] {
        &self.grads[aspect * self.d..(aspect + 1) * self.d]
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NodeRegStats {
    pub value: f64,
    pub active_pairs: usize,
    pub zero_norm_pairs: usize,
}

/// Regularizer terms of one node; gradients are left in `scratch`.
pub(crate) fn node_regularizer<S: RowSource + ?Sized>(
    store: &S,
    epsilon: f64,
    node: NodeId,
    scratch: &mut RegScratch,
) -> NodeRegStats {
    let (k, d) = (scratch.k, scratch.d);
    for s in 0..k {
        store.read_context(s, node, &mut scratch.rows[s * d..(s + 1) * d]);
        let r = &scratch.rows[s * d..(s + 1) * d];
        scratch.norms[s] = dot(r, r).sqrt();
    }
    scratch.grads.iter_mut().for_each(|g| *g = 0.0);
    let mut stats = NodeRegStats::default();
    for i in 0..k {
        for j in i + 1..k {
            let (ni, nj) = (scratch.norms[i], scratch.norms[j]);
            if ni == 0.0 || nj == 0.0 {
                stats.zero_norm_pairs += 1;
                continue;
            }
            let (a, b) = (&scratch.rows[i * d..(i + 1) * d], &scratch.rows[j * d..(j + 1) * d]);
            let f = (dot(a, b) / (ni * nj)).clamp(-1.0, 1.0);
            if f.abs() < epsilon {
                continue;
            }
            stats.value += f.abs();
            stats.active_pairs += 1;
            let sign = if f > 0.0 {
                1.0
            } else if f < 0.0 {
                -1.0
            } else {
                0.0
            };
            if sign == 0.0 {
                continue;
            }
            // d cos / d a = b / (|a||b|) - cos * a / |a|^2
            let inv_ab = 1.0 / (ni * nj);
            let (ca, cb) = (f / (ni * ni), f / (nj * nj));
            for t in 0..d {
                let (at, bt) = (scratch.rows[i * d + t], scratch.rows[j * d + t]);
                scratch.grads[i * d + t] += sign * (bt * inv_ab - ca * at);
                scratch.grads[j * d + t] += sign * (at * inv_ab - cb * bt);
            }
        }
    }
    stats
}
