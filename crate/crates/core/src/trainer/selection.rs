//! Context-driven aspect selection: average-pooling readout, per-aspect
//! scores and the Gumbel-Softmax relaxation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::store::RowSource;

/// Scores, noise and the resulting aspect probabilities for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct AspectDistribution {
    /// Per-aspect scores `<P_i, Readout(s)>` before noise.
    pub logits: Vec<f64>,
    /// Gumbel-Softmax output; sums to one.
    pub probs: Vec<f64>,
    /// Gumbel noise used for this sample (zeros for plain softmax).
    pub gumbel_noise: Vec<f64>,
}

/// Mean of the aspect-`s` context rows of `context`.
pub fn readout<S: RowSource + ?Sized>(store: &S, context: &[NodeId], aspect: usize) -> Result<Vec<f64>> {
    if context.is_empty() {
        return Err(Error::EmptyContext);
    }
    let d = store.dim();
    let mut acc = vec![0.0; d];
    let mut row = vec![0.0; d];
    readout_into(store, context, aspect, &mut acc, &mut row);
    Ok(acc)
}

#[inline]
pub(crate) fn readout_into<S: RowSource + ?Sized>(
    store: &S,
    context: &[NodeId],
    aspect: usize,
    acc: &mut [f64],
    row: &mut [f64],
) {
    acc.iter_mut().for_each(|x| *x = 0.0);
    for &j in context {
        store.read_context(aspect, j, row);
        for (a, r) in acc.iter_mut().zip(row.iter()) {
            *a += r;
        }
    }
    let inv = 1.0 / context.len() as f64;
    acc.iter_mut().for_each(|x| *x *= inv);
}

/// Scores `<P_target, Readout(s)(context)>` for every aspect.
pub fn aspect_logits<S: RowSource + ?Sized>(store: &S, target: NodeId, context: &[NodeId]) -> Result<Vec<f64>> {
    if context.is_empty() {
        return Err(Error::EmptyContext);
    }
    let d = store.dim();
    let mut p = vec![0.0; d];
    store.read_target(target, &mut p);
    (0..store.aspects())
        .map(|s| Ok(dot(&p, &readout(store, context, s)?)))
        .collect()
}

/// Draws `k` standard Gumbel variates `-ln(-ln u)`, `u ~ U(0, 1)`.
pub fn sample_gumbel<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k];
    fill_gumbel(rng, &mut out);
    out
}

#[inline]
pub(crate) fn fill_gumbel<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for g in out {
        let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
        *g = -(-u.ln()).ln();
    }
}

/// `softmax((scores + noise) / tau)`.
pub fn gumbel_softmax(scores: &[f64], tau: f64, noise: &[f64]) -> Result<AspectDistribution> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::Config(format!("tau must be > 0 (got {tau})")));
    }
    if scores.len() != noise.len() {
        return Err(Error::LengthMismatch(format!(
            "{} scores, {} noise values",
            scores.len(),
            noise.len()
        )));
    }
    if scores.iter().chain(noise).any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteScore);
    }
    let mut probs: Vec<f64> = scores.iter().zip(noise).map(|(s, g)| (s + g) / tau).collect();
    softmax_in_place(&mut probs);
    Ok(AspectDistribution {
        logits: scores.to_vec(),
        probs,
        gumbel_noise: noise.to_vec(),
    })
}

/// Plain softmax of the scores.
pub fn softmax(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteScore);
    }
    let mut probs = scores.to_vec();
    softmax_in_place(&mut probs);
    Ok(probs)
}

/// Numerically stable softmax. Outputs are floored at the smallest positive
/// normal so every probability stays strictly positive.
#[inline]
pub(crate) fn softmax_in_place(x: &mut [f64]) {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in x.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in x.iter_mut() {
        *v = (*v / sum).max(f64::MIN_POSITIVE);
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
