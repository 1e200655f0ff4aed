//! Per-window skip-gram objectives with negative sampling and their
//! analytic gradients.
//!
//! For a window with target `i`, context `C` and negatives `N(j)` drawn for
//! each context position, the aspect-weighted loss is
//!
//! ```text
//! L = sum_s p_s * l_s
//! l_s = sum_{j in C} [ -log sig(<P_i, Q_j(s)>) - sum_{n in N(j)} log sig(-<P_i, Q_n(s)>) ]
//! ```
//!
//! where `p` is the aspect distribution of the window. When `p` comes from
//! a (Gumbel-)softmax over readout scores, the gradient also flows through
//! `p` into `P_i` and the readout rows.

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::store::RowSource;

use super::selection::{dot, readout_into, softmax_in_place};

/// How the aspect weights of a window are obtained.
#[derive(Debug, Clone, Copy)]
pub enum AspectWeights<'a> {
    /// Caller-supplied probabilities, treated as constants.
    Fixed(&'a [f64]),
    /// `softmax(scores)`.
    Softmax,
    /// `softmax((scores + noise) / tau)`. With `hard`, the forward pass uses
    /// the one-hot argmax while gradients flow through the soft sample.
    Gumbel { tau: f64, noise: &'a [f64], hard: bool },
    /// No aspect inference: every context row is the mean of its aspect rows.
    Pooled,
}

/// One training window.
#[derive(Debug, Clone, Copy)]
pub struct WindowSpec<'a> {
    pub target: NodeId,
    pub context: &'a [NodeId],
    /// `negatives_per_pair` entries per context position, in context order.
    pub negatives: &'a [NodeId],
    pub negatives_per_pair: usize,
    /// Nodes pooled by the readout; usually the full context.
    pub selection_context: &'a [NodeId],
    pub weights: AspectWeights<'a>,
}

/// Identifies the parameter row a gradient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowKey {
    pub aspect: usize,
    pub node: NodeId,
}

/// Loss and sparse gradient of one window. Row gradients may repeat a key;
/// they are meant to be summed.
#[derive(Debug, Clone, Default)]
pub struct WindowGradient {
    pub loss: f64,
    /// Aspect probabilities used in the forward pass.
    pub probs: Vec<f64>,
    pub target_grad: Vec<f64>,
    keys: Vec<RowKey>,
    values: Vec<f64>,
    dim: usize,
}

impl WindowGradient {
    pub fn rows(&self) -> impl Iterator<Item = (RowKey, &[f64])> + '_ {
        self.keys.iter().copied().zip(self.values.chunks(self.dim.max(1)))
    }

    pub fn row_count(&self) -> usize {
        self.keys.len()
    }

    fn reset(&mut self, dim: usize, aspects: usize) {
        self.loss = 0.0;
        self.dim = dim;
        self.probs.clear();
        self.probs.resize(aspects, 0.0);
        self.target_grad.clear();
        self.target_grad.resize(dim, 0.0);
        self.keys.clear();
        self.values.clear();
    }

    #[inline]
    fn push_scaled(&mut self, key: RowKey, coef: f64, v: &[f64]) {
        self.keys.push(key);
        self.values.extend(v.iter().map(|x| coef * x));
    }
}

/// Reusable buffers for the window kernels.
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    p: Vec<f64>,
    q: Vec<f64>,
    row: Vec<f64>,
    readouts: Vec<f64>,
    ell: Vec<f64>,
    soft: Vec<f64>,
}

impl Scratch {
    fn prepare(&mut self, dim: usize, aspects: usize) {
        self.p.resize(dim, 0.0);
        self.q.resize(dim, 0.0);
        self.row.resize(dim, 0.0);
        self.readouts.resize(dim * aspects, 0.0);
        self.ell.clear();
        self.ell.resize(aspects, 0.0);
        self.soft.clear();
        self.soft.resize(aspects, 0.0);
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `ln(1 + e^x)`, i.e. `-log sig(-x)`.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
fn axpy(acc: &mut [f64], a: f64, x: &[f64]) {
    for (y, v) in acc.iter_mut().zip(x) {
        *y += a * v;
    }
}

fn check_spec(spec: &WindowSpec<'_>, aspects: usize) -> Result<()> {
    if spec.context.is_empty() {
        return Err(Error::EmptyContext);
    }
    if spec.negatives.len() != spec.context.len() * spec.negatives_per_pair {
        return Err(Error::LengthMismatch(format!(
            "{} negatives for {} context nodes x {} per pair",
            spec.negatives.len(),
            spec.context.len(),
            spec.negatives_per_pair
        )));
    }
    match spec.weights {
        AspectWeights::Fixed(w) if w.len() != aspects => Err(Error::LengthMismatch(format!(
            "{} fixed weights for {} aspects",
            w.len(),
            aspects
        ))),
        AspectWeights::Gumbel { noise, .. } if aspects > 1 && noise.len() != aspects => Err(Error::LengthMismatch(
            format!("{} noise values for {} aspects", noise.len(), aspects),
        )),
        AspectWeights::Gumbel { tau, .. } if tau.is_nan() || tau <= 0.0 => Err(Error::Config(format!("tau must be > 0 (got {tau})"))),
        _ if spec.selection_context.is_empty()
            && matches!(spec.weights, AspectWeights::Softmax | AspectWeights::Gumbel { .. })
            && aspects > 1 =>
        {
            Err(Error::EmptyContext)
        }
        _ => Ok(()),
    }
}

/// Loss and analytic gradients of one window.
pub fn window_loss<S: RowSource + ?Sized>(store: &S, spec: &WindowSpec<'_>) -> Result<WindowGradient> {
    check_spec(spec, store.aspects())?;
    let mut scratch = Scratch::default();
    let mut out = WindowGradient::default();
    window_loss_into(store, spec, &mut scratch, &mut out)?;
    Ok(out)
}

pub(crate) fn window_loss_into<S: RowSource + ?Sized>(
    store: &S,
    spec: &WindowSpec<'_>,
    scratch: &mut Scratch,
    out: &mut WindowGradient,
) -> Result<()> {
    let d = store.dim();
    let k = store.aspects();
    out.reset(d, k);
    scratch.prepare(d, k);
    store.read_target(spec.target, &mut scratch.p);

    if let AspectWeights::Pooled = spec.weights {
        pooled_window(store, spec, scratch, out);
        return Ok(());
    }

    // Aspect weights. `kappa` scales the gradient through the distribution;
    // zero means the weights are constants.
    let mut kappa = 0.0;
    if k == 1 {
        out.probs[0] = 1.0;
        scratch.soft[0] = 1.0;
    } else {
        match spec.weights {
            AspectWeights::Fixed(w) => {
                out.probs.copy_from_slice(w);
                scratch.soft.copy_from_slice(w);
            }
            AspectWeights::Softmax | AspectWeights::Gumbel { .. } => {
                for s in 0..k {
                    readout_into(
                        store,
                        spec.selection_context,
                        s,
                        &mut scratch.readouts[s * d..(s + 1) * d],
                        &mut scratch.row,
                    );
                    scratch.soft[s] = dot(&scratch.p, &scratch.readouts[s * d..(s + 1) * d]);
                }
                if scratch.soft.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFiniteScore);
                }
                let mut hard = false;
                if let AspectWeights::Gumbel { tau, noise, hard: h } = spec.weights {
                    for (z, g) in scratch.soft.iter_mut().zip(noise) {
                        *z = (*z + g) / tau;
                    }
                    kappa = 1.0 / tau;
                    hard = h;
                } else {
                    kappa = 1.0;
                }
                softmax_in_place(&mut scratch.soft);
                if hard {
                    let best = argmax(&scratch.soft);
                    out.probs.iter_mut().for_each(|p| *p = 0.0);
                    out.probs[best] = 1.0;
                } else {
                    out.probs.copy_from_slice(&scratch.soft);
                }
            }
            AspectWeights::Pooled => unreachable!(),
        }
    }

    let m = spec.negatives_per_pair;
    for (c, &j) in spec.context.iter().enumerate() {
        let negs = &spec.negatives[c * m..(c + 1) * m];
        for s in 0..k {
            let w = out.probs[s];
            store.read_context(s, j, &mut scratch.q);
            let x = dot(&scratch.p, &scratch.q);
            scratch.ell[s] += softplus(-x);
            if w != 0.0 {
                let g = w * (sigmoid(x) - 1.0);
                axpy(&mut out.target_grad, g, &scratch.q);
                out.push_scaled(RowKey { aspect: s, node: j }, g, &scratch.p);
            }
            for &n in negs {
                store.read_context(s, n, &mut scratch.q);
                let y = dot(&scratch.p, &scratch.q);
                scratch.ell[s] += softplus(y);
                if w != 0.0 {
                    let g = w * sigmoid(y);
                    axpy(&mut out.target_grad, g, &scratch.q);
                    out.push_scaled(RowKey { aspect: s, node: n }, g, &scratch.p);
                }
            }
        }
    }
    out.loss = out.probs.iter().zip(&scratch.ell).map(|(w, l)| w * l).sum();

    if kappa != 0.0 {
        // d L / d score_s = kappa * p_s * (l_s - sum_t p_t l_t)
        let mean: f64 = scratch.soft.iter().zip(&scratch.ell).map(|(p, l)| p * l).sum();
        let inv = 1.0 / spec.selection_context.len() as f64;
        for s in 0..k {
            let coef = kappa * scratch.soft[s] * (scratch.ell[s] - mean);
            if coef == 0.0 {
                continue;
            }
            axpy(&mut out.target_grad, coef, &scratch.readouts[s * d..(s + 1) * d]);
            for &j in spec.selection_context {
                out.push_scaled(RowKey { aspect: s, node: j }, coef * inv, &scratch.p);
            }
        }
    }
    Ok(())
}

/// Single-aspect target: plain skip-gram against aspect-averaged context rows.
fn pooled_window<S: RowSource + ?Sized>(
    store: &S,
    spec: &WindowSpec<'_>,
    scratch: &mut Scratch,
    out: &mut WindowGradient,
) {
    let k = store.aspects();
    let inv_k = 1.0 / k as f64;
    out.probs.iter_mut().for_each(|p| *p = inv_k);
    let m = spec.negatives_per_pair;
    let pooled = |node: NodeId, scratch: &mut Scratch| {
        scratch.q.iter_mut().for_each(|x| *x = 0.0);
        for s in 0..k {
            store.read_context(s, node, &mut scratch.row);
            axpy(&mut scratch.q, 1.0, &scratch.row);
        }
        scratch.q.iter_mut().for_each(|x| *x *= inv_k);
    };
    for (c, &j) in spec.context.iter().enumerate() {
        pooled(j, scratch);
        let x = dot(&scratch.p, &scratch.q);
        out.loss += softplus(-x);
        let g = sigmoid(x) - 1.0;
        axpy(&mut out.target_grad, g, &scratch.q);
        for s in 0..k {
            out.push_scaled(RowKey { aspect: s, node: j }, g * inv_k, &scratch.p);
        }
        for &n in &spec.negatives[c * m..(c + 1) * m] {
            pooled(n, scratch);
            let y = dot(&scratch.p, &scratch.q);
            out.loss += softplus(y);
            let g = sigmoid(y);
            axpy(&mut out.target_grad, g, &scratch.q);
            for s in 0..k {
                out.push_scaled(RowKey { aspect: s, node: n }, g * inv_k, &scratch.p);
            }
        }
    }
}

/// Plain single-context skip-gram window (the Deepwalk objective) over
/// aspect 0. Kept separate from the aspect kernel so the one-aspect case of
/// the latter can be checked against it.
pub(crate) fn skipgram_window_into<S: RowSource + ?Sized>(
    store: &S,
    target: NodeId,
    context: &[NodeId],
    negatives: &[NodeId],
    negatives_per_pair: usize,
    scratch: &mut Scratch,
    out: &mut WindowGradient,
) {
    let d = store.dim();
    out.reset(d, 1);
    out.probs[0] = 1.0;
    scratch.prepare(d, 1);
    store.read_target(target, &mut scratch.p);
    let m = negatives_per_pair;
    for (c, &j) in context.iter().enumerate() {
        store.read_context(0, j, &mut scratch.q);
        let x = dot(&scratch.p, &scratch.q);
        out.loss += softplus(-x);
        let g = sigmoid(x) - 1.0;
        axpy(&mut out.target_grad, g, &scratch.q);
        out.push_scaled(RowKey { aspect: 0, node: j }, g, &scratch.p);
        for &n in &negatives[c * m..(c + 1) * m] {
            store.read_context(0, n, &mut scratch.q);
            let y = dot(&scratch.p, &scratch.q);
            out.loss += softplus(y);
            let g = sigmoid(y);
            axpy(&mut out.target_grad, g, &scratch.q);
            out.push_scaled(RowKey { aspect: 0, node: n }, g, &scratch.p);
        }
    }
}

fn argmax(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in x.iter().enumerate() {
        if v > x[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::EmbeddingStore;

    fn spec<'a>(
        context: &'a [NodeId],
        negatives: &'a [NodeId],
        m: usize,
        weights: AspectWeights<'a>,
    ) -> WindowSpec<'a> {
        WindowSpec {
            target: 0,
            context,
            negatives,
            negatives_per_pair: m,
            selection_context: context,
            weights,
        }
    }

    #[test]
    fn zero_embeddings_give_log2_per_term() {
        let store = EmbeddingStore::zeros(6, 4, 3).unwrap();
        let context = [1, 2, 3];
        let negatives = [4, 5, 4, 5, 1, 2];
        let probs = [0.2, 0.5, 0.3];
        let g = window_loss(&store, &spec(&context, &negatives, 2, AspectWeights::Fixed(&probs))).unwrap();
        let expected = 3.0 * 3.0 * std::f64::consts::LN_2;
        assert!((g.loss - expected).abs() < 1e-12, "{} vs {}", g.loss, expected);
    }

    #[test]
    fn one_aspect_matches_plain_skipgram() {
        let store = EmbeddingStore::init_random(6, 5, 1, 3, Some(0.8)).unwrap();
        let context = [1, 2, 3, 2];
        let negatives = [4, 5, 4, 5, 1, 2, 3, 3];
        let noise = [0.3];
        let aspect = window_loss(
            &store,
            &spec(&context, &negatives, 2, AspectWeights::Gumbel { tau: 0.5, noise: &noise, hard: false }),
        )
        .unwrap();
        let mut plain = WindowGradient::default();
        skipgram_window_into(&store, 0, &context, &negatives, 2, &mut Scratch::default(), &mut plain);
        assert_eq!(aspect.loss.to_bits(), plain.loss.to_bits());
        assert_eq!(aspect.target_grad, plain.target_grad);
        assert_eq!(aspect.keys, plain.keys);
        assert_eq!(aspect.values, plain.values);
    }

    #[test]
    fn hard_sample_is_one_hot_forward() {
        let store = EmbeddingStore::init_random(5, 3, 3, 8, Some(1.0)).unwrap();
        let context = [1, 2];
        let negatives = [3, 4];
        let noise = [0.1, -0.4, 0.9];
        let g = window_loss(
            &store,
            &spec(&context, &negatives, 1, AspectWeights::Gumbel { tau: 0.5, noise: &noise, hard: true }),
        )
        .unwrap();
        assert_eq!(g.probs.iter().filter(|&&p| p == 1.0).count(), 1);
        assert_eq!(g.probs.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn rejects_mismatched_negatives() {
        let store = EmbeddingStore::zeros(4, 2, 2).unwrap();
        let err = window_loss(&store, &spec(&[1, 2], &[3], 1, AspectWeights::Softmax)).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch(_)));
        let err = window_loss(&store, &spec(&[], &[], 1, AspectWeights::Softmax)).unwrap_err();
        assert!(matches!(err, Error::EmptyContext));
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((softplus(800.0) - 800.0).abs() < 1e-9);
        assert!(softplus(-800.0) >= 0.0);
    }
}
