//! Link-prediction evaluation: edge split, edge features, logistic
//! regression and AUC.

mod features;
mod logreg;
mod metrics;
mod split;

pub use features::{edge_features, feature_matrix, EdgeOperator};
pub use logreg::{fit_logreg, logistic_objective, LogReg, LogRegOptions};
pub use metrics::{auc_roc, ranking_metrics, RankingReport};
pub use split::{split_edges, Edge, EdgeSplit, SplitMeta};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::store::EmbeddingStore;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierSummary {
    pub l2: f64,
    pub weight_norm: f64,
    pub bias: f64,
    pub train_loss: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Outcome of one link-prediction evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// AUC on `test_pos` vs `test_neg`.
    pub auc: f64,
    /// AUC of the same classifier on its training edges.
    pub train_auc: f64,
    pub operator: EdgeOperator,
    pub split: SplitMeta,
    pub classifier: ClassifierSummary,
}

/// Fits a classifier on the training edges of `split` and scores the test
/// edges. `embeddings` is row-major `|V| x dim`.
pub fn evaluate(
    embeddings: &[f32],
    dim: usize,
    split: &EdgeSplit,
    operator: EdgeOperator,
    options: &LogRegOptions,
) -> Result<EvalReport> {
    let n = split.residual.node_count();
    if dim == 0 || embeddings.len() != n * dim {
        return Err(Error::LengthMismatch(format!(
            "{} embedding values for {} nodes x {} dims",
            embeddings.len(),
            n,
            dim
        )));
    }
    let (train_x, train_y) = labelled(embeddings, dim, &split.train_pos, &split.train_neg, operator);
    let (test_x, test_y) = labelled(embeddings, dim, &split.test_pos, &split.test_neg, operator);
    let model = fit_logreg(&train_x, &train_y, options)?;
    let train_auc = auc_roc(&model.decisions(&train_x), &train_y)?;
    let auc = auc_roc(&model.decisions(&test_x), &test_y)?;
    Ok(EvalReport {
        auc,
        train_auc,
        operator,
        split: split.meta(),
        classifier: ClassifierSummary {
            l2: options.l2,
            weight_norm: model.weights.iter().map(|w| w * w).sum::<f64>().sqrt(),
            bias: model.bias,
            train_loss: model.loss,
            iterations: model.iterations,
            converged: model.converged,
        },
    })
}

/// [`evaluate`] on the final embeddings `U` of a store.
pub fn evaluate_store(
    store: &mut EmbeddingStore,
    split: &EdgeSplit,
    operator: EdgeOperator,
    options: &LogRegOptions,
) -> Result<EvalReport> {
    let dim = store.dim();
    let u = store.finalize().to_vec();
    evaluate(&u, dim, split, operator, options)
}

fn labelled(embeddings: &[f32], dim: usize, pos: &[Edge], neg: &[Edge], op: EdgeOperator) -> (Vec<f64>, Vec<bool>) {
    let mut x = feature_matrix(embeddings, dim, pos, op);
    x.extend(feature_matrix(embeddings, dim, neg, op));
    let y = std::iter::repeat_n(true, pos.len()).chain(std::iter::repeat_n(false, neg.len())).collect();
    (x, y)
}
