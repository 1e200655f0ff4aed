use serde::Serialize;

use crate::error::{Error, Result};

/// Rank-based (Mann-Whitney) area under the ROC curve. Tied scores share
/// their average rank, so a tie across classes counts one half.
pub fn auc_roc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(format!(
            "{} scores, {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFiniteScore);
    }
    let pos = labels.iter().filter(|&&y| y).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 averaged
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

/// Averaged ranking quality over queries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingReport {
    pub queries: usize,
    /// Queries without a positive or without a negative candidate.
    pub skipped: usize,
    /// `(N, mean recall@N)`.
    pub recall: Vec<(usize, f64)>,
    /// `(N, mean F1@N)`.
    pub f1: Vec<(usize, f64)>,
    pub auc: f64,
}

/// Per-query recall@N, F1@N and AUC, averaged over the usable queries.
/// Each query is a list of `(score, is_positive)` candidates; candidates are
/// ranked by descending score, ties keeping input order.
pub fn ranking_metrics(queries: &[Vec<(f64, bool)>], ns: &[usize]) -> Result<RankingReport> {
    let mut recall = vec![0.0; ns.len()];
    let mut f1 = vec![0.0; ns.len()];
    let mut auc = 0.0;
    let mut used = 0;
    let mut skipped = 0;
    for (q, cands) in queries.iter().enumerate() {
        let pos = cands.iter().filter(|c| c.1).count();
        if pos == 0 || pos == cands.len() {
            log::warn!("query {q} has no {} candidate; skipped", if pos == 0 { "positive" } else { "negative" });
            skipped += 1;
            continue;
        }
        if cands.iter().any(|c| c.0.is_nan()) {
            return Err(Error::NonFiniteScore);
        }
        let mut order: Vec<usize> = (0..cands.len()).collect();
        // partial_cmp keeps -0.0 and 0.0 tied, as the AUC does
        order.sort_by(|&a, &b| cands[b].0.partial_cmp(&cands[a].0).unwrap());
        for (slot, &n) in ns.iter().enumerate() {
            let hits = order.iter().take(n).filter(|&&i| cands[i].1).count() as f64;
            let r = hits / pos as f64;
            let p = if n == 0 { 0.0 } else { hits / n as f64 };
            recall[slot] += r;
            f1[slot] += if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        }
        let scores: Vec<f64> = cands.iter().map(|c| c.0).collect();
        let labels: Vec<bool> = cands.iter().map(|c| c.1).collect();
        auc += auc_roc(&scores, &labels)?;
        used += 1;
    }
    let mean = |v: f64| if used == 0 { 0.0 } else { v / used as f64 };
    Ok(RankingReport {
        queries: used,
        skipped,
        recall: ns.iter().copied().zip(recall.into_iter().map(mean)).collect(),
        f1: ns.iter().copied().zip(f1.into_iter().map(mean)).collect(),
        auc: mean(auc),
    })
}
