//! Metapath-guided training on a typed author-paper network, then ranking
//! the held-out authors of each paper.
//!
//! ```bash
//! cargo run --release --example hetnet_author_ranking
//! ```

use std::collections::HashSet;

use aspect_embed::eval::split_edges;
use aspect_embed::hetnet::{ranking_metrics, train_het, HetConfig};
use aspect_embed::synth::author_paper;
use aspect_embed::trainer::TrainerConfig;

fn main() -> aspect_embed::Result<()> {
    let (authors, papers) = (80, 400);
    let graph = author_paper(authors, papers, 4, 3, 0.95, 5)?;
    let split = split_edges(&graph, 0)?;

    let config = HetConfig {
        trainer: TrainerConfig {
            dim: 16,
            aspects: 3,
            epochs: 3,
            ..TrainerConfig::default()
        },
        metapaths: vec!["A,P,A".into(), "P,A,P".into()],
        // papers get one context embedding; authors select among aspects
        // using the paper nodes around them
        single_aspect_types: vec!["P".into()],
        aspect_context_types: vec!["P".into()],
    };
    let (mut store, _) = train_het(&split.residual, &config)?;
    let u = store.finalize().to_vec();
    let d = store.dim();
    let dot = |a: usize, b: usize| -> f64 { (0..d).map(|t| (u[a * d + t] * u[b * d + t]) as f64).sum() };

    // one query per paper: every author not already linked to it in the
    // residual graph is a candidate, held-out authors are the positives
    let held: HashSet<(u32, u32)> = split.test_pos.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let queries: Vec<Vec<(f64, bool)>> = (authors..authors + papers)
        .map(|p| {
            (0..authors)
                .filter(|&a| !split.residual.has_edge(a as u32, p as u32))
                .map(|a| (dot(a, p), held.contains(&(a as u32, p as u32))))
                .collect()
        })
        .collect();
    let report = ranking_metrics(&queries, &[1, 5, 10])?;
    println!("{} queries ({} without a held-out author)", report.queries, report.skipped);
    for ((n, r), (_, f)) in report.recall.iter().zip(&report.f1) {
        println!("recall@{n:<2} {r:.3}  F1@{n:<2} {f:.3}");
    }
    println!("AUC {:.3}", report.auc);
    Ok(())
}
