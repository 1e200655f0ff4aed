//! Small random graphs with planted structure, for examples and tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng;

/// `communities` blocks of `size` nodes; each within-block pair is an edge
/// with probability `p_in`, each cross-block pair with `p_out`.
pub fn planted_partition(communities: usize, size: usize, p_in: f64, p_out: f64, seed: u64) -> Result<Graph> {
    let n = communities * size;
    let mut rng = rng::stream(seed, rng::DOMAIN_SYNTH, 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if u / size == v / size { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u as NodeId, v as NodeId));
            }
        }
    }
    Graph::from_edges(n, &edges, false)
}

/// Two disjoint cliques of `size` nodes each.
pub fn two_cliques(size: usize) -> Result<Graph> {
    let mut edges = Vec::new();
    for base in [0, size] {
        for u in 0..size {
            for v in u + 1..size {
                edges.push(((base + u) as NodeId, (base + v) as NodeId));
            }
        }
    }
    Graph::from_edges(2 * size, &edges, false)
}

/// Nodes with one or more community memberships. Each node joins
/// `memberships` distinct communities out of `communities`; two nodes
/// sharing a community are linked with probability `p_in`, other pairs with
/// `p_out`. The multi-membership nodes make a single embedding per node a
/// poor fit.
pub fn overlapping_communities(
    nodes: usize,
    communities: usize,
    memberships: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<Graph> {
    if memberships == 0 || memberships > communities {
        return Err(Error::Config(format!(
            "memberships must be in 1..={communities} (got {memberships})"
        )));
    }
    let mut rng = rng::stream(seed, rng::DOMAIN_SYNTH, 1);
    let mut ids: Vec<usize> = (0..communities).collect();
    let member: Vec<u64> = (0..nodes)
        .map(|_| {
            ids.shuffle(&mut rng);
            ids[..memberships].iter().fold(0u64, |m, &c| m | 1 << c)
        })
        .collect();
    let mut edges = Vec::new();
    for u in 0..nodes {
        for v in u + 1..nodes {
            let p = if member[u] & member[v] != 0 { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u as NodeId, v as NodeId));
            }
        }
    }
    Graph::from_edges(nodes, &edges, false)
}

/// Typed bipartite author–paper graph. Authors and papers are assigned to
/// `groups` research areas; each paper has `authors_per_paper` authors,
/// drawn from its own area with probability `p_same` and uniformly
/// otherwise. Types are named `A` and `P`; authors come first.
pub fn author_paper(
    authors: usize,
    papers: usize,
    groups: usize,
    authors_per_paper: usize,
    p_same: f64,
    seed: u64,
) -> Result<Graph> {
    if groups == 0 || authors < groups || authors_per_paper == 0 {
        return Err(Error::Config("need at least one author per group and per paper".into()));
    }
    let mut rng = rng::stream(seed, rng::DOMAIN_SYNTH, 2);
    let group_of = |a: usize| a % groups;
    let by_group: Vec<Vec<usize>> = (0..groups)
        .map(|g| (0..authors).filter(|&a| group_of(a) == g).collect())
        .collect();
    let mut edges = Vec::new();
    for p in 0..papers {
        let g = p % groups;
        let mut chosen: Vec<usize> = Vec::with_capacity(authors_per_paper);
        let mut tries = 0;
        while chosen.len() < authors_per_paper.min(authors) && tries < 100 * authors_per_paper {
            tries += 1;
            let a = if rng.random::<f64>() < p_same {
                by_group[g][rng.random_range(0..by_group[g].len())]
            } else {
                rng.random_range(0..authors)
            };
            if !chosen.contains(&a) {
                chosen.push(a);
            }
        }
        for a in chosen {
            edges.push((a as NodeId, (authors + p) as NodeId));
        }
    }
    let mut graph = Graph::from_edges(authors + papers, &edges, false)?;
    let of_node = (0..authors + papers).map(|v| u16::from(v >= authors)).collect();
    graph.set_types(vec!["A".into(), "P".into()], of_node)?;
    Ok(graph)
}
