//! Truncated random walks and context-window iteration.

use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng;

/// Ordered collection of node sequences, stored flat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkCorpus {
    offsets: Vec<usize>,
    nodes: Vec<NodeId>,
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub seed: u64,
}

/// A target node and the nodes within `window` positions of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextWindow {
    pub target: NodeId,
    pub context: Vec<NodeId>,
}

/// One uniform first-order walk from `start`. Stops early at a node without
/// out-neighbors.
pub fn random_walk<R: Rng>(graph: &Graph, start: NodeId, length: usize, rng: &mut R) -> Vec<NodeId> {
    let mut walk = Vec::with_capacity(length);
    walk.push(start);
    let mut current = start;
    while walk.len() < length {
        let adj = graph.adj(current);
        if adj.is_empty() {
            break;
        }
        current = adj[rng.random_range(0..adj.len())];
        walk.push(current);
    }
    walk
}

impl WalkCorpus {
    /// `walks_per_node` walks from every node, grouped by start node then
    /// walk index. Each walk draws from its own stream keyed by
    /// `(seed, start, index)`, so the corpus is independent of thread count.
    pub fn generate(graph: &Graph, walks_per_node: usize, walk_length: usize, seed: u64) -> Result<Self> {
        if walks_per_node == 0 || walk_length < 2 {
            return Err(Error::Config(format!(
                "walks need r >= 1 and L >= 2 (got r={walks_per_node}, L={walk_length})"
            )));
        }
        let r = walks_per_node as u64;
        let per_start: Vec<Vec<Vec<NodeId>>> = (0..graph.node_count() as NodeId)
            .into_par_iter()
            .map(|start| {
                (0..r)
                    .map(|i| {
                        let mut rng = rng::stream(seed, rng::DOMAIN_WALK, start as u64 * r + i);
                        random_walk(graph, start, walk_length, &mut rng)
                    })
                    .collect()
            })
            .collect();
        Ok(Self::from_walks(
            per_start.into_iter().flatten(),
            walks_per_node,
            walk_length,
            seed,
        ))
    }

    pub fn from_walks<I>(walks: I, walks_per_node: usize, walk_length: usize, seed: u64) -> Self
    where
        I: IntoIterator<Item = Vec<NodeId>>,
    {
        let mut offsets = vec![0];
        let mut nodes = Vec::new();
        for walk in walks {
            nodes.extend_from_slice(&walk);
            offsets.push(nodes.len());
        }
        Self {
            offsets,
            nodes,
            walks_per_node,
            walk_length,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn walk(&self, i: usize) -> &[NodeId] {
        &self.nodes[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[NodeId]> + '_ {
        (0..self.len()).map(move |i| self.walk(i))
    }

    /// Total number of node occurrences across all walks.
    pub fn token_count(&self) -> usize {
        self.nodes.len()
    }

    /// Occurrence count of every node id below `node_count`.
    pub fn node_frequencies(&self, node_count: usize) -> Vec<u64> {
        let mut counts = vec![0u64; node_count];
        for &v in &self.nodes {
            counts[v as usize] += 1;
        }
        counts
    }

    /// Appends other walks to this corpus (used to pool several metapaths).
    pub fn extend(&mut self, other: &WalkCorpus) {
        for walk in other.iter() {
            self.nodes.extend_from_slice(walk);
            self.offsets.push(self.nodes.len());
        }
    }

    /// All context windows in corpus order, skipping empty ones.
    pub fn windows(&self, window: usize) -> impl Iterator<Item = ContextWindow> + '_ {
        self.iter().flat_map(move |walk| {
            (0..walk.len()).filter_map(move |t| {
                let mut context = Vec::new();
                context_of(walk, t, window, &mut context);
                (!context.is_empty()).then(|| ContextWindow {
                    target: walk[t],
                    context,
                })
            })
        })
    }

    /// Writes the corpus cache: a header recording `(r, L, seed, graph hash)`
    /// followed by one space-separated walk per line.
    pub fn write_cache<W: Write>(&self, mut out: W, graph_hash: &str) -> Result<()> {
        writeln!(
            out,
            "# walks r={} L={} seed={} graph={}",
            self.walks_per_node, self.walk_length, self.seed, graph_hash
        )?;
        let mut line = String::new();
        for walk in self.iter() {
            line.clear();
            for (i, v) in walk.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                line.push_str(&v.to_string());
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads a cache written by [`WalkCorpus::write_cache`] and checks that it
    /// was produced for `graph` with the given walk parameters.
    pub fn read_cache<R: BufRead>(
        reader: R,
        graph: &Graph,
        walks_per_node: usize,
        walk_length: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::CacheMismatch("missing header".into()))?;
        let expected = format!(
            "# walks r={} L={} seed={} graph={}",
            walks_per_node,
            walk_length,
            seed,
            graph.content_hash()
        );
        if header.trim() != expected {
            return Err(Error::CacheMismatch(format!("found `{header}`, expected `{expected}`")));
        }
        let mut walks = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let walk = line
                .split_whitespace()
                .map(|tok| {
                    let v: NodeId = tok.parse().map_err(|_| Error::Parse {
                        line: lineno + 2,
                        message: format!("bad node id `{tok}`"),
                    })?;
                    if v as usize >= graph.node_count() {
                        return Err(Error::NodeOutOfRange {
                            node: v as usize,
                            count: graph.node_count(),
                        });
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()?;
            walks.push(walk);
        }
        Ok(Self::from_walks(walks, walks_per_node, walk_length, seed))
    }
}

/// Fills `out` with `walk[pos-window..pos+window]` minus position `pos`,
/// clipped at the walk boundaries.
#[inline]
pub fn context_of(walk: &[NodeId], pos: usize, window: usize, out: &mut Vec<NodeId>) {
    out.clear();
    let lo = pos.saturating_sub(window);
    let hi = (pos + window + 1).min(walk.len());
    out.extend_from_slice(&walk[lo..pos]);
    out.extend_from_slice(&walk[pos + 1..hi]);
}
