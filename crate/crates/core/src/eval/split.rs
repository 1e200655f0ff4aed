//! Connectivity-preserving train/test edge split with sampled non-edges.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng;

pub type Edge = (NodeId, NodeId);

/// Held-out positive edges, sampled negative pairs and the residual graph
/// that embeddings must be trained on.
#[derive(Debug, Clone)]
pub struct EdgeSplit {
    pub train_pos: Vec<Edge>,
    pub test_pos: Vec<Edge>,
    pub train_neg: Vec<Edge>,
    pub test_neg: Vec<Edge>,
    /// Same node set as the source graph, `train_pos` edges only.
    pub residual: Graph,
    pub seed: u64,
    /// `floor(|E| / 2)`; larger than `test_pos.len()` when the graph could
    /// not give up that many edges without disconnecting.
    pub requested_test: usize,
}

/// Counts and provenance of a split, as stored next to the edge files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMeta {
    pub seed: u64,
    pub directed: bool,
    pub graph_hash: String,
    pub train_pos: usize,
    pub test_pos: usize,
    pub train_neg: usize,
    pub test_neg: usize,
    pub requested_test: usize,
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Greater => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
        true
    }
}

/// Removes `floor(|E| / 2)` random edges while keeping every connected
/// component of the (undirected projection of the) graph connected.
///
/// A uniformly shuffled Kruskal pass picks a random spanning forest; the
/// test edges are then drawn from the remaining edges, any subset of which
/// can be removed without disconnecting anything. If fewer than half the
/// edges lie outside the forest, all of them are held out and a warning is
/// logged. `2 * |test|` distinct non-edges are then sampled uniformly and
/// split evenly between training and test negatives.
pub fn split_edges(graph: &Graph, seed: u64) -> Result<EdgeSplit> {
    let edges = graph.edges();
    let requested = edges.len() / 2;
    let mut rng = rng::stream(seed, rng::DOMAIN_SPLIT, 0);

    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(&mut rng);
    let mut uf = UnionFind::new(graph.node_count());
    let mut in_forest = vec![false; edges.len()];
    for &i in &order {
        let (u, v) = edges[i];
        in_forest[i] = uf.union(u, v);
    }
    let mut removable: Vec<usize> = order.iter().copied().filter(|&i| !in_forest[i]).collect();
    removable.shuffle(&mut rng);
    if removable.len() < requested {
        log::warn!(
            "only {} of {} edges can be held out without disconnecting the graph",
            removable.len(),
            requested
        );
    }
    removable.truncate(requested);
    let mut held = vec![false; edges.len()];
    for &i in &removable {
        held[i] = true;
    }
    let test_pos: Vec<Edge> = removable.iter().map(|&i| edges[i]).collect();
    let train_pos: Vec<Edge> = (0..edges.len()).filter(|&i| !held[i]).map(|i| edges[i]).collect();
    let residual = graph.with_edges(&train_pos)?;

    let negatives = sample_non_edges(graph, 2 * test_pos.len(), &mut rng);
    let half = negatives.len() / 2;
    let (train_neg, test_neg) = negatives.split_at(half);
    Ok(EdgeSplit {
        train_neg: train_neg.to_vec(),
        test_neg: test_neg[..half].to_vec(),
        train_pos,
        test_pos,
        residual,
        seed,
        requested_test: requested,
    })
}

fn sample_non_edges<R: Rng>(graph: &Graph, count: usize, rng: &mut R) -> Vec<Edge> {
    let n = graph.node_count();
    let directed = graph.is_directed();
    let key = |u: NodeId, v: NodeId| if directed || u < v { (u, v) } else { (v, u) };
    let mut seen: HashSet<Edge> = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    let max_attempts = 100 * count.max(1) + 1000;
    let mut attempts = 0;
    while out.len() < count && attempts < max_attempts && n > 1 {
        attempts += 1;
        let u = rng.random_range(0..n) as NodeId;
        let v = rng.random_range(0..n) as NodeId;
        if u == v || graph.has_edge(u, v) || graph.has_edge(v, u) {
            continue;
        }
        let k = key(u, v);
        if seen.insert(k) {
            out.push(k);
        }
    }
    if out.len() < count {
        log::warn!("graph too dense: sampled {} of {} negative pairs", out.len(), count);
    }
    out
}

impl EdgeSplit {
    pub fn meta(&self) -> SplitMeta {
        SplitMeta {
            seed: self.seed,
            directed: self.residual.is_directed(),
            graph_hash: self.residual.content_hash(),
            train_pos: self.train_pos.len(),
            test_pos: self.test_pos.len(),
            train_neg: self.train_neg.len(),
            test_neg: self.test_neg.len(),
            requested_test: self.requested_test,
        }
    }

    /// Writes `train_pos.edges`, `test_pos.edges`, `train_neg.edges`,
    /// `test_neg.edges` (external ids, with a `#` metadata line) and
    /// `split.json`.
    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let meta = self.meta();
        let header = serde_json::to_string(&meta)?;
        for (name, edges) in self.parts() {
            let mut out = BufWriter::new(File::create(dir.join(format!("{name}.edges")))?);
            writeln!(out, "# {header}")?;
            for &(u, v) in edges {
                writeln!(out, "{} {}", self.residual.label(u), self.residual.label(v))?;
            }
            out.flush()?;
        }
        std::fs::write(dir.join("split.json"), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    /// Restores a split written by [`EdgeSplit::save_dir`] for `graph`.
    pub fn load_dir(dir: impl AsRef<Path>, graph: &Graph) -> Result<Self> {
        let dir = dir.as_ref();
        let meta: SplitMeta = serde_json::from_str(&std::fs::read_to_string(dir.join("split.json"))?)?;
        let read = |name: &str| -> Result<Vec<Edge>> {
            let file = BufReader::new(File::open(dir.join(format!("{name}.edges")))?);
            let mut edges = Vec::new();
            for (i, line) in file.lines().enumerate() {
                let line = line?;
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let mut it = line.split_whitespace();
                let (Some(a), Some(b)) = (it.next(), it.next()) else {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("expected two node ids in {name}.edges"),
                    });
                };
                let id = |s: &str| graph.node_id(s).ok_or_else(|| Error::UnknownNode(s.to_owned()));
                edges.push((id(a)?, id(b)?));
            }
            Ok(edges)
        };
        let train_pos = read("train_pos")?;
        let residual = graph.with_edges(&train_pos)?;
        if residual.content_hash() != meta.graph_hash {
            return Err(Error::CacheMismatch(format!(
                "split in {} was made for a different graph",
                dir.display()
            )));
        }
        Ok(Self {
            test_pos: read("test_pos")?,
            train_neg: read("train_neg")?,
            test_neg: read("test_neg")?,
            train_pos,
            residual,
            seed: meta.seed,
            requested_test: meta.requested_test,
        })
    }

    fn parts(&self) -> [(&'static str, &Vec<Edge>); 4] {
        [
            ("train_pos", &self.train_pos),
            ("test_pos", &self.test_pos),
            ("train_neg", &self.train_neg),
            ("test_neg", &self.test_neg),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_loses_one_edge() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)], false).unwrap();
        let s = split_edges(&g, 1).unwrap();
        assert_eq!(s.test_pos.len(), 1);
        assert_eq!(s.train_pos.len(), 2);
        assert_eq!(s.residual.edge_count(), 2);
    }

    #[test]
    fn path_has_nothing_removable() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], false).unwrap();
        let s = split_edges(&g, 3).unwrap();
        assert!(s.test_pos.is_empty());
        assert_eq!(s.requested_test, 2);
        assert!(s.train_neg.is_empty() && s.test_neg.is_empty());
    }

    #[test]
    fn deterministic_under_seed() {
        let g = crate::synth::planted_partition(2, 15, 0.4, 0.05, 2).unwrap();
        let a = split_edges(&g, 9).unwrap();
        let b = split_edges(&g, 9).unwrap();
        assert_eq!(a.test_pos, b.test_pos);
        assert_eq!(a.train_neg, b.train_neg);
        let c = split_edges(&g, 10).unwrap();
        assert_ne!(a.test_pos, c.test_pos);
    }

    #[test]
    fn save_and_load() {
        let g = crate::synth::planted_partition(2, 10, 0.5, 0.1, 4).unwrap();
        let s = split_edges(&g, 5).unwrap();
        let dir = std::env::temp_dir().join(format!("split-test-{}", std::process::id()));
        s.save_dir(&dir).unwrap();
        let t = EdgeSplit::load_dir(&dir, &g).unwrap();
        assert_eq!(s.test_pos, t.test_pos);
        assert_eq!(s.test_neg, t.test_neg);
        assert_eq!(s.meta(), t.meta());
        std::fs::remove_dir_all(dir).ok();
    }
}
