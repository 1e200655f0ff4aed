//! Graph storage and edge-list ingestion.
//!
//! Nodes carry arbitrary external string ids that are mapped to dense
//! internal ids in order of first appearance. Adjacency is kept in CSR form
//! and is immutable after construction, so a `&Graph` can be shared freely
//! across worker threads.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Dense internal node identifier.
pub type NodeId = u32;

/// Dense node-type identifier (index into [`NodeTypes::names`]).
pub type TypeId = u16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeListOptions {
    pub directed: bool,
    pub dedupe: bool,
    /// Accept lines with more than two tokens and ignore the extras
    /// (e.g. a trailing weight column). Off by default.
    pub ignore_extra_columns: bool,
}

impl Default for EdgeListOptions {
    fn default() -> Self {
        Self {
            directed: false,
            dedupe: true,
            ignore_extra_columns: false,
        }
    }
}

impl EdgeListOptions {
    pub fn directed(directed: bool) -> Self {
        Self {
            directed,
            ..Self::default()
        }
    }
}

/// Counters collected while ingesting an edge list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub edge_lines: usize,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

/// Per-node type tags for heterogeneous graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTypes {
    names: Vec<String>,
    of_node: Vec<TypeId>,
}

impl NodeTypes {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<TypeId> {
        self.names.iter().position(|n| n == name).map(|i| i as TypeId)
    }

    pub fn name(&self, id: TypeId) -> &str {
        &self.names[id as usize]
    }

    pub fn of(&self, node: NodeId) -> TypeId {
        self.of_node[node as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    directed: bool,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    types: Option<NodeTypes>,
    stats: LoadStats,
}

impl Graph {
    /// Parses an edge list held in memory.
    pub fn parse_edge_list(text: &str, options: EdgeListOptions) -> Result<Self> {
        Self::read_edge_list(text.as_bytes(), options)
    }

    pub fn load_edge_list(path: impl AsRef<Path>, options: EdgeListOptions) -> Result<Self> {
        let file = File::open(path)?;
        Self::read_edge_list(BufReader::new(file), options)
    }

    /// Reads a whitespace-separated `source target` edge list. Lines whose
    /// first non-blank character is `#` or `%` are comments.
    pub fn read_edge_list<R: BufRead>(reader: R, options: EdgeListOptions) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, NodeId> = HashMap::new();
        let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
        let mut seen: HashSet<(NodeId, NodeId)> = HashSet::new();
        let mut stats = LoadStats::default();

        let mut intern = |token: &str, labels: &mut Vec<String>| -> NodeId {
            if let Some(&id) = index.get(token) {
                return id;
            }
            let id = labels.len() as NodeId;
            labels.push(token.to_owned());
            index.insert(token.to_owned(), id);
            id
        };

        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
                continue;
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            let well_formed = tokens.len() == 2 || (options.ignore_extra_columns && tokens.len() > 2);
            if !well_formed {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected 2 tokens, found {}", tokens.len()),
                });
            }
            stats.edge_lines += 1;
            let u = intern(tokens[0], &mut labels);
            let v = intern(tokens[1], &mut labels);
            if u == v {
                stats.self_loops_dropped += 1;
                continue;
            }
            if options.dedupe {
                let key = if options.directed { (u, v) } else { (u.min(v), u.max(v)) };
                if !seen.insert(key) {
                    stats.duplicates_dropped += 1;
                    continue;
                }
            }
            edges.push((u, v));
        }

        if stats.edge_lines == 0 {
            return Err(Error::EmptyInput);
        }
        if stats.self_loops_dropped > 0 {
            log::warn!("dropped {} self-loop(s)", stats.self_loops_dropped);
        }

        let (offsets, targets) = build_csr(labels.len(), &edges, options.directed);
        Ok(Self {
            directed: options.directed,
            offsets,
            targets,
            labels,
            index,
            types: None,
            stats,
        })
    }

    /// Builds a graph over `node_count` nodes labelled `"0".."n-1"`.
    /// Self-loops are dropped; duplicates are kept.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId)], directed: bool) -> Result<Self> {
        let labels: Vec<String> = (0..node_count).map(|i| i.to_string()).collect();
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as NodeId))
            .collect();
        let mut graph = Self {
            directed,
            offsets: vec![0; node_count + 1],
            targets: Vec::new(),
            labels,
            index,
            types: None,
            stats: LoadStats::default(),
        };
        graph = graph.with_edges(edges)?;
        graph.stats.edge_lines = edges.len();
        Ok(graph)
    }

    /// Returns a graph sharing this graph's node set, labels and types but
    /// with adjacency rebuilt from `edges`.
    pub fn with_edges(&self, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let n = self.node_count();
        let mut kept = Vec::with_capacity(edges.len());
        let mut self_loops = 0;
        for &(u, v) in edges {
            for node in [u, v] {
                if node as usize >= n {
                    return Err(Error::NodeOutOfRange {
                        node: node as usize,
                        count: n,
                    });
                }
            }
            if u == v {
                self_loops += 1;
            } else {
                kept.push((u, v));
            }
        }
        let (offsets, targets) = build_csr(n, &kept, self.directed);
        Ok(Self {
            directed: self.directed,
            offsets,
            targets,
            labels: self.labels.clone(),
            index: self.index.clone(),
            types: self.types.clone(),
            stats: LoadStats {
                edge_lines: edges.len(),
                self_loops_dropped: self_loops,
                duplicates_dropped: 0,
            },
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of edges: arcs for directed graphs, undirected pairs otherwise.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.targets.len()
        } else {
            self.targets.len() / 2
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn stats(&self) -> &LoadStats {
        &self.stats
    }

    /// Out-neighbors of `node`, in edge insertion order.
    pub fn neighbors(&self, node: NodeId) -> Result<&[NodeId]> {
        if node as usize >= self.node_count() {
            return Err(Error::NodeOutOfRange {
                node: node as usize,
                count: self.node_count(),
            });
        }
        Ok(self.adj(node))
    }

    /// Unchecked variant of [`Graph::neighbors`] for hot loops; panics when
    /// `node` is out of range.
    #[inline]
    pub fn adj(&self, node: NodeId) -> &[NodeId] {
        let i = node as usize;
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        let i = node as usize;
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj(u).contains(&v)
    }

    pub fn label(&self, node: NodeId) -> &str {
        &self.labels[node as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    /// Every edge once: all arcs for directed graphs, `(u, v)` with `u < v`
    /// for undirected graphs (multi-edges repeated).
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.node_count() as NodeId {
            for &v in self.adj(u) {
                if self.directed || u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Writes the graph as an edge list using external ids.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{} {}", self.label(u), self.label(v))?;
        }
        Ok(())
    }

    /// Stable content hash over directedness, labels and adjacency.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(if self.directed { b"D\n" } else { b"U\n" });
        for u in 0..self.node_count() as NodeId {
            hasher.update(self.label(u).as_bytes());
            hasher.update(b":");
            for &v in self.adj(u) {
                hasher.update(v.to_le_bytes());
            }
            hasher.update(b"\n");
        }
        hex::encode(&hasher.finalize()[..8])
    }

    pub fn types(&self) -> Option<&NodeTypes> {
        self.types.as_ref()
    }

    pub fn node_type(&self, node: NodeId) -> Option<TypeId> {
        self.types.as_ref().map(|t| t.of(node))
    }

    /// Attaches node types from a `node_id type_tag` file. Every node must be
    /// typed exactly once.
    pub fn load_types(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::open(path)?;
        self.read_types(BufReader::new(file))
    }

    pub fn read_types<R: BufRead>(&mut self, reader: R) -> Result<()> {
        let mut names: Vec<String> = Vec::new();
        let mut of_node: Vec<Option<TypeId>> = vec![None; self.node_count()];
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
                continue;
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected `node_id type_tag`, found {} tokens", tokens.len()),
                });
            }
            let node = self
                .node_id(tokens[0])
                .ok_or_else(|| Error::UnknownNode(tokens[0].to_owned()))?;
            let ty = match names.iter().position(|n| n == tokens[1]) {
                Some(i) => i as TypeId,
                None => {
                    names.push(tokens[1].to_owned());
                    (names.len() - 1) as TypeId
                }
            };
            if of_node[node as usize].replace(ty).is_some() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("node `{}` typed twice", tokens[0]),
                });
            }
        }
        let of_node = of_node
            .into_iter()
            .enumerate()
            .map(|(i, t)| t.ok_or_else(|| Error::Config(format!("node `{}` has no type", self.labels[i]))))
            .collect::<Result<Vec<_>>>()?;
        self.types = Some(NodeTypes { names, of_node });
        Ok(())
    }

    /// Attaches types given as one tag per internal node id.
    pub fn set_types(&mut self, names: Vec<String>, of_node: Vec<TypeId>) -> Result<()> {
        if of_node.len() != self.node_count() {
            return Err(Error::LengthMismatch(format!(
                "{} type tags for {} nodes",
                of_node.len(),
                self.node_count()
            )));
        }
        if let Some(&bad) = of_node.iter().find(|&&t| t as usize >= names.len()) {
            return Err(Error::UnknownType(bad.to_string()));
        }
        self.types = Some(NodeTypes { names, of_node });
        Ok(())
    }
}

fn build_csr(n: usize, edges: &[(NodeId, NodeId)], directed: bool) -> (Vec<usize>, Vec<NodeId>) {
    let mut adjacency: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        adjacency[u as usize].push(v);
        if !directed {
            adjacency[v as usize].push(u);
        }
    }
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut targets = Vec::with_capacity(adjacency.iter().map(Vec::len).sum());
    for list in adjacency {
        targets.extend(list);
        offsets.push(targets.len());
    }
    (offsets, targets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph() {
        let g = Graph::parse_edge_list("0 1\n1 2", EdgeListOptions::directed(false)).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.neighbors(1).unwrap(), &[0, 2]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn duplicate_collapse() {
        let g = Graph::parse_edge_list("a b\nb a", EdgeListOptions::directed(false)).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.stats().duplicates_dropped, 1);
    }

    #[test]
    fn reversed_pair_is_not_a_duplicate_when_directed() {
        let g = Graph::parse_edge_list("a b\nb a", EdgeListOptions::directed(true)).unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn directed_sink_has_no_neighbors() {
        let g = Graph::parse_edge_list("0 1", EdgeListOptions::directed(true)).unwrap();
        assert!(g.neighbors(1).unwrap().is_empty());
        assert_eq!(g.neighbors(0).unwrap(), &[1]);
    }

    #[test]
    fn star_center_lists_all_leaves() {
        let text = "c l1\nc l2\nc l3\nc l4\nc l5";
        let g = Graph::parse_edge_list(text, EdgeListOptions::default()).unwrap();
        let c = g.node_id("c").unwrap();
        let leaves: Vec<&str> = g.neighbors(c).unwrap().iter().map(|&v| g.label(v)).collect();
        assert_eq!(leaves, ["l1", "l2", "l3", "l4", "l5"]);
    }

    #[test]
    fn comments_and_self_loops() {
        let text = "# header\n% other\n\n1 1\n1 2\n";
        let g = Graph::parse_edge_list(text, EdgeListOptions::default()).unwrap();
        assert_eq!(g.stats().self_loops_dropped, 1);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = Graph::parse_edge_list("0 1\n1 2 3\n", EdgeListOptions::default()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let lenient = EdgeListOptions {
            ignore_extra_columns: true,
            ..EdgeListOptions::default()
        };
        assert_eq!(Graph::parse_edge_list("0 1\n1 2 3\n", lenient).unwrap().edge_count(), 2);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            Graph::parse_edge_list("# nothing\n", EdgeListOptions::default()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn out_of_range_neighbor_query() {
        let g = Graph::parse_edge_list("0 1", EdgeListOptions::default()).unwrap();
        assert!(matches!(g.neighbors(7), Err(Error::NodeOutOfRange { node: 7, count: 2 })));
    }

    #[test]
    fn types_are_attached_by_external_id() {
        let mut g = Graph::parse_edge_list("a1 p1\na2 p1", EdgeListOptions::default()).unwrap();
        g.read_types("a1 A\np1 P\na2 A\n".as_bytes()).unwrap();
        let types = g.types().unwrap();
        assert_eq!(types.names(), ["A", "P"]);
        assert_eq!(types.name(types.of(g.node_id("p1").unwrap())), "P");
        assert!(g.clone().read_types("a1 A\n".as_bytes()).is_err());
        assert!(matches!(
            g.clone().read_types("zz A\n".as_bytes()),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn hash_is_deterministic_and_sensitive() {
        let a = Graph::parse_edge_list("0 1\n1 2", EdgeListOptions::default()).unwrap();
        let b = Graph::parse_edge_list("0 1\n1 2", EdgeListOptions::default()).unwrap();
        let c = Graph::parse_edge_list("0 1\n0 2", EdgeListOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.content_hash(), b.content_hash());
        assert_ne!(a.content_hash(), c.content_hash());
    }
}
