//! Heterogeneous graphs: metapath-guided walks and multi-aspect training
//! with type-restricted aspect selection.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, NodeTypes, TypeId};
use crate::rng;
use crate::store::{EmbeddingStore, WARMUP_NOISE_SIGMA};
use crate::trainer::engine::{self, Kernel, Plan, TypedPlan};
use crate::trainer::{NegativeSampler, TrainReport, TrainerConfig};
use crate::walk::WalkCorpus;

pub use crate::eval::{ranking_metrics, RankingReport};

/// A cyclic node-type scheme such as `A,P,A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metapath {
    scheme: Vec<TypeId>,
}

impl Metapath {
    /// Parses a comma-separated list of type names.
    pub fn parse(text: &str, types: &NodeTypes) -> Result<Self> {
        let scheme = text
            .split(',')
            .map(|t| {
                let t = t.trim();
                types.id(t).ok_or_else(|| Error::UnknownType(t.to_owned()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(scheme)
    }

    pub fn new(scheme: Vec<TypeId>) -> Result<Self> {
        if scheme.len() < 2 {
            return Err(Error::Metapath(format!("need at least two types, got {}", scheme.len())));
        }
        if scheme.first() != scheme.last() {
            return Err(Error::Metapath("scheme must start and end with the same type".into()));
        }
        Ok(Self { scheme })
    }

    pub fn scheme(&self) -> &[TypeId] {
        &self.scheme
    }

    pub fn start_type(&self) -> TypeId {
        self.scheme[0]
    }

    /// Type required at walk position `t`; the scheme repeats with its last
    /// element identified with its first.
    pub fn type_at(&self, t: usize) -> TypeId {
        let cycle = self.scheme.len() - 1;
        self.scheme[t % cycle]
    }

    /// Checks that every consecutive type pair has at least one edge.
    pub fn check_schema(&self, graph: &Graph) -> Result<()> {
        let types = graph.types().ok_or_else(|| Error::Metapath("graph has no node types".into()))?;
        for pair in self.scheme.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let found = (0..graph.node_count() as NodeId)
                .filter(|&u| types.of(u) == a)
                .any(|u| graph.adj(u).iter().any(|&v| types.of(v) == b));
            if !found {
                return Err(Error::Metapath(format!(
                    "no edge from type {} to type {}",
                    types.name(a),
                    types.name(b)
                )));
            }
        }
        Ok(())
    }
}

/// One metapath walk. The next node is uniform over neighbors of the type
/// the scheme requires; the walk stops early when there is none.
pub fn metapath_walk<R: Rng>(
    graph: &Graph,
    types: &NodeTypes,
    path: &Metapath,
    start: NodeId,
    length: usize,
    rng: &mut R,
    candidates: &mut Vec<NodeId>,
) -> Vec<NodeId> {
    let mut walk = Vec::with_capacity(length);
    walk.push(start);
    let mut current = start;
    while walk.len() < length {
        let want = path.type_at(walk.len());
        candidates.clear();
        candidates.extend(graph.adj(current).iter().copied().filter(|&v| types.of(v) == want));
        if candidates.is_empty() {
            break;
        }
        current = candidates[rng.random_range(0..candidates.len())];
        walk.push(current);
    }
    walk
}

/// `walks_per_node` walks from every node of each scheme's start type,
/// grouped by scheme, then start node, then walk index.
pub fn metapath_walks(
    graph: &Graph,
    schemes: &[Metapath],
    walks_per_node: usize,
    walk_length: usize,
    seed: u64,
) -> Result<WalkCorpus> {
    let types = graph.types().ok_or_else(|| Error::Metapath("graph has no node types".into()))?;
    if schemes.is_empty() {
        return Err(Error::Metapath("no metapath given".into()));
    }
    if walks_per_node == 0 || walk_length < 2 {
        return Err(Error::Config(format!(
            "walks need r >= 1 and L >= 2 (got r={walks_per_node}, L={walk_length})"
        )));
    }
    let r = walks_per_node as u64;
    let mut all = Vec::new();
    for (k, path) in schemes.iter().enumerate() {
        if (path.start_type() as usize) >= types.len() || path.scheme.iter().any(|&t| t as usize >= types.len()) {
            return Err(Error::UnknownType(format!("{:?}", path.scheme)));
        }
        let starts: Vec<NodeId> = (0..graph.node_count() as NodeId)
            .filter(|&v| types.of(v) == path.start_type())
            .collect();
        let walks: Vec<Vec<Vec<NodeId>>> = starts
            .par_iter()
            .map(|&start| {
                let mut candidates = Vec::new();
                (0..r)
                    .map(|i| {
                        let index = ((k as u64) << 48) | (start as u64 * r + i);
                        let mut rng = rng::stream(seed, rng::DOMAIN_METAPATH, index);
                        metapath_walk(graph, types, path, start, walk_length, &mut rng, &mut candidates)
                    })
                    .collect()
            })
            .collect();
        all.extend(walks.into_iter().flatten());
    }
    Ok(WalkCorpus::from_walks(all, walks_per_node, walk_length, seed))
}

/// Settings of a heterogeneous run on top of the usual trainer settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HetConfig {
    pub trainer: TrainerConfig,
    /// Comma-separated schemes, e.g. `"A,P,A"`.
    pub metapaths: Vec<String>,
    /// Types whose context nodes feed the aspect-selection readout; empty
    /// means every type.
    pub aspect_context_types: Vec<String>,
    /// Target types trained with a single (aspect-averaged) context
    /// embedding instead of aspect selection.
    pub single_aspect_types: Vec<String>,
}

impl HetConfig {
    pub fn parse_metapaths(&self, graph: &Graph) -> Result<Vec<Metapath>> {
        let types = graph.types().ok_or_else(|| Error::Metapath("graph has no node types".into()))?;
        if self.metapaths.is_empty() {
            return Err(Error::Metapath("no metapath given".into()));
        }
        self.metapaths.iter().map(|m| Metapath::parse(m, types)).collect()
    }

    fn type_mask(&self, names: &[String], types: &NodeTypes, empty_means_all: bool) -> Result<Vec<bool>> {
        let mut mask = vec![empty_means_all && names.is_empty(); types.len()];
        for name in names {
            let id = types.id(name).ok_or_else(|| Error::UnknownType(name.clone()))?;
            mask[id as usize] = true;
        }
        Ok(mask)
    }
}

/// Fixed per-node target vectors (`node_id v1 .. vd` lines) that replace
/// learned target rows and stay frozen during training.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFeatures {
    pub dim: usize,
    pub rows: Vec<(NodeId, Vec<f32>)>,
}

impl NodeFeatures {
    pub fn load(path: impl AsRef<Path>, graph: &Graph) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?), graph)
    }

    pub fn read<R: BufRead>(reader: R, graph: &Graph) -> Result<Self> {
        let mut dim = None;
        let mut rows = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let label = it.next().unwrap_or_default();
            let node = graph.node_id(label).ok_or_else(|| Error::UnknownNode(label.to_owned()))?;
            let values = it
                .map(|t| {
                    t.parse::<f32>().map_err(|e| Error::Parse {
                        line: i + 1,
                        message: format!("bad feature value `{t}`: {e}"),
                    })
                })
                .collect::<Result<Vec<f32>>>()?;
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("expected {d} values, found {}", values.len()),
                    })
                }
                _ => {}
            }
            rows.push((node, values));
        }
        Ok(Self {
            dim: dim.unwrap_or(0),
            rows,
        })
    }

    fn apply(&self, store: &mut EmbeddingStore) -> Result<Vec<bool>> {
        if self.dim != store.dim() {
            return Err(Error::Config(format!(
                "feature dimension {} does not match embedding dimension {}",
                self.dim,
                store.dim()
            )));
        }
        let mut frozen = vec![false; store.node_count()];
        for (node, row) in &self.rows {
            store.target_row_mut(*node).copy_from_slice(row);
            frozen[*node as usize] = true;
        }
        Ok(frozen)
    }
}

/// Generates metapath walks and trains.
pub fn train_het(graph: &Graph, config: &HetConfig) -> Result<(EmbeddingStore, TrainReport)> {
    config.trainer.validate()?;
    let schemes = config.parse_metapaths(graph)?;
    for s in &schemes {
        s.check_schema(graph)?;
    }
    let t = &config.trainer;
    let corpus = metapath_walks(graph, &schemes, t.walks_per_node, t.walk_length, t.seed)?;
    train_het_on_corpus(graph, &corpus, config, None)
}

/// Heterogeneous training on an existing corpus.
///
/// Windows whose target type is multi-aspect select aspects from the
/// readout of their `aspect_context_types` context nodes (all context nodes
/// when none qualifies). Windows of single-aspect target types score every
/// context node against the mean of its aspect rows. Negatives are drawn
/// from the type of the context node they are paired with.
pub fn train_het_on_corpus(
    graph: &Graph,
    corpus: &WalkCorpus,
    config: &HetConfig,
    features: Option<&NodeFeatures>,
) -> Result<(EmbeddingStore, TrainReport)> {
    let t = &config.trainer;
    t.validate()?;
    let types = graph.types().ok_or_else(|| Error::Metapath("graph has no node types".into()))?;
    let readout_types = config.type_mask(&config.aspect_context_types, types, true)?;
    let single_aspect = config.type_mask(&config.single_aspect_types, types, false)?;
    if !readout_types.iter().any(|&b| b) {
        return Err(Error::Config("aspect_context_types selects no type".into()));
    }
    let freqs = corpus.node_frequencies(graph.node_count());

    let mut store = if t.warmup && t.aspects > 1 {
        let warm = t.warmup_config();
        let mut base = EmbeddingStore::init_random(graph.node_count(), warm.dim, 1, warm.seed, warm.init_scale)?;
        let frozen = features.map(|f| f.apply(&mut base)).transpose()?;
        let plan = Plan {
            corpus,
            sampler: NegativeSampler::by_type(&freqs, types),
            typed: Some(TypedPlan {
                types,
                single_aspect: single_aspect.clone(),
                readout_types: readout_types.clone(),
                frozen_targets: frozen,
            }),
        };
        engine::run(&mut base, &plan, &warm, Kernel::SkipGram)?;
        EmbeddingStore::from_single_aspect(&base, t.aspects, WARMUP_NOISE_SIGMA, t.seed)?
    } else {
        EmbeddingStore::init_random(graph.node_count(), t.dim, t.aspects, t.seed, t.init_scale)?
    };
    let frozen = features.map(|f| f.apply(&mut store)).transpose()?;
    let plan = Plan {
        corpus,
        sampler: NegativeSampler::by_type(&freqs, types),
        typed: Some(TypedPlan {
            types,
            single_aspect,
            readout_types,
            frozen_targets: frozen,
        }),
    };
    let report = engine::run(&mut store, &plan, t, Kernel::Aspect)?;
    store.finalize();
    Ok((store, report))
}
