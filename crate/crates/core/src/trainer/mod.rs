//! Multi-aspect skip-gram training.

mod config;
pub mod diagnostics;
pub(crate) mod engine;
pub mod objective;
pub mod regularizer;
pub mod sampler;
pub mod selection;

pub use config::{RegScope, SelectionMode, TrainerConfig};
pub use diagnostics::{aspect_distribution_stats, aspect_heatmap, mean_offdiag_abs_cosine, NodeAspectStats};
pub use engine::{ProgressRecord, TrainReport};
pub use objective::{window_loss, AspectWeights, RowKey, WindowGradient, WindowSpec};
pub use regularizer::{aspect_similarity, regularizer, RegularizerOutput};
pub use sampler::NegativeSampler;
pub use selection::{aspect_logits, gumbel_softmax, readout, sample_gumbel, softmax, AspectDistribution};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::store::{EmbeddingStore, WARMUP_NOISE_SIGMA};
use crate::walk::WalkCorpus;

use engine::{Kernel, Plan};

/// Generates the walk corpus and trains a multi-aspect store.
pub fn train(graph: &Graph, config: &TrainerConfig) -> Result<EmbeddingStore> {
    let corpus = corpus_for(graph, config)?;
    Ok(train_on_corpus(graph, &corpus, config)?.0)
}

pub(crate) fn corpus_for(graph: &Graph, config: &TrainerConfig) -> Result<WalkCorpus> {
    config.validate()?;
    if graph.node_count() == 0 {
        return Err(Error::EmptyInput);
    }
    WalkCorpus::generate(graph, config.walks_per_node, config.walk_length, config.seed)
}

/// Trains a multi-aspect store on an existing corpus. With `warmup`, the
/// store is initialized from a single-aspect run on the same corpus.
pub fn train_on_corpus(
    graph: &Graph,
    corpus: &WalkCorpus,
    config: &TrainerConfig,
) -> Result<(EmbeddingStore, TrainReport)> {
    config.validate()?;
    let mut store = initial_store(graph, corpus, config)?;
    let plan = Plan {
        corpus,
        sampler: NegativeSampler::unigram(&corpus.node_frequencies(graph.node_count())),
        typed: None,
    };
    let report = engine::run(&mut store, &plan, config, Kernel::Aspect)?;
    store.finalize();
    Ok((store, report))
}

/// Plain skip-gram with one context matrix (the Deepwalk objective).
/// `aspects`, `warmup` and the regularizer settings of `config` are ignored.
pub fn train_deepwalk(
    graph: &Graph,
    corpus: &WalkCorpus,
    config: &TrainerConfig,
) -> Result<(EmbeddingStore, TrainReport)> {
    let config = TrainerConfig {
        aspects: 1,
        warmup: false,
        reg_enabled: false,
        ..config.clone()
    };
    config.validate()?;
    let mut store = EmbeddingStore::init_random(graph.node_count(), config.dim, 1, config.seed, config.init_scale)?;
    let plan = Plan {
        corpus,
        sampler: NegativeSampler::unigram(&corpus.node_frequencies(graph.node_count())),
        typed: None,
    };
    let report = engine::run(&mut store, &plan, &config, Kernel::SkipGram)?;
    store.finalize();
    Ok((store, report))
}

/// Runs the single-aspect warm-up and spreads its context matrix over
/// `config.aspects` aspect matrices with small Gaussian noise.
pub fn warmup_init(graph: &Graph, corpus: &WalkCorpus, config: &TrainerConfig) -> Result<EmbeddingStore> {
    let (base, _) = train_deepwalk(graph, corpus, &config.warmup_config())?;
    EmbeddingStore::from_single_aspect(&base, config.aspects, WARMUP_NOISE_SIGMA, config.seed)
}

pub(crate) fn initial_store(graph: &Graph, corpus: &WalkCorpus, config: &TrainerConfig) -> Result<EmbeddingStore> {
    // With one aspect the warm-up would just be a longer run of the same model.
    if config.warmup && config.aspects > 1 {
        warmup_init(graph, corpus, config)
    } else {
        EmbeddingStore::init_random(
            graph.node_count(),
            config.dim,
            config.aspects,
            config.seed,
            config.init_scale,
        )
    }
}
