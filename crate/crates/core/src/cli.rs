//! Command-line front end: `walk`, `train`, `het-train`, `eval`, `diag`,
//! `export`.
//!
//! Every command accepts `--config <json>`; explicit flags override the
//! file. Invalid configuration exits with status 2, runtime failures
//! with 1.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{self, EdgeOperator, EdgeSplit, LogRegOptions};
use crate::graph::{EdgeListOptions, Graph};
use crate::hetnet::{self, HetConfig, NodeFeatures};
use crate::store::{EmbeddingStore, Matrix};
use crate::trainer::{self, RegScope, SelectionMode, TrainReport, TrainerConfig};
use crate::walk::WalkCorpus;

#[derive(Debug, Parser)]
#[command(name = "aspect-embed", version, about = "Multi-aspect node embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random-walk corpus cache.
    Walk(WalkArgs),
    /// Train a multi-aspect (or, with --K 1, plain skip-gram) model.
    Train(TrainArgs),
    /// Train on a typed graph with metapath walks.
    HetTrain(HetTrainArgs),
    /// Link-prediction evaluation of trained embeddings.
    Eval(EvalArgs),
    /// Aspect-distribution variance table and aspect-similarity heatmap.
    Diag(DiagArgs),
    /// Write one matrix of a trained model in word2vec text format.
    Export(ExportArgs),
}

#[derive(Debug, Args, Clone)]
pub struct GraphArgs {
    /// Edge-list file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Treat edges as directed.
    #[arg(long)]
    pub directed: bool,
}

/// Flags mirroring [`TrainerConfig`] keys.
#[derive(Debug, Args, Clone, Default)]
pub struct TrainerFlags {
    /// JSON file with trainer settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "dim", visible_alias = "d")]
    pub dim: Option<usize>,
    #[arg(long = "aspects", visible_alias = "K")]
    pub aspects: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lr_min: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub warmup: Option<bool>,
    #[arg(long)]
    pub warmup_epochs: Option<usize>,
    #[arg(long)]
    pub reg_enabled: Option<bool>,
    #[arg(long, value_parser = parse_reg_scope)]
    pub reg_scope: Option<RegScope>,
    #[arg(long)]
    pub hard_sample: Option<bool>,
    #[arg(long, value_parser = parse_selection)]
    pub selection: Option<SelectionMode>,
    #[arg(long)]
    pub walks_per_node: Option<usize>,
    #[arg(long)]
    pub walk_length: Option<usize>,
    #[arg(long)]
    pub init_scale: Option<f32>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Single-threaded, bit-reproducible training.
    #[arg(long)]
    pub deterministic: bool,
    #[arg(long)]
    pub log_every: Option<usize>,
}

fn parse_reg_scope(s: &str) -> std::result::Result<RegScope, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

fn parse_selection(s: &str) -> std::result::Result<SelectionMode, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

impl TrainerFlags {
    fn apply(&self, c: &mut TrainerConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(
            dim, aspects, window, negatives, tau, lambda, epsilon, lr, lr_min, epochs, batch_size, seed, warmup,
            reg_enabled, reg_scope, hard_sample, selection, walks_per_node, walk_length, threads, log_every
        );
        if self.warmup_epochs.is_some() {
            c.warmup_epochs = self.warmup_epochs;
        }
        if self.init_scale.is_some() {
            c.init_scale = self.init_scale;
        }
        if self.deterministic {
            c.deterministic = true;
        }
    }

    /// File settings (if any) with flags applied on top.
    pub fn resolve(&self) -> Result<TrainerConfig> {
        let mut c = match &self.config {
            Some(path) => read_json::<TrainerConfig>(path)?,
            None => TrainerConfig::default(),
        };
        self.apply(&mut c);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub trainer: TrainerFlags,
    /// Output corpus cache.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub trainer: TrainerFlags,
    /// Corpus cache to reuse (must match graph and walk settings).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Hold out half the edges with this seed, train on the rest and save
    /// the split under `<out>/split`.
    #[arg(long)]
    pub holdout_seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HetTrainArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Node-type file (`node_id type_tag` per line).
    #[arg(long)]
    pub types: PathBuf,
    /// JSON file with heterogeneous settings (a `trainer` object plus
    /// metapath and type options).
    #[arg(long)]
    pub het_config: Option<PathBuf>,
    /// Metapath scheme such as `A,P,A`; repeatable.
    #[arg(long = "metapath")]
    pub metapaths: Vec<String>,
    /// Comma-separated types used by the aspect-selection readout.
    #[arg(long, value_delimiter = ',')]
    pub aspect_context_types: Vec<String>,
    /// Comma-separated types trained without aspect selection.
    #[arg(long, value_delimiter = ',')]
    pub single_aspect_types: Vec<String>,
    /// Fixed target vectors (`node_id v1 .. vd`), kept frozen.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[command(flatten)]
    pub trainer: TrainerFlags,
    #[arg(long)]
    pub holdout_seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Embeddings in word2vec text format.
    #[arg(long, conflicts_with = "random_dim", required_unless_present = "random_dim")]
    pub embeddings: Option<PathBuf>,
    /// Evaluate untrained random embeddings of this dimension instead.
    #[arg(long)]
    pub random_dim: Option<usize>,
    /// Saved split directory; when absent a split is made from `--seed`.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "hadamard")]
    pub operator: String,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    /// Report path (JSON); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    /// Output directory of a `train` run.
    #[arg(long)]
    pub model: PathBuf,
    /// Write the aspect-similarity heatmap.
    #[arg(long)]
    pub heatmap: bool,
    /// Write the per-node aspect-distribution variance table.
    #[arg(long)]
    pub variance: bool,
    /// Output directory for CSVs; defaults to the model directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// `final`, `target` or `aspect:<s>`.
    #[arg(long, default_value = "final")]
    pub matrix: String,
    #[arg(long)]
    pub out: PathBuf,
}

/// Provenance written next to every model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub graph: PathBuf,
    pub directed: bool,
    pub graph_hash: String,
    pub nodes: usize,
    pub config: TrainerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub het: Option<HetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdout_seed: Option<u64>,
}

/// Parses `std::env::args` and runs; returns the process exit status.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Status for a failed run: 2 for configuration problems, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::ZeroDimension { .. } | Error::UnknownOperator(_) | Error::Metapath(_) => 2,
        Error::Json(_) => 2,
        _ => 1,
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Walk(a) => walk(a),
        Command::Train(a) => train(a),
        Command::HetTrain(a) => het_train(a),
        Command::Eval(a) => evaluate(a),
        Command::Diag(a) => diag(a),
        Command::Export(a) => export(a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn load_graph(args: &GraphArgs) -> Result<Graph> {
    let graph = Graph::load_edge_list(&args.graph, EdgeListOptions::directed(args.directed))?;
    log::info!(
        "loaded {} nodes, {} edges ({} self-loops dropped, {} duplicates dropped)",
        graph.node_count(),
        graph.edge_count(),
        graph.stats().self_loops_dropped,
        graph.stats().duplicates_dropped
    );
    Ok(graph)
}

fn config_comment(value: &impl Serialize) -> Result<String> {
    Ok(format!("# config {}", serde_json::to_string(value)?))
}

fn walk(args: WalkArgs) -> Result<()> {
    let config = args.trainer.resolve()?;
    let graph = load_graph(&args.graph)?;
    let corpus = WalkCorpus::generate(&graph, config.walks_per_node, config.walk_length, config.seed)?;
    let mut out = BufWriter::new(File::create(&args.out)?);
    corpus.write_cache(&mut out, &graph.content_hash())?;
    out.flush()?;
    log::info!("wrote {} walks to {}", corpus.len(), args.out.display());
    Ok(())
}

fn holdout(graph: Graph, seed: Option<u64>, out: &Path) -> Result<Graph> {
    match seed {
        Some(seed) => {
            let split = eval::split_edges(&graph, seed)?;
            split.save_dir(out.join("split"))?;
            log::info!(
                "held out {} of {} edges; training on the residual graph",
                split.test_pos.len(),
                graph.edge_count()
            );
            Ok(split.residual)
        }
        None => Ok(graph),
    }
}

fn write_model(
    out: &Path,
    graph: &Graph,
    store: &EmbeddingStore,
    report: &TrainReport,
    manifest: &Manifest,
) -> Result<()> {
    store.save_dir(out, graph.labels())?;
    std::fs::write(out.join("manifest.json"), serde_json::to_string_pretty(manifest)?)?;
    let mut log = BufWriter::new(File::create(out.join("train.log"))?);
    writeln!(log, "{}", config_comment(manifest)?)?;
    writeln!(log, "epoch,step,mean_loss,mean_reg")?;
    for r in &report.records {
        writeln!(log, "{}", r.to_line())?;
    }
    log.flush()?;
    std::fs::write(out.join("report.json"), serde_json::to_string_pretty(report)?)?;
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let config = args.trainer.resolve()?;
    let graph = load_graph(&args.graph)?;
    std::fs::create_dir_all(&args.out)?;
    let graph = holdout(graph, args.holdout_seed, &args.out)?;
    let corpus = match &args.corpus {
        Some(path) => WalkCorpus::read_cache(
            BufReader::new(File::open(path)?),
            &graph,
            config.walks_per_node,
            config.walk_length,
            config.seed,
        )?,
        None => WalkCorpus::generate(&graph, config.walks_per_node, config.walk_length, config.seed)?,
    };
    let (store, report) = trainer::train_on_corpus(&graph, &corpus, &config)?;
    let manifest = Manifest {
        command: "train".into(),
        graph: args.graph.graph.clone(),
        directed: args.graph.directed,
        graph_hash: graph.content_hash(),
        nodes: graph.node_count(),
        config,
        het: None,
        holdout_seed: args.holdout_seed,
    };
    write_model(&args.out, &graph, &store, &report, &manifest)?;
    log::info!("wrote model to {}", args.out.display());
    Ok(())
}

fn het_train(args: HetTrainArgs) -> Result<()> {
    let mut het = match &args.het_config {
        Some(path) => read_json::<HetConfig>(path)?,
        None => HetConfig::default(),
    };
    args.trainer.apply(&mut het.trainer);
    het.trainer.validate()?;
    if !args.metapaths.is_empty() {
        het.metapaths = args.metapaths.clone();
    }
    if !args.aspect_context_types.is_empty() {
        het.aspect_context_types = args.aspect_context_types.clone();
    }
    if !args.single_aspect_types.is_empty() {
        het.single_aspect_types = args.single_aspect_types.clone();
    }
    let mut graph = load_graph(&args.graph)?;
    graph.load_types(&args.types)?;
    let schemes = het.parse_metapaths(&graph)?;
    std::fs::create_dir_all(&args.out)?;
    let graph = holdout(graph, args.holdout_seed, &args.out)?;
    for s in &schemes {
        s.check_schema(&graph)?;
    }
    let t = &het.trainer;
    let corpus = hetnet::metapath_walks(&graph, &schemes, t.walks_per_node, t.walk_length, t.seed)?;
    let features = args.features.as_ref().map(|p| NodeFeatures::load(p, &graph)).transpose()?;
    let (store, report) = hetnet::train_het_on_corpus(&graph, &corpus, &het, features.as_ref())?;
    let manifest = Manifest {
        command: "het-train".into(),
        graph: args.graph.graph.clone(),
        directed: args.graph.directed,
        graph_hash: graph.content_hash(),
        nodes: graph.node_count(),
        config: het.trainer.clone(),
        het: Some(het),
        holdout_seed: args.holdout_seed,
    };
    write_model(&args.out, &graph, &store, &report, &manifest)?;
    std::fs::copy(&args.types, args.out.join("types.txt"))?;
    log::info!("wrote model to {}", args.out.display());
    Ok(())
}

fn evaluate(args: EvalArgs) -> Result<()> {
    let operator: EdgeOperator = args.operator.parse()?;
    let graph = load_graph(&args.graph)?;
    let split = match &args.split {
        Some(dir) => EdgeSplit::load_dir(dir, &graph)?,
        None => eval::split_edges(&graph, args.seed)?,
    };
    let (dim, embeddings) = match (&args.embeddings, args.random_dim) {
        (Some(path), _) => {
            let lookup = |s: &str| graph.node_id(s);
            crate::store::read_word2vec(BufReader::new(File::open(path)?), &lookup, graph.node_count())?
        }
        (None, Some(dim)) => {
            let mut store = EmbeddingStore::init_random(graph.node_count(), dim, 1, args.seed, Some(1.0))?;
            (dim, store.finalize().to_vec())
        }
        (None, None) => return Err(Error::Config("need --embeddings or --random-dim".into())),
    };
    let options = LogRegOptions {
        l2: args.l2,
        ..LogRegOptions::default()
    };
    let report = eval::evaluate(&embeddings, dim, &split, operator, &options)?;
    let json = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    log::info!("AUC {:.4} ({} test edges, {})", report.auc, report.split.test_pos, operator);
    Ok(())
}

fn load_model(dir: &Path) -> Result<(Manifest, Graph, EmbeddingStore)> {
    let manifest: Manifest = read_json(&dir.join("manifest.json"))?;
    let mut graph = Graph::load_edge_list(&manifest.graph, EdgeListOptions::directed(manifest.directed))?;
    if let Some(seed) = manifest.holdout_seed {
        graph = eval::split_edges(&graph, seed)?.residual;
    }
    if graph.content_hash() != manifest.graph_hash {
        return Err(Error::CacheMismatch(format!(
            "graph {} changed since the model was trained",
            manifest.graph.display()
        )));
    }
    let store = EmbeddingStore::load_dir(
        dir,
        manifest.config.aspects,
        |s| graph.node_id(s),
        graph.node_count(),
    )?;
    Ok((manifest, graph, store))
}

fn diag(args: DiagArgs) -> Result<()> {
    let (manifest, graph, store) = load_model(&args.model)?;
    let out = args.out.clone().unwrap_or_else(|| args.model.clone());
    std::fs::create_dir_all(&out)?;
    let (heatmap, variance) = if !args.heatmap && !args.variance {
        (true, true)
    } else {
        (args.heatmap, args.variance)
    };
    let header = config_comment(&manifest)?;
    if heatmap {
        let h = trainer::aspect_heatmap(&store);
        let mut f = BufWriter::new(File::create(out.join("heatmap.csv"))?);
        writeln!(f, "{header}")?;
        writeln!(
            f,
            "# mean_offdiag_abs_cosine {:.6}",
            trainer::mean_offdiag_abs_cosine(&store)
        )?;
        for row in &h {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(f, "{}", cells.join(","))?;
        }
        f.flush()?;
    }
    if variance {
        let c = &manifest.config;
        let corpus = if let Some(het) = &manifest.het {
            let mut typed = graph.clone();
            let types_path = args.model.join("types.txt");
            if types_path.exists() {
                typed.load_types(&types_path)?;
            }
            match het.parse_metapaths(&typed) {
                Ok(schemes) => hetnet::metapath_walks(&typed, &schemes, c.walks_per_node, c.walk_length, c.seed)?,
                Err(_) => WalkCorpus::generate(&graph, c.walks_per_node, c.walk_length, c.seed)?,
            }
        } else {
            WalkCorpus::generate(&graph, c.walks_per_node, c.walk_length, c.seed)?
        };
        let stats = trainer::aspect_distribution_stats(&store, &corpus, c.window);
        let mut f = BufWriter::new(File::create(out.join("aspect_variance.csv"))?);
        writeln!(f, "{header}")?;
        writeln!(f, "node,frequency,variance")?;
        for s in stats {
            writeln!(f, "{},{},{:.8}", graph.label(s.node), s.frequency, s.variance)?;
        }
        f.flush()?;
    }
    log::info!("wrote diagnostics to {}", out.display());
    Ok(())
}

fn export(args: ExportArgs) -> Result<()> {
    let (_, graph, store) = load_model(&args.model)?;
    let which = match args.matrix.as_str() {
        "final" => Matrix::Final,
        "target" => Matrix::Target,
        other => match other.strip_prefix("aspect:").and_then(|s| s.parse().ok()) {
            Some(s) if s < store.aspects() => Matrix::Aspect(s),
            _ => return Err(Error::Config(format!("unknown matrix `{other}`"))),
        },
    };
    let out = BufWriter::new(File::create(&args.out)?);
    store.write_matrix(which, graph.labels(), out)?;
    Ok(())
}
