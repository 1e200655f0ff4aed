//! The SGD loop shared by the aspect trainer, the plain skip-gram trainer
//! and the heterogeneous trainer.
//!
//! Windows are shuffled once per epoch and split into contiguous shards,
//! one per worker. Workers update rows without locks (asynchronous SGD);
//! with one worker the run is bit-reproducible. Each window is one SGD step;
//! the regularizer is applied once per minibatch over the nodes the batch
//! touched.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeTypes};
use crate::rng;
use crate::store::{EmbeddingStore, SharedParams};
use crate::walk::{context_of, WalkCorpus};

use super::config::{RegScope, SelectionMode, TrainerConfig};
use super::objective::{skipgram_window_into, window_loss_into, AspectWeights, Scratch, WindowGradient, WindowSpec};
use super::regularizer::{node_regularizer, RegScratch};
use super::sampler::NegativeSampler;
use super::selection::fill_gumbel;

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProgressRecord {
    pub epoch: usize,
    pub step: usize,
    pub mean_loss: f64,
    pub mean_reg: f64,
}

impl ProgressRecord {
    pub fn to_line(&self) -> String {
        format!("{},{},{:.6},{:.6}", self.epoch, self.step, self.mean_loss, self.mean_reg)
    }
}

/// Summary of a training run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TrainReport {
    pub records: Vec<ProgressRecord>,
    pub windows_per_epoch: usize,
    pub workers: usize,
    /// Aspect pairs skipped by the regularizer because of a zero-norm row.
    pub zero_norm_pairs: u64,
    /// Heterogeneous windows whose restricted readout context was empty.
    pub fallback_windows: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kernel {
    Aspect,
    SkipGram,
}

/// Per-type behaviour for heterogeneous training.
pub(crate) struct TypedPlan<'a> {
    pub types: &'a NodeTypes,
    /// Target types modelled without aspect inference.
    pub single_aspect: Vec<bool>,
    /// Context types pooled by the readout.
    pub readout_types: Vec<bool>,
    pub frozen_targets: Option<Vec<bool>>,
}

pub(crate) struct Plan<'a> {
    pub corpus: &'a WalkCorpus,
    pub sampler: NegativeSampler,
    pub typed: Option<TypedPlan<'a>>,
}

struct Shared<'a> {
    processed: AtomicUsize,
    total: usize,
    failed: AtomicBool,
    zero_norm: AtomicU64,
    fallback: AtomicU64,
    error: Mutex<Option<Error>>,
    params: SharedParams<'a>,
}

pub(crate) fn run(store: &mut EmbeddingStore, plan: &Plan<'_>, config: &TrainerConfig, kernel: Kernel) -> Result<TrainReport> {
    let windows: Vec<(u32, u32)> = plan
        .corpus
        .iter()
        .enumerate()
        .flat_map(|(w, walk)| (0..walk.len()).filter(move |_| walk.len() > 1).map(move |t| (w as u32, t as u32)))
        .collect();
    let workers = config.worker_threads().max(1).min(windows.len().max(1));
    let mut report = TrainReport {
        windows_per_epoch: windows.len(),
        workers,
        ..TrainReport::default()
    };
    if windows.is_empty() || config.epochs == 0 {
        return Ok(report);
    }

    store.clear_final();
    let node_count = store.node_count();
    let shared = Shared {
        processed: AtomicUsize::new(0),
        total: windows.len() * config.epochs,
        failed: AtomicBool::new(false),
        zero_norm: AtomicU64::new(0),
        fallback: AtomicU64::new(0),
        error: Mutex::new(None),
        params: store.shared(),
    };

    let mut order = windows;
    let mut step_offset = 0;
    for epoch in 0..config.epochs {
        let mut rng = rng::stream(config.seed, rng::DOMAIN_SHUFFLE, epoch as u64);
        order.shuffle(&mut rng);
        let shard_len = order.len().div_ceil(workers);
        let shards: Vec<&[(u32, u32)]> = order.chunks(shard_len).collect();

        let results: Vec<WorkerTotals> = if shards.len() == 1 {
            vec![work(shards[0], 0, epoch, plan, config, kernel, &shared, node_count, step_offset)]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = shards
                    .iter()
                    .enumerate()
                    .map(|(w, shard)| {
                        let shared = &shared;
                        scope.spawn(move || work(shard, w, epoch, plan, config, kernel, shared, node_count, step_offset))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            })
        };

        if shared.failed.load(Ordering::Relaxed) {
            let err = shared.error.lock().expect("error slot").take();
            return Err(err.unwrap_or_else(|| Error::Diverged(format!("epoch {epoch}"))));
        }
        let totals = results.iter().fold(WorkerTotals::default(), |a, b| a.merge(b));
        step_offset += totals.batches;
        for (i, r) in results.iter().enumerate() {
            if i == 0 {
                report.records.extend(r.records.iter().cloned());
            }
        }
        report.records.push(ProgressRecord {
            epoch,
            step: step_offset,
            mean_loss: totals.loss / totals.windows.max(1) as f64,
            mean_reg: totals.reg / totals.batches.max(1) as f64,
        });
        log::info!(
            "epoch {epoch}: mean loss {:.4}, mean reg {:.4}",
            totals.loss / totals.windows.max(1) as f64,
            totals.reg / totals.batches.max(1) as f64
        );
    }
    report.zero_norm_pairs = shared.zero_norm.load(Ordering::Relaxed);
    report.fallback_windows = shared.fallback.load(Ordering::Relaxed);
    if report.zero_norm_pairs > 0 {
        log::warn!("{} zero-norm aspect pair(s) skipped by the regularizer", report.zero_norm_pairs);
    }
    if report.fallback_windows > 0 {
        log::warn!(
            "{} window(s) had no readout-type context; used the full context",
            report.fallback_windows
        );
    }
    drop(shared);
    if !store.all_finite() {
        return Err(Error::Diverged("non-finite parameter after training".into()));
    }
    Ok(report)
}

#[derive(Debug, Default, Clone)]
struct WorkerTotals {
    loss: f64,
    reg: f64,
    windows: usize,
    batches: usize,
    records: Vec<ProgressRecord>,
}

impl WorkerTotals {
    fn merge(&self, other: &WorkerTotals) -> WorkerTotals {
        WorkerTotals {
            loss: self.loss + other.loss,
            reg: self.reg + other.reg,
            windows: self.windows + other.windows,
            batches: self.batches + other.batches,
            records: Vec::new(),
        }
    }
}

struct WorkerRngs {
    negatives: ChaCha8Rng,
    gumbel: ChaCha8Rng,
}

#[allow(clippy::too_many_arguments)]
fn work(
    shard: &[(u32, u32)],
    worker: usize,
    epoch: usize,
    plan: &Plan<'_>,
    config: &TrainerConfig,
    kernel: Kernel,
    shared: &Shared<'_>,
    node_count: usize,
    step_offset: usize,
) -> WorkerTotals {
    let stream = ((epoch as u64) << 20) | worker as u64;
    let mut rngs = WorkerRngs {
        negatives: rng::stream(config.seed, rng::DOMAIN_NEGATIVE, stream),
        gumbel: rng::stream(config.seed, rng::DOMAIN_GUMBEL, stream),
    };
    let params = &shared.params;
    let aspects = config.aspects;
    let reg_active = kernel == Kernel::Aspect && config.reg_enabled && config.lambda > 0.0 && aspects > 1;
    let m = config.negatives;

    let mut scratch = Scratch::default();
    let mut grad = WindowGradient::default();
    let mut context: Vec<NodeId> = Vec::with_capacity(2 * config.window);
    let mut readout_ctx: Vec<NodeId> = Vec::with_capacity(2 * config.window);
    let mut negatives: Vec<NodeId> = Vec::with_capacity(2 * config.window * m);
    let mut noise = vec![0.0; aspects];
    let mut reg_scratch = RegScratch::new(aspects, config.dim);
    let mut stamp = vec![u32::MAX; if reg_active { node_count } else { 0 }];
    let mut touched: Vec<NodeId> = Vec::new();
    let all_nodes: Vec<NodeId> = if reg_active && config.reg_scope == RegScope::Full {
        (0..node_count as NodeId).collect()
    } else {
        Vec::new()
    };

    let mut totals = WorkerTotals::default();
    let mut interval = (0.0, 0.0, 0usize, 0usize);
    let fail = |err: Error| {
        shared.failed.store(true, Ordering::Relaxed);
        let mut slot = shared.error.lock().expect("error slot");
        slot.get_or_insert(err);
    };

    for (batch_idx, batch) in shard.chunks(config.batch_size).enumerate() {
        if shared.failed.load(Ordering::Relaxed) {
            break;
        }
        let progress = shared.processed.load(Ordering::Relaxed) as f64 / shared.total as f64;
        let lr = (config.lr * (1.0 - progress)).max(config.lr_min);
        touched.clear();
        let mut batch_loss = 0.0;

        for &(w, t) in batch {
            let walk = plan.corpus.walk(w as usize);
            let target = walk[t as usize];
            context_of(walk, t as usize, config.window, &mut context);

            negatives.clear();
            for &j in &context {
                let bucket = match &plan.typed {
                    Some(typed) => typed.types.of(j) as usize,
                    None => 0,
                };
                for _ in 0..m {
                    negatives.push(plan.sampler.sample(bucket, &mut rngs.negatives));
                }
            }

            match kernel {
                Kernel::SkipGram => {
                    skipgram_window_into(params, target, &context, &negatives, m, &mut scratch, &mut grad);
                }
                Kernel::Aspect => {
                    let mut single = false;
                    readout_ctx.clear();
                    match &plan.typed {
                        Some(typed) => {
                            single = typed.single_aspect[typed.types.of(target) as usize];
                            readout_ctx.extend(
                                context
                                    .iter()
                                    .copied()
                                    .filter(|&j| typed.readout_types[typed.types.of(j) as usize]),
                            );
                            if !single && readout_ctx.is_empty() {
                                shared.fallback.fetch_add(1, Ordering::Relaxed);
                                readout_ctx.extend_from_slice(&context);
                            }
                        }
                        None => readout_ctx.extend_from_slice(&context),
                    }
                    let weights = if single {
                        AspectWeights::Pooled
                    } else {
                        match config.selection {
                            SelectionMode::Softmax => AspectWeights::Softmax,
                            SelectionMode::Gumbel => {
                                if aspects > 1 {
                                    fill_gumbel(&mut rngs.gumbel, &mut noise);
                                }
                                AspectWeights::Gumbel {
                                    tau: config.tau,
                                    noise: &noise,
                                    hard: config.hard_sample,
                                }
                            }
                        }
                    };
                    let spec = WindowSpec {
                        target,
                        context: &context,
                        negatives: &negatives,
                        negatives_per_pair: m,
                        selection_context: &readout_ctx,
                        weights,
                    };
                    if let Err(e) = window_loss_into(params, &spec, &mut scratch, &mut grad) {
                        fail(e);
                        return totals;
                    }
                }
            }

            if !grad.loss.is_finite() {
                fail(Error::Diverged(format!("epoch {epoch}: non-finite loss at target {target}")));
                return totals;
            }
            batch_loss += grad.loss;

            let mut finite = true;
            let frozen = plan
                .typed
                .as_ref()
                .and_then(|t| t.frozen_targets.as_ref())
                .is_some_and(|f| f[target as usize]);
            if !frozen {
                finite &= params.add_target(target, -lr, &grad.target_grad);
            }
            for (key, g) in grad.rows() {
                finite &= params.add_context(key.aspect, key.node, -lr, g);
            }
            if !finite {
                fail(Error::Diverged(format!("epoch {epoch}: non-finite parameter near node {target}")));
                return totals;
            }

            if reg_active && config.reg_scope == RegScope::Touched {
                let id = batch_idx as u32;
                for &v in std::iter::once(&target).chain(context.iter()) {
                    if stamp[v as usize] != id {
                        stamp[v as usize] = id;
                        touched.push(v);
                    }
                }
            }
        }

        let mut batch_reg = 0.0;
        if reg_active {
            let nodes = if config.reg_scope == RegScope::Full { &all_nodes } else { &touched };
            // The batch objective is the mean window loss plus lambda * reg.
            // Per-window steps of `lr` equal one step of `lr * |batch|` on
            // that mean, so the penalty gets the same step.
            let scale = -lr * config.lambda * batch.len() as f64;
            for &h in nodes {
                let stats = node_regularizer(params, config.epsilon, h, &mut reg_scratch);
                batch_reg += stats.value;
                if stats.zero_norm_pairs > 0 {
                    shared.zero_norm.fetch_add(stats.zero_norm_pairs as u64, Ordering::Relaxed);
                }
                if stats.active_pairs == 0 {
                    continue;
                }
                let mut finite = true;
                for s in 0..aspects {
                    finite &= params.add_context(s, h, scale, reg_scratch.grad(s));
                }
                if !finite {
                    fail(Error::Diverged(format!("epoch {epoch}: regularizer produced non-finite row {h}")));
                    return totals;
                }
            }
        }

        shared.processed.fetch_add(batch.len(), Ordering::Relaxed);
        totals.loss += batch_loss;
        totals.reg += batch_reg;
        totals.windows += batch.len();
        totals.batches += 1;
        if config.log_every > 0 && worker == 0 {
            interval.0 += batch_loss;
            interval.1 += batch_reg;
            interval.2 += batch.len();
            interval.3 += 1;
            if interval.3 == config.log_every {
                totals.records.push(ProgressRecord {
                    epoch,
                    step: step_offset + totals.batches,
                    mean_loss: interval.0 / interval.2 as f64,
                    mean_reg: interval.1 / interval.3 as f64,
                });
                interval = (0.0, 0.0, 0, 0);
            }
        }
    }
    totals
}
