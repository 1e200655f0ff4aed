use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the per-window aspect distribution is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    /// Gumbel-Softmax over the context-readout scores (the default).
    #[default]
    Gumbel,
    /// Plain softmax over the scores, no noise or temperature.
    Softmax,
}

/// Which nodes the aspect regularizer is evaluated on at each minibatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RegScope {
    /// Nodes appearing (as target or context) in the minibatch.
    #[default]
    Touched,
    /// Every node; only sensible for tiny graphs.
    Full,
}

/// All training hyperparameters. Defaults follow the standard settings:
/// r=10, L=80, window 3, 2 negatives, tau 0.5, lambda 0.01, d=20, K=5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    #[serde(alias = "d")]
    pub dim: usize,
    #[serde(alias = "K")]
    pub aspects: usize,
    pub window: usize,
    pub negatives: usize,
    pub tau: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub lr: f64,
    pub lr_min: f64,
    pub epochs: usize,
    /// Windows per minibatch; the regularizer is applied once per batch.
    pub batch_size: usize,
    pub seed: u64,
    pub warmup: bool,
    /// Epochs of the single-aspect warm-up run; `None` reuses `epochs`.
    pub warmup_epochs: Option<usize>,
    pub reg_enabled: bool,
    pub reg_scope: RegScope,
    pub hard_sample: bool,
    pub selection: SelectionMode,
    pub walks_per_node: usize,
    pub walk_length: usize,
    /// Half-width of the uniform init range; `None` means `0.5 / dim`.
    pub init_scale: Option<f32>,
    /// Worker threads for asynchronous SGD; `0` uses all cores.
    pub threads: usize,
    /// Single-threaded, bit-reproducible training.
    pub deterministic: bool,
    /// Emit a progress record every this many minibatches (0: epoch ends only).
    pub log_every: usize,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            dim: 20,
            aspects: 5,
            window: 3,
            negatives: 2,
            tau: 0.5,
            lambda: 0.01,
            epsilon: 0.9,
            lr: 0.025,
            lr_min: 1e-4,
            epochs: 5,
            batch_size: 128,
            seed: 0,
            warmup: true,
            warmup_epochs: None,
            reg_enabled: true,
            reg_scope: RegScope::Touched,
            hard_sample: false,
            selection: SelectionMode::Gumbel,
            walks_per_node: 10,
            walk_length: 80,
            init_scale: None,
            threads: 0,
            deterministic: false,
            log_every: 0,
        }
    }
}

impl TrainerConfig {
    /// Plain skip-gram settings: one aspect, no regularizer, no warm-up.
    pub fn deepwalk(dim: usize) -> Self {
        Self {
            dim,
            aspects: 1,
            warmup: false,
            reg_enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.dim == 0 || self.aspects == 0 {
            return fail(format!("dim and aspects must be >= 1 (dim={}, aspects={})", self.dim, self.aspects));
        }
        if self.window == 0 {
            return fail("window must be >= 1".into());
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return fail(format!("tau must be > 0 (got {})", self.tau));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return fail(format!("epsilon must lie in [0, 1] (got {})", self.epsilon));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be >= 0 (got {})", self.lambda));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) || self.lr_min < 0.0 {
            return fail(format!("invalid learning rate {} (floor {})", self.lr, self.lr_min));
        }
        if self.batch_size == 0 {
            return fail("batch_size must be >= 1".into());
        }
        if self.walks_per_node == 0 || self.walk_length < 2 {
            return fail(format!(
                "walks need walks_per_node >= 1 and walk_length >= 2 (got {}, {})",
                self.walks_per_node, self.walk_length
            ));
        }
        Ok(())
    }

    pub fn worker_threads(&self) -> usize {
        if self.deterministic {
            1
        } else if self.threads == 0 {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        } else {
            self.threads
        }
    }

    pub(crate) fn warmup_config(&self) -> Self {
        Self {
            aspects: 1,
            warmup: false,
            reg_enabled: false,
            epochs: self.warmup_epochs.unwrap_or(self.epochs),
            ..self.clone()
        }
    }
}
