//! Multi-aspect node embeddings.
//!
//! Each node has one target vector and `K` aspect context vectors. Training
//! runs skip-gram with negative sampling over random walks; for every
//! window the aspect of the target node is chosen from its context by a
//! Gumbel-Softmax over readout scores, and a masked cosine penalty keeps a
//! node's aspect vectors apart. The final embedding of a node is its target
//! vector plus the mean of its aspect vectors.

pub mod cli;
pub mod error;
pub mod eval;
pub mod graph;
pub mod hetnet;
mod rng;
pub mod store;
pub mod synth;
pub mod trainer;
pub mod walk;

pub use error::{Error, Result};
pub use graph::Graph;
pub use store::EmbeddingStore;
pub use trainer::TrainerConfig;
