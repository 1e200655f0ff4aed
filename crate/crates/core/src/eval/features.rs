use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::split::Edge;

/// Binary operator turning two node vectors into an edge feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeOperator {
    #[default]
    Hadamard,
    Average,
    L1,
    L2,
}

impl EdgeOperator {
    pub const ALL: [EdgeOperator; 4] = [Self::Hadamard, Self::Average, Self::L1, Self::L2];

    pub fn name(self) -> &'static str {
        match self {
            Self::Hadamard => "hadamard",
            Self::Average => "average",
            Self::L1 => "l1",
            Self::L2 => "l2",
        }
    }

    #[inline]
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Self::Hadamard => a * b,
            Self::Average => 0.5 * (a + b),
            Self::L1 => (a - b).abs(),
            Self::L2 => (a - b) * (a - b),
        }
    }
}

impl fmt::Display for EdgeOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EdgeOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|op| op.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownOperator(s.to_owned()))
    }
}

/// Feature vector of one edge from its endpoint rows.
pub fn edge_features(u: &[f32], v: &[f32], op: EdgeOperator) -> Vec<f64> {
    u.iter().zip(v).map(|(&a, &b)| op.apply(a as f64, b as f64)).collect()
}

/// Row-major `edges.len() x dim` feature matrix from a row-major embedding
/// matrix.
pub fn feature_matrix(embeddings: &[f32], dim: usize, edges: &[Edge], op: EdgeOperator) -> Vec<f64> {
    let row = |v: u32| &embeddings[v as usize * dim..(v as usize + 1) * dim];
    edges
        .par_iter()
        .flat_map_iter(|&(u, v)| edge_features(row(u), row(v), op))
        .collect()
}
