//! Trainable parameters: one target matrix `P` and `K` aspect context
//! matrices `Q(s)`, all `|V| x d`, plus the derived final matrix `U`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU32, Ordering};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::rng;

/// Standard deviation of the noise added to each aspect copy during warm-up.
pub const WARMUP_NOISE_SIGMA: f32 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    nodes: usize,
    dim: usize,
    aspects: usize,
    target: Vec<f32>,
    // aspect-major: aspect s occupies [s*nodes*dim, (s+1)*nodes*dim)
    context: Vec<f32>,
    final_: Option<Vec<f32>>,
}

/// Selects one of the matrices held by a store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matrix {
    Final,
    Target,
    Aspect(usize),
}

impl EmbeddingStore {
    pub fn zeros(nodes: usize, dim: usize, aspects: usize) -> Result<Self> {
        if nodes == 0 || dim == 0 || aspects == 0 {
            return Err(Error::ZeroDimension { nodes, dim, aspects });
        }
        Ok(Self {
            nodes,
            dim,
            aspects,
            target: vec![0.0; nodes * dim],
            context: vec![0.0; aspects * nodes * dim],
            final_: None,
        })
    }

    /// Uniform entries in `[-scale, scale]`; `scale` defaults to `0.5 / dim`.
    pub fn init_random(nodes: usize, dim: usize, aspects: usize, seed: u64, scale: Option<f32>) -> Result<Self> {
        let mut store = Self::zeros(nodes, dim, aspects)?;
        let scale = scale.unwrap_or(0.5 / dim as f32);
        if scale > 0.0 {
            let mut rng = rng::stream(seed, rng::DOMAIN_INIT, 0);
            for x in store.target.iter_mut().chain(store.context.iter_mut()) {
                *x = rng.random_range(-scale..=scale);
            }
        }
        Ok(store)
    }

    /// Builds a `K`-aspect store from a single-context (Deepwalk-style)
    /// store: `P` is copied and every aspect matrix is the single context
    /// matrix plus independent `N(0, sigma^2)` noise.
    pub fn from_single_aspect(base: &EmbeddingStore, aspects: usize, sigma: f32, seed: u64) -> Result<Self> {
        if base.aspects != 1 {
            return Err(Error::Config(format!(
                "warm-up source must have one aspect, found {}",
                base.aspects
            )));
        }
        let mut store = Self::zeros(base.nodes, base.dim, aspects)?;
        store.target.copy_from_slice(&base.target);
        let normal = Normal::new(0.0f32, sigma).map_err(|e| Error::Config(e.to_string()))?;
        let mut rng = rng::stream(seed, rng::DOMAIN_WARMUP, 0);
        for s in 0..aspects {
            let block = store.aspect_matrix_mut(s);
            for (x, &b) in block.iter_mut().zip(&base.context) {
                *x = b + if sigma > 0.0 { normal.sample(&mut rng) } else { 0.0 };
            }
        }
        Ok(store)
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn aspects(&self) -> usize {
        self.aspects
    }

    /// `|V| * d * (K + 1)`.
    pub fn parameter_count(&self) -> usize {
        self.target.len() + self.context.len()
    }

    pub fn target_row(&self, node: NodeId) -> &[f32] {
        let i = node as usize * self.dim;
        &self.target[i..i + self.dim]
    }

    pub fn target_row_mut(&mut self, node: NodeId) -> &mut [f32] {
        let i = node as usize * self.dim;
        &mut self.target[i..i + self.dim]
    }

    pub fn context_row(&self, aspect: usize, node: NodeId) -> &[f32] {
        let i = self.context_offset(aspect, node);
        &self.context[i..i + self.dim]
    }

    pub fn context_row_mut(&mut self, aspect: usize, node: NodeId) -> &mut [f32] {
        let i = self.context_offset(aspect, node);
        &mut self.context[i..i + self.dim]
    }

    #[inline]
    fn context_offset(&self, aspect: usize, node: NodeId) -> usize {
        debug_assert!(aspect < self.aspects);
        (aspect * self.nodes + node as usize) * self.dim
    }

    pub fn target_matrix(&self) -> &[f32] {
        &self.target
    }

    pub fn aspect_matrix(&self, aspect: usize) -> &[f32] {
        let len = self.nodes * self.dim;
        &self.context[aspect * len..(aspect + 1) * len]
    }

    pub fn aspect_matrix_mut(&mut self, aspect: usize) -> &mut [f32] {
        let len = self.nodes * self.dim;
        &mut self.context[aspect * len..(aspect + 1) * len]
    }

    pub fn all_finite(&self) -> bool {
        self.target.iter().chain(&self.context).all(|x| x.is_finite())
    }

    /// Computes and caches `U_i = P_i + (1/K) * sum_s Q_i(s)`.
    pub fn finalize(&mut self) -> &[f32] {
        let mut u = vec![0.0f32; self.nodes * self.dim];
        let k = self.aspects as f32;
        for (idx, out) in u.iter_mut().enumerate() {
            let mut sum = 0.0f32;
            for s in 0..self.aspects {
                sum += self.context[s * self.nodes * self.dim + idx];
            }
            *out = self.target[idx] + sum / k;
        }
        self.final_ = Some(u);
        self.final_.as_deref().unwrap()
    }

    /// The cached final matrix, if [`EmbeddingStore::finalize`] has run.
    pub fn final_embeddings(&self) -> Option<&[f32]> {
        self.final_.as_deref()
    }

    pub fn final_row(&self, node: NodeId) -> Option<&[f32]> {
        let i = node as usize * self.dim;
        self.final_.as_ref().map(|u| &u[i..i + self.dim])
    }

    pub fn matrix(&self, which: Matrix) -> Result<&[f32]> {
        match which {
            Matrix::Final => self
                .final_embeddings()
                .ok_or_else(|| Error::Config("final embeddings not computed".into())),
            Matrix::Target => Ok(&self.target),
            Matrix::Aspect(s) if s < self.aspects => Ok(self.aspect_matrix(s)),
            Matrix::Aspect(s) => Err(Error::Config(format!(
                "aspect {s} out of range (K = {})",
                self.aspects
            ))),
        }
    }

    /// Writes one matrix in word2vec text format with external ids.
    pub fn write_matrix<W: Write>(&self, which: Matrix, labels: &[String], out: W) -> Result<()> {
        write_word2vec(self.matrix(which)?, self.dim, labels, out)
    }

    /// Writes `embeddings.txt` (U), `target.txt` (P) and `aspect_<s>.txt`
    /// for every aspect into `dir`.
    pub fn save_dir(&self, dir: impl AsRef<Path>, labels: &[String]) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        if self.final_.is_some() {
            let f = BufWriter::new(File::create(dir.join("embeddings.txt"))?);
            self.write_matrix(Matrix::Final, labels, f)?;
        }
        let f = BufWriter::new(File::create(dir.join("target.txt"))?);
        self.write_matrix(Matrix::Target, labels, f)?;
        for s in 0..self.aspects {
            let f = BufWriter::new(File::create(dir.join(format!("aspect_{s}.txt")))?);
            self.write_matrix(Matrix::Aspect(s), labels, f)?;
        }
        Ok(())
    }

    /// Reads a store written by [`EmbeddingStore::save_dir`]. Rows are
    /// placed by looking up each external id with `lookup`.
    pub fn load_dir(
        dir: impl AsRef<Path>,
        aspects: usize,
        lookup: impl Fn(&str) -> Option<NodeId>,
        nodes: usize,
    ) -> Result<Self> {
        let dir = dir.as_ref();
        let open = |name: &str| -> Result<BufReader<File>> { Ok(BufReader::new(File::open(dir.join(name))?)) };
        let (dim, target) = read_word2vec(open("target.txt")?, &lookup, nodes)?;
        let mut store = Self::zeros(nodes, dim, aspects)?;
        store.target = target;
        for s in 0..aspects {
            let (d, m) = read_word2vec(open(&format!("aspect_{s}.txt"))?, &lookup, nodes)?;
            if d != dim {
                return Err(Error::LengthMismatch(format!("aspect_{s}.txt has dim {d}, expected {dim}")));
            }
            store.aspect_matrix_mut(s).copy_from_slice(&m);
        }
        store.finalize();
        Ok(store)
    }

    /// Hogwild view used by the trainer: rows may be updated concurrently
    /// through relaxed atomic loads and stores.
    pub(crate) fn shared(&mut self) -> SharedParams<'_> {
        SharedParams {
            dim: self.dim,
            nodes: self.nodes,
            target: as_atomic(&mut self.target),
            context: as_atomic(&mut self.context),
        }
    }

    pub(crate) fn clear_final(&mut self) {
        self.final_ = None;
    }
}

fn as_atomic(values: &mut [f32]) -> &[AtomicU32] {
    // SAFETY: AtomicU32 has the same size and alignment as u32 and f32, and
    // the exclusive borrow guarantees no non-atomic access while the view
    // is alive.
    unsafe { &*(values as *mut [f32] as *const [AtomicU32]) }
}

/// Read access to parameter rows, abstracting over owned and shared stores.
pub trait RowSource {
    fn dim(&self) -> usize;
    fn aspects(&self) -> usize;
    fn read_target(&self, node: NodeId, out: &mut [f64]);
    fn read_context(&self, aspect: usize, node: NodeId, out: &mut [f64]);
}

impl RowSource for EmbeddingStore {
    fn dim(&self) -> usize {
        self.dim
    }

    fn aspects(&self) -> usize {
        self.aspects
    }

    fn read_target(&self, node: NodeId, out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(self.target_row(node)) {
            *o = x as f64;
        }
    }

    fn read_context(&self, aspect: usize, node: NodeId, out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(self.context_row(aspect, node)) {
            *o = x as f64;
        }
    }
}

pub(crate) struct SharedParams<'a> {
    dim: usize,
    nodes: usize,
    target: &'a [AtomicU32],
    context: &'a [AtomicU32],
}

impl SharedParams<'_> {
    #[inline]
    fn target_range(&self, node: NodeId) -> std::ops::Range<usize> {
        let i = node as usize * self.dim;
        i..i + self.dim
    }

    #[inline]
    fn context_range(&self, aspect: usize, node: NodeId) -> std::ops::Range<usize> {
        let i = (aspect * self.nodes + node as usize) * self.dim;
        i..i + self.dim
    }

    /// `row += scale * grad`; returns false if any updated entry is
    /// non-finite.
    #[inline]
    pub(crate) fn add_target(&self, node: NodeId, scale: f64, grad: &[f64]) -> bool {
        add_row(&self.target[self.target_range(node)], scale, grad)
    }

    #[inline]
    pub(crate) fn add_context(&self, aspect: usize, node: NodeId, scale: f64, grad: &[f64]) -> bool {
        add_row(&self.context[self.context_range(aspect, node)], scale, grad)
    }
}

#[inline]
fn add_row(row: &[AtomicU32], scale: f64, grad: &[f64]) -> bool {
    let mut finite = true;
    for (cell, &g) in row.iter().zip(grad) {
        let old = f32::from_bits(cell.load(Ordering::Relaxed));
        let new = (old as f64 + scale * g) as f32;
        finite &= new.is_finite();
        cell.store(new.to_bits(), Ordering::Relaxed);
    }
    finite
}

impl RowSource for SharedParams<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn aspects(&self) -> usize {
        self.context.len() / (self.nodes * self.dim)
    }

    #[inline]
    fn read_target(&self, node: NodeId, out: &mut [f64]) {
        for (o, cell) in out.iter_mut().zip(&self.target[self.target_range(node)]) {
            *o = f32::from_bits(cell.load(Ordering::Relaxed)) as f64;
        }
    }

    #[inline]
    fn read_context(&self, aspect: usize, node: NodeId, out: &mut [f64]) {
        for (o, cell) in out.iter_mut().zip(&self.context[self.context_range(aspect, node)]) {
            *o = f32::from_bits(cell.load(Ordering::Relaxed)) as f64;
        }
    }
}

/// Formats a value with six significant digits, `%g` style.
pub fn format_sig6(x: f32) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_fraction(&fixed).to_owned()
    } else {
        format!("{}e{}", trim_fraction(mantissa), exp)
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `<n> <d>` followed by `id v1 .. vd` lines.
pub fn write_word2vec<W: Write>(matrix: &[f32], dim: usize, labels: &[String], mut out: W) -> Result<()> {
    let n = matrix.len() / dim;
    if labels.len() != n {
        return Err(Error::LengthMismatch(format!("{} labels for {} rows", labels.len(), n)));
    }
    writeln!(out, "{n} {dim}")?;
    let mut line = String::new();
    for (label, row) in labels.iter().zip(matrix.chunks(dim)) {
        line.clear();
        line.push_str(label);
        for &x in row {
            line.push(' ');
            line.push_str(&format_sig6(x));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a word2vec text matrix into a dense `nodes x d` buffer. Rows whose
/// id is unknown to `lookup` are an error; ids missing from the file stay 0.
pub fn read_word2vec<R: BufRead>(
    reader: R,
    lookup: &impl Fn(&str) -> Option<NodeId>,
    nodes: usize,
) -> Result<(usize, Vec<f32>)> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.ok_or(Error::EmptyInput)?;
    let mut parts = header.split_whitespace();
    let parse_header = |tok: Option<&str>| -> Result<usize> {
        tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("bad header `{header}`"),
        })
    };
    let _rows = parse_header(parts.next())?;
    let dim = parse_header(parts.next())?;
    let mut matrix = vec![0.0f32; nodes * dim];
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let mut tokens = line.split_whitespace();
        let Some(id) = tokens.next() else { continue };
        let node = lookup(id).ok_or_else(|| Error::UnknownNode(id.to_owned()))?;
        if node as usize >= nodes {
            return Err(Error::NodeOutOfRange {
                node: node as usize,
                count: nodes,
            });
        }
        let values = tokens
            .map(|t| {
                t.parse::<f32>().map_err(|_| Error::Parse {
                    line: lineno + 2,
                    message: format!("bad value `{t}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != dim {
            return Err(Error::Parse {
                line: lineno + 2,
                message: format!("expected {dim} values, found {}", values.len()),
            });
        }
        let start = node as usize * dim;
        matrix[start..start + dim].copy_from_slice(&values);
    }
    Ok((dim, matrix))
}
