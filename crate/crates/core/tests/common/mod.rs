//! Independent reference implementations used by several test targets.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::VecDeque;

use aspect_embed::eval::{auc_roc, fit_logreg, logistic_objective, ranking_metrics, LogRegOptions};
use aspect_embed::graph::{Graph, NodeId};
use aspect_embed::hetnet::{metapath_walk, train_het_on_corpus, HetConfig, Metapath};
use aspect_embed::store::EmbeddingStore;
use aspect_embed::synth::{author_paper, planted_partition};
use aspect_embed::trainer::{
    regularizer, train_deepwalk, train_on_corpus, window_loss, AspectWeights, SelectionMode, TrainerConfig, WindowSpec,
};
use aspect_embed::walk::{random_walk, WalkCorpus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Outcome of a check suite: a one-line summary either way.
pub type Suite = Result<String, String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense f64 copy of a store: `p[node*d + t]`, `q[(s*n + node)*d + t]`.
#[derive(Clone, Debug)]
pub struct Params {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl Params {
    pub fn from_store(store: &EmbeddingStore) -> Self {
        let (n, d, k) = (store.node_count(), store.dim(), store.aspects());
        let p = store.target_matrix().iter().map(|&x| x as f64).collect();
        let mut q = Vec::with_capacity(k * n * d);
        for s in 0..k {
            q.extend(store.aspect_matrix(s).iter().map(|&x| x as f64));
        }
        Self { n, d, k, p, q }
    }

    pub fn prow(&self, v: NodeId) -> &[f64] {
        &self.p[v as usize * self.d..(v as usize + 1) * self.d]
    }

    pub fn qrow(&self, s: usize, v: NodeId) -> &[f64] {
        let i = (s * self.n + v as usize) * self.d;
        &self.q[i..i + self.d]
    }

    pub fn len(&self) -> usize {
        self.p.len() + self.q.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        if i < self.p.len() {
            self.p[i]
        } else {
            self.q[i - self.p.len()]
        }
    }

    pub fn set(&mut self, i: usize, v: f64) {
        if i < self.p.len() {
            self.p[i] = v;
        } else {
            let j = i - self.p.len();
            self.q[j] = v;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `ln(1 + e^x)` evaluated without overflow.
pub fn log1pexp(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

pub fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.iter().map(|v| v / z).collect()
}

#[derive(Clone, Debug)]
pub enum Mode {
    Fixed(Vec<f64>),
    Softmax,
    Gumbel { tau: f64, noise: Vec<f64> },
    Pooled,
}

#[derive(Clone, Debug)]
pub struct Window {
    pub target: NodeId,
    pub context: Vec<NodeId>,
    pub negatives: Vec<NodeId>,
    pub m: usize,
    pub selection: Vec<NodeId>,
    pub mode: Mode,
}

impl Window {
    pub fn spec(&self) -> WindowSpec<'_> {
        WindowSpec {
            target: self.target,
            context: &self.context,
            negatives: &self.negatives,
            negatives_per_pair: self.m,
            selection_context: &self.selection,
            weights: match &self.mode {
                Mode::Fixed(w) => AspectWeights::Fixed(w),
                Mode::Softmax => AspectWeights::Softmax,
                Mode::Gumbel { tau, noise } => AspectWeights::Gumbel {
                    tau: *tau,
                    noise,
                    hard: false,
                },
                Mode::Pooled => AspectWeights::Pooled,
            },
        }
    }
}

/// Window loss written directly from its definition.
pub fn oracle_loss(x: &Params, w: &Window) -> f64 {
    let p = x.prow(w.target);
    if let Mode::Pooled = w.mode {
        let pooled = |v: NodeId| -> Vec<f64> {
            (0..x.d)
                .map(|t| (0..x.k).map(|s| x.qrow(s, v)[t]).sum::<f64>() / x.k as f64)
                .collect()
        };
        let mut total = 0.0;
        for (c, &j) in w.context.iter().enumerate() {
            total += log1pexp(-dot(p, &pooled(j)));
            for &n in &w.negatives[c * w.m..(c + 1) * w.m] {
                total += log1pexp(dot(p, &pooled(n)));
            }
        }
        return total;
    }
    let scores: Vec<f64> = (0..x.k)
        .map(|s| {
            let mut r = vec![0.0; x.d];
            for &j in &w.selection {
                for (a, b) in r.iter_mut().zip(x.qrow(s, j)) {
                    *a += b / w.selection.len() as f64;
                }
            }
            dot(p, &r)
        })
        .collect();
    let probs = if x.k == 1 {
        vec![1.0]
    } else {
        match &w.mode {
            Mode::Fixed(f) => f.clone(),
            Mode::Softmax => softmax(&scores),
            Mode::Gumbel { tau, noise } => {
                softmax(&scores.iter().zip(noise).map(|(a, g)| (a + g) / tau).collect::<Vec<_>>())
            }
            Mode::Pooled => unreachable!(),
        }
    };
    let mut total = 0.0;
    for (s, prob) in probs.iter().enumerate() {
        let mut ell = 0.0;
        for (c, &j) in w.context.iter().enumerate() {
            ell += log1pexp(-dot(p, x.qrow(s, j)));
            for &n in &w.negatives[c * w.m..(c + 1) * w.m] {
                ell += log1pexp(dot(p, x.qrow(s, n)));
            }
        }
        total += prob * ell;
    }
    total
}

/// Regularizer with a given (frozen) mask per `(node index in list, i, j)`.
pub fn oracle_reg(x: &Params, nodes: &[NodeId], mask: &[bool]) -> f64 {
    let mut total = 0.0;
    let mut m = 0;
    for &h in nodes {
        for i in 0..x.k {
            for j in i + 1..x.k {
                let (a, b) = (x.qrow(i, h), x.qrow(j, h));
                let f = dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt());
                if mask[m] {
                    total += f.abs();
                }
                m += 1;
            }
        }
    }
    total
}

pub fn reg_mask(x: &Params, nodes: &[NodeId], epsilon: f64) -> Vec<bool> {
    let mut mask = Vec::new();
    for &h in nodes {
        for i in 0..x.k {
            for j in i + 1..x.k {
                let (a, b) = (x.qrow(i, h), x.qrow(j, h));
                let f = dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt());
                mask.push(f.abs() >= epsilon);
            }
        }
    }
    mask
}

/// Central finite differences of `f` with respect to every parameter.
pub fn numeric_gradient(x: &Params, f: impl Fn(&Params) -> f64) -> Vec<f64> {
    let mut y = x.clone();
    (0..x.len())
        .map(|i| {
            let v = x.get(i);
            let h = 1e-6 * v.abs().max(1.0);
            y.set(i, v + h);
            let up = f(&y);
            y.set(i, v - h);
            let down = f(&y);
            y.set(i, v);
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Library gradient of a window, densified in the [`Params`] layout.
pub fn analytic_window_gradient(store: &EmbeddingStore, w: &Window) -> (f64, Vec<f64>) {
    let (n, d) = (store.node_count(), store.dim());
    let g = window_loss(store, &w.spec()).expect("valid window");
    let mut dense = vec![0.0; n * d * (store.aspects() + 1)];
    for (t, v) in g.target_grad.iter().enumerate() {
        dense[w.target as usize * d + t] += v;
    }
    for (key, row) in g.rows() {
        let base = n * d + (key.aspect * n + key.node as usize) * d;
        for (t, v) in row.iter().enumerate() {
            dense[base + t] += v;
        }
    }
    (g.loss, dense)
}

pub fn analytic_reg_gradient(store: &EmbeddingStore, epsilon: f64, nodes: &[NodeId]) -> (f64, Vec<f64>) {
    let (n, d) = (store.node_count(), store.dim());
    let out = regularizer(store, epsilon, nodes);
    let mut dense = vec![0.0; n * d * (store.aspects() + 1)];
    for (key, row) in &out.grads {
        let base = n * d + (key.aspect * n + key.node as usize) * d;
        for (t, v) in row.iter().enumerate() {
            dense[base + t] += v;
        }
    }
    (out.value, dense)
}

/// `|a - b| / max(|a|, |b|, 1e-4)`: relative error, absolute below 1e-4.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-4)
}

/// A random window over a random store, mixing every weighting mode and
/// restricted selection contexts.
pub fn random_window_instance(r: &mut ChaCha8Rng) -> (EmbeddingStore, Window) {
    let n = r.random_range(3..=10);
    let d = r.random_range(1..=8);
    let k = r.random_range(1..=3);
    let mut store = EmbeddingStore::zeros(n, d, k).unwrap();
    for v in 0..n as NodeId {
        for x in store.target_row_mut(v) {
            *x = r.random_range(-1.0..1.0);
        }
        for s in 0..k {
            for x in store.context_row_mut(s, v) {
                *x = r.random_range(-1.0..1.0);
            }
        }
    }
    let target = r.random_range(0..n) as NodeId;
    let clen = r.random_range(1..=4);
    let context: Vec<NodeId> = (0..clen).map(|_| r.random_range(0..n) as NodeId).collect();
    let m = r.random_range(0..=2);
    let negatives = (0..clen * m).map(|_| r.random_range(0..n) as NodeId).collect();
    let selection = if r.random_bool(0.5) {
        context.clone()
    } else {
        let mut sel: Vec<NodeId> = context.iter().copied().filter(|_| r.random_bool(0.5)).collect();
        if sel.is_empty() {
            sel.push(context[0]);
        }
        sel
    };
    let mode = match r.random_range(0..4) {
        0 => {
            let raw: Vec<f64> = (0..k).map(|_| r.random_range(0.01..1.0)).collect();
            let z: f64 = raw.iter().sum();
            Mode::Fixed(raw.iter().map(|v| v / z).collect())
        }
        1 => Mode::Softmax,
        2 => Mode::Gumbel {
            tau: r.random_range(0.2..2.0),
            noise: (0..k).map(|_| -(-r.random_range(1e-6f64..1.0).ln()).ln()).collect(),
        },
        _ => Mode::Pooled,
    };
    (
        store,
        Window {
            target,
            context,
            negatives,
            m,
            selection,
            mode,
        },
    )
}

/// Worst relative gradient error over one random window instance.
pub fn window_gradient_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let (store, w) = random_window_instance(&mut r);
    let x = Params::from_store(&store);
    let (loss, analytic) = analytic_window_gradient(&store, &w);
    assert!(rel_err(loss, oracle_loss(&x, &w)) < 1e-10, "loss mismatch for seed {seed}");
    let numeric = numeric_gradient(&x, |y| oracle_loss(y, &w));
    analytic
        .iter()
        .zip(&numeric)
        .map(|(a, b)| rel_err(*a, *b))
        .fold(0.0, f64::max)
}

/// Worst relative gradient error of the regularizer on one random store.
pub fn reg_gradient_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let n = r.random_range(2..=10);
    let d = r.random_range(2..=8);
    let k = r.random_range(2..=3);
    let store = EmbeddingStore::init_random(n, d, k, seed, Some(1.0)).unwrap();
    let nodes: Vec<NodeId> = (0..r.random_range(1..=n)).map(|_| r.random_range(0..n) as NodeId).collect();
    let epsilon = r.random_range(0.05..0.9);
    let x = Params::from_store(&store);
    let mask = reg_mask(&x, &nodes, epsilon);
    let (value, analytic) = analytic_reg_gradient(&store, epsilon, &nodes);
    assert!(rel_err(value, oracle_reg(&x, &nodes, &mask)) < 1e-10);
    let numeric = numeric_gradient(&x, |y| oracle_reg(y, &nodes, &mask));
    analytic
        .iter()
        .zip(&numeric)
        .map(|(a, b)| rel_err(*a, *b))
        .fold(0.0, f64::max)
}

/// Mann-Whitney AUC by enumerating every positive/negative pair.
pub fn auc_all_pairs(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in labels.iter().enumerate() {
        if !yi {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Minimizes the regularized mean logistic loss with damped Newton steps
/// and returns the optimal objective.
pub fn newton_logreg(features: &[f64], labels: &[bool], l2: f64) -> f64 {
    let n = labels.len();
    let d = features.len() / n;
    let dim = d + 1;
    let row = |i: usize| -> Vec<f64> {
        let mut r = features[i * d..(i + 1) * d].to_vec();
        r.push(1.0);
        r
    };
    let objective = |theta: &[f64]| -> f64 {
        let mut total = 0.0;
        for i in 0..n {
            let z = dot(&row(i), theta);
            let y = if labels[i] { 1.0 } else { -1.0 };
            total += log1pexp(-y * z);
        }
        total / n as f64 + 0.5 * l2 * theta[..d].iter().map(|w| w * w).sum::<f64>()
    };
    let mut theta = vec![0.0; dim];
    for _ in 0..100 {
        let mut grad = vec![0.0; dim];
        let mut hess = vec![0.0; dim * dim];
        for i in 0..n {
            let x = row(i);
            let p = 1.0 / (1.0 + (-dot(&x, &theta)).exp());
            let y = if labels[i] { 1.0 } else { 0.0 };
            for a in 0..dim {
                grad[a] += (p - y) * x[a] / n as f64;
                for b in 0..dim {
                    hess[a * dim + b] += p * (1.0 - p) * x[a] * x[b] / n as f64;
                }
            }
        }
        for a in 0..d {
            grad[a] += l2 * theta[a];
            hess[a * dim + a] += l2;
        }
        // tiny ridge on the bias keeps separable problems well-posed
        hess[dim * dim - 1] += 1e-12;
        let step = solve(&hess, &grad, dim);
        let base = objective(&theta);
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            if objective(&cand) <= base || t < 1e-12 {
                theta = cand;
                break;
            }
            t *= 0.5;
        }
        if grad.iter().map(|g| g * g).sum::<f64>().sqrt() < 1e-13 {
            break;
        }
    }
    objective(&theta)
}

/// Gaussian elimination with partial pivoting.
fn solve(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = a[i * n..(i + 1) * n].to_vec();
            r.push(b[i]);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

/// Undirected connected-component labels by BFS.
pub fn components(n: usize, edges: &[(NodeId, NodeId)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u as usize].push(v as usize);
        adj[v as usize].push(u as usize);
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if label[v] == usize::MAX {
                    label[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    label
}

/// Two partitions agree when they induce the same equivalence relation.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut map = std::collections::HashMap::new();
    let mut back = std::collections::HashMap::new();
    a.iter().zip(b).all(|(x, y)| *map.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}

/// Random undirected graph with `n` nodes where every node has degree >= 1.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.random_bool(p) {
                edges.push((u as NodeId, v as NodeId));
            }
        }
        if u + 1 < n {
            // a path backbone keeps every node non-isolated
            edges.push((u as NodeId, (u + 1) as NodeId));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Graph::from_edges(n, &edges, false).unwrap()
}

/// Worst window and regularizer gradient errors over 200 instances each.
pub fn gradient_suite() -> Suite {
    let window = (0..200u64).map(window_gradient_error).fold(0.0, f64::max);
    let reg = (1000..1200u64).map(reg_gradient_error).fold(0.0, f64::max);
    let line = format!("worst relative error: windows {window:.2e}, regularizer {reg:.2e} (tol 1e-4)");
    if window < 1e-4 && reg < 1e-4 {
        Ok(line)
    } else {
        Err(line)
    }
}

pub fn auc_suite() -> Suite {
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = r.random_range(2..80);
        let mut labels: Vec<bool> = (0..n).map(|_| r.random_bool(0.4)).collect();
        labels[0] = true;
        labels[1] = false;
        // coarse scores so that ties are common
        let scores: Vec<f64> = (0..n).map(|_| (r.random_range(-1.0f64..1.0) * 5.0).round()).collect();
        let got = auc_roc(&scores, &labels).map_err(|e| e.to_string())?;
        worst = worst.max((got - auc_all_pairs(&scores, &labels)).abs());
    }
    let line = format!("1000 vectors, max |auc - all-pairs| {worst:.1e}");
    if worst < 1e-12 {
        Ok(line)
    } else {
        Err(line)
    }
}

pub fn logreg_suite() -> Suite {
    let mut r = rng(12);
    let options = LogRegOptions::default();
    let mut worst = 0.0f64;
    let mut problems = 0;
    while problems < 50 {
        let n = r.random_range(30..150);
        let d = r.random_range(1..6);
        let w: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
        let x: Vec<f64> = (0..n * d).map(|_| r.random_range(-1.5..1.5)).collect();
        let labels: Vec<bool> = (0..n)
            .map(|i| {
                let z: f64 = x[i * d..(i + 1) * d].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + 0.3;
                r.random_bool(1.0 / (1.0 + (-z).exp()))
            })
            .collect();
        if labels.iter().all(|&y| y) || labels.iter().all(|&y| !y) {
            continue;
        }
        problems += 1;
        let model = fit_logreg(&x, &labels, &options).map_err(|e| e.to_string())?;
        let mut theta = model.weights.clone();
        theta.push(model.bias);
        let fitted = logistic_objective(&x, &labels, options.l2, &theta);
        if (fitted - model.loss).abs() > 1e-12 {
            return Err(format!("reported loss {} but objective is {fitted}", model.loss));
        }
        worst = worst.max((fitted - newton_logreg(&x, &labels, options.l2)).abs());
    }
    let line = format!("50 problems, max |loss - newton| {worst:.1e} (tol 1e-6)");
    if worst < 1e-6 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Pearson statistic of observed counts against a uniform expectation.
pub fn pearson(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

/// One chi-square test per graph at alpha = 0.01 on first-step frequencies
/// pooled over every node with two or more neighbours.
pub fn walk_chi_square_suite() -> Suite {
    let mut r = rng(13);
    let mut passed = 0;
    let mut failures = Vec::new();
    for g in 0..20 {
        let n = r.random_range(6..16);
        let graph = random_graph(&mut r, n, 0.3);
        let mut stat = 0.0;
        let mut dof = 0usize;
        for u in 0..graph.node_count() as NodeId {
            let adj = graph.adj(u);
            if adj.len() < 2 {
                continue;
            }
            let mut counts = vec![0usize; adj.len()];
            for _ in 0..1000 * adj.len() {
                let walk = random_walk(&graph, u, 2, &mut r);
                match adj.iter().position(|&v| v == walk[1]) {
                    Some(i) => counts[i] += 1,
                    None => return Err(format!("graph {g}: step {u}->{} is not an edge", walk[1])),
                }
            }
            stat += pearson(&counts);
            dof += adj.len() - 1;
        }
        let critical = ChiSquared::new(dof as f64).unwrap().inverse_cdf(0.99);
        if stat < critical {
            passed += 1;
        } else {
            failures.push(format!("graph {g}: chi2 {stat:.1} > {critical:.1} ({dof} dof)"));
        }
    }
    if failures.is_empty() {
        Ok(format!("{passed}/20 graphs pass at alpha=0.01"))
    } else {
        Err(failures.join("; "))
    }
}

pub fn metapath_chi_square() -> Suite {
    let graph = author_paper(30, 60, 3, 3, 0.8, 4).map_err(|e| e.to_string())?;
    let types = graph.types().unwrap();
    let path = Metapath::parse("A,P,A", types).map_err(|e| e.to_string())?;
    let mut r = rng(14);
    let mut scratch = Vec::new();
    let mut stat = 0.0;
    let mut dof = 0usize;
    for u in 0..graph.node_count() as NodeId {
        if types.of(u) != path.start_type() {
            continue;
        }
        let allowed: Vec<NodeId> = graph.adj(u).iter().copied().filter(|&v| types.of(v) == path.type_at(1)).collect();
        if allowed.len() < 2 {
            continue;
        }
        let mut counts = vec![0usize; allowed.len()];
        for _ in 0..1000 * allowed.len() {
            let walk = metapath_walk(&graph, types, &path, u, 2, &mut r, &mut scratch);
            match allowed.iter().position(|&v| v == walk[1]) {
                Some(i) => counts[i] += 1,
                None => return Err(format!("step {u}->{} leaves the scheme", walk[1])),
            }
        }
        stat += pearson(&counts);
        dof += allowed.len() - 1;
    }
    let critical = ChiSquared::new(dof as f64).unwrap().inverse_cdf(0.99);
    let line = format!("chi2 {stat:.1} vs {critical:.1} ({dof} dof)");
    if dof > 0 && stat < critical {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Per-query recall@N, F1@N and AUC by direct counting, averaged over
/// queries that have both classes.
pub fn ranking_bruteforce(queries: &[Vec<(f64, bool)>], ns: &[usize]) -> (Vec<f64>, Vec<f64>, f64, usize) {
    let mut recall = vec![0.0; ns.len()];
    let mut f1 = vec![0.0; ns.len()];
    let mut auc = 0.0;
    let mut used = 0;
    for q in queries {
        let pos = q.iter().filter(|c| c.1).count();
        if pos == 0 || pos == q.len() {
            continue;
        }
        used += 1;
        // rank of i = candidates placed before it (higher score, or equal
        // score and earlier in the list)
        let rank = |i: usize| {
            (0..q.len())
                .filter(|&j| q[j].0 > q[i].0 || (q[j].0 == q[i].0 && j < i))
                .count()
        };
        for (slot, &n) in ns.iter().enumerate() {
            let hits = (0..q.len()).filter(|&i| q[i].1 && rank(i) < n).count() as f64;
            let r = hits / pos as f64;
            let p = if n == 0 { 0.0 } else { hits / n as f64 };
            recall[slot] += r;
            f1[slot] += if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        }
        let scores: Vec<f64> = q.iter().map(|c| c.0).collect();
        let labels: Vec<bool> = q.iter().map(|c| c.1).collect();
        auc += auc_all_pairs(&scores, &labels);
    }
    let mean = |v: f64| if used == 0 { 0.0 } else { v / used as f64 };
    (
        recall.into_iter().map(mean).collect(),
        f1.into_iter().map(mean).collect(),
        mean(auc),
        used,
    )
}

pub fn ranking_suite() -> Suite {
    let mut r = rng(15);
    let ns = [1, 3, 5, 10, 20];
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let queries: Vec<Vec<(f64, bool)>> = (0..r.random_range(1..10))
            .map(|_| {
                (0..r.random_range(1..40))
                    .map(|_| ((r.random_range(-2.0f64..2.0) * 4.0).round(), r.random_bool(0.3)))
                    .collect()
            })
            .collect();
        let got = ranking_metrics(&queries, &ns).map_err(|e| e.to_string())?;
        let (recall, f1, auc, used) = ranking_bruteforce(&queries, &ns);
        if got.queries != used {
            return Err(format!("{} usable queries, expected {used}", got.queries));
        }
        for i in 0..ns.len() {
            worst = worst.max((got.recall[i].1 - recall[i]).abs()).max((got.f1[i].1 - f1[i]).abs());
        }
        worst = worst.max((got.auc - auc).abs());
    }
    let line = format!("200 query sets, max deviation from brute force {worst:.1e}");
    if worst < 1e-12 {
        Ok(line)
    } else {
        Err(line)
    }
}

pub fn small_config(aspects: usize) -> TrainerConfig {
    TrainerConfig {
        dim: 8,
        aspects,
        epochs: 2,
        walks_per_node: 3,
        walk_length: 20,
        batch_size: 16,
        deterministic: true,
        seed: 21,
        ..TrainerConfig::default()
    }
}

/// Parameter bits of P followed by every Q(s).
pub fn store_bits(store: &EmbeddingStore) -> Vec<u32> {
    let mut out: Vec<u32> = store.target_matrix().iter().map(|x| x.to_bits()).collect();
    for s in 0..store.aspects() {
        out.extend(store.aspect_matrix(s).iter().map(|x| x.to_bits()));
    }
    out
}

/// A one-aspect run of the multi-aspect trainer against the plain
/// skip-gram trainer, under every selection mode and warm-up setting.
pub fn one_aspect_suite() -> Suite {
    let graph = planted_partition(3, 15, 0.3, 0.02, 1).map_err(|e| e.to_string())?;
    let corpus = WalkCorpus::generate(&graph, 3, 20, 21).map_err(|e| e.to_string())?;
    for selection in [SelectionMode::Gumbel, SelectionMode::Softmax] {
        for warmup in [false, true] {
            let config = TrainerConfig {
                selection,
                warmup,
                reg_enabled: true,
                lambda: 1.0,
                epsilon: 0.0,
                ..small_config(1)
            };
            let (a, ra) = train_on_corpus(&graph, &corpus, &config).map_err(|e| e.to_string())?;
            let (b, rb) = train_deepwalk(&graph, &corpus, &config).map_err(|e| e.to_string())?;
            if store_bits(&a) != store_bits(&b) || ra.records != rb.records {
                return Err(format!("K=1 differs from skip-gram ({selection:?}, warmup {warmup})"));
            }
        }
    }
    Ok("K=1 bit-identical to skip-gram (4 settings)".into())
}

pub fn single_type_suite() -> Suite {
    let mut graph = planted_partition(3, 15, 0.3, 0.02, 2).map_err(|e| e.to_string())?;
    let n = graph.node_count();
    graph.set_types(vec!["N".into()], vec![0; n]).map_err(|e| e.to_string())?;
    let corpus = WalkCorpus::generate(&graph, 3, 20, 21).map_err(|e| e.to_string())?;
    for warmup in [false, true] {
        let config = TrainerConfig { warmup, ..small_config(3) };
        let het = HetConfig {
            trainer: config.clone(),
            metapaths: vec!["N,N".into()],
            ..HetConfig::default()
        };
        let (a, ra) = train_het_on_corpus(&graph, &corpus, &het, None).map_err(|e| e.to_string())?;
        let (b, rb) = train_on_corpus(&graph, &corpus, &config).map_err(|e| e.to_string())?;
        if store_bits(&a) != store_bits(&b) || ra.records != rb.records {
            return Err(format!("single-type het run differs (warmup {warmup})"));
        }
    }
    Ok("single-type het bit-identical to homogeneous (2 settings)".into())
}
