//! Directed weighted graphs, seeded generators for the test network families,
//! and the plain-text edge-list format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Node index, `0..n`.
pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge {src}->{dst} references a node outside 0..{n}")]
    IndexOutOfRange { src: usize, dst: usize, n: usize },
    #[error("node {node} is outside 0..{n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("edge {src}->{dst} has non-positive or non-finite weight {weight}")]
    BadWeight { src: usize, dst: usize, weight: f64 },
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub weight: f64,
}

/// Weighted in/out totals at one node.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NodeDegrees {
    pub in_weight: f64,
    pub out_weight: f64,
}

impl NodeDegrees {
    pub fn total(&self) -> f64 {
        self.in_weight + self.out_weight
    }
}

/// An immutable directed graph on nodes `0..n`.
///
/// Parallel edges are merged at construction by summing their weights, and
/// edges are stored sorted by `(src, dst)`. Self-loops are allowed and count
/// towards both the in- and out-weight of their node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl DirectedGraph {
    pub fn from_edge_list<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut merged: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
        for (src, dst, weight) in edges {
            if src >= n || dst >= n {
                return Err(GraphError::IndexOutOfRange { src, dst, n });
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(GraphError::BadWeight { src, dst, weight });
            }
            *merged.entry((src, dst)).or_insert(0.0) += weight;
        }
        let edges = merged
            .into_iter()
            .map(|((src, dst), weight)| Edge { src, dst, weight })
            .collect();
        Ok(Self { n, edges })
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        Self::from_edge_list(n, std::iter::empty())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Dense adjacency matrix with rows indexing destinations and columns
    /// indexing sources: `A[(dst, src)]` is the weight of `src -> dst`.
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.dst, e.src)] += e.weight;
        }
        a
    }

    pub fn degrees(&self, node: NodeId) -> Result<NodeDegrees, GraphError> {
        if node >= self.n {
            return Err(GraphError::NodeOutOfRange { node, n: self.n });
        }
        let mut d = NodeDegrees::default();
        for e in &self.edges {
            if e.dst == node {
                d.in_weight += e.weight;
            }
            if e.src == node {
                d.out_weight += e.weight;
            }
        }
        Ok(d)
    }

    /// Degrees of every node in one pass.
    pub fn all_degrees(&self) -> Vec<NodeDegrees> {
        let mut out = vec![NodeDegrees::default(); self.n];
        for e in &self.edges {
            out[e.dst].in_weight += e.weight;
            out[e.src].out_weight += e.weight;
        }
        out
    }

    pub fn out_neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.edges
            .iter()
            .filter(move |e| e.src == node)
            .map(|e| e.dst)
    }

    /// Every edge weight multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self, GraphError> {
        Self::from_edge_list(
            self.n,
            self.edges.iter().map(|e| (e.src, e.dst, e.weight * factor)),
        )
    }

    /// Shortest number of out-edge hops from each node to a node without
    /// outgoing weight. `None` for nodes that cannot reach such a sink.
    ///
    /// For the trees built by [`gen_tree`] this is the generation index.
    pub fn sink_depths(&self) -> Vec<Option<usize>> {
        let degrees = self.all_degrees();
        let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); self.n];
        for e in &self.edges {
            preds[e.dst].push(e.src);
        }
        let mut depth = vec![None; self.n];
        let mut frontier: Vec<NodeId> = (0..self.n)
            .filter(|&x| degrees[x].out_weight == 0.0)
            .collect();
        for &x in &frontier {
            depth[x] = Some(0);
        }
        let mut d = 0;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for &x in &frontier {
                for &p in &preds[x] {
                    if depth[p].is_none() {
                        depth[p] = Some(d);
                        next.push(p);
                    }
                }
            }
            next.sort_unstable();
            frontier = next;
        }
        depth
    }

    /// Graphviz DOT rendering.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for x in 0..self.n {
            let _ = writeln!(s, "  {x};");
        }
        for e in &self.edges {
            if e.weight == 1.0 {
                let _ = writeln!(s, "  {} -> {};", e.src, e.dst);
            } else {
                let _ = writeln!(s, "  {} -> {} [weight={}];", e.src, e.dst, e.weight);
            }
        }
        s.push_str("}\n");
        s
    }

    /// Serialize to the edge-list text format: node count on the first line,
    /// then one `src dst weight` line per edge.
    pub fn to_edge_list_string(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for e in &self.edges {
            // `{:?}` prints the shortest representation that round-trips.
            let _ = writeln!(s, "{} {} {:?}", e.src, e.dst, e.weight);
        }
        s
    }

    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| GraphError::Parse {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let Some(count) = n else {
                if fields.len() != 1 {
                    return Err(parse_err(format!("expected node count, found {line:?}")));
                }
                let count: usize = fields[0]
                    .parse()
                    .map_err(|_| parse_err(format!("invalid node count {:?}", fields[0])))?;
                if count == 0 {
                    return Err(parse_err("node count must be at least 1".into()));
                }
                n = Some(count);
                continue;
            };
            if !(2..=3).contains(&fields.len()) {
                return Err(parse_err(format!(
                    "expected `src dst [weight]`, found {line:?}"
                )));
            }
            let node = |s: &str| -> Result<usize, GraphError> {
                let v: usize = s
                    .parse()
                    .map_err(|_| parse_err(format!("invalid node index {s:?}")))?;
                if v >= count {
                    return Err(parse_err(format!(
                        "node index {v} out of range for {count} nodes"
                    )));
                }
                Ok(v)
            };
            let src = node(fields[0])?;
            let dst = node(fields[1])?;
            let weight = match fields.get(2) {
                Some(w) => w
                    .parse::<f64>()
                    .map_err(|_| parse_err(format!("invalid weight {w:?}")))?,
                None => 1.0,
            };
            if !(weight.is_finite() && weight > 0.0) {
                return Err(parse_err(format!(
                    "weight must be positive, found {weight}"
                )));
            }
            edges.push((src, dst, weight));
        }
        let n = n.ok_or(GraphError::Parse {
            line: text.lines().count().max(1),
            message: "missing node count".into(),
        })?;
        Self::from_edge_list(n, edges)
    }
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<DirectedGraph, GraphError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    DirectedGraph::parse_edge_list(&text)
}

pub fn write_edge_list(graph: &DirectedGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let path = path.as_ref();
    fs::write(path, graph.to_edge_list_string()).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Complete `branching`-ary tree with a root (generation 0) and
/// `generations` further generations. Children of `v` are
/// `branching*v + 1 ..= branching*v + branching`; every edge points from
/// child to parent.
pub fn gen_tree(branching: usize, generations: u32) -> Result<DirectedGraph, GraphError> {
    if branching < 2 {
        return Err(GraphError::InvalidParameters(format!(
            "tree branching must be at least 2, got {branching}"
        )));
    }
    if generations < 1 {
        return Err(GraphError::InvalidParameters(
            "tree needs at least one generation below the root".into(),
        ));
    }
    let n = tree_size(branching, generations).ok_or_else(|| {
        GraphError::InvalidParameters(format!(
            "tree with branching {branching} and {generations} generations is too large"
        ))
    })?;
    DirectedGraph::from_edge_list(n, (1..n).map(|child| (child, (child - 1) / branching, 1.0)))
}

/// Node count `(b^(L+1) - 1) / (b - 1)`, or `None` on overflow.
pub fn tree_size(branching: usize, generations: u32) -> Option<usize> {
    let mut total: usize = 0;
    let mut level: usize = 1;
    for g in 0..=generations {
        total = total.checked_add(level)?;
        if g < generations {
            level = level.checked_mul(branching)?;
        }
    }
    Some(total)
}

/// Node indices of each generation of a [`gen_tree`] tree.
pub fn tree_generations(branching: usize, generations: u32) -> Vec<Vec<NodeId>> {
    let mut out = Vec::with_capacity(generations as usize + 1);
    let mut start = 0;
    let mut width = 1;
    for _ in 0..=generations {
        out.push((start..start + width).collect());
        start += width;
        width *= branching;
    }
    out
}

/// Seeded preferential-attachment digraph.
///
/// Starts from `m + 1` mutually connected seed nodes. Each later node adds
/// `m` outgoing edges to distinct earlier nodes, each chosen with
/// probability proportional to `indegree + 1`.
pub fn gen_scale_free(n: usize, m: usize, seed: u64) -> Result<DirectedGraph, GraphError> {
    if m < 1 || n <= m {
        return Err(GraphError::InvalidParameters(format!(
            "scale-free generator needs n > m >= 1, got n={n}, m={m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indegree = vec![0usize; n];
    let mut edges = Vec::new();
    for i in 0..=m {
        for (j, d) in indegree.iter_mut().enumerate().take(m + 1) {
            if i != j {
                edges.push((i, j, 1.0));
                *d += 1;
            }
        }
    }
    for v in (m + 1)..n {
        let mut weights: Vec<f64> = indegree[..v].iter().map(|&d| d as f64 + 1.0).collect();
        let mut targets = Vec::with_capacity(m);
        for _ in 0..m {
            let t = sample_weighted(&mut rng, &weights);
            weights[t] = 0.0;
            targets.push(t);
        }
        for t in targets {
            edges.push((v, t, 1.0));
            indegree[t] += 1;
        }
    }
    DirectedGraph::from_edge_list(n, edges)
}

fn sample_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut r = rng.random::<f64>() * total;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last_positive = i;
        if r < w {
            return i;
        }
        r -= w;
    }
    last_positive
}

/// Growing network with copying: each new node picks a uniformly random
/// earlier node, links to it, and also links to everything that node links
/// to.
pub fn gen_gnc(n: usize, seed: u64) -> Result<DirectedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gnc_with_targets(n, |v| rng.random_range(0..v))
}

/// GNC growth with the target of node `v` supplied by `pick(v)` (`< v`).
pub(crate) fn gnc_with_targets(
    n: usize,
    mut pick: impl FnMut(usize) -> usize,
) -> Result<DirectedGraph, GraphError> {
    let mut out: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
    for v in 1..n {
        let target = pick(v);
        let mut links = out[target].clone();
        links.insert(target);
        out[v] = links;
    }
    let edges = out
        .iter()
        .enumerate()
        .flat_map(|(src, dsts)| dsts.iter().map(move |&dst| (src, dst, 1.0)));
    DirectedGraph::from_edge_list(n, edges)
}

/// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
pub fn gen_cycle(n: usize) -> Result<DirectedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    DirectedGraph::from_edge_list(n, (0..n).map(|x| (x, (x + 1) % n, 1.0)))
}

/// Erdős–Rényi style digraph: each ordered pair `x != y` gets an edge with
/// probability `p`, weights drawn uniformly from `[0.5, 2.0)` when
/// `weighted`.
pub fn gen_random(
    n: usize,
    p: f64,
    weighted: bool,
    seed: u64,
) -> Result<DirectedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidParameters(format!(
            "edge probability must lie in [0, 1], got {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for src in 0..n {
        for dst in 0..n {
            if src == dst {
                continue;
            }
            if rng.random::<f64>() < p {
                let w = if weighted {
                    rng.random_range(0.5..2.0)
                } else {
                    1.0
                };
                edges.push((src, dst, w));
            }
        }
    }
    DirectedGraph::from_edge_list(n, edges)
}
