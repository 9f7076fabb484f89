//! Quantum ranks from time-averaged walk probabilities, the classical
//! PageRank baseline, convergence diagnostics, and rank comparison.

use std::cmp::Ordering;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::DirectedGraph;
use crate::spectral::RealMatrix;
use crate::walk::{self, Evolution, ShiftSource, WalkError};

pub const DEFAULT_STEPS: usize = 500;
pub const DEFAULT_WINDOW: usize = 50;
pub const DEFAULT_TELEPORT: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Values closer than this are the same rank; ties go to the lower index.
pub const TIE_RESOLUTION: f64 = 1e-12;

const MEAN_CORRECTION_LIMIT: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RankError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("number of steps must be at least 1")]
    NoSteps,
    #[error("window must satisfy 1 <= window <= steps, got window={window}, steps={steps}")]
    InvalidWindow { window: usize, steps: usize },
    #[error("teleport parameter must lie in [0, 1], got {0}")]
    InvalidTeleport(f64),
    #[error("power method did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("rank vectors differ in length: {classical} vs {quantum}")]
    DimensionMismatch { classical: usize, quantum: usize },
    #[error(
        "time-averaged probabilities sum to {sum}, off by more than {MEAN_CORRECTION_LIMIT:e}"
    )]
    Normalization { sum: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumRankResult {
    pub steps: usize,
    /// Time-averaged node probability over steps `1..=steps`.
    pub mean: Vec<f64>,
    /// Population variance of the instantaneous probabilities.
    pub variance: Vec<f64>,
    /// Instantaneous probabilities, one row per step, when retained.
    pub series: Option<Vec<Vec<f64>>>,
    /// `|Σ mean − 1|` before re-normalization.
    pub normalization_correction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumRankOptions {
    pub steps: usize,
    pub keep_series: bool,
    pub shift: ShiftSource,
}

impl Default for QuantumRankOptions {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            keep_series: false,
            shift: ShiftSource::Adjacency,
        }
    }
}

/// Welford accumulator over per-node samples.
#[derive(Debug, Clone)]
struct RunningMoments {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningMoments {
    fn new(n: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; n],
            m2: vec![0.0; n],
        }
    }

    fn push(&mut self, sample: &[f64]) {
        self.count += 1;
        let k = self.count as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(sample) {
            let delta = x - *m;
            *m += delta / k;
            *s += delta * (x - *m);
        }
    }

    fn variance(&self) -> Vec<f64> {
        let k = self.count.max(1) as f64;
        self.m2.iter().map(|s| (s / k).max(0.0)).collect()
    }
}

pub fn quantum_rank(graph: &DirectedGraph, steps: usize) -> Result<QuantumRankResult, RankError> {
    quantum_rank_with(
        graph,
        QuantumRankOptions {
            steps,
            ..Default::default()
        },
    )
}

/// Evolves the equal superposition for `steps` steps, recording node
/// probabilities after every step (not at step 0).
///
/// A single deterministic run: the evolution is unitary with no measurement
/// back-action, so restarting for each longer horizon reproduces the same
/// prefix of records.
pub fn quantum_rank_with(
    graph: &DirectedGraph,
    options: QuantumRankOptions,
) -> Result<QuantumRankResult, RankError> {
    if options.steps == 0 {
        return Err(RankError::NoSteps);
    }
    let n = graph.node_count();
    let ops = walk::build_operators_with(graph, options.shift)?;
    let evolution = Evolution::new(&ops, walk::uniform_initial(n)?)?;

    let mut moments = RunningMoments::new(n);
    let mut series = options
        .keep_series
        .then(|| Vec::with_capacity(options.steps));
    for state in evolution.take(options.steps) {
        let p = state.node_probabilities();
        moments.push(&p);
        if let Some(rows) = series.as_mut() {
            rows.push(p);
        }
    }

    let sum: f64 = moments.mean.iter().sum();
    let correction = (sum - 1.0).abs();
    if correction > MEAN_CORRECTION_LIMIT {
        return Err(RankError::Normalization { sum });
    }
    let variance = moments.variance();
    let mean = moments.mean.iter().map(|m| m / sum).collect();
    Ok(QuantumRankResult {
        steps: options.steps,
        mean,
        variance,
        series,
        normalization_correction: correction,
    })
}

/// How the teleport parameter enters the Google matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoogleConvention {
    /// `G = (1 − p)·Â + (p/N)·B`: `p` weights the teleport term.
    #[default]
    Paper,
    /// `G = p·Â + ((1 − p)/N)·B`: `p` is the usual damping factor.
    Standard,
}

impl FromStr for GoogleConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Self::Paper),
            "standard" => Ok(Self::Standard),
            other => Err(format!(
                "unknown convention {other:?} (expected paper or standard)"
            )),
        }
    }
}

impl std::fmt::Display for GoogleConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Standard => "standard",
        })
    }
}

impl GoogleConvention {
    /// `(link weight, teleport weight)` for parameter `p`.
    fn weights(self, p: f64) -> (f64, f64) {
        match self {
            Self::Paper => (1.0 - p, p),
            Self::Standard => (p, 1.0 - p),
        }
    }
}

/// Column-stochastic Google matrix. `Â` is the adjacency matrix with each
/// column scaled to sum to one; dangling columns become uniform `1/N`.
pub fn google_matrix(graph: &DirectedGraph, p: f64, convention: GoogleConvention) -> RealMatrix {
    let n = graph.node_count();
    let nf = n as f64;
    let (link, teleport) = convention.weights(p);
    let mut g = graph.adjacency_matrix();
    for j in 0..n {
        let mut col = g.column_mut(j);
        let total: f64 = col.iter().sum();
        if total > 0.0 {
            col.iter_mut()
                .for_each(|x| *x = link * (*x / total) + teleport / nf);
        } else {
            col.fill(link / nf + teleport / nf);
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRankResult {
    pub ranks: Vec<f64>,
    pub iterations: usize,
    /// `‖V_{k+1} − V_k‖₁` at the last iteration.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankOptions {
    pub p: f64,
    pub convention: GoogleConvention,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankOptions {
    fn default() -> Self {
        Self {
            p: DEFAULT_TELEPORT,
            convention: GoogleConvention::Paper,
            tol: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Power method `V ← G·V` from the uniform vector until successive iterates
/// agree to `tol` in the 1-norm.
pub fn pagerank(
    graph: &DirectedGraph,
    options: PageRankOptions,
) -> Result<PageRankResult, RankError> {
    if !(0.0..=1.0).contains(&options.p) {
        return Err(RankError::InvalidTeleport(options.p));
    }
    let g = google_matrix(graph, options.p, options.convention);
    let n = graph.node_count();
    let mut v = nalgebra::DVector::from_element(n, 1.0 / n as f64);
    let mut residual = f64::INFINITY;
    for k in 1..=options.max_iter {
        let next = &g * &v;
        residual = (&next - &v).lp_norm(1);
        v = next;
        if residual <= options.tol {
            let total: f64 = v.iter().sum();
            return Ok(PageRankResult {
                ranks: v.iter().map(|x| x / total).collect(),
                iterations: k,
                residual,
            });
        }
    }
    Err(RankError::NoConvergence {
        iterations: options.max_iter,
        residual,
    })
}

/// Node indices sorted by descending value. Values are compared after
/// rounding to [`TIE_RESOLUTION`], and ties go to the lower index.
pub fn rank_order(values: &[f64]) -> Vec<usize> {
    let keys: Vec<i64> = values.iter().map(|&v| quantize(v)).collect();
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| keys[b].cmp(&keys[a]).then(a.cmp(&b)));
    idx
}

fn quantize(v: f64) -> i64 {
    (v / TIE_RESOLUTION).round() as i64
}

fn cmp_values(a: f64, b: f64) -> Ordering {
    quantize(a).cmp(&quantize(b))
}

/// Kendall's tau-b. Returns 0 when either side is constant.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut tied_x, mut tied_y) = (0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            match (cmp_values(x[i], x[j]), cmp_values(y[i], y[j])) {
                (Ordering::Equal, Ordering::Equal) => {
                    tied_x += 1;
                    tied_y += 1;
                }
                (Ordering::Equal, _) => tied_x += 1,
                (_, Ordering::Equal) => tied_y += 1,
                (a, b) if a == b => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let pairs = (n as i64) * (n as i64 - 1) / 2;
    let denom = (((pairs - tied_x) as f64) * ((pairs - tied_y) as f64)).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    (concordant - discordant) as f64 / denom
}

/// Pairs `(i, j)`, `i < j`, strictly ordered one way by `x` and the other
/// way by `y`.
pub fn discordant_pairs(x: &[f64], y: &[f64]) -> Vec<(usize, usize)> {
    let n = x.len().min(y.len());
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let a = cmp_values(x[i], x[j]);
            let b = cmp_values(y[i], y[j]);
            if a != Ordering::Equal && b != Ordering::Equal && a != b {
                out.push((i, j));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub node: usize,
    pub classical: f64,
    pub quantum_mean: f64,
    pub quantum_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub top_classical: usize,
    pub top_quantum: usize,
    pub top_node_match: bool,
    pub kendall_tau: f64,
    pub hierarchy_violations: Vec<(usize, usize)>,
}

pub fn compare(
    classical: &PageRankResult,
    quantum: &QuantumRankResult,
) -> Result<ComparisonReport, RankError> {
    compare_values(&classical.ranks, &quantum.mean, &quantum.variance)
}

/// Comparison over raw per-item vectors (nodes, or groups of nodes).
pub fn compare_values(
    classical: &[f64],
    quantum_mean: &[f64],
    quantum_variance: &[f64],
) -> Result<ComparisonReport, RankError> {
    if classical.len() != quantum_mean.len() || quantum_mean.len() != quantum_variance.len() {
        return Err(RankError::DimensionMismatch {
            classical: classical.len(),
            quantum: quantum_mean.len(),
        });
    }
    let rows = (0..classical.len())
        .map(|node| ComparisonRow {
            node,
            classical: classical[node],
            quantum_mean: quantum_mean[node],
            quantum_variance: quantum_variance[node],
        })
        .collect();
    let top_classical = rank_order(classical).first().copied().unwrap_or(0);
    let top_quantum = rank_order(quantum_mean).first().copied().unwrap_or(0);
    Ok(ComparisonReport {
        rows,
        top_classical,
        top_quantum,
        top_node_match: top_classical == top_quantum,
        kendall_tau: kendall_tau_b(classical, quantum_mean),
        hierarchy_violations: discordant_pairs(classical, quantum_mean),
    })
}

/// Mean of `values` over each group of node indices.
pub fn group_means(values: &[f64], groups: &[Vec<usize>]) -> Vec<f64> {
    groups
        .iter()
        .map(|g| g.iter().map(|&x| values[x]).sum::<f64>() / g.len().max(1) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceProfile {
    pub steps: usize,
    pub window: usize,
    /// Running mean of the node probabilities after each step.
    pub running_mean: Vec<Vec<f64>>,
    /// First step from which the ordering holds for `window` further steps.
    pub stabilization_step: Option<usize>,
}

impl ConvergenceProfile {
    /// Stabilization of the ordering of group means instead of single nodes.
    pub fn grouped_stabilization(&self, groups: &[Vec<usize>]) -> Option<usize> {
        let grouped: Vec<Vec<f64>> = self
            .running_mean
            .iter()
            .map(|row| group_means(row, groups))
            .collect();
        stabilization_step(&grouped, self.window)
    }
}

pub fn convergence_profile(
    graph: &DirectedGraph,
    steps: usize,
    window: usize,
) -> Result<ConvergenceProfile, RankError> {
    if window == 0 || window > steps {
        return Err(RankError::InvalidWindow { window, steps });
    }
    let n = graph.node_count();
    let ops = walk::build_operators(graph)?;
    let evolution = Evolution::new(&ops, walk::uniform_initial(n)?)?;
    let mut moments = RunningMoments::new(n);
    let mut running_mean = Vec::with_capacity(steps);
    for state in evolution.take(steps) {
        moments.push(&state.node_probabilities());
        running_mean.push(moments.mean.clone());
    }
    let stabilization_step = stabilization_step(&running_mean, window);
    Ok(ConvergenceProfile {
        steps,
        window,
        running_mean,
        stabilization_step,
    })
}

/// First step `s` (1-based) such that the [`rank_order`] of `series` is the
/// same at every step in `s..=s + window`. `None` if no such window fits.
pub fn stabilization_step(series: &[Vec<f64>], window: usize) -> Option<usize> {
    let orders: Vec<Vec<usize>> = series.iter().map(|row| rank_order(row)).collect();
    let mut run_start = 0;
    for t in 0..orders.len() {
        if t > 0 && orders[t] != orders[t - 1] {
            run_start = t;
        }
        if t - run_start >= window {
            return Some(run_start + 1);
        }
    }
    None
}
