//! Directed discrete-time quantum walk on a graph.
//!
//! The walker lives in `coin ⊗ position`, with coin basis `{|↑⟩, |↓⟩}`. One
//! step applies a node-dependent real coin and then the scattering shift:
//! the `|↑⟩` sector stays put, the `|↓⟩` sector is multiplied by the
//! scattering unitary `U`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::DirectedGraph;
use crate::rank::{google_matrix, GoogleConvention};
use crate::spectral::{self, ComplexMatrix, SpectralError};

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("state has {state} nodes but operators have {operators}")]
    DimensionMismatch { state: usize, operators: usize },
    #[error("walk needs at least one node")]
    Empty,
    #[error("initial coin state is not normalized: |α|²+|β|² = {0}")]
    NotNormalized(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Amplitudes on `|↑⟩ ⊗ |x⟩` and `|↓⟩ ⊗ |x⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    pub up: Vec<Complex64>,
    pub down: Vec<Complex64>,
}

impl WalkState {
    pub fn new(up: Vec<Complex64>, down: Vec<Complex64>) -> Result<Self, WalkError> {
        if up.len() != down.len() {
            return Err(WalkError::DimensionMismatch {
                state: up.len(),
                operators: down.len(),
            });
        }
        Ok(Self { up, down })
    }

    /// Equal superposition over both coin states and all `n` nodes.
    pub fn uniform(n: usize) -> Result<Self, WalkError> {
        if n == 0 {
            return Err(WalkError::Empty);
        }
        let amp = Complex64::new(1.0 / (2.0 * n as f64).sqrt(), 0.0);
        Ok(Self {
            up: vec![amp; n],
            down: vec![amp; n],
        })
    }

    pub fn node_count(&self) -> usize {
        self.up.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.iter().chain(&self.down).map(|z| z.norm_sqr()).sum()
    }

    /// `p_x = |up_x|² + |down_x|²`.
    pub fn node_probabilities(&self) -> Vec<f64> {
        self.up
            .iter()
            .zip(&self.down)
            .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
            .collect()
    }
}

/// Equal-superposition start state; see [`WalkState::uniform`].
pub fn uniform_initial(n: usize) -> Result<WalkState, WalkError> {
    WalkState::uniform(n)
}

pub fn node_probabilities(state: &WalkState) -> Vec<f64> {
    state.node_probabilities()
}

/// Real orthogonal 2×2 coin acting on `(up, down)` at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinBlock(pub [[f64; 2]; 2]);

impl CoinBlock {
    /// `[[√(1/(α+1)), √(α/(α+1))], [√(α/(α+1)), −√(1/(α+1))]]`.
    pub fn from_alpha(alpha: f64) -> Self {
        let keep = (1.0 / (alpha + 1.0)).sqrt();
        let mix = (alpha / (alpha + 1.0)).sqrt();
        Self([[keep, mix], [mix, -keep]])
    }

    pub fn apply(&self, up: Complex64, down: Complex64) -> (Complex64, Complex64) {
        let [[a, b], [c, d]] = self.0;
        (up * a + down * b, up * c + down * d)
    }

    /// `max |(BᵀB − I)_{ij}|`.
    pub fn orthogonality_deviation(&self) -> f64 {
        let [[a, b], [c, d]] = self.0;
        let m00 = a * a + c * c - 1.0;
        let m01 = a * b + c * d;
        let m11 = b * b + d * d - 1.0;
        m00.abs().max(m01.abs()).max(m11.abs())
    }
}

/// Which real matrix the scattering unitary is built from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum ShiftSource {
    /// The weighted adjacency matrix.
    #[default]
    Adjacency,
    /// The Google matrix with the given teleport parameter and convention.
    Google {
        p: f64,
        convention: GoogleConvention,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkOperators {
    pub coin_blocks: Vec<CoinBlock>,
    pub scatter: ComplexMatrix,
    /// Incoming share of each node's total weight.
    pub alpha: Vec<f64>,
    /// Outgoing share. Stored for reporting; the coin uses `alpha` only.
    pub beta: Vec<f64>,
}

impl WalkOperators {
    pub fn node_count(&self) -> usize {
        self.coin_blocks.len()
    }

    fn check(&self, state: &WalkState) -> Result<(), WalkError> {
        if state.node_count() != self.node_count() {
            return Err(WalkError::DimensionMismatch {
                state: state.node_count(),
                operators: self.node_count(),
            });
        }
        Ok(())
    }
}

pub fn build_operators(graph: &DirectedGraph) -> Result<WalkOperators, WalkError> {
    build_operators_with(graph, ShiftSource::Adjacency)
}

pub fn build_operators_with(
    graph: &DirectedGraph,
    source: ShiftSource,
) -> Result<WalkOperators, WalkError> {
    let degrees = graph.all_degrees();
    let mut alpha = Vec::with_capacity(degrees.len());
    let mut beta = Vec::with_capacity(degrees.len());
    for d in &degrees {
        let total = d.total();
        // isolated node: no direction to favour
        if total > 0.0 {
            alpha.push(d.in_weight / total);
            beta.push(d.out_weight / total);
        } else {
            alpha.push(0.5);
            beta.push(0.5);
        }
    }
    let coin_blocks = alpha.iter().map(|&a| CoinBlock::from_alpha(a)).collect();
    let matrix = match source {
        ShiftSource::Adjacency => graph.adjacency_matrix(),
        ShiftSource::Google { p, convention } => google_matrix(graph, p, convention),
    };
    let scatter = spectral::scattering_unitary(&matrix)?;
    Ok(WalkOperators {
        coin_blocks,
        scatter,
        alpha,
        beta,
    })
}

pub fn apply_coin(state: &WalkState, ops: &WalkOperators) -> Result<WalkState, WalkError> {
    ops.check(state)?;
    let (up, down) = state
        .up
        .iter()
        .zip(&state.down)
        .zip(&ops.coin_blocks)
        .map(|((&u, &d), block)| block.apply(u, d))
        .unzip();
    Ok(WalkState { up, down })
}

pub fn apply_shift(state: &WalkState, ops: &WalkOperators) -> Result<WalkState, WalkError> {
    ops.check(state)?;
    Ok(WalkState {
        up: state.up.clone(),
        down: scatter_down(&ops.scatter, &state.down),
    })
}

fn scatter_down(scatter: &ComplexMatrix, down: &[Complex64]) -> Vec<Complex64> {
    let v = DVector::from_column_slice(down);
    (scatter * v).as_slice().to_vec()
}

/// Coin followed by shift.
pub fn step(state: &WalkState, ops: &WalkOperators) -> Result<WalkState, WalkError> {
    let coined = apply_coin(state, ops)?;
    apply_shift(&coined, ops)
}

/// Iterator over successive states, starting after the first step.
pub struct Evolution<'a> {
    ops: &'a WalkOperators,
    state: WalkState,
}

impl<'a> Evolution<'a> {
    pub fn new(ops: &'a WalkOperators, initial: WalkState) -> Result<Self, WalkError> {
        ops.check(&initial)?;
        Ok(Self {
            ops,
            state: initial,
        })
    }
}

impl Iterator for Evolution<'_> {
    type Item = WalkState;

    fn next(&mut self) -> Option<WalkState> {
        // dimensions were checked in `new`
        let next = step(&self.state, self.ops).ok()?;
        self.state = next.clone();
        Some(next)
    }
}

/// Probability distribution over a contiguous range of integer positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineDistribution {
    /// Position of `probabilities[0]`.
    pub first_position: i64,
    pub probabilities: Vec<f64>,
}

impl LineDistribution {
    pub fn probability_at(&self, x: i64) -> f64 {
        let idx = x - self.first_position;
        if idx < 0 {
            return 0.0;
        }
        self.probabilities.get(idx as usize).copied().unwrap_or(0.0)
    }

    pub fn positions(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, &p)| (self.first_position + i as i64, p))
    }

    pub fn mean(&self) -> f64 {
        self.positions().map(|(x, p)| x as f64 * p).sum()
    }

    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        self.positions()
            .map(|(x, p)| (x as f64 - mean).powi(2) * p)
            .sum::<f64>()
            .sqrt()
    }
}

fn check_coin_state(alpha0: Complex64, beta0: Complex64) -> Result<(), WalkError> {
    let norm = alpha0.norm_sqr() + beta0.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(WalkError::NotNormalized(norm));
    }
    Ok(())
}

fn theta_coin(theta: f64, up: Complex64, down: Complex64) -> (Complex64, Complex64) {
    let c = theta.cos();
    let mis = Complex64::new(0.0, -theta.sin());
    (up * c + down * mis, up * mis + down * c)
}

/// Standard walk on the integer line: coin `[[cos θ, −i sin θ], [−i sin θ, cos θ]]`,
/// then `|↑⟩` moves to `x − 1` and `|↓⟩` to `x + 1`. Starts at `x = 0` with
/// coin state `alpha0|↑⟩ + beta0|↓⟩`; returns the distribution over `−t..=t`.
pub fn reference_line_walk(
    steps: usize,
    theta: f64,
    alpha0: Complex64,
    beta0: Complex64,
) -> Result<LineDistribution, WalkError> {
    check_coin_state(alpha0, beta0)?;
    let width = 2 * steps + 1;
    let origin = steps;
    let zero = Complex64::new(0.0, 0.0);
    let mut up = vec![zero; width];
    let mut down = vec![zero; width];
    up[origin] = alpha0;
    down[origin] = beta0;
    for _ in 0..steps {
        let mut next_up = vec![zero; width];
        let mut next_down = vec![zero; width];
        for x in 0..width {
            if up[x] == zero && down[x] == zero {
                continue;
            }
            let (u, d) = theta_coin(theta, up[x], down[x]);
            next_up[x - 1] += u;
            next_down[x + 1] += d;
        }
        up = next_up;
        down = next_down;
    }
    Ok(LineDistribution {
        first_position: -(steps as i64),
        probabilities: up
            .iter()
            .zip(&down)
            .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
            .collect(),
    })
}

/// Which coin component moves in the one-directional walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectedVariant {
    /// `|↑⟩` moves to `x + 1`, `|↓⟩` stays.
    UpMoves,
    /// `|↓⟩` moves to `x + 1`, `|↑⟩` stays.
    DownMoves,
}

impl std::str::FromStr for DirectedVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "up" | "up-moves" => Ok(Self::UpMoves),
            "down" | "down-moves" => Ok(Self::DownMoves),
            other => Err(format!("unknown directed-walk variant {other:?}")),
        }
    }
}

/// One-directional line walk; returns the distribution over `0..=t`.
pub fn reference_directed_line_walk(
    steps: usize,
    theta: f64,
    alpha0: Complex64,
    beta0: Complex64,
    variant: DirectedVariant,
) -> Result<LineDistribution, WalkError> {
    check_coin_state(alpha0, beta0)?;
    let width = steps + 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut up = vec![zero; width];
    let mut down = vec![zero; width];
    up[0] = alpha0;
    down[0] = beta0;
    for s in 0..steps {
        let mut next_up = vec![zero; width];
        let mut next_down = vec![zero; width];
        // support after s steps is 0..=s
        for x in 0..=s {
            let (u, d) = theta_coin(theta, up[x], down[x]);
            match variant {
                DirectedVariant::UpMoves => {
                    next_up[x + 1] += u;
                    next_down[x] += d;
                }
                DirectedVariant::DownMoves => {
                    next_up[x] += u;
                    next_down[x + 1] += d;
                }
            }
        }
        up = next_up;
        down = next_down;
    }
    Ok(LineDistribution {
        first_position: 0,
        probabilities: up
            .iter()
            .zip(&down)
            .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_cycle, gen_tree, DirectedGraph};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn coin_blocks_for_degree_patterns() {
        // sink, source, and in=2/out=1
        let g = DirectedGraph::from_edge_list(
            4,
            [
                (0, 1, 1.0),
                (2, 1, 1.0),
                (1, 3, 1.0),
                (0, 2, 1.0),
                (3, 2, 1.0),
            ],
        )
        .unwrap();
        let ops = build_operators(&g).unwrap();
        assert_eq!(ops.alpha[0], 0.0);
        assert_eq!(ops.coin_blocks[0], CoinBlock([[1.0, 0.0], [0.0, -1.0]]));

        let sink = DirectedGraph::from_edge_list(2, [(0, 1, 3.0)]).unwrap();
        let ops = build_operators(&sink).unwrap();
        let h = FRAC_1_SQRT_2;
        for (got, want) in ops.coin_blocks[1].0.iter().flatten().zip([h, h, h, -h]) {
            assert!((got - want).abs() < 1e-15);
        }

        let weighted = DirectedGraph::from_edge_list(3, [(0, 1, 2.0), (1, 2, 1.0)]).unwrap();
        let ops = build_operators(&weighted).unwrap();
        assert!((ops.alpha[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((ops.beta[1] - 1.0 / 3.0).abs() < 1e-15);
        let want = [
            (0.6f64).sqrt(),
            (0.4f64).sqrt(),
            (0.4f64).sqrt(),
            -(0.6f64).sqrt(),
        ];
        for (got, want) in ops.coin_blocks[1].0.iter().flatten().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn isolated_node_gets_balanced_coin() {
        let g = DirectedGraph::empty(3).unwrap();
        let ops = build_operators(&g).unwrap();
        assert_eq!(ops.alpha, vec![0.5; 3]);
        assert_eq!(ops.beta, vec![0.5; 3]);
    }

    #[test]
    fn alpha_beta_sum_to_one() {
        let g = gen_tree(3, 3).unwrap();
        let ops = build_operators(&g).unwrap();
        for (a, b) in ops.alpha.iter().zip(&ops.beta) {
            assert!((a + b - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_initial_cases() {
        let s = uniform_initial(1).unwrap();
        assert!(close(s.up[0], c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.down[0], c(FRAC_1_SQRT_2, 0.0)));
        let s = uniform_initial(2).unwrap();
        for z in s.up.iter().chain(&s.down) {
            assert!(close(*z, c(0.5, 0.0)));
        }
        assert!((uniform_initial(17).unwrap().norm_sqr() - 1.0).abs() < 1e-15);
        assert!(matches!(uniform_initial(0), Err(WalkError::Empty)));
    }

    #[test]
    fn coin_application() {
        let g = DirectedGraph::from_edge_list(2, [(0, 1, 1.0)]).unwrap();
        let ops = build_operators(&g).unwrap();
        let s = WalkState::new(vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0); 2]).unwrap();
        let out = apply_coin(&s, &ops).unwrap();
        // node 0 is a source (α=0), node 1 a sink (α=1)
        assert!(close(out.up[0], c(1.0, 0.0)));
        assert!(close(out.down[0], c(0.0, 0.0)));
        assert!(close(out.up[1], c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(out.down[1], c(FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn shift_cases() {
        let g = DirectedGraph::from_edge_list(2, [(0, 1, 1.0)]).unwrap();
        let ops = build_operators(&g).unwrap();
        let s = WalkState::new(vec![c(0.6, 0.0), c(0.0, 0.8)], vec![c(0.0, 0.0); 2]).unwrap();
        assert_eq!(apply_shift(&s, &ops).unwrap(), s);

        let s = WalkState::new(vec![c(0.0, 0.0); 2], vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let out = apply_shift(&s, &ops).unwrap();
        // first column of the pinned U = [[0, 1], [e^i, 0]]
        assert!(close(out.down[0], c(0.0, 0.0)));
        assert!(close(out.down[1], Complex64::from_polar(1.0, 1.0)));

        let empty = DirectedGraph::empty(3).unwrap();
        let ops = build_operators(&empty).unwrap();
        let s = WalkState::new(
            vec![c(0.1, 0.2), c(0.3, 0.0), c(0.0, 0.4)],
            vec![c(0.5, 0.0), c(0.0, 0.1), c(0.2, 0.3)],
        )
        .unwrap();
        let out = apply_shift(&s, &ops).unwrap();
        for (a, b) in out.down.iter().zip(&s.down) {
            assert!(close(*a, *b));
        }
    }

    #[test]
    fn step_on_edgeless_graph_is_coin_only() {
        let g = DirectedGraph::empty(4).unwrap();
        let ops = build_operators(&g).unwrap();
        let s = uniform_initial(4).unwrap();
        let stepped = step(&s, &ops).unwrap();
        let coined = apply_coin(&s, &ops).unwrap();
        for (a, b) in stepped
            .up
            .iter()
            .chain(&stepped.down)
            .zip(coined.up.iter().chain(&coined.down))
        {
            assert!(close(*a, *b));
        }
    }

    #[test]
    fn single_edge_step_is_pinned() {
        // Hand evolution from all amplitudes 1/2: coin gives node 0 (½, −½)
        // and node 1 (1/√2, 0); U moves down₀ = −½ onto node 1 with phase e^i.
        let g = DirectedGraph::from_edge_list(2, [(0, 1, 1.0)]).unwrap();
        let ops = build_operators(&g).unwrap();
        let s = step(&uniform_initial(2).unwrap(), &ops).unwrap();
        assert!(close(s.up[0], c(0.5, 0.0)));
        assert!(close(s.up[1], c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.down[0], c(0.0, 0.0)));
        assert!(close(s.down[1], -0.5 * Complex64::from_polar(1.0, 1.0)));
        let p = s.node_probabilities();
        assert!((p[0] - 0.25).abs() < 1e-15);
        assert!((p[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ops = build_operators(&gen_cycle(3).unwrap()).unwrap();
        let s = uniform_initial(2).unwrap();
        assert!(matches!(
            apply_coin(&s, &ops),
            Err(WalkError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            apply_shift(&s, &ops),
            Err(WalkError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            step(&s, &ops),
            Err(WalkError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn long_run_on_tree_keeps_norm() {
        let g = gen_tree(2, 5).unwrap();
        let ops = build_operators(&g).unwrap();
        let last = Evolution::new(&ops, uniform_initial(63).unwrap())
            .unwrap()
            .take(500)
            .last()
            .unwrap();
        assert!((last.norm_sqr() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn probabilities_basic() {
        let p = uniform_initial(4).unwrap().node_probabilities();
        for x in p {
            assert!((x - 0.25).abs() < 1e-15);
        }
        let s = WalkState::new(vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0); 2]).unwrap();
        assert_eq!(node_probabilities(&s), vec![1.0, 0.0]);
    }

    #[test]
    fn line_walk_one_step() {
        for k in 0..10 {
            let theta = 0.3 * k as f64;
            let d = reference_line_walk(1, theta, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
            assert!((d.probability_at(-1) - theta.cos().powi(2)).abs() < 1e-14);
            assert!((d.probability_at(1) - theta.sin().powi(2)).abs() < 1e-14);
            assert_eq!(d.probability_at(0), 0.0);
        }
        let d = reference_line_walk(0, 0.4, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(d.probabilities, vec![1.0]);
        assert!(reference_line_walk(3, 0.4, c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn line_walk_spreads_ballistically() {
        let s = FRAC_1_SQRT_2;
        let d1 = reference_line_walk(100, PI / 4.0, c(s, 0.0), c(0.0, s)).unwrap();
        let d2 = reference_line_walk(200, PI / 4.0, c(s, 0.0), c(0.0, s)).unwrap();
        let ratio = d2.std_dev() / d1.std_dev();
        assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");
        // classical binomial walk has σ = √t = 10
        assert!(d1.std_dev() > 0.5 * 10.0);
    }

    #[test]
    fn directed_walk_cases() {
        let d = reference_directed_line_walk(
            1,
            0.0,
            c(1.0, 0.0),
            c(0.0, 0.0),
            DirectedVariant::UpMoves,
        )
        .unwrap();
        assert_eq!(d.probability_at(1), 1.0);
        assert_eq!(d.probability_at(0), 0.0);
        let d = reference_directed_line_walk(
            0,
            0.7,
            c(1.0, 0.0),
            c(0.0, 0.0),
            DirectedVariant::DownMoves,
        )
        .unwrap();
        assert_eq!(d.probabilities, vec![1.0]);
        for variant in [DirectedVariant::UpMoves, DirectedVariant::DownMoves] {
            let d =
                reference_directed_line_walk(25, 0.9, c(0.6, 0.0), c(0.0, 0.8), variant).unwrap();
            assert_eq!(d.first_position, 0);
            assert_eq!(d.probabilities.len(), 26);
            assert!((d.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!("sideways".parse::<DirectedVariant>().is_err());
        assert_eq!(
            "up".parse::<DirectedVariant>().unwrap(),
            DirectedVariant::UpMoves
        );
    }
}
