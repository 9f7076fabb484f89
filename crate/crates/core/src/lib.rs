//! Ranking the nodes of directed, optionally weighted networks with a
//! directed discrete-time quantum walk, alongside a classical PageRank
//! baseline.
//!
//! * [`graph`]: graphs, generators, edge-list I/O.
//! * [`spectral`]: normalized SVD and the scattering unitary.
//! * [`walk`]: walk state, coin and shift operators, reference line walks.
//! * [`rank`]: quantum ranks, PageRank, convergence and comparison.

pub mod graph;
pub mod rank;
pub mod spectral;
pub mod walk;

pub use graph::{DirectedGraph, GraphError, NodeDegrees};
pub use rank::{
    compare, convergence_profile, pagerank, quantum_rank, ComparisonReport, GoogleConvention,
    PageRankOptions, PageRankResult, QuantumRankResult, RankError,
};
pub use spectral::{ComplexMatrix, RealMatrix, SpectralError, SvdTriple};
pub use walk::{WalkError, WalkOperators, WalkState};
