//! Shortest paths as lasso problems.
//!
//! The `s`-`t` shortest path of a weighted graph is recovered from the
//! lasso `min 1/2 |y - Q beta|^2 + lambda |beta|_1` with `Q = D W^{-1}`:
//! exactly by following the whole regularization path ([`lars`]), or
//! approximately with ADMM ([`admm`]). [`dijkstra`] is the exact reference.
//!
//! Everything numeric is generic over [`Scalar`] (`f32`, `f64`); the
//! aliases below fix the common `f64` case.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admm;
pub mod dijkstra;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod lars;
pub mod linalg;
pub mod scalar;

pub use admm::{
    admm_lasso, extract_path, inadmm_lasso, lambda_max, soft_threshold, AdmmConfig, AdmmState, AdmmTrace, Termination,
};
pub use dijkstra::{bidirectional_settle_order, check_assumption_a1, dijkstra, shortest_path, Side};
pub use error::{Error, Result};
pub use graph::{build_graph, load_graph, nicholson_graph, Graph, IndicatorVector, Path, PathResult};
pub use lars::{beta_at, kkt_residual, lars_path, Breakpoint, Event, LarsTrace};
pub use linalg::{DenseMatrix, SparseMatrix};
pub use scalar::Scalar;

pub type Graph64 = Graph<f64>;
pub type Graph32 = Graph<f32>;
pub type SparseMatrix64 = SparseMatrix<f64>;
pub type DenseMatrix64 = DenseMatrix<f64>;
pub type PathResult64 = PathResult<f64>;
pub type LarsTrace64 = LarsTrace<f64>;
pub type AdmmState64 = AdmmState<f64>;
/// Exact incidence matrix `D`.
pub type IncidenceMatrix = SparseMatrix<i64>;
