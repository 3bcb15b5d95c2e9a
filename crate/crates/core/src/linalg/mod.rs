//! Sparse and dense linear algebra used by the solvers.

mod cg;
mod dense;
mod sparse;

pub use cg::{conjugate_gradient, CgSolution, GramOperator, LinearOperator};
pub use dense::{least_squares_solve, spd_factorize, spd_solve, Cholesky, DenseMatrix};
pub use sparse::SparseMatrix;
