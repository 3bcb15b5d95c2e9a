//! Weighted undirected graphs with a fixed edge orientation, incidence
//! algebra, paths and rooted trees.

mod io;
mod path;
mod tree;

use std::collections::HashMap;

use num_traits::{Num, NumCast};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::scalar::Scalar;

pub use io::{load_graph, parse_json, parse_text, write_json, write_text};
pub use path::{path_incidence_vector, path_length, IndicatorVector, Path, PathResult, Step};
pub use tree::{tree_incidence, tree_incidence_pseudoinverse, tree_path_matrix, RootedTree};

/// Undirected edge stored with orientation `tail -> head`, `tail < head`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub tail: usize,
    pub head: usize,
    pub weight: T,
}

impl<T> Edge<T> {
    /// Endpoint opposite to `v`.
    pub fn other(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

/// Connected simple graph with positive weights.
///
/// Vertices are `0..n` internally. Edge `j` is column `j` of the incidence
/// matrix, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    adjacency: Vec<Vec<(usize, usize)>>,
    index: HashMap<(usize, usize), usize>,
}

impl<T> Graph<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn edge(&self, j: usize) -> &Edge<T> {
        &self.edges[j]
    }

    /// `(neighbor, edge index)` pairs of `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Index of the edge joining `u` and `v`, in either order.
    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(v + 1, self.n))
        }
    }
}

impl<T: Scalar> Graph<T> {
    /// Build from zero-based `(u, v, w)` triples over vertices `0..n`.
    pub fn from_edges(n: usize, edge_list: &[(usize, usize, T)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut adjacency = vec![Vec::new(); n];
        let mut index = HashMap::with_capacity(edge_list.len());
        for &(u, v, w) in edge_list {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange(x + 1, n));
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u + 1));
            }
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::NonPositiveWeight(u + 1, v + 1, w.as_f64()));
            }
            let (tail, head) = (u.min(v), u.max(v));
            let j = edges.len();
            if index.insert((tail, head), j).is_some() {
                return Err(Error::DuplicateEdge(tail + 1, head + 1));
            }
            edges.push(Edge { tail, head, weight: w });
            adjacency[tail].push((head, j));
            adjacency[head].push((tail, j));
        }
        let g = Self { n, edges, adjacency, index };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    pub fn weights(&self) -> Vec<T> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    /// `n x m` incidence matrix `D`: `+1` at the tail, `-1` at the head.
    pub fn incidence_matrix<U: Num + Copy + std::ops::Neg<Output = U>>(&self) -> SparseMatrix<U> {
        let mut triplets = Vec::with_capacity(2 * self.m());
        for (j, e) in self.edges.iter().enumerate() {
            triplets.push((e.tail, j, U::one()));
            triplets.push((e.head, j, -U::one()));
        }
        SparseMatrix::from_triplets(self.n, self.m(), &triplets).expect("incidence pattern is valid")
    }

    /// Weighted incidence `Q = D W^{-1}`.
    pub fn weighted_incidence(&self) -> SparseMatrix<T> {
        self.incidence_matrix::<T>().map(|_, j, v| v / self.edges[j].weight)
    }

    /// Graph Laplacian `L = D W D^T` as a sparse matrix.
    pub fn laplacian(&self) -> SparseMatrix<T> {
        let mut diag = vec![T::zero(); self.n];
        let mut triplets = Vec::with_capacity(self.n + 2 * self.m());
        for e in &self.edges {
            diag[e.tail] += e.weight;
            diag[e.head] += e.weight;
            triplets.push((e.tail, e.head, -e.weight));
            triplets.push((e.head, e.tail, -e.weight));
        }
        triplets.extend(diag.into_iter().enumerate().map(|(i, d)| (i, i, d)));
        SparseMatrix::from_triplets(self.n, self.n, &triplets).expect("laplacian pattern is valid")
    }

    /// Same topology and orientation with every weight mapped through `f`.
    pub fn map_weights(&self, f: impl Fn(usize, T) -> T) -> Result<Self> {
        let list: Vec<_> = self.edges.iter().enumerate().map(|(j, e)| (e.tail, e.head, f(j, e.weight))).collect();
        Self::from_edges(self.n, &list)
    }

    /// Convert to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Graph<U> {
        let list: Vec<_> = self
            .edges
            .iter()
            .map(|e| (e.tail, e.head, <U as NumCast>::from(e.weight).expect("weight representable")))
            .collect();
        Graph::from_edges(self.n, &list).expect("cast preserves validity")
    }
}

/// Build a graph from a one-based edge list; `n` is the largest vertex id.
pub fn build_graph<T: Scalar>(edge_list: &[(usize, usize, T)]) -> Result<Graph<T>> {
    let mut zero_based = Vec::with_capacity(edge_list.len());
    let mut n = 0;
    for &(u, v, w) in edge_list {
        if u == 0 || v == 0 {
            return Err(Error::VertexOutOfRange(0, n));
        }
        n = n.max(u).max(v);
        zero_based.push((u - 1, v - 1, w));
    }
    Graph::from_edges(n, &zero_based)
}

/// The graph of Nicholson used as the running example of the LARS path:
/// 9 vertices, 13 edges, shortest 1-9 path 1-2-3-6-9 of length 8.
pub fn nicholson_graph<T: Scalar>() -> Graph<T> {
    let list: Vec<(usize, usize, T)> = [
        (1, 2, 3.0),
        (1, 3, 6.0),
        (1, 4, 7.0),
        (2, 5, 4.0),
        (2, 3, 1.0),
        (3, 6, 2.0),
        (4, 6, 3.0),
        (4, 7, 4.0),
        (5, 8, 1.0),
        (6, 8, 1.0),
        (6, 9, 2.0),
        (7, 9, 5.0),
        (8, 9, 2.0),
    ]
    .iter()
    .map(|&(u, v, w)| (u, v, T::lit(w)))
    .collect();
    build_graph(&list).expect("nicholson graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nicholson_dimensions() {
        let g: Graph<f64> = nicholson_graph();
        assert_eq!((g.n(), g.m()), (9, 13));
        let d = g.incidence_matrix::<i32>();
        assert_eq!((d.rows(), d.cols(), d.nnz()), (9, 13, 26));
        for j in 0..13 {
            let col: Vec<i32> = d.column(j).map(|(_, v)| v).collect();
            assert_eq!(col.iter().filter(|&&v| v == 1).count(), 1);
            assert_eq!(col.iter().filter(|&&v| v == -1).count(), 1);
        }
    }

    #[test]
    fn single_edge() {
        let g = build_graph(&[(1, 2, 1.0)]).unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(build_graph(&[(1, 1, 2.0)]).unwrap_err(), Error::SelfLoop(1));
        assert_eq!(build_graph(&[(1, 2, 1.0), (2, 1, 3.0)]).unwrap_err(), Error::DuplicateEdge(1, 2));
        assert!(matches!(build_graph(&[(1, 2, 0.0)]).unwrap_err(), Error::NonPositiveWeight(1, 2, _)));
        assert!(matches!(build_graph(&[(1, 2, -1.0)]), Err(Error::NonPositiveWeight(..))));
        assert_eq!(build_graph(&[(1, 2, 1.0), (3, 4, 1.0)]).unwrap_err(), Error::Disconnected);
        assert_eq!(Graph::<f64>::from_edges(3, &[(0, 1, 1.0)]).unwrap_err(), Error::Disconnected);
    }

    #[test]
    fn orientation_is_smaller_to_larger() {
        let g = build_graph(&[(3, 1, 2.0), (2, 3, 1.0)]).unwrap();
        assert_eq!((g.edge(0).tail, g.edge(0).head), (0, 2));
        assert_eq!(g.find_edge(2, 0), Some(0));
    }

    #[test]
    fn path_graph_incidence() {
        let g = build_graph(&[(1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let d = g.incidence_matrix::<i32>().to_dense_rows();
        assert_eq!(d, vec![vec![1, 0], vec![-1, 1], vec![0, -1]]);
    }

    #[test]
    fn weighted_incidence_scales_columns() {
        let g = build_graph(&[(1, 2, 4.0)]).unwrap();
        let q = g.weighted_incidence().to_dense_rows();
        assert_eq!(q, vec![vec![0.25], vec![-0.25]]);

        let g: Graph<f64> = nicholson_graph();
        let q = g.weighted_incidence();
        assert!((q.get(0, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((q.get(1, 0) + 1.0 / 3.0).abs() < 1e-15);

        let unit = g.map_weights(|_, _| 1.0).unwrap();
        assert_eq!(unit.weighted_incidence().to_dense_rows(), unit.incidence_matrix::<f64>().to_dense_rows());
    }

    #[test]
    fn laplacian_is_d_w_dt() {
        let g: Graph<f64> = nicholson_graph();
        let d = g.incidence_matrix::<f64>();
        let w = g.weights();
        let l = g.laplacian();
        for i in 0..g.n() {
            for k in 0..g.n() {
                let expected: f64 = (0..g.m()).map(|j| d.get(i, j) * w[j] * d.get(k, j)).sum();
                assert_eq!(l.get(i, k), expected);
            }
        }
    }
}
