use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// A tree inside a graph, rooted at `root`.
///
/// Non-root vertices are kept in ascending id order; that order indexes the
/// columns of the path matrix. Edges keep the order they were given in and
/// index its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    root: usize,
    others: Vec<usize>,
    edges: Vec<usize>,
    // child -> (parent, edge)
    parent: HashMap<usize, (usize, usize)>,
}

impl RootedTree {
    /// Tree spanned by `edges` (indices into `g`) that contains `root`.
    pub fn new<T: Scalar>(g: &Graph<T>, root: usize, edges: &[usize]) -> Result<Self> {
        g.check_vertex(root)?;
        let mut adj: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        for &j in edges {
            if j >= g.m() {
                return Err(Error::NotATree(format!("edge index {j} out of range")));
            }
            let e = g.edge(j);
            adj.entry(e.tail).or_default().push((e.head, j));
            adj.entry(e.head).or_default().push((e.tail, j));
        }
        let mut parent = HashMap::new();
        let mut stack = vec![root];
        let mut visited = std::collections::HashSet::from([root]);
        let mut used_edges = 0;
        while let Some(u) = stack.pop() {
            for &(v, j) in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if parent.get(&u).map(|&(_, pj)| pj) == Some(j) {
                    continue;
                }
                if !visited.insert(v) {
                    return Err(Error::NotATree("edges contain a cycle".into()));
                }
                parent.insert(v, (u, j));
                used_edges += 1;
                stack.push(v);
            }
        }
        if used_edges != edges.len() {
            return Err(Error::NotATree("edges do not form a single tree containing the root".into()));
        }
        let mut others: Vec<usize> = parent.keys().copied().collect();
        others.sort_unstable();
        Ok(Self { root, others, edges: edges.to_vec(), parent })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Root first, then the remaining vertices in ascending order.
    pub fn vertices(&self) -> Vec<usize> {
        std::iter::once(self.root).chain(self.others.iter().copied()).collect()
    }

    pub fn non_root_vertices(&self) -> &[usize] {
        &self.others
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn size(&self) -> usize {
        self.others.len() + 1
    }

    pub fn parent(&self, v: usize) -> Option<(usize, usize)> {
        self.parent.get(&v).copied()
    }

    /// Edges on the path from `v` up to the root, each with the vertex it
    /// is entered from.
    pub fn path_to_root(&self, v: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut cur = v;
        while let Some(&(p, j)) = self.parent.get(&cur) {
            out.push((cur, j));
            cur = p;
        }
        out
    }

    /// Path length from every member to the root, measured inside the tree.
    pub fn depths<T: Scalar>(&self, g: &Graph<T>) -> HashMap<usize, T> {
        self.vertices()
            .into_iter()
            .map(|v| (v, self.path_to_root(v).iter().map(|&(_, j)| g.edge(j).weight).sum()))
            .collect()
    }
}

/// `k x k` path matrix: column `i` is the incidence vector of the path from
/// the `i`-th non-root vertex to the root, restricted to tree edges.
pub fn tree_path_matrix<T: Scalar>(g: &Graph<T>, tree: &RootedTree) -> DenseMatrix<T> {
    let k = tree.edges.len();
    let row_of: HashMap<usize, usize> = tree.edges.iter().enumerate().map(|(i, &j)| (j, i)).collect();
    let mut p = DenseMatrix::zeros(k, k);
    for (col, &v) in tree.others.iter().enumerate() {
        for (from, j) in tree.path_to_root(v) {
            let sign = if g.edge(j).tail == from { T::one() } else { -T::one() };
            p[(row_of[&j], col)] = sign;
        }
    }
    p
}

/// `(k+1) x k` incidence matrix of the tree, rows in [`RootedTree::vertices`] order.
pub fn tree_incidence<T: Scalar>(g: &Graph<T>, tree: &RootedTree) -> DenseMatrix<T> {
    let verts = tree.vertices();
    let row_of: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut d = DenseMatrix::zeros(verts.len(), tree.edges.len());
    for (c, &j) in tree.edges.iter().enumerate() {
        let e = g.edge(j);
        d[(row_of[&e.tail], c)] = T::one();
        d[(row_of[&e.head], c)] = -T::one();
    }
    d
}

/// Pseudo-inverse of the tree incidence matrix from its path matrix:
/// `D^+ = [ -(1/N) P 1 , P J ]`, `J = I - (1/N) 1 1^T`, `N = k + 1`.
pub fn tree_incidence_pseudoinverse<T: Scalar>(g: &Graph<T>, tree: &RootedTree) -> DenseMatrix<T> {
    let p = tree_path_matrix(g, tree);
    let k = p.rows();
    let inv_n = T::one() / T::from_usize(k + 1).unwrap();
    let mut out = DenseMatrix::zeros(k, k + 1);
    for i in 0..k {
        let row_sum: T = p.row(i).iter().copied().sum();
        out[(i, 0)] = -inv_n * row_sum;
        for j in 0..k {
            // (P J)_{ij} = P_ij - (1/N) * rowsum_i
            out[(i, j + 1)] = p[(i, j)] - inv_n * row_sum;
        }
    }
    out
}
