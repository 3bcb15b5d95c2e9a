use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

/// One traversed edge; `forward` when walked tail to head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub edge: usize,
    pub forward: bool,
}

/// Simple path from `source` to `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    source: usize,
    target: usize,
    steps: Vec<Step>,
}

impl Path {
    /// Validate a vertex sequence against `g`.
    pub fn from_vertices<T: Scalar>(g: &Graph<T>, vertices: &[usize]) -> Result<Self> {
        let (&source, &target) = match (vertices.first(), vertices.last()) {
            (Some(s), Some(t)) => (s, t),
            _ => return Err(Error::InvalidPath("empty vertex sequence".into())),
        };
        let mut seen = HashSet::with_capacity(vertices.len());
        for &v in vertices {
            g.check_vertex(v)?;
            if !seen.insert(v) {
                return Err(Error::InvalidPath(format!("vertex {} repeated", v + 1)));
            }
        }
        let mut steps = Vec::with_capacity(vertices.len().saturating_sub(1));
        for w in vertices.windows(2) {
            let edge = g
                .find_edge(w[0], w[1])
                .ok_or_else(|| Error::InvalidPath(format!("no edge between {} and {}", w[0] + 1, w[1] + 1)))?;
            steps.push(Step { edge, forward: g.edge(edge).tail == w[0] });
        }
        Ok(Self { source, target, steps })
    }

    /// Validate an edge sequence walked from `source`.
    pub fn from_edges<T: Scalar>(g: &Graph<T>, source: usize, edges: &[usize]) -> Result<Self> {
        g.check_vertex(source)?;
        let mut vertices = vec![source];
        let mut cur = source;
        for &j in edges {
            if j >= g.m() {
                return Err(Error::InvalidPath(format!("edge index {j} out of range")));
            }
            let e = g.edge(j);
            if e.tail != cur && e.head != cur {
                return Err(Error::InvalidPath(format!("edge {j} does not touch vertex {}", cur + 1)));
            }
            cur = e.other(cur);
            vertices.push(cur);
        }
        Self::from_vertices(g, &vertices)
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.edge)
    }

    pub fn vertices<T: Scalar>(&self, g: &Graph<T>) -> Vec<usize> {
        let mut out = vec![self.source];
        for s in &self.steps {
            let e = g.edge(s.edge);
            out.push(if s.forward { e.head } else { e.tail });
        }
        out
    }

    fn belongs_to<T: Scalar>(&self, g: &Graph<T>) -> Result<()> {
        let mut cur = self.source;
        g.check_vertex(cur)?;
        for s in &self.steps {
            if s.edge >= g.m() {
                return Err(Error::InvalidPath(format!("edge index {} out of range", s.edge)));
            }
            let e = g.edge(s.edge);
            let (from, to) = if s.forward { (e.tail, e.head) } else { (e.head, e.tail) };
            if from != cur {
                return Err(Error::InvalidPath("steps are not consecutive".into()));
            }
            cur = to;
        }
        if cur != self.target {
            return Err(Error::InvalidPath("path does not end at target".into()));
        }
        Ok(())
    }
}

/// `length(p) = sum of member weights`.
pub fn path_length<T: Scalar>(g: &Graph<T>, p: &Path) -> Result<T> {
    p.belongs_to(g)?;
    Ok(p.steps.iter().map(|s| g.edge(s.edge).weight).sum())
}

/// Signed incidence vector of `p` as `(edge, ±1)` pairs, in path order.
pub fn path_incidence_vector<T: Scalar>(g: &Graph<T>, p: &Path) -> Result<Vec<(usize, i8)>> {
    p.belongs_to(g)?;
    Ok(p.steps.iter().map(|s| (s.edge, if s.forward { 1 } else { -1 })).collect())
}

/// `y^{(s,t)}`: `+1` at `s`, `-1` at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndicatorVector {
    pub n: usize,
    pub s: usize,
    pub t: usize,
}

impl IndicatorVector {
    pub fn new(n: usize, s: usize, t: usize) -> Result<Self> {
        for v in [s, t] {
            if v >= n {
                return Err(Error::VertexOutOfRange(v + 1, n));
            }
        }
        Ok(Self { n, s, t })
    }

    pub fn to_dense<T: num_traits::Num + Copy + std::ops::Neg<Output = T>>(&self) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        if self.s != self.t {
            y[self.s] = T::one();
            y[self.t] = -T::one();
        }
        y
    }
}

/// A solver's answer: the path and its length in the graph's weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult<T> {
    pub path: Path,
    pub length: T,
}

#[derive(Serialize)]
struct PathRecord<'a, T> {
    vertices: &'a [usize],
    length: T,
}

impl<T: Scalar> PathResult<T> {
    pub fn new(g: &Graph<T>, path: Path) -> Result<Self> {
        let length = path_length(g, &path)?;
        Ok(Self { path, length })
    }

    /// Vertices along the path, zero-based.
    pub fn vertices(&self, g: &Graph<T>) -> Vec<usize> {
        self.path.vertices(g)
    }

    /// Dense incidence vector `x^{(p)}` of length `m`.
    pub fn incidence(&self, g: &Graph<T>) -> Vec<T> {
        let mut x = vec![T::zero(); g.m()];
        for s in self.path.steps() {
            x[s.edge] = if s.forward { T::one() } else { -T::one() };
        }
        x
    }

    /// JSON with one-based vertex ids.
    pub fn to_json(&self, g: &Graph<T>) -> String
    where
        T: Serialize,
    {
        let vertices: Vec<usize> = self.vertices(g).iter().map(|v| v + 1).collect();
        serde_json::to_string(&PathRecord { vertices: &vertices, length: self.length }).expect("path record serializes")
    }
}
