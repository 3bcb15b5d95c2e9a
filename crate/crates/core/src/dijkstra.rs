//! Dijkstra's algorithm as the exact oracle, the two-rooted growth order
//! that the LARS path mirrors, and the unique-shortest-path check.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::graph::{Graph, Path, PathResult};
use crate::scalar::Scalar;

/// Which endpoint of the query a tree is rooted at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Source,
    Target,
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry<T> {
    dist: T,
    vertex: usize,
}

impl<T: Scalar> PartialEq for HeapEntry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for HeapEntry<T> {}

impl<T: Scalar> PartialOrd for HeapEntry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for HeapEntry<T> {
    // reversed: BinaryHeap is a max-heap, we pop the smallest (dist, vertex)
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.partial_cmp(&self.dist).unwrap_or(Ordering::Equal).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

/// Distances and shortest-path-tree parents from one source.
#[derive(Debug, Clone)]
pub struct DistanceMap<T> {
    source: usize,
    dist: Vec<T>,
    parent: Vec<Option<usize>>,
    settled: Vec<bool>,
    order: Vec<usize>,
}

impl<T: Scalar> DistanceMap<T> {
    pub fn source(&self) -> usize {
        self.source
    }

    /// Tentative or final distance; `+inf` when never reached.
    pub fn dist(&self, v: usize) -> T {
        self.dist[v]
    }

    pub fn distances(&self) -> &[T] {
        &self.dist
    }

    /// Edge through which `v` was last improved.
    pub fn parent_edge(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn is_settled(&self, v: usize) -> bool {
        self.settled[v]
    }

    /// Vertices in the order they were settled.
    pub fn settle_order(&self) -> &[usize] {
        &self.order
    }

    /// Follow parent links back from `v`; `None` if `v` is not settled.
    pub fn path_to<W>(&self, g: &Graph<W>, v: usize) -> Option<Vec<usize>> {
        if !self.settled[v] {
            return None;
        }
        let mut vertices = vec![v];
        let mut cur = v;
        while let Some(j) = self.parent[cur] {
            cur = g.edge(j).other(cur);
            vertices.push(cur);
        }
        vertices.reverse();
        Some(vertices)
    }
}

/// Dijkstra from `source`; stops once `target` is settled when given.
///
/// Binary heap with lazy deletion. Equal distances pop the smaller vertex
/// id first.
pub fn dijkstra<T: Scalar>(g: &Graph<T>, source: usize, target: Option<usize>) -> Result<DistanceMap<T>> {
    run(g, source, target, None)
}

fn run<T: Scalar>(
    g: &Graph<T>,
    source: usize,
    target: Option<usize>,
    allowed: Option<&[bool]>,
) -> Result<DistanceMap<T>> {
    g.check_vertex(source)?;
    if let Some(t) = target {
        g.check_vertex(t)?;
    }
    let n = g.n();
    let mut dist = vec![T::infinity(); n];
    let mut parent = vec![None; n];
    let mut settled = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    dist[source] = T::zero();
    heap.push(HeapEntry { dist: T::zero(), vertex: source });

    while let Some(HeapEntry { dist: d, vertex: u }) = heap.pop() {
        if settled[u] || d > dist[u] {
            continue;
        }
        settled[u] = true;
        order.push(u);
        if Some(u) == target {
            break;
        }
        for &(v, j) in g.neighbors(u) {
            if settled[v] || allowed.is_some_and(|a| !a[j]) {
                continue;
            }
            let cand = d + g.edge(j).weight;
            if cand < dist[v] {
                dist[v] = cand;
                parent[v] = Some(j);
                heap.push(HeapEntry { dist: cand, vertex: v });
            }
        }
    }
    Ok(DistanceMap { source, dist, parent, settled, order })
}

/// Shortest `s`-`t` path by parent links of a Dijkstra run stopped at `t`.
pub fn shortest_path<T: Scalar>(g: &Graph<T>, s: usize, t: usize) -> Result<PathResult<T>> {
    let dm = dijkstra(g, s, Some(t))?;
    let vertices = dm.path_to(g, t).expect("connected graph: target is always settled");
    let path = Path::from_vertices(g, &vertices)?;
    Ok(PathResult { path, length: dm.dist(t) })
}

/// Shortest `s`-`t` path using only edges with `allowed[j]`; `None` when
/// `t` is unreachable through them.
pub fn shortest_path_within<T: Scalar>(
    g: &Graph<T>,
    s: usize,
    t: usize,
    allowed: &[bool],
) -> Result<Option<PathResult<T>>> {
    if allowed.len() != g.m() {
        return Err(crate::error::Error::DimensionMismatch { expected: g.m(), got: allowed.len() });
    }
    let dm = run(g, s, Some(t), Some(allowed))?;
    let Some(vertices) = dm.path_to(g, t) else {
        return Ok(None);
    };
    let path = Path::from_vertices(g, &vertices)?;
    Ok(Some(PathResult { path, length: dm.dist(t) }))
}

/// One vertex joining a tree in the two-rooted growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettleEvent<T> {
    pub vertex: usize,
    pub root: Side,
    /// Distance to the root inside that tree.
    pub distance: T,
    /// Breakpoint value `1 / (|T| l_v - sum_{u in T} l_u)` at which it joins.
    pub key: T,
}

struct GrowingTree<T> {
    root: usize,
    size: usize,
    sum: T,
    depth: Vec<T>,
    heap: BinaryHeap<HeapEntry<T>>,
}

impl<T: Scalar> GrowingTree<T> {
    fn new(root: usize, n: usize) -> Self {
        let mut depth = vec![T::infinity(); n];
        depth[root] = T::zero();
        Self { root, size: 1, sum: T::zero(), depth, heap: BinaryHeap::new() }
    }

    fn key(&self, d: T) -> T {
        T::one() / (T::from_usize(self.size).unwrap() * d - self.sum)
    }
}

/// Interior vertices in the order two Dijkstra trees rooted at `s` and `t`
/// absorb them when growth is ranked by the LARS joining-time key.
///
/// Each tree only grows through its own vertices. The sequence stops when
/// connecting the two trees has the largest key, which is when the LARS
/// path terminates.
pub fn bidirectional_settle_order<T: Scalar>(g: &Graph<T>, s: usize, t: usize) -> Result<Vec<SettleEvent<T>>> {
    g.check_vertex(s)?;
    g.check_vertex(t)?;
    let n = g.n();
    let mut owner: Vec<Option<Side>> = vec![None; n];
    owner[s] = Some(Side::Source);
    owner[t] = Some(Side::Target);
    if s == t {
        return Ok(Vec::new());
    }
    let mut trees = [GrowingTree::new(s, n), GrowingTree::new(t, n)];
    let mut best_link = T::infinity();
    let idx = |side: Side| match side {
        Side::Source => 0,
        Side::Target => 1,
    };

    // Absorb `v` into `side`: push its frontier and update the best link.
    fn absorb<T: Scalar>(
        g: &Graph<T>,
        trees: &mut [GrowingTree<T>; 2],
        owner: &[Option<Side>],
        me: usize,
        v: usize,
        best_link: &mut T,
    ) {
        let other = 1 - me;
        let dv = trees[me].depth[v];
        for &(u, j) in g.neighbors(v) {
            let w = g.edge(j).weight;
            match owner[u] {
                None => {
                    let cand = dv + w;
                    if cand < trees[me].depth[u] {
                        trees[me].depth[u] = cand;
                        trees[me].heap.push(HeapEntry { dist: cand, vertex: u });
                    }
                }
                Some(side) if (side == Side::Source) != (me == 0) => {
                    let total = dv + w + trees[other].depth[u];
                    if total < *best_link {
                        *best_link = total;
                    }
                }
                _ => {}
            }
        }
    }

    absorb(g, &mut trees, &owner, 0, s, &mut best_link);
    absorb(g, &mut trees, &owner, 1, t, &mut best_link);

    let mut events = Vec::new();
    loop {
        let mut candidates: Vec<(Side, usize, T, T)> = Vec::new();
        for side in [Side::Source, Side::Target] {
            let tree = &mut trees[idx(side)];
            while let Some(top) = tree.heap.peek() {
                if owner[top.vertex].is_some() || top.dist > tree.depth[top.vertex] {
                    tree.heap.pop();
                } else {
                    break;
                }
            }
            if let Some(top) = tree.heap.peek() {
                candidates.push((side, top.vertex, top.dist, tree.key(top.dist)));
            }
        }
        let link_key = if best_link.is_finite() {
            let (ns, nt) = (T::from_usize(trees[0].size).unwrap(), T::from_usize(trees[1].size).unwrap());
            let gamma = ns * nt * best_link - nt * trees[0].sum - ns * trees[1].sum;
            (ns + nt) / gamma
        } else {
            T::zero()
        };
        let Some(&(side, v, d, key)) = candidates.iter().fold(None, |acc: Option<&(Side, usize, T, T)>, c| match acc {
            Some(a) if a.3 >= c.3 => Some(a),
            _ => Some(c),
        }) else {
            break;
        };
        if link_key >= key {
            break;
        }
        let i = idx(side);
        owner[v] = Some(side);
        trees[i].size += 1;
        trees[i].sum += d;
        trees[i].heap.pop();
        absorb(g, &mut trees, &owner, i, v, &mut best_link);
        events.push(SettleEvent { vertex: v, root: side, distance: d, key });
        debug_assert!(trees[i].root != v);
    }
    Ok(events)
}

/// Result of checking that shortest paths from both query endpoints to
/// every vertex are unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniquenessReport {
    pub holds: bool,
    /// Vertices (and the root they were checked against) with more than
    /// one optimal predecessor.
    pub violations: Vec<(usize, Side)>,
}

/// Relative tolerance for calling two path lengths equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Check that every vertex has a unique shortest path from `s` and from `t`.
///
/// A vertex has a unique shortest path iff exactly one neighbor achieves
/// its distance, with `|d1 - d2| <= 1e-12 * max(1, d1)` counting as a tie.
pub fn check_assumption_a1<T: Scalar>(g: &Graph<T>, s: usize, t: usize) -> Result<UniquenessReport> {
    let tol = T::lit(TIE_TOLERANCE);
    let mut violations = Vec::new();
    for (root, side) in [(s, Side::Source), (t, Side::Target)] {
        let dm = dijkstra(g, root, None)?;
        for v in 0..g.n() {
            if v == root {
                continue;
            }
            let dv = dm.dist(v);
            let tight = g
                .neighbors(v)
                .iter()
                .filter(|&&(u, j)| {
                    let cand = dm.dist(u) + g.edge(j).weight;
                    (cand - dv).abs() <= tol * T::one().max(dv)
                })
                .count();
            if tight > 1 {
                violations.push((v, side));
            }
        }
    }
    Ok(UniquenessReport { holds: violations.is_empty(), violations })
}
