//! Joining and crossing times evaluated from tree sizes and root distances
//! instead of pseudo-inverses. Valid while the active edges form a tree
//! rooted at `s` and a tree rooted at `t` (possibly merged into one).

use std::collections::VecDeque;

use crate::dijkstra::Side;
use crate::graph::Graph;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Membership {
    Tree(Side),
    Outside,
    /// In a component containing neither endpoint.
    Stray,
}

/// One rooted tree of the active forest.
#[derive(Debug, Clone)]
pub(crate) struct TreeStats<T> {
    pub size: usize,
    pub depth_sum: T,
    pub depth: Vec<T>,
    /// For each active edge in this tree: (child vertex, |R_j|, sum of depths over R_j).
    pub below: Vec<Option<(usize, usize, T)>>,
}

/// The active forest seen from both endpoints.
#[derive(Debug, Clone)]
pub(crate) struct ForestView<T> {
    pub member: Vec<Membership>,
    pub connected: bool,
    pub source: TreeStats<T>,
    pub target: TreeStats<T>,
    /// Whether every active edge lies in one of the two rooted trees.
    pub complete: bool,
}

/// BFS from `root` over active edges. With `orient`, distances follow the
/// edge signs: `+w` when the sign points away from the parent, `-w` otherwise.
fn grow<T: Scalar>(
    g: &Graph<T>,
    active_adj: &[Vec<(usize, usize)>],
    root: usize,
    orient: Option<&[i8]>,
) -> (TreeStats<T>, Vec<usize>) {
    let n = g.n();
    let mut depth = vec![T::nan(); n];
    let mut parent_edge: Vec<Option<usize>> = vec![None; n];
    let mut order = vec![root];
    depth[root] = T::zero();
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &(v, j) in &active_adj[u] {
            if parent_edge[u] == Some(j) || !depth[v].is_nan() {
                continue;
            }
            let e = g.edge(j);
            let step = match orient {
                Some(sign) if (sign[j] == 1) != (e.tail == u) => -e.weight,
                _ => e.weight,
            };
            depth[v] = depth[u] + step;
            parent_edge[v] = Some(j);
            order.push(v);
            queue.push_back(v);
        }
    }
    let mut count = vec![0usize; n];
    let mut sum = vec![T::zero(); n];
    let mut below = vec![None; g.m()];
    for &v in order.iter().rev() {
        count[v] += 1;
        sum[v] += depth[v];
        if let Some(j) = parent_edge[v] {
            let p = g.edge(j).other(v);
            count[p] += count[v];
            let sv = sum[v];
            sum[p] += sv;
            below[j] = Some((v, count[v], sum[v]));
        }
    }
    let stats = TreeStats { size: order.len(), depth_sum: sum[root], depth, below };
    (stats, order)
}

impl<T: Scalar> ForestView<T> {
    /// `signs` are aligned with `active`.
    pub fn new(g: &Graph<T>, active: &[usize], signs: &[i8], s: usize, t: usize) -> Self {
        let mut adj = vec![Vec::new(); g.n()];
        let mut sign = vec![0i8; g.m()];
        for (&j, &sg) in active.iter().zip(signs) {
            sign[j] = sg;
        }
        for &j in active {
            let e = g.edge(j);
            adj[e.tail].push((e.head, j));
            adj[e.head].push((e.tail, j));
        }
        let (mut source, s_order) = grow(g, &adj, s, None);
        let (target, t_order) = grow(g, &adj, t, None);
        let connected = !source.depth[t].is_nan();
        if connected {
            // Once merged, the distance that enters the crossing ratio is the
            // potential fixed by the edge signs: l^(s) on the s side and
            // L - l^(t) on the t side, not the depth inside the merged tree.
            source = grow(g, &adj, s, Some(&sign)).0;
        }
        let mut member = vec![Membership::Outside; g.n()];
        for (v, m) in member.iter_mut().enumerate() {
            if !adj[v].is_empty() {
                *m = Membership::Stray;
            }
        }
        for &v in &t_order {
            member[v] = Membership::Tree(Side::Target);
        }
        for &v in &s_order {
            member[v] = Membership::Tree(Side::Source);
        }
        let covered = if connected { s_order.len() - 1 } else { s_order.len() + t_order.len() - 2 };
        let complete = covered == active.len();
        Self { member, connected, source, target, complete }
    }

    fn tree(&self, side: Side) -> &TreeStats<T> {
        match side {
            Side::Source => &self.source,
            Side::Target => &self.target,
        }
    }

    /// Closed-form joining time of inactive edge `j`, before clamping.
    pub fn join_time(&self, g: &Graph<T>, j: usize) -> Option<T> {
        if !self.complete {
            return None;
        }
        let e = g.edge(j);
        let (mu, mv) = (self.member[e.tail], self.member[e.head]);
        if matches!(mu, Membership::Stray) || matches!(mv, Membership::Stray) {
            return None;
        }
        if self.connected {
            return Some(T::zero());
        }
        let w = e.weight;
        let size = |side| T::from_usize(self.tree(side).size).unwrap();
        match (mu, mv) {
            (Membership::Outside, Membership::Outside) => Some(T::zero()),
            (Membership::Tree(a), Membership::Tree(b)) if a == b => Some(T::zero()),
            (Membership::Tree(side), Membership::Outside) | (Membership::Outside, Membership::Tree(side)) => {
                let inside = if matches!(mu, Membership::Tree(_)) { e.tail } else { e.head };
                let tree = self.tree(side);
                let reach = tree.depth[inside] + w;
                Some(T::one() / (size(side) * reach - tree.depth_sum))
            }
            (Membership::Tree(_), Membership::Tree(_)) => {
                let (u_s, v_t) = if mu == Membership::Tree(Side::Source) { (e.tail, e.head) } else { (e.head, e.tail) };
                let through = self.source.depth[u_s] + w + self.target.depth[v_t];
                let (ns, nt) = (size(Side::Source), size(Side::Target));
                let gamma = ns * nt * through - nt * self.source.depth_sum - ns * self.target.depth_sum;
                Some((ns + nt) / gamma)
            }
            _ => None,
        }
    }

    /// Closed-form `a_j / b_j` for active edge `j`.
    pub fn cross_ratio(&self, g: &Graph<T>, j: usize, on_st_path: impl Fn(usize) -> bool) -> Option<T> {
        if !self.complete {
            return None;
        }
        if self.connected {
            let tree = &self.source;
            let (_, r, r_sum) = tree.below[j]?;
            if !on_st_path(j) {
                return Some(T::zero());
            }
            let (r, n) = (T::from_usize(r).unwrap(), T::from_usize(tree.size).unwrap());
            return Some(T::one() / (r_sum - r / n * tree.depth_sum));
        }
        let e = g.edge(j);
        let side = match self.member[e.tail] {
            Membership::Tree(side) => side,
            _ => return None,
        };
        let tree = self.tree(side);
        let (_, r, r_sum) = tree.below[j]?;
        let (r, n) = (T::from_usize(r).unwrap(), T::from_usize(tree.size).unwrap());
        Some(T::one() / (n / r * r_sum - tree.depth_sum))
    }

    /// Edges of the `s`-`t` path inside the merged tree.
    pub fn st_path_edges(&self, g: &Graph<T>, t: usize) -> Vec<bool> {
        let mut on = vec![false; g.m()];
        if !self.connected {
            return on;
        }
        // walk from t toward s using the subtree records
        let mut cur = t;
        'walk: loop {
            for (j, rec) in self.source.below.iter().enumerate() {
                if let Some((child, _, _)) = rec {
                    if *child == cur {
                        on[j] = true;
                        cur = g.edge(j).other(cur);
                        continue 'walk;
                    }
                }
            }
            break;
        }
        on
    }
}
