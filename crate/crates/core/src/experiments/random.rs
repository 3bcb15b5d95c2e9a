use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

/// Connected simple graph with exactly `m` edges and i.i.d. uniform weights.
///
/// A uniform random spanning tree (decoded from a random Prüfer sequence)
/// is laid down first, then `m - (n - 1)` distinct non-edges are added.
/// Same seed, same graph.
pub fn gen_random_graph<T: Scalar>(n: usize, m: usize, w_min: f64, w_max: f64, seed: u64) -> Result<Graph<T>> {
    let max_edges = n.saturating_mul(n.saturating_sub(1)) / 2;
    if n == 0 || m + 1 < n || m > max_edges {
        return Err(Error::InfeasibleEdgeCount { n, m });
    }
    if !(w_min > 0.0) || !(w_max >= w_min) || !w_max.is_finite() {
        return Err(Error::InvalidConfig(format!("weight range [{w_min}, {w_max}] must be positive and ordered")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = random_tree(n, &mut rng);
    let mut present: HashSet<(usize, usize)> = pairs.iter().copied().collect();
    let extra = m - pairs.len();
    if extra > 0 {
        if 2 * m <= max_edges {
            while pairs.len() < m {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                let key = (u.min(v), u.max(v));
                if u != v && present.insert(key) {
                    pairs.push(key);
                }
            }
        } else {
            let mut free: Vec<(usize, usize)> =
                (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|p| !present.contains(p)).collect();
            let (chosen, _) = free.partial_shuffle(&mut rng, extra);
            pairs.extend_from_slice(chosen);
            present.extend(chosen.iter().copied());
        }
    }
    let edges: Vec<(usize, usize, T)> = pairs
        .into_iter()
        .map(|(u, v)| {
            let w = if w_max > w_min { rng.gen_range(w_min..=w_max) } else { w_min };
            (u, v, T::lit(w))
        })
        .collect();
    Graph::from_edges(n, &edges)
}

/// Edges of a uniformly random labelled tree on `0..n`.
fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => return Vec::new(),
        2 => return vec![(0, 1)],
        _ => {}
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &seq {
        degree[x] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &x in &seq {
        let Reverse(leaf) = leaves.pop().expect("a tree always has a leaf");
        edges.push((leaf.min(x), leaf.max(x)));
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.push(Reverse(x));
        }
    }
    let Reverse(u) = leaves.pop().expect("two leaves remain");
    let Reverse(v) = leaves.pop().expect("two leaves remain");
    edges.push((u.min(v), u.max(v)));
    edges
}
