//! Homotopy (LARS) solver for
//! `min_beta 1/2 |y - Q beta|^2 + lambda |beta|_1`, `Q = D W^{-1}`,
//! traced from `lambda = |Q^T y|_inf` down to zero.
//!
//! On each segment `beta_A(lambda) = a - lambda b` with
//! `a = Q_A^+ y` and `b = (Q_A^T Q_A)^+ s_A`. Joining and crossing times are
//! computed from these pseudo-inverse coefficients; the tree-size closed
//! forms in [`closed_form`] are evaluated alongside as a cross-check.

mod closed_form;
mod export;

pub use export::{write_beta_samples_csv, write_trace_csv};

use closed_form::ForestView;

use crate::dijkstra::Side;
use crate::error::{Error, Result};
use crate::graph::{Graph, IndicatorVector, Path, PathResult};
use crate::linalg::{least_squares_solve, DenseMatrix, SparseMatrix};
use crate::scalar::{norm1, Scalar};

/// Events within this relative distance of the next breakpoint happen together.
pub const EVENT_TIE: f64 = 1e-9;
/// The path stops once every candidate time falls below this fraction of
/// the first breakpoint.
pub const TERMINATE_REL: f64 = 1e-12;

/// `base`, widened to a hundred ulps for scalars too coarse to resolve it.
fn rel_tol<T: Scalar>(base: f64) -> T {
    T::lit(base).max(T::epsilon() * T::lit(100.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    /// Edge enters the active set with the given sign.
    Join {
        edge: usize,
        sign: i8,
    },
    /// Coefficient of an active edge reaches zero; the edge leaves.
    Cross {
        edge: usize,
    },
    Terminate,
}

/// State of the path just below `lambda`.
///
/// `a`, `b` and `signs` are aligned with `active`; the coefficients are valid
/// from this breakpoint down to the next one. The terminating breakpoint
/// keeps only the support of `beta(0)` with `b = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoint<T> {
    pub lambda: T,
    pub events: Vec<Event>,
    pub active: Vec<usize>,
    pub signs: Vec<i8>,
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Scalar> Breakpoint<T> {
    /// Dense `beta(lambda)` from this segment's coefficients.
    pub fn beta(&self, m: usize, lambda: T) -> Vec<T> {
        let mut beta = vec![T::zero(); m];
        for (i, &j) in self.active.iter().enumerate() {
            beta[j] = self.a[i] - lambda * self.b[i];
        }
        beta
    }
}

/// Joining time of an inactive edge by both routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinTime<T> {
    pub edge: usize,
    pub general: T,
    pub sign: i8,
    /// `None` when the active edges are not two rooted trees.
    pub closed: Option<T>,
}

/// Crossing data of an active edge by both routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTime<T> {
    pub edge: usize,
    /// `a_j / b_j`.
    pub ratio: T,
    pub ratio_closed: Option<T>,
    /// `ratio` if it lies in `(0, lambda_k)`, else zero.
    pub general: T,
    pub closed: Option<T>,
}

/// Largest disagreement between the two routes at one step, each measured
/// as `|x - y| / max(1, |x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeCheck<T> {
    pub step: usize,
    pub lambda: T,
    pub join_gap: T,
    pub cross_gap: T,
    pub ratio_gap: T,
    /// Whether the closed forms applied to every edge.
    pub closed_form: bool,
}

impl<T: Scalar> TimeCheck<T> {
    pub fn max_gap(&self) -> T {
        self.join_gap.max(self.cross_gap).max(self.ratio_gap)
    }
}

/// `(a, b)` for the active columns of `q` with the given signs.
///
/// Rows are restricted to vertices touched by active edges; the other rows
/// of `Q_A` are zero and do not change either pseudo-inverse.
pub fn compute_affine_coeffs<T: Scalar>(
    q: &SparseMatrix<T>,
    active: &[usize],
    signs: &[i8],
    y: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    if active.len() != signs.len() {
        return Err(Error::DimensionMismatch { expected: active.len(), got: signs.len() });
    }
    if y.len() != q.rows() {
        return Err(Error::DimensionMismatch { expected: q.rows(), got: y.len() });
    }
    if active.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut local = vec![usize::MAX; q.rows()];
    let mut rows = Vec::new();
    for &j in active {
        for (r, _) in q.column(j) {
            if local[r] == usize::MAX {
                local[r] = rows.len();
                rows.push(r);
            }
        }
    }
    let mut qa = DenseMatrix::zeros(rows.len(), active.len());
    for (c, &j) in active.iter().enumerate() {
        for (r, v) in q.column(j) {
            qa[(local[r], c)] = v;
        }
    }
    let y_local: Vec<T> = rows.iter().map(|&r| y[r]).collect();
    let s: Vec<T> = signs.iter().map(|&v| T::from_i8(v).unwrap()).collect();

    let a = least_squares_solve(&qa, &y_local);
    let z = least_squares_solve(&qa.transpose(), &s);
    let b = least_squares_solve(&qa, &z);

    // Q_A^T Q_A b must reproduce s when Q_A has full column rank.
    let back = qa.transpose().matvec(&qa.matvec(&b));
    let tol = T::epsilon().sqrt() * T::lit(10.0);
    let err = back.iter().zip(&s).map(|(x, y)| (*x - *y).abs()).fold(T::zero(), T::max);
    if !(err <= tol) {
        return Err(Error::NumericalBreakdown(format!(
            "active columns are rank deficient (|Q_A^T Q_A b - s| = {:e})",
            err.as_f64()
        )));
    }
    Ok((a, b))
}

fn rel_gap<T: Scalar>(x: T, y: T) -> T {
    (x - y).abs() / T::one().max(x.abs())
}

/// Minimal union-find used to reject joins that would close a cycle.
struct Components(Vec<usize>);

impl Components {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.0[v] != v {
            self.0[v] = self.0[self.0[v]];
            v = self.0[v];
        }
        v
    }

    fn union(&mut self, u: usize, v: usize) -> bool {
        let (ru, rv) = (self.find(u), self.find(v));
        if ru == rv {
            return false;
        }
        self.0[ru] = rv;
        true
    }
}

/// One point on the path: the active set below `lambda` and its coefficients.
#[derive(Debug, Clone)]
pub struct LarsState<'g, T> {
    g: &'g Graph<T>,
    q: SparseMatrix<T>,
    y: Vec<T>,
    s: usize,
    t: usize,
    lambda: T,
    active: Vec<usize>,
    signs: Vec<i8>,
    a: Vec<T>,
    b: Vec<T>,
}

impl<'g, T: Scalar> LarsState<'g, T> {
    /// Empty active set at `lambda = +inf`.
    pub fn new(g: &'g Graph<T>, s: usize, t: usize) -> Result<Self> {
        let y = IndicatorVector::new(g.n(), s, t)?.to_dense::<T>();
        Ok(Self {
            g,
            q: g.weighted_incidence(),
            y,
            s,
            t,
            lambda: T::infinity(),
            active: Vec::new(),
            signs: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
        })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn coefficients(&self) -> (&[T], &[T]) {
        (&self.a, &self.b)
    }

    pub fn q(&self) -> &SparseMatrix<T> {
        &self.q
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn beta(&self, lambda: T) -> Vec<T> {
        let mut beta = vec![T::zero(); self.g.m()];
        for (i, &j) in self.active.iter().enumerate() {
            beta[j] = self.a[i] - lambda * self.b[i];
        }
        beta
    }

    fn is_active(&self) -> Vec<bool> {
        let mut on = vec![false; self.g.m()];
        for &j in &self.active {
            on[j] = true;
        }
        on
    }

    fn below_current(&self, v: T) -> bool {
        !self.lambda.is_finite() || v < self.lambda * (T::one() - rel_tol::<T>(EVENT_TIE))
    }

    fn clamp(&self, v: T) -> T {
        if v > T::zero() && self.below_current(v) {
            v
        } else {
            T::zero()
        }
    }

    fn forest(&self) -> ForestView<T> {
        ForestView::new(self.g, &self.active, &self.signs, self.s, self.t)
    }

    /// Joining time of every inactive edge.
    ///
    /// The correlation of edge `j` along the segment is `p + lambda q` with
    /// `p = Q_j^T (y - Q_A a)` and `q = Q_j^T Q_A b`; it reaches `±lambda`
    /// at `p / (±1 - q)`. Only times strictly inside `(0, lambda_k)` count.
    /// A `p` within rounding of zero is zero: once the trees connect the
    /// residual vanishes and noise must not produce joins near `lambda = 0`.
    pub fn joining_times(&self) -> Vec<JoinTime<T>> {
        let n = self.g.n();
        let mut residual = self.y.clone();
        let mut magnitude: Vec<T> = self.y.iter().map(|v| v.abs()).collect();
        let mut drift = vec![T::zero(); n];
        for (i, &j) in self.active.iter().enumerate() {
            for (r, v) in self.q.column(j) {
                residual[r] -= v * self.a[i];
                magnitude[r] += (v * self.a[i]).abs();
                drift[r] += v * self.b[i];
            }
        }
        // `a` comes from one global solve, so its error is global too
        let scale = magnitude.iter().fold(T::zero(), |m, &v| m.max(v));
        let forest = self.forest();
        let on = self.is_active();
        let mut out = Vec::with_capacity(self.g.m() - self.active.len());
        for j in (0..self.g.m()).filter(|&j| !on[j]) {
            let (mut p, mut q, mut col) = (T::zero(), T::zero(), T::zero());
            for (r, v) in self.q.column(j) {
                p += v * residual[r];
                q += v * drift[r];
                col += v.abs();
            }
            if p.abs() <= T::epsilon() * T::lit(64.0) * col * scale {
                p = T::zero();
            }
            let (mut best, mut sign) = (T::zero(), 0i8);
            for sigma in [1i8, -1] {
                let denom = T::from_i8(sigma).unwrap() - q;
                if denom == T::zero() {
                    continue;
                }
                let cand = p / denom;
                if cand > best && self.below_current(cand) {
                    best = cand;
                    sign = sigma;
                }
            }
            let closed = forest.join_time(self.g, j).map(|v| self.clamp(v));
            out.push(JoinTime { edge: j, general: best, sign, closed });
        }
        out
    }

    /// Crossing time of every active edge.
    pub fn crossing_times(&self) -> Vec<CrossTime<T>> {
        let forest = self.forest();
        let on_path = forest.st_path_edges(self.g, self.t);
        self.active
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                let ratio = if self.b[i] == T::zero() { T::zero() } else { self.a[i] / self.b[i] };
                let ratio_closed = forest.cross_ratio(self.g, j, |e| on_path[e]);
                CrossTime {
                    edge: j,
                    ratio,
                    ratio_closed,
                    general: self.clamp(ratio),
                    closed: ratio_closed.map(|v| self.clamp(v)),
                }
            })
            .collect()
    }

    /// Compare the general and closed-form times at the current state.
    pub fn time_check(&self, step: usize) -> TimeCheck<T> {
        let mut check = TimeCheck {
            step,
            lambda: self.lambda,
            join_gap: T::zero(),
            cross_gap: T::zero(),
            ratio_gap: T::zero(),
            closed_form: true,
        };
        for jt in self.joining_times() {
            match jt.closed {
                Some(c) => check.join_gap = check.join_gap.max(rel_gap(jt.general, c)),
                None => check.closed_form = false,
            }
        }
        for ct in self.crossing_times() {
            match (ct.closed, ct.ratio_closed) {
                (Some(c), Some(rc)) => {
                    check.cross_gap = check.cross_gap.max(rel_gap(ct.general, c));
                    check.ratio_gap = check.ratio_gap.max(rel_gap(ct.ratio, rc));
                }
                _ => check.closed_form = false,
            }
        }
        check
    }

    /// Move to breakpoint `lambda` and apply its events.
    pub fn apply(&mut self, lambda: T, events: &[Event]) -> Result<()> {
        let leaving: Vec<usize> =
            events.iter().filter_map(|e| if let Event::Cross { edge } = e { Some(*edge) } else { None }).collect();
        let mut active = Vec::with_capacity(self.active.len() + events.len());
        let mut signs = Vec::with_capacity(active.capacity());
        for (&j, &s) in self.active.iter().zip(&self.signs) {
            if !leaving.contains(&j) {
                active.push(j);
                signs.push(s);
            }
        }
        let mut comps = Components::new(self.g.n());
        for &j in &active {
            let e = self.g.edge(j);
            comps.union(e.tail, e.head);
        }
        for ev in events {
            if let Event::Join { edge, sign } = *ev {
                let e = self.g.edge(edge);
                if !comps.union(e.tail, e.head) {
                    return Err(Error::AssumptionA1Violated(format!(
                        "joining edge ({}, {}) at lambda = {} closes a cycle in the active set",
                        e.tail + 1,
                        e.head + 1,
                        lambda
                    )));
                }
                active.push(edge);
                signs.push(sign);
            }
        }
        let (a, b) = compute_affine_coeffs(&self.q, &active, &signs, &self.y)?;
        self.lambda = lambda;
        self.active = active;
        self.signs = signs;
        self.a = a;
        self.b = b;
        Ok(())
    }
}

/// Pick the next breakpoint from the candidate times.
///
/// Returns the largest time and every event within [`EVENT_TIE`] of it, or
/// `Terminate` at zero when nothing exceeds `floor`.
pub fn next_breakpoint<T: Scalar>(joins: &[JoinTime<T>], crosses: &[CrossTime<T>], floor: T) -> (T, Vec<Event>) {
    let top = joins.iter().map(|j| j.general).chain(crosses.iter().map(|c| c.general)).fold(T::zero(), T::max);
    if !(top > floor) {
        return (T::zero(), vec![Event::Terminate]);
    }
    let cut = top * (T::one() - rel_tol::<T>(EVENT_TIE));
    let mut events: Vec<Event> =
        joins.iter().filter(|j| j.general >= cut).map(|j| Event::Join { edge: j.edge, sign: j.sign }).collect();
    events.extend(crosses.iter().filter(|c| c.general >= cut).map(|c| Event::Cross { edge: c.edge }));
    (top, events)
}

/// Full solution path with the recovered shortest path.
#[derive(Debug, Clone)]
pub struct LarsTrace<T> {
    pub source: usize,
    pub target: usize,
    pub breakpoints: Vec<Breakpoint<T>>,
    pub checks: Vec<TimeCheck<T>>,
    /// `beta(0)`, dense over all edges.
    pub beta: Vec<T>,
    pub path: PathResult<T>,
    /// Largest distance of `W^{-1} beta(0)` from the nearest integer.
    pub integrality_gap: T,
}

impl<T: Scalar> LarsTrace<T> {
    pub fn lambdas(&self) -> Vec<T> {
        self.breakpoints.iter().map(|b| b.lambda).collect()
    }

    /// Active edges after each breakpoint (the support of `beta(0)` for the last).
    pub fn active_sets(&self) -> Vec<Vec<usize>> {
        self.breakpoints
            .iter()
            .map(|b| {
                let mut a = b.active.clone();
                a.sort_unstable();
                a
            })
            .collect()
    }

    pub fn max_time_gap(&self) -> T {
        self.checks.iter().map(TimeCheck::max_gap).fold(T::zero(), T::max)
    }

    /// Vertices picked up by each tree, in join order, replayed from the
    /// join events; stops when the two trees meet.
    pub fn tree_growth(&self, g: &Graph<T>) -> Vec<(usize, Side)> {
        let mut side: Vec<Option<Side>> = vec![None; g.n()];
        side[self.source] = Some(Side::Source);
        side[self.target] = Some(Side::Target);
        let mut out = Vec::new();
        for bp in &self.breakpoints {
            for ev in &bp.events {
                if let Event::Join { edge, .. } = *ev {
                    let e = g.edge(edge);
                    match (side[e.tail], side[e.head]) {
                        (Some(x), None) => {
                            side[e.head] = Some(x);
                            out.push((e.head, x));
                        }
                        (None, Some(x)) => {
                            side[e.tail] = Some(x);
                            out.push((e.tail, x));
                        }
                        (Some(x), Some(y)) if x != y => return out,
                        _ => {}
                    }
                }
            }
        }
        out
    }
}

/// `beta(lambda)` read off a finished trace.
pub fn beta_at<T: Scalar>(trace: &LarsTrace<T>, m: usize, lambda: T) -> Vec<T> {
    match trace.breakpoints.iter().rposition(|b| b.lambda >= lambda) {
        Some(i) => trace.breakpoints[i].beta(m, lambda),
        None => vec![T::zero(); m],
    }
}

/// Largest violation of the optimality conditions of the penalized problem.
///
/// For `beta_j != 0`: `|Q_j^T r - sign(beta_j) lambda|`; otherwise
/// `max(0, |Q_j^T r| - lambda)`, with `r = y - Q beta`.
pub fn kkt_residual<T: Scalar>(q: &SparseMatrix<T>, y: &[T], beta: &[T], lambda: T) -> T {
    let mut r = y.to_vec();
    let qb = q.matvec(beta);
    for (ri, v) in r.iter_mut().zip(qb) {
        *ri -= v;
    }
    let corr = q.matvec_transpose(&r);
    let scale = beta.iter().fold(T::zero(), |m, v| m.max(v.abs())).max(T::one());
    let zero = T::lit(1e-12) * scale;
    corr.iter()
        .zip(beta)
        .map(
            |(&c, &b)| {
                if b.abs() > zero {
                    (c - b.signum() * lambda).abs()
                } else {
                    (c.abs() - lambda).max(T::zero())
                }
            },
        )
        .fold(T::zero(), T::max)
}

/// Turn `beta(0)` into a path: `x = W^{-1} beta` rounded to `{-1, 0, 1}`.
fn recover_path<T: Scalar>(g: &Graph<T>, s: usize, t: usize, beta: &[T]) -> Result<(PathResult<T>, T)> {
    let mut gap = T::zero();
    let mut dir = vec![0i8; g.m()];
    for (j, e) in g.edges().iter().enumerate() {
        let x = beta[j] / e.weight;
        let r = x.round();
        gap = gap.max((x - r).abs());
        dir[j] = if r >= T::one() {
            1
        } else if r <= -T::one() {
            -1
        } else {
            0
        };
    }
    let mut remaining = dir.iter().filter(|&&d| d != 0).count();
    let mut edges = Vec::with_capacity(remaining);
    let mut cur = s;
    while cur != t {
        let next = g.neighbors(cur).iter().find(|&&(_, j)| dir[j] != 0).copied();
        let Some((v, j)) = next else {
            return Err(Error::NumericalBreakdown(format!(
                "rounded solution has no continuation at vertex {}",
                cur + 1
            )));
        };
        let forward = g.edge(j).tail == cur;
        if (dir[j] == 1) != forward {
            return Err(Error::NumericalBreakdown("rounded solution has inconsistent orientation".into()));
        }
        dir[j] = 0;
        remaining -= 1;
        edges.push(j);
        cur = v;
    }
    if remaining != 0 {
        return Err(Error::NumericalBreakdown(format!("{remaining} edges of the rounded solution lie off the path")));
    }
    let path = Path::from_edges(g, s, &edges)?;
    Ok((PathResult::new(g, path)?, gap))
}

/// Trace the whole path from the first breakpoint down to `lambda = 0`.
///
/// Assumes unique shortest-path trees; a join that would close a cycle is
/// reported as [`Error::AssumptionA1Violated`].
pub fn lars_path<T: Scalar>(g: &Graph<T>, s: usize, t: usize) -> Result<LarsTrace<T>> {
    let mut state = LarsState::new(g, s, t)?;
    let mut breakpoints = Vec::new();
    let mut checks = Vec::new();
    let mut floor = T::zero();
    let max_steps = 4 * g.m() + 8;
    loop {
        if breakpoints.len() > max_steps {
            return Err(Error::NumericalBreakdown(format!("path did not terminate after {max_steps} breakpoints")));
        }
        checks.push(state.time_check(breakpoints.len()));
        let joins = state.joining_times();
        let crosses = state.crossing_times();
        let (lambda, events) = next_breakpoint(&joins, &crosses, floor);
        if breakpoints.is_empty() {
            floor = lambda * rel_tol::<T>(TERMINATE_REL);
        }
        if events == [Event::Terminate] {
            let beta = state.beta(T::zero());
            let scale = beta.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            let keep: Vec<usize> =
                (0..beta.len()).filter(|&j| beta[j].abs() > T::lit(1e-9) * scale.max(T::one())).collect();
            breakpoints.push(Breakpoint {
                lambda: T::zero(),
                events,
                signs: keep.iter().map(|&j| if beta[j] > T::zero() { 1 } else { -1 }).collect(),
                a: keep.iter().map(|&j| beta[j]).collect(),
                b: vec![T::zero(); keep.len()],
                active: keep,
            });
            let (path, integrality_gap) = recover_path(g, s, t, &beta)?;
            return Ok(LarsTrace { source: s, target: t, breakpoints, checks, beta, path, integrality_gap });
        }
        state.apply(lambda, &events)?;
        let (a, b) = state.coefficients();
        breakpoints.push(Breakpoint {
            lambda,
            events,
            active: state.active().to_vec(),
            signs: state.signs().to_vec(),
            a: a.to_vec(),
            b: b.to_vec(),
        });
    }
}

/// `|beta|_1` at each breakpoint.
pub fn breakpoint_l1<T: Scalar>(trace: &LarsTrace<T>, m: usize) -> Vec<T> {
    trace.breakpoints.iter().map(|b| norm1(&b.beta(m, b.lambda))).collect()
}
