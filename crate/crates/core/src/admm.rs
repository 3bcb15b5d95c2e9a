//! ADMM and inexact ADMM for the shortest-path lasso
//! `min 1/2 |y - Q beta|^2 + lambda |alpha|_1` s.t. `beta = alpha`,
//! in scaled form (`v = u / rho`).
//!
//! The beta-update `(Q^T Q + rho I) beta = Q^T y + rho (alpha - v)` is
//! reduced to an `n x n` system through the identity
//! `(Q^T Q + rho I)^{-1} = (1/rho)(I - Q^T (Q Q^T + rho I)^{-1} Q)`.
//! With `g = alpha - v` this is evaluated as
//!
//! ```text
//! (Q Q^T + rho I) zeta = Q g - y,     beta = g - Q^T zeta
//! ```
//!
//! which is algebraically the same as solving for `eta = y + rho zeta` and
//! forming `(1/rho)(h - Q^T eta)`, but never divides by `rho`. With the
//! default `rho = 1e-7` the direct form would scale any inner-solve error by
//! `1e7`.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dijkstra::shortest_path_within;
use crate::error::{Error, Result};
use crate::graph::{Graph, PathResult};
use crate::linalg::{conjugate_gradient, Cholesky, DenseMatrix, GramOperator, SparseMatrix};
use crate::scalar::{norm1, Scalar};

/// Solver parameters; the JSON form uses these field names, all optional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdmmConfig {
    pub rho: f64,
    pub relax: f64,
    pub lambda_rel: f64,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub max_iter: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Above this many vertices `admm_lasso` hands over to `inadmm_lasso`.
    pub direct_cutoff: usize,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho: 1e-7,
            relax: 1.0,
            lambda_rel: 1e-8,
            tol_primal: 1e-5,
            tol_dual: 1e-4,
            max_iter: 10_000,
            cg_tol: 1e-4,
            cg_max_iter: 1_000,
            direct_cutoff: 5_000,
        }
    }
}

impl AdmmConfig {
    /// Defaults with the tighter inner tolerance used on image graphs. Pixel
    /// grids are badly conditioned, so the inner budget is larger too.
    pub fn scissors() -> Self {
        Self { cg_tol: 1e-7, cg_max_iter: 10_000, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("lambda_rel", self.lambda_rel),
            ("tol_primal", self.tol_primal),
            ("tol_dual", self.tol_dual),
            ("cg_tol", self.cg_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(1.0..=2.0).contains(&self.relax) {
            return Err(Error::InvalidConfig(format!("relax must lie in [1, 2], got {}", self.relax)));
        }
        for (name, v) in [("max_iter", self.max_iter), ("cg_max_iter", self.cg_max_iter)] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Primal iterate `beta`, split copy `alpha` and scaled dual `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState<T> {
    pub beta: Vec<T>,
    pub alpha: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> AdmmState<T> {
    pub fn zeros(m: usize) -> Self {
        Self { beta: vec![T::zero(); m], alpha: vec![T::zero(); m], v: vec![T::zero(); m] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmmRecord {
    pub iter: usize,
    pub beta_l1: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub cg_iters: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    /// Hit `max_iter`; the state returned is the last iterate.
    MaxIterExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Admm,
    InAdmm,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Admm => "admm",
            SolverKind::InAdmm => "inadmm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmTrace {
    pub solver: SolverKind,
    pub lambda: f64,
    pub records: Vec<AdmmRecord>,
    pub termination: Termination,
}

impl AdmmTrace {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iter)
    }

    pub fn final_l1(&self) -> Option<f64> {
        self.records.last().map(|r| r.beta_l1)
    }

    /// First iteration whose `|beta|_1` lies within `rel` of `target`.
    pub fn first_within(&self, target: f64, rel: f64) -> Option<usize> {
        self.records.iter().find(|r| (r.beta_l1 - target).abs() <= rel * target.abs()).map(|r| r.iter)
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    /// `iter,beta_l1,primal_res,dual_res,cg_iters,elapsed_ms`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        if self.records.is_empty() {
            w.write_record(["iter", "beta_l1", "primal_res", "dual_res", "cg_iters", "elapsed_ms"])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `sign(x_i) max(|x_i| - kappa, 0)`.
pub fn soft_threshold<T: Scalar>(x: &[T], kappa: T) -> Vec<T> {
    x.iter().map(|&xi| shrink(xi, kappa)).collect()
}

fn shrink<T: Scalar>(x: T, kappa: T) -> T {
    if x > kappa {
        x - kappa
    } else if x < -kappa {
        x + kappa
    } else {
        T::zero()
    }
}

/// `|Q^T y|_inf`, the smallest penalty with an all-zero solution.
pub fn lambda_max<T: Scalar>(q: &SparseMatrix<T>, y: &[T]) -> T {
    q.matvec_transpose(y).iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// Penalized objective `1/2 |y - Q beta|^2 + lambda |alpha|_1 + rho/2 |beta - alpha|^2`.
pub fn augmented_objective<T: Scalar>(q: &SparseMatrix<T>, y: &[T], state: &AdmmState<T>, lambda: T, rho: T) -> T {
    let qb = q.matvec(&state.beta);
    let fit: T = y.iter().zip(&qb).map(|(&a, &b)| (a - b) * (a - b)).sum();
    let gap: T = state.beta.iter().zip(&state.alpha).map(|(&a, &b)| (a - b) * (a - b)).sum();
    T::lit(0.5) * fit + lambda * norm1(&state.alpha) + T::lit(0.5) * rho * gap
}

/// Dense `Q Q^T + rho I`, accumulated column by column.
fn gram_plus_shift<T: Scalar>(q: &SparseMatrix<T>, rho: T) -> DenseMatrix<T> {
    let n = q.rows();
    let mut a = DenseMatrix::zeros(n, n);
    for j in 0..q.cols() {
        let col: Vec<(usize, T)> = q.column(j).collect();
        for &(r1, v1) in &col {
            for &(r2, v2) in &col {
                a[(r1, r2)] += v1 * v2;
            }
        }
    }
    for i in 0..n {
        a[(i, i)] += rho;
    }
    a
}

fn factor_gram<T: Scalar>(q: &SparseMatrix<T>, rho: T) -> Result<Cholesky<T>> {
    Cholesky::factorize(&gram_plus_shift(q, rho)).map_err(|e| match e {
        Error::NotPositiveDefinite(i) => {
            Error::FactorizationFailure(format!("Q Q^T + rho I lost positive definiteness at pivot {i}"))
        }
        other => other,
    })
}

/// `(Q^T Q + rho I)^{-1} z` from a dense `m x m` Cholesky factor.
pub fn shifted_normal_solve_direct<T: Scalar>(q: &SparseMatrix<T>, rho: T, z: &[T]) -> Result<Vec<T>> {
    let m = q.cols();
    if z.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: z.len() });
    }
    let mut a = DenseMatrix::zeros(m, m);
    for r in 0..q.rows() {
        let row: Vec<(usize, T)> = q.row(r).collect();
        for &(c1, v1) in &row {
            for &(c2, v2) in &row {
                a[(c1, c2)] += v1 * v2;
            }
        }
    }
    for i in 0..m {
        a[(i, i)] += rho;
    }
    let f = Cholesky::factorize(&a).map_err(|e| Error::FactorizationFailure(e.to_string()))?;
    Ok(f.solve(z))
}

/// `(Q^T Q + rho I)^{-1} z` as `(1/rho)(z - Q^T (Q Q^T + rho I)^{-1} Q z)`.
pub fn shifted_normal_solve_identity<T: Scalar>(q: &SparseMatrix<T>, rho: T, z: &[T]) -> Result<Vec<T>> {
    if z.len() != q.cols() {
        return Err(Error::DimensionMismatch { expected: q.cols(), got: z.len() });
    }
    let f = factor_gram(q, rho)?;
    let inner = f.solve(&q.matvec(z));
    let back = q.matvec_transpose(&inner);
    Ok(z.iter().zip(back).map(|(&zi, bi)| (zi - bi) / rho).collect())
}

/// How the `n x n` system of the beta-update is solved.
enum Inner<'q, T> {
    Direct(Cholesky<T>),
    Cg { op: GramOperator<'q, T>, tol: T, max_iter: usize },
}

fn run<T: Scalar>(
    q: &SparseMatrix<T>,
    y: &[T],
    cfg: &AdmmConfig,
    kind: SolverKind,
    mut observe: impl FnMut(usize, &AdmmState<T>),
) -> Result<(AdmmState<T>, AdmmTrace)> {
    cfg.validate()?;
    let (n, m) = (q.rows(), q.cols());
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let start = Instant::now();
    let rho = T::lit(cfg.rho);
    let relax = T::lit(cfg.relax);
    let lambda = T::lit(cfg.lambda_rel) * lambda_max(q, y);
    let kappa = lambda / rho;
    let inner = match kind {
        SolverKind::Admm => Inner::Direct(factor_gram(q, rho)?),
        SolverKind::InAdmm => {
            Inner::Cg { op: GramOperator::new(q, rho), tol: T::lit(cfg.cg_tol), max_iter: cfg.cg_max_iter }
        }
    };

    let mut st = AdmmState::zeros(m);
    let mut zeta = vec![T::zero(); n];
    let mut g = vec![T::zero(); m];
    let mut rhs = vec![T::zero(); n];
    let mut qt_zeta = vec![T::zero(); m];
    let mut alpha_prev = vec![T::zero(); m];
    let mut records = Vec::new();
    let mut termination = Termination::MaxIterExceeded;

    for iter in 1..=cfg.max_iter {
        for ((gj, &a), &v) in g.iter_mut().zip(&st.alpha).zip(&st.v) {
            *gj = a - v;
        }
        q.matvec_into(&g, &mut rhs);
        for (r, &yi) in rhs.iter_mut().zip(y) {
            *r -= yi;
        }
        let cg_iters = match &inner {
            Inner::Direct(f) => {
                zeta.copy_from_slice(&rhs);
                f.solve_in_place(&mut zeta);
                0
            }
            Inner::Cg { op, tol, max_iter } => {
                let sol = conjugate_gradient(op, &rhs, &zeta, *tol, *max_iter)?;
                zeta = sol.x;
                sol.iterations
            }
        };
        q.matvec_transpose_into(&zeta, &mut qt_zeta);
        alpha_prev.copy_from_slice(&st.alpha);
        let (mut primal, mut dual) = (T::zero(), T::zero());
        for j in 0..m {
            let beta = g[j] - qt_zeta[j];
            let hat = relax * beta + (T::one() - relax) * alpha_prev[j];
            let alpha = shrink(hat + st.v[j], kappa);
            st.v[j] += hat - alpha;
            st.beta[j] = beta;
            st.alpha[j] = alpha;
            primal += (beta - alpha) * (beta - alpha);
            dual += (alpha - alpha_prev[j]) * (alpha - alpha_prev[j]);
        }
        let (primal, step) = (primal.sqrt(), dual.sqrt());
        let dual = rho * step;
        records.push(AdmmRecord {
            iter,
            beta_l1: norm1(&st.beta).as_f64(),
            primal_res: primal.as_f64(),
            dual_res: dual.as_f64(),
            cg_iters,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        observe(iter, &st);
        // The dual test is applied as |alpha - alpha_prev| <= tol_dual, i.e. against
        // rho * tol_dual: at rho = 1e-7 the unscaled test passes from the
        // second iteration, long before |beta|_1 settles.
        if primal <= T::lit(cfg.tol_primal) && step <= T::lit(cfg.tol_dual) {
            termination = Termination::Converged;
            break;
        }
    }
    let trace = AdmmTrace { solver: kind, lambda: lambda.as_f64(), records, termination };
    Ok((st, trace))
}

/// ADMM with the `n x n` system factored once; delegates to
/// [`inadmm_lasso`] when `n` exceeds `cfg.direct_cutoff`.
///
/// Hitting `max_iter` is not an error: the trace reports
/// [`Termination::MaxIterExceeded`] and the last iterate is returned.
pub fn admm_lasso<T: Scalar>(q: &SparseMatrix<T>, y: &[T], cfg: &AdmmConfig) -> Result<(AdmmState<T>, AdmmTrace)> {
    admm_lasso_observed(q, y, cfg, |_, _| {})
}

/// [`admm_lasso`] calling `observe` after every iteration.
pub fn admm_lasso_observed<T: Scalar>(
    q: &SparseMatrix<T>,
    y: &[T],
    cfg: &AdmmConfig,
    observe: impl FnMut(usize, &AdmmState<T>),
) -> Result<(AdmmState<T>, AdmmTrace)> {
    let kind = if q.rows() > cfg.direct_cutoff { SolverKind::InAdmm } else { SolverKind::Admm };
    run(q, y, cfg, kind, observe)
}

/// ADMM with the `n x n` system solved by warm-started conjugate gradient
/// to relative residual `cfg.cg_tol`.
pub fn inadmm_lasso<T: Scalar>(q: &SparseMatrix<T>, y: &[T], cfg: &AdmmConfig) -> Result<(AdmmState<T>, AdmmTrace)> {
    inadmm_lasso_observed(q, y, cfg, |_, _| {})
}

pub fn inadmm_lasso_observed<T: Scalar>(
    q: &SparseMatrix<T>,
    y: &[T],
    cfg: &AdmmConfig,
    observe: impl FnMut(usize, &AdmmState<T>),
) -> Result<(AdmmState<T>, AdmmTrace)> {
    run(q, y, cfg, SolverKind::InAdmm, observe)
}

/// Keep edges with `|beta_j| / w_j >= threshold` and return the shortest
/// `s`-`t` path through them.
pub fn extract_path<T: Scalar>(beta: &[T], g: &Graph<T>, s: usize, t: usize, threshold: T) -> Result<PathResult<T>> {
    if !(threshold > T::zero() && threshold < T::one()) {
        return Err(Error::InvalidConfig(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    if beta.len() != g.m() {
        return Err(Error::DimensionMismatch { expected: g.m(), got: beta.len() });
    }
    g.check_vertex(s)?;
    g.check_vertex(t)?;
    let allowed: Vec<bool> = (0..g.m()).map(|j| (beta[j] / g.edge(j).weight).abs() >= threshold).collect();
    shortest_path_within(g, s, t, &allowed)?.ok_or(Error::NoPathAtThreshold(threshold.as_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, nicholson_graph, IndicatorVector};
    use crate::scalar::norm2;

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(&[3.0, -0.5, 0.0], 1.0), vec![2.0, 0.0, 0.0]);
        assert_eq!(soft_threshold(&[1.5, -2.0], 0.0), vec![1.5, -2.0]);
        assert_eq!(soft_threshold(&[-2.0], 2.0), vec![0.0]);
    }

    #[test]
    fn lambda_max_examples() {
        let g = build_graph(&[(1, 2, 2.0)]).unwrap();
        let y = IndicatorVector::new(2, 0, 1).unwrap().to_dense::<f64>();
        assert!((lambda_max(&g.weighted_incidence(), &y) - 1.0).abs() < 1e-15);
        assert_eq!(lambda_max(&g.weighted_incidence(), &[0.0, 0.0]), 0.0);

        let g: Graph<f64> = nicholson_graph();
        let y = IndicatorVector::new(9, 0, 8).unwrap().to_dense::<f64>();
        assert!((lambda_max(&g.weighted_incidence(), &y) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn config_validation_and_json() {
        assert!(AdmmConfig::default().validate().is_ok());
        assert!(AdmmConfig { relax: 2.5, ..Default::default() }.validate().is_err());
        assert!(AdmmConfig { rho: 0.0, ..Default::default() }.validate().is_err());
        let cfg = AdmmConfig::from_json(r#"{"rho": 0.5, "max_iter": 20}"#).unwrap();
        assert_eq!((cfg.rho, cfg.max_iter, cfg.tol_dual), (0.5, 20, 1e-4));
        assert!(AdmmConfig::from_json(r#"{"rh": 1}"#).is_err());
        assert_eq!(AdmmConfig::scissors().cg_tol, 1e-7);
    }

    #[test]
    fn identity_routes_agree_on_nicholson() {
        let g: Graph<f64> = nicholson_graph();
        let q = g.weighted_incidence();
        let z: Vec<f64> = (0..g.m()).map(|i| (i as f64 * 0.7).sin()).collect();
        for rho in [1e-7, 1.0, 10.0] {
            let a = shifted_normal_solve_direct(&q, rho, &z).unwrap();
            let b = shifted_normal_solve_identity(&q, rho, &z).unwrap();
            let err = norm2(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>()) / norm2(&a);
            assert!(err < 1e-9, "rho={rho}: {err}");
        }
    }

    #[test]
    fn admm_nicholson_reaches_path_length() {
        let g: Graph<f64> = nicholson_graph();
        let q = g.weighted_incidence();
        let y = IndicatorVector::new(9, 0, 8).unwrap().to_dense::<f64>();
        let (st, trace) = admm_lasso(&q, &y, &AdmmConfig::default()).unwrap();
        let l1 = norm1(&st.beta);
        assert!((l1 - 8.0).abs() < 0.08, "{l1} after {} iterations", trace.iterations());
        let p = extract_path(&st.beta, &g, 0, 8, 0.5).unwrap();
        assert_eq!(p.vertices(&g), vec![0, 1, 2, 5, 8]);
    }

    #[test]
    fn inadmm_matches_admm_on_nicholson() {
        let g: Graph<f64> = nicholson_graph();
        let q = g.weighted_incidence();
        let y = IndicatorVector::new(9, 0, 8).unwrap().to_dense::<f64>();
        let (a, _) = admm_lasso(&q, &y, &AdmmConfig::default()).unwrap();
        let (b, tb) = inadmm_lasso(&q, &y, &AdmmConfig::default()).unwrap();
        assert!((norm1(&a.beta) - norm1(&b.beta)).abs() < 1e-3);
        assert!(tb.records.iter().any(|r| r.cg_iters > 0));
    }

    #[test]
    fn huge_lambda_shrinks_to_zero() {
        let g: Graph<f64> = nicholson_graph();
        let q = g.weighted_incidence();
        let y = IndicatorVector::new(9, 0, 8).unwrap().to_dense::<f64>();
        let cfg = AdmmConfig { rho: 1.0, lambda_rel: 2.0, ..Default::default() };
        let (st, trace) = admm_lasso(&q, &y, &cfg).unwrap();
        assert!(trace.converged());
        assert!(norm1(&st.alpha) < 1e-12 && norm1(&st.beta) < 1e-4);
    }

    #[test]
    fn max_iter_is_flagged_not_fatal() {
        let g: Graph<f64> = nicholson_graph();
        let q = g.weighted_incidence();
        let y = IndicatorVector::new(9, 0, 8).unwrap().to_dense::<f64>();
        let cfg = AdmmConfig { max_iter: 3, ..Default::default() };
        let (_, trace) = admm_lasso(&q, &y, &cfg).unwrap();
        assert_eq!(trace.termination, Termination::MaxIterExceeded);
        assert_eq!(trace.records.iter().map(|r| r.iter).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn zero_beta_has_no_path() {
        let g: Graph<f64> = nicholson_graph();
        let err = extract_path(&vec![0.0; g.m()], &g, 0, 8, 0.5).unwrap_err();
        assert_eq!(err, Error::NoPathAtThreshold(0.5));
    }

    #[test]
    fn trace_csv_header() {
        let trace = AdmmTrace {
            solver: SolverKind::Admm,
            lambda: 0.0,
            records: vec![AdmmRecord {
                iter: 1,
                beta_l1: 2.0,
                primal_res: 0.1,
                dual_res: 0.0,
                cg_iters: 0,
                elapsed_ms: 0.5,
            }],
            termination: Termination::Converged,
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "iter,beta_l1,primal_res,dual_res,cg_iters,elapsed_ms");
        assert_eq!(text.lines().nth(1).unwrap(), "1,2.0,0.1,0.0,0,0.5");
    }
}
