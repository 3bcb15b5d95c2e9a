//! Conjugate gradient for symmetric positive definite operators.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};
use crate::scalar::{dot, norm2, Scalar};

/// Square linear map `x -> A x`.
pub trait LinearOperator<T> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], out: &mut [T]);
}

impl<T: Scalar> LinearOperator<T> for DenseMatrix<T> {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }
}

impl<T: Scalar> LinearOperator<T> for SparseMatrix<T> {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        self.matvec_into(x, out);
    }
}

/// `x -> (M M^T + shift I) x` without forming `M M^T`.
pub struct GramOperator<'a, T> {
    m: &'a SparseMatrix<T>,
    shift: T,
    scratch: std::cell::RefCell<Vec<T>>,
}

impl<'a, T: Scalar> GramOperator<'a, T> {
    pub fn new(m: &'a SparseMatrix<T>, shift: T) -> Self {
        Self { m, shift, scratch: std::cell::RefCell::new(vec![T::zero(); m.cols()]) }
    }
}

impl<T: Scalar> LinearOperator<T> for GramOperator<'_, T> {
    fn dim(&self) -> usize {
        self.m.rows()
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        let mut tmp = self.scratch.borrow_mut();
        self.m.matvec_transpose_into(x, &mut tmp);
        self.m.matvec_into(&tmp, out);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o += self.shift * xi;
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgSolution<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// True relative residual `|A x - b| / |b|` at return.
    pub residual: T,
}

/// Solve `A x = b` from `x0` until `|A x - b| <= tol |b|`.
///
/// Convergence is confirmed on the true residual, not the recurrence; if
/// the two drift apart the iteration restarts from the current iterate.
pub fn conjugate_gradient<T: Scalar, A: LinearOperator<T> + ?Sized>(
    a: &A,
    b: &[T],
    x0: &[T],
    tol: T,
    max_iter: usize,
) -> Result<CgSolution<T>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        return Ok(CgSolution { x: vec![T::zero(); n], iterations: 0, residual: T::zero() });
    }
    let threshold = tol * bnorm;

    let mut x = x0.to_vec();
    let mut ap = vec![T::zero(); n];
    let true_residual = |x: &[T], r: &mut Vec<T>, scratch: &mut Vec<T>| {
        a.apply(x, scratch);
        for i in 0..n {
            r[i] = b[i] - scratch[i];
        }
    };
    let mut r = vec![T::zero(); n];
    true_residual(&x, &mut r, &mut ap);
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut iterations = 0;

    loop {
        if rr.sqrt() <= threshold {
            true_residual(&x, &mut r, &mut ap);
            rr = dot(&r, &r);
            let res = rr.sqrt();
            if res <= threshold {
                return Ok(CgSolution { x, iterations, residual: res / bnorm });
            }
            p.copy_from_slice(&r);
        }
        if iterations >= max_iter {
            true_residual(&x, &mut r, &mut ap);
            return Err(Error::CgStagnation { iterations, residual: (norm2(&r) / bnorm).as_f64() });
        }
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::NumericalBreakdown(format!(
                "conjugate gradient: non-positive curvature {:e} at iteration {iterations}",
                pap.as_f64()
            )));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
}
