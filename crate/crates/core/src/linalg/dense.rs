//! Small dense kernels: row-major matrix, Householder least squares and
//! Cholesky. Sizes here are bounded by active sets or by the vertex count
//! below the direct-solve cutoff.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_sparse(s: &SparseMatrix<T>) -> Self {
        let mut m = Self::zeros(s.rows(), s.cols());
        for (r, c, v) in s.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(&a, &b)| (a - b).abs()).fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Householder QR with column pivoting: `A P = Q R`.
struct PivotedQr<T> {
    // Upper triangle holds R; reflectors are kept separately.
    r: DenseMatrix<T>,
    reflectors: Vec<(Vec<T>, T)>,
    perm: Vec<usize>,
    rank: usize,
}

impl<T: Scalar> PivotedQr<T> {
    fn new(a: &DenseMatrix<T>) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let mut r = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut reflectors = Vec::new();
        let steps = m.min(n);
        let mut first_pivot = T::zero();
        let mut rank = 0;
        let tol = T::epsilon() * T::from_usize(m.max(n)).unwrap() * T::lit(10.0);

        for k in 0..steps {
            // pick the remaining column with the largest trailing norm
            let (best, best_norm) = (k..n)
                .map(|j| (j, (k..m).map(|i| r[(i, j)] * r[(i, j)]).sum::<T>()))
                .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best != k {
                for i in 0..m {
                    let tmp = r[(i, k)];
                    r[(i, k)] = r[(i, best)];
                    r[(i, best)] = tmp;
                }
                perm.swap(k, best);
            }
            let norm = best_norm.sqrt();
            if k == 0 {
                first_pivot = norm;
            }
            if norm <= tol * first_pivot.max(T::min_positive_value()) {
                break;
            }
            rank += 1;

            let alpha = if r[(k, k)] >= T::zero() { -norm } else { norm };
            let mut v: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
            v[0] -= alpha;
            let vnorm2: T = v.iter().map(|&x| x * x).sum();
            if vnorm2 == T::zero() {
                reflectors.push((v, T::zero()));
                continue;
            }
            let tau = T::lit(2.0) / vnorm2;
            for j in k..n {
                let s: T = (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<T>() * tau;
                for i in k..m {
                    r[(i, j)] -= s * v[i - k];
                }
            }
            for i in k + 1..m {
                r[(i, k)] = T::zero();
            }
            reflectors.push((v, tau));
        }
        Self { r, reflectors, perm, rank }
    }

    /// Overwrite `b` with `Q^T b`.
    fn apply_qt(&self, b: &mut [T]) {
        for (k, (v, tau)) in self.reflectors.iter().enumerate() {
            let s: T = v.iter().zip(&b[k..]).map(|(&vi, &bi)| vi * bi).sum::<T>() * *tau;
            for (bi, &vi) in b[k..].iter_mut().zip(v) {
                *bi -= s * vi;
            }
        }
    }
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
///
/// Rank-deficient systems are handled with a complete orthogonal
/// decomposition: pivoted QR of `A`, then QR of the leading `rank` rows of
/// `R` transposed.
pub fn least_squares_solve<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Vec<T> {
    assert_eq!(a.rows(), b.len(), "least_squares_solve: rhs length");
    let n = a.cols();
    if n == 0 {
        return Vec::new();
    }
    let qr = PivotedQr::new(a);
    let r = qr.rank;
    let mut c = b.to_vec();
    qr.apply_qt(&mut c);

    let mut z = vec![T::zero(); n];
    if r == n {
        back_substitute(&qr.r, &c[..n], &mut z);
    } else if r > 0 {
        // R1 = R[0..r, 0..n]; min-norm solution of R1 z = c[0..r].
        let r1t = DenseMatrix::from_fn(n, r, |i, j| if i >= j { qr.r[(j, i)] } else { T::zero() });
        let qr2 = HouseholderQr::new(&r1t);
        // R1 = R2^T Q2^T  =>  R2^T u = c1, z = Q2 [u; 0]
        let mut u = vec![T::zero(); r];
        for i in 0..r {
            let mut s = c[i];
            for (j, &uj) in u[..i].iter().enumerate() {
                s -= qr2.r[(j, i)] * uj;
            }
            u[i] = s / qr2.r[(i, i)];
        }
        z[..r].copy_from_slice(&u);
        qr2.apply_q(&mut z);
    }
    let mut x = vec![T::zero(); n];
    for (k, &p) in qr.perm.iter().enumerate() {
        x[p] = z[k];
    }
    x
}

/// Plain Householder QR (no pivoting) of a full-column-rank matrix.
struct HouseholderQr<T> {
    r: DenseMatrix<T>,
    reflectors: Vec<(Vec<T>, T)>,
}

impl<T: Scalar> HouseholderQr<T> {
    fn new(a: &DenseMatrix<T>) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let mut r = a.clone();
        let mut reflectors = Vec::new();
        for k in 0..m.min(n) {
            let norm = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<T>().sqrt();
            let alpha = if r[(k, k)] >= T::zero() { -norm } else { norm };
            let mut v: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
            v[0] -= alpha;
            let vnorm2: T = v.iter().map(|&x| x * x).sum();
            let tau = if vnorm2 == T::zero() { T::zero() } else { T::lit(2.0) / vnorm2 };
            for j in k..n {
                let s: T = (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<T>() * tau;
                for i in k..m {
                    r[(i, j)] -= s * v[i - k];
                }
            }
            reflectors.push((v, tau));
        }
        Self { r, reflectors }
    }

    fn apply_q(&self, b: &mut [T]) {
        for (k, (v, tau)) in self.reflectors.iter().enumerate().rev() {
            let s: T = v.iter().zip(&b[k..]).map(|(&vi, &bi)| vi * bi).sum::<T>() * *tau;
            for (bi, &vi) in b[k..].iter_mut().zip(v) {
                *bi -= s * vi;
            }
        }
    }
}

fn back_substitute<T: Scalar>(r: &DenseMatrix<T>, c: &[T], x: &mut [T]) {
    let n = x.len();
    for i in (0..n).rev() {
        let mut s = c[i];
        for j in i + 1..n {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
}

/// Cholesky factor `A = L L^T` of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: DenseMatrix<T>,
    // row-major copy of L^T so the backward sweep reads contiguous memory
    lt: DenseMatrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn factorize(a: &DenseMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.cols() });
        }
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite(j));
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                let (ri, rj) = (i * n, j * n);
                for k in 0..j {
                    s -= l.data[ri + k] * l.data[rj + k];
                }
                l[(i, j)] = s / djj;
            }
        }
        let lt = l.transpose();
        Ok(Self { l, lt })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let (l, lt) = (&self.l.data, &self.lt.data);
        for i in 0..n {
            let row = &l[i * n..i * n + i];
            let s = x[i] - row.iter().zip(&x[..i]).map(|(&a, &b)| a * b).sum::<T>();
            x[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let row = &lt[i * n + i + 1..(i + 1) * n];
            let s = x[i] - row.iter().zip(&x[i + 1..]).map(|(&a, &b)| a * b).sum::<T>();
            x[i] = s / lt[i * n + i];
        }
    }
}

/// Factor `A` once; see [`Cholesky`].
pub fn spd_factorize<T: Scalar>(a: &DenseMatrix<T>) -> Result<Cholesky<T>> {
    Cholesky::factorize(a)
}

pub fn spd_solve<T: Scalar>(factor: &Cholesky<T>, b: &[T]) -> Vec<T> {
    factor.solve(b)
}
