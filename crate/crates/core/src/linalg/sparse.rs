//! Row-compressed sparse matrix with a lazily built column index.

use std::sync::OnceLock;

use num_traits::Num;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct ColumnIndex {
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    // Position of the entry in the row-compressed value array.
    slot: Vec<usize>,
}

/// Sparse `rows x cols` matrix in compressed sparse row layout.
///
/// Works over any numeric type, so the incidence matrix can be held as
/// integers for exact checks and as floats for the solvers.
#[derive(Debug)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
    columns: OnceLock<ColumnIndex>,
}

impl<T: Clone> Clone for SparseMatrix<T> {
    fn clone(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.clone(),
            columns: self.columns.clone(),
        }
    }
}

impl<T> SparseMatrix<T>
where
    T: Num + Copy,
{
    /// Build from `(row, col, value)` triplets. Explicit zeros are kept.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut sorted: Vec<&(usize, usize, T)> = triplets.iter().collect();
        for &&(r, c, _) in &sorted {
            if r >= rows {
                return Err(Error::DimensionMismatch { expected: rows, got: r + 1 });
            }
            if c >= cols {
                return Err(Error::DimensionMismatch { expected: cols, got: c + 1 });
            }
        }
        sorted.sort_by_key(|&&(r, c, _)| (r, c));
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::DuplicateEntry(w[0].0, w[0].1));
            }
        }
        let mut row_ptr = vec![0; rows + 1];
        for &&(r, _, _) in &sorted {
            row_ptr[r + 1] += 1;
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx: sorted.iter().map(|t| t.1).collect(),
            values: sorted.iter().map(|t| t.2).collect(),
            columns: OnceLock::new(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, T::one())).collect();
        Self::from_triplets(n, n, &triplets).expect("identity pattern is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => T::zero(),
        }
    }

    /// Nonzeros of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// Nonzeros of column `c` as `(row, value)`, via the cached column index.
    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let idx = self.column_index();
        let range = idx.col_ptr[c]..idx.col_ptr[c + 1];
        idx.row_idx[range.clone()].iter().copied().zip(idx.slot[range].iter().map(move |&k| self.values[k]))
    }

    fn column_index(&self) -> &ColumnIndex {
        self.columns.get_or_init(|| {
            let mut col_ptr = vec![0; self.cols + 1];
            for &c in &self.col_idx {
                col_ptr[c + 1] += 1;
            }
            for c in 0..self.cols {
                col_ptr[c + 1] += col_ptr[c];
            }
            let mut next = col_ptr.clone();
            let mut row_idx = vec![0; self.nnz()];
            let mut slot = vec![0; self.nnz()];
            for r in 0..self.rows {
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    let c = self.col_idx[k];
                    row_idx[next[c]] = r;
                    slot[next[c]] = k;
                    next[c] += 1;
                }
            }
            ColumnIndex { col_ptr, row_idx, slot }
        })
    }

    /// `y = M x` (or `y = M^T x` when `transpose`), checking dimensions.
    pub fn spmv(&self, x: &[T], transpose: bool) -> Result<Vec<T>> {
        let (inner, outer) = if transpose { (self.rows, self.cols) } else { (self.cols, self.rows) };
        if x.len() != inner {
            return Err(Error::DimensionMismatch { expected: inner, got: x.len() });
        }
        let mut y = vec![T::zero(); outer];
        if transpose {
            self.matvec_transpose_into(x, &mut y);
        } else {
            self.matvec_into(x, &mut y);
        }
        Ok(y)
    }

    /// `out = M x`. Panics on dimension mismatch.
    pub fn matvec_into(&self, x: &[T], out: &mut [T]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc = acc + self.values[k] * x[self.col_idx[k]];
            }
            *o = acc;
        }
    }

    /// `out = M^T x`. Accumulates column by column in row order.
    pub fn matvec_transpose_into(&self, x: &[T], out: &mut [T]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        let idx = self.column_index();
        for (c, o) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for p in idx.col_ptr[c]..idx.col_ptr[c + 1] {
                acc = acc + self.values[idx.slot[p]] * x[idx.row_idx[p]];
            }
            *o = acc;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_transpose(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.cols];
        self.matvec_transpose_into(x, &mut y);
        y
    }

    /// Explicit transposed copy.
    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.cols, self.rows, &triplets).expect("transpose of a valid matrix is valid")
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    /// Apply `f` to every stored value, keeping the pattern.
    pub fn map<U: Num + Copy>(&self, f: impl Fn(usize, usize, T) -> U) -> SparseMatrix<U> {
        let mut values = Vec::with_capacity(self.nnz());
        for r in 0..self.rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                values.push(f(r, self.col_idx[k], self.values[k]));
            }
        }
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values,
            columns: OnceLock::new(),
        }
    }

    /// Dense row-major copy, for small matrices and tests.
    pub fn to_dense_rows(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v;
        }
        out
    }
}
