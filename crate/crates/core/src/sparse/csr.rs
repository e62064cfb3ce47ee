use std::sync::Arc;

use crate::{Error, Real, Result};

/// Row pointers and sorted, unique column indices of a CSR matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Builds a pattern from `(row, col)` pairs; duplicates are merged.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut per_row: Vec<Vec<usize>> = vec![Vec::new(); rows];
        for (r, c) in entries {
            if r >= rows || c >= cols {
                return Err(Error::invalid(format!(
                    "entry ({r}, {c}) outside shape ({rows}, {cols})"
                )));
            }
            per_row[r].push(c);
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut cols_in_row in per_row {
            cols_in_row.sort_unstable();
            cols_in_row.dedup();
            col_idx.extend(cols_in_row);
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    /// Position of `(row, col)` in the value array, if stored.
    pub fn slot(&self, row: usize, col: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.col_idx[lo..hi]
            .binary_search(&col)
            .ok()
            .map(|k| lo + k)
    }

    pub fn row_range(&self, row: usize) -> std::ops::Range<usize> {
        self.row_ptr[row]..self.row_ptr[row + 1]
    }
}

/// Compressed sparse row matrix.
///
/// The pattern is shared so that matrices assembled on the same mesh can be
/// combined entry-wise without index work. Explicit zeros are kept.
#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    pattern: Arc<SparsityPattern>,
    values: Vec<T>,
}

impl<T: Real> PartialEq for CsrMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.pattern, &other.pattern) || self.pattern == other.pattern)
            && self.values == other.values
    }
}

impl<T: Real> CsrMatrix<T> {
    /// Builds a canonical CSR matrix from `(row, col, value)` triplets,
    /// summing duplicates.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let pattern = SparsityPattern::from_entries(rows, cols, triplets.iter().map(|t| (t.0, t.1)))?;
        let mut m = Self::zeros(Arc::new(pattern));
        for &(r, c, v) in triplets {
            let s = m.pattern.slot(r, c).expect("entry in pattern");
            m.values[s] += v;
        }
        Ok(m)
    }

    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let values = vec![T::zero(); pattern.nnz()];
        Self { pattern, values }
    }

    pub fn from_parts(pattern: Arc<SparsityPattern>, values: Vec<T>) -> Result<Self> {
        if values.len() != pattern.nnz() {
            return Err(Error::invalid("value count does not match pattern"));
        }
        Ok(Self { pattern, values })
    }

    pub fn identity(n: usize) -> Self {
        let trip: Vec<_> = (0..n).map(|i| (i, i, T::one())).collect();
        Self::from_triplets(n, n, &trip).expect("identity in range")
    }

    pub fn rows(&self) -> usize {
        self.pattern.rows
    }

    pub fn cols(&self) -> usize {
        self.pattern.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.pattern.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.pattern.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Stored value at `(row, col)`, zero if the entry is not in the pattern.
    pub fn get(&self, row: usize, col: usize) -> T {
        self.pattern
            .slot(row, col)
            .map_or(T::zero(), |s| self.values[s])
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.pattern, &other.pattern) || *self.pattern == *other.pattern
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.rows()];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.cols(), "matvec dimension mismatch");
        let rp = &self.pattern.row_ptr;
        let ci = &self.pattern.col_idx;
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in rp[r]..rp[r + 1] {
                acc += self.values[k] * x[ci[k]];
            }
            *yr = acc;
        }
    }

    /// `b - A x`.
    pub fn residual(&self, x: &[T], b: &[T]) -> Vec<T> {
        let mut r = self.matvec(x);
        for (ri, &bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        r
    }

    pub fn transpose(&self) -> Self {
        let mut trip = Vec::with_capacity(self.nnz());
        for r in 0..self.rows() {
            for k in self.pattern.row_range(r) {
                trip.push((self.pattern.col_idx[k], r, self.values[k]));
            }
        }
        Self::from_triplets(self.cols(), self.rows(), &trip).expect("transpose in range")
    }

    pub fn scale(&mut self, alpha: T) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    /// `self += alpha * other` for matrices sharing a pattern.
    pub fn add_scaled(&mut self, alpha: T, other: &Self) -> Result<()> {
        if !self.same_pattern(other) {
            return Err(Error::invalid("add_scaled requires identical sparsity patterns"));
        }
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// Sum of `weights[k] * terms[k]` over matrices sharing one pattern.
    pub fn linear_combination(terms: &[(T, &Self)]) -> Result<Self> {
        let (first_w, first) = terms
            .first()
            .ok_or_else(|| Error::invalid("empty linear combination"))?;
        let mut out = (*first).clone();
        out.scale(*first_w);
        for &(w, m) in &terms[1..] {
            out.add_scaled(w, m)?;
        }
        Ok(out)
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows())
            .map(|r| self.pattern.row_range(r).map(|k| self.values[k]).sum())
            .collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows().min(self.cols())).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.cols()]; self.rows()];
        for (r, row) in d.iter_mut().enumerate() {
            for k in self.pattern.row_range(r) {
                row[self.pattern.col_idx[k]] = self.values[k];
            }
        }
        d
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.rows() {
            for k in self.pattern.row_range(r) {
                let c = self.pattern.col_idx[k];
                worst = worst.max((self.values[k] - self.get(c, r)).abs());
            }
        }
        worst
    }
}

/// See [`CsrMatrix::from_triplets`].
pub fn csr_from_triplets<T: Real>(
    triplets: &[(usize, usize, T)],
    shape: (usize, usize),
) -> Result<CsrMatrix<T>> {
    CsrMatrix::from_triplets(shape.0, shape.1, triplets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_triplets() {
        let m = csr_from_triplets::<f64>(&[], (3, 3)).unwrap();
        assert_eq!(m.nnz(), 0);
        assert_eq!(m.matvec(&[1.0, 2.0, 3.0]), vec![0.0; 3]);
    }

    #[test]
    fn duplicates_are_summed() {
        let m = csr_from_triplets(&[(0, 0, 1.0), (0, 0, 2.0)], (2, 2)).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 3.0);
    }

    #[test]
    fn identity_matvec() {
        let m = CsrMatrix::<f64>::identity(5);
        let x = [1.0, -2.0, 3.5, 0.0, 7.0];
        assert_eq!(m.matvec(&x), x.to_vec());
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(csr_from_triplets(&[(3, 0, 1.0)], (3, 3)).is_err());
        assert!(csr_from_triplets(&[(0, 5, 1.0)], (3, 3)).is_err());
    }

    #[test]
    fn columns_sorted_unique() {
        let m = csr_from_triplets(
            &[(1, 2, 1.0), (1, 0, 1.0), (1, 2, 1.0), (0, 1, 4.0), (1, 1, 0.0)],
            (2, 3),
        )
        .unwrap();
        assert_eq!(m.row_ptr(), &[0, 1, 4]);
        assert_eq!(m.col_idx(), &[1, 0, 1, 2]);
        assert_eq!(m.get(1, 2), 2.0);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn transpose_roundtrip() {
        let m = csr_from_triplets(&[(0, 1, 2.0), (2, 0, -1.0), (1, 1, 3.0)], (3, 2)).unwrap();
        let t = m.transpose();
        assert_eq!(t.shape(), (2, 3));
        assert_eq!(t.get(1, 0), 2.0);
        assert_eq!(t.transpose(), m);
    }
}
