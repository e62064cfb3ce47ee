//! Sparse LU factorisation with threshold partial pivoting.
//!
//! Left-looking Gilbert–Peierls elimination. Columns are processed in a
//! minimum-degree order of `A + A^T`; within a column the diagonal entry is
//! kept as pivot whenever its magnitude is at least `pivot_threshold` times
//! the largest candidate, otherwise the largest candidate is taken.
//!
//! A factorisation can be refreshed for a new matrix with the same pattern
//! through [`SparseLu::refactor`], which replays the stored pivot sequence and
//! fill pattern. If a replayed pivot fails the threshold test the matrix is
//! factorised from scratch.

use std::sync::Arc;

use super::ordering::{invert, minimum_degree};
use super::{CsrMatrix, SparsityPattern};
use crate::scalar::norm2;
use crate::{Error, Real, Result};

/// Column permutation plus the CSR -> CSC gather map of one pattern.
#[derive(Debug, Clone)]
struct Symbolic {
    pattern: Arc<SparsityPattern>,
    col_order: Vec<usize>,
    csc_ptr: Vec<usize>,
    csc_row: Vec<usize>,
    /// `csc value p` = `csr value csc_src[p]`
    csc_src: Vec<usize>,
}

impl Symbolic {
    fn analyse(pattern: &Arc<SparsityPattern>, col_order: Vec<usize>) -> Self {
        let n = pattern.rows();
        let mut counts = vec![0usize; n + 1];
        for &c in pattern.col_idx() {
            counts[c + 1] += 1;
        }
        for c in 0..n {
            counts[c + 1] += counts[c];
        }
        let csc_ptr = counts.clone();
        let mut next = counts;
        let mut csc_row = vec![0; pattern.nnz()];
        let mut csc_src = vec![0; pattern.nnz()];
        for r in 0..n {
            for k in pattern.row_range(r) {
                let c = pattern.col_idx()[k];
                let p = next[c];
                next[c] += 1;
                csc_row[p] = r;
                csc_src[p] = k;
            }
        }
        Self {
            pattern: Arc::clone(pattern),
            col_order,
            csc_ptr,
            csc_row,
            csc_src,
        }
    }

    fn matches(&self, pattern: &Arc<SparsityPattern>) -> bool {
        Arc::ptr_eq(&self.pattern, pattern) || *self.pattern == **pattern
    }
}

/// Sparse LU factors `P A Q = L U`.
#[derive(Debug, Clone)]
pub struct SparseLu<T> {
    n: usize,
    symbolic: Symbolic,
    pivot_threshold: T,
    /// original row -> pivot position
    pinv: Vec<usize>,
    /// pivot position -> original row
    prow: Vec<usize>,
    l_ptr: Vec<usize>,
    /// row indices in pivot order; first entry of each column is the unit diagonal
    l_row: Vec<usize>,
    l_val: Vec<T>,
    u_ptr: Vec<usize>,
    /// row indices in pivot order, topological order, diagonal last
    u_row: Vec<usize>,
    u_val: Vec<T>,
    work: Vec<T>,
    refactor_fallbacks: usize,
}

/// Default threshold for keeping the diagonal pivot.
pub const DEFAULT_PIVOT_THRESHOLD: f64 = 0.1;

impl<T: Real> SparseLu<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        Self::factor_with_threshold(a, T::lit(DEFAULT_PIVOT_THRESHOLD))
    }

    pub fn factor_with_threshold(a: &CsrMatrix<T>, pivot_threshold: T) -> Result<Self> {
        let (rows, cols) = a.shape();
        if rows != cols {
            return Err(Error::invalid(format!("LU needs a square matrix, got {rows}x{cols}")));
        }
        Self::factor_ordered(a, minimum_degree(a.pattern()), pivot_threshold)
    }

    /// Factorises with a caller-supplied column elimination order.
    pub fn factor_ordered(a: &CsrMatrix<T>, col_order: Vec<usize>, pivot_threshold: T) -> Result<Self> {
        let rows = a.rows();
        if rows != a.cols() {
            return Err(Error::invalid("LU needs a square matrix"));
        }
        if col_order.len() != rows || invert_checked(&col_order).is_none() {
            return Err(Error::invalid("column order is not a permutation"));
        }
        let symbolic = Symbolic::analyse(a.pattern(), col_order);
        let mut lu = Self {
            n: rows,
            symbolic,
            pivot_threshold,
            pinv: Vec::new(),
            prow: Vec::new(),
            l_ptr: Vec::new(),
            l_row: Vec::new(),
            l_val: Vec::new(),
            u_ptr: Vec::new(),
            u_row: Vec::new(),
            u_val: Vec::new(),
            work: vec![T::zero(); rows],
            refactor_fallbacks: 0,
        };
        lu.numeric(a)?;
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L` plus `U`.
    pub fn fill(&self) -> usize {
        self.l_val.len() + self.u_val.len()
    }

    /// How many refactorisations had to fall back to a full pivoting pass.
    pub fn refactor_fallbacks(&self) -> usize {
        self.refactor_fallbacks
    }

    fn gather_csc(&self, a: &CsrMatrix<T>) -> Vec<T> {
        let v = a.values();
        self.symbolic.csc_src.iter().map(|&k| v[k]).collect()
    }

    /// Full factorisation with pivot search.
    fn numeric(&mut self, a: &CsrMatrix<T>) -> Result<()> {
        let n = self.n;
        let sym = &self.symbolic;
        let aval = self.gather_csc(a);
        const NONE: usize = usize::MAX;
        let mut pinv = vec![NONE; n];
        let mut l_ptr = Vec::with_capacity(n + 1);
        let mut u_ptr = Vec::with_capacity(n + 1);
        let mut l_row: Vec<usize> = Vec::new();
        let mut l_val: Vec<T> = Vec::new();
        let mut u_row: Vec<usize> = Vec::new();
        let mut u_val: Vec<T> = Vec::new();
        let x = &mut self.work;
        let mut mark = vec![0u32; n];
        let mut stamp = 0u32;
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut reach: Vec<usize> = Vec::with_capacity(n);

        for k in 0..n {
            l_ptr.push(l_val.len());
            u_ptr.push(u_val.len());
            let col = sym.col_order[k];
            let (c0, c1) = (sym.csc_ptr[col], sym.csc_ptr[col + 1]);

            // Reach of column `col` in the graph of L (depth-first, postorder).
            stamp += 1;
            reach.clear();
            for &start in &sym.csc_row[c0..c1] {
                if mark[start] == stamp {
                    continue;
                }
                mark[start] = stamp;
                stack.push((start, 0));
                while let Some(&(node, pos)) = stack.last() {
                    let jcol = pinv[node];
                    let mut next = None;
                    let mut pos = pos;
                    if jcol != NONE {
                        let (lo, hi) = (l_ptr[jcol] + 1, end_of(&l_ptr, jcol, l_val.len()));
                        while lo + pos < hi {
                            let child = l_row[lo + pos];
                            pos += 1;
                            if mark[child] != stamp {
                                next = Some(child);
                                break;
                            }
                        }
                    }
                    if let Some(top) = stack.last_mut() {
                        top.1 = pos;
                    }
                    match next {
                        Some(child) => {
                            mark[child] = stamp;
                            stack.push((child, 0));
                        }
                        None => {
                            reach.push(node);
                            stack.pop();
                        }
                    }
                }
            }

            // Sparse triangular solve x = L \ A(:, col) in topological order.
            for &i in &reach {
                x[i] = T::zero();
            }
            for p in c0..c1 {
                x[sym.csc_row[p]] = aval[p];
            }
            for &j in reach.iter().rev() {
                let jcol = pinv[j];
                if jcol == NONE {
                    continue;
                }
                let xj = x[j];
                let (lo, hi) = (l_ptr[jcol] + 1, end_of(&l_ptr, jcol, l_val.len()));
                for p in lo..hi {
                    let r = l_row[p];
                    x[r] -= l_val[p] * xj;
                }
            }

            // Pivot search among rows not yet pivoted.
            let mut best = (T::zero(), NONE);
            for &i in reach.iter().rev() {
                if pinv[i] == NONE {
                    let m = x[i].abs();
                    if m > best.0 || best.1 == NONE {
                        best = (m, i);
                    }
                } else {
                    u_row.push(pinv[i]);
                    u_val.push(x[i]);
                }
            }
            let (amax, mut ipiv) = best;
            if ipiv == NONE || !(amax > T::zero()) || !amax.is_finite() {
                return Err(Error::Singular { column: col });
            }
            if pinv[col] == NONE && mark[col] == stamp && x[col].abs() >= amax * self.pivot_threshold {
                ipiv = col;
            }
            let pivot = x[ipiv];
            u_row.push(k);
            u_val.push(pivot);
            pinv[ipiv] = k;
            l_row.push(ipiv);
            l_val.push(T::one());
            for &i in reach.iter().rev() {
                if pinv[i] == NONE {
                    l_row.push(i);
                    l_val.push(x[i] / pivot);
                }
                x[i] = T::zero();
            }
        }
        l_ptr.push(l_val.len());
        u_ptr.push(u_val.len());
        for r in &mut l_row {
            *r = pinv[*r];
        }
        self.prow = invert(&pinv);
        self.pinv = pinv;
        self.l_ptr = l_ptr;
        self.l_row = l_row;
        self.l_val = l_val;
        self.u_ptr = u_ptr;
        self.u_row = u_row;
        self.u_val = u_val;
        Ok(())
    }

    /// Refreshes the factors for a matrix with the same pattern, replaying
    /// the previous pivot sequence when it remains acceptable.
    pub fn refactor(&mut self, a: &CsrMatrix<T>) -> Result<()> {
        if a.rows() != self.n || !self.symbolic.matches(a.pattern()) {
            *self = Self::factor_with_threshold(a, self.pivot_threshold)?;
            return Ok(());
        }
        if self.replay(a) {
            return Ok(());
        }
        self.refactor_fallbacks += 1;
        self.numeric(a)
    }

    fn replay(&mut self, a: &CsrMatrix<T>) -> bool {
        let aval = self.gather_csc(a);
        let sym = &self.symbolic;
        let x = &mut self.work;
        for k in 0..self.n {
            let col = sym.col_order[k];
            for p in sym.csc_ptr[col]..sym.csc_ptr[col + 1] {
                x[self.pinv[sym.csc_row[p]]] = aval[p];
            }
            let (u0, u1) = (self.u_ptr[k], self.u_ptr[k + 1] - 1);
            for p in u0..u1 {
                let j = self.u_row[p];
                let xj = x[j];
                x[j] = T::zero();
                self.u_val[p] = xj;
                for e in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                    x[self.l_row[e]] -= self.l_val[e] * xj;
                }
            }
            let pivot = x[k];
            x[k] = T::zero();
            let (l0, l1) = (self.l_ptr[k] + 1, self.l_ptr[k + 1]);
            let amax = self.l_row[l0..l1]
                .iter()
                .fold(pivot.abs(), |m, &r| m.max(x[r].abs()));
            if !(pivot.abs() > T::zero())
                || !pivot.is_finite()
                || pivot.abs() < amax * self.pivot_threshold
            {
                x.iter_mut().for_each(|v| *v = T::zero());
                return false;
            }
            self.u_val[u1] = pivot;
            for e in l0..l1 {
                let r = self.l_row[e];
                self.l_val[e] = x[r] / pivot;
                x[r] = T::zero();
            }
        }
        true
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Overwrites `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [T]) {
        assert_eq!(b.len(), self.n, "rhs dimension mismatch");
        let n = self.n;
        let mut y: Vec<T> = (0..n).map(|k| b[self.prow[k]]).collect();
        for j in 0..n {
            let yj = y[j];
            if yj != T::zero() {
                for p in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                    y[self.l_row[p]] -= self.l_val[p] * yj;
                }
            }
        }
        for j in (0..n).rev() {
            let last = self.u_ptr[j + 1] - 1;
            y[j] /= self.u_val[last];
            let yj = y[j];
            if yj != T::zero() {
                for p in self.u_ptr[j]..last {
                    y[self.u_row[p]] -= self.u_val[p] * yj;
                }
            }
        }
        for (k, &c) in self.symbolic.col_order.iter().enumerate() {
            b[c] = y[k];
        }
    }
}

fn invert_checked(perm: &[usize]) -> Option<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return None;
        }
    }
    Some(invert(perm))
}

#[inline]
fn end_of(ptr: &[usize], j: usize, len: usize) -> usize {
    ptr.get(j + 1).copied().unwrap_or(len)
}

/// Solves `A x = b` by sparse LU, with up to two steps of iterative
/// refinement when the residual exceeds `1e-10 ||b||` (scaled to the
/// working precision).
pub fn solve_direct<T: Real>(a: &CsrMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    if b.len() != a.rows() {
        return Err(Error::invalid("rhs length does not match matrix"));
    }
    let lu = SparseLu::factor(a)?;
    Ok(solve_refined(&lu, a, b))
}

pub(crate) fn solve_refined<T: Real>(lu: &SparseLu<T>, a: &CsrMatrix<T>, b: &[T]) -> Vec<T> {
    let mut x = lu.solve(b);
    let target = norm2(b) * T::lit(1e-10).max(T::epsilon() * T::lit(100.0));
    for _ in 0..2 {
        let r = a.residual(&x, b);
        if norm2(&r) <= target {
            break;
        }
        let dx = lu.solve(&r);
        x.iter_mut().zip(dx).for_each(|(xi, d)| *xi += d);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::csr_from_triplets;

    #[test]
    fn identity_solve() {
        let a = CsrMatrix::<f64>::identity(4);
        let b = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(solve_direct(&a, &b).unwrap(), b.to_vec());
    }

    #[test]
    fn two_by_two() {
        let a = csr_from_triplets(&[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)], (2, 2)).unwrap();
        let x: Vec<f64> = solve_direct(&a, &[3.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_diagonal_needs_pivoting() {
        // [[0,1],[1,0]] has no usable diagonal pivot
        let a = csr_from_triplets(&[(0, 1, 1.0), (1, 0, 1.0), (0, 0, 0.0), (1, 1, 0.0)], (2, 2)).unwrap();
        let x = solve_direct(&a, &[2.0, 5.0]).unwrap();
        assert_eq!(x, vec![5.0, 2.0]);
    }

    #[test]
    fn singular_detected() {
        let a = csr_from_triplets(&[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)], (2, 2)).unwrap();
        assert!(matches!(solve_direct(&a, &[1.0, 1.0]), Err(Error::Singular { .. })));
        let a = csr_from_triplets(&[(0, 0, 1.0)], (2, 2)).unwrap();
        assert!(matches!(SparseLu::factor(&a), Err(Error::Singular { .. })));
    }

    #[test]
    fn refactor_matches_fresh_factor() {
        let mk = |s: f64| {
            csr_from_triplets(
                &[
                    (0, 0, 4.0 + s),
                    (0, 2, 1.0),
                    (1, 1, 3.0),
                    (1, 2, -1.0 * s),
                    (2, 0, 1.0),
                    (2, 1, 2.0),
                    (2, 2, 5.0),
                ],
                (3, 3),
            )
            .unwrap()
        };
        let mut lu = SparseLu::factor(&mk(0.0)).unwrap();
        let a = mk(0.7);
        lu.refactor(&a).unwrap();
        let b = [1.0, -2.0, 0.5];
        let x1 = lu.solve(&b);
        let x2 = SparseLu::factor(&a).unwrap().solve(&b);
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-14);
        }
        assert_eq!(lu.refactor_fallbacks(), 0);
    }

    #[test]
    fn refactor_falls_back_when_pivot_vanishes() {
        let mk = |d: f64| {
            csr_from_triplets(&[(0, 0, d), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)], (2, 2)).unwrap()
        };
        let mut lu = SparseLu::factor(&mk(2.0)).unwrap();
        let a = mk(0.0);
        lu.refactor(&a).unwrap();
        assert_eq!(lu.refactor_fallbacks(), 1);
        let x = lu.solve(&[1.0, 3.0]);
        let r = a.residual(&x, &[1.0, 3.0]);
        assert!(norm2(&r) < 1e-14);
    }
}
