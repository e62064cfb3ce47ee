use std::collections::BTreeMap;

use crate::sparse::CsrMatrix;
use crate::{Error, Real, Result};

/// How constrained rows are imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirichletMode {
    /// Replace each constrained row by an identity row.
    #[default]
    RowReplace,
    /// Row replacement plus column elimination, with the lift moved to the
    /// right-hand side. Keeps a symmetric matrix symmetric.
    Symmetric,
}

/// Imposes `x[dofs[k]] = values[k]` on the square system `a x = rhs`.
///
/// The sparsity pattern is left untouched; eliminated entries are stored as
/// explicit zeros.
pub fn apply_dirichlet<T: Real>(
    a: &mut CsrMatrix<T>,
    rhs: &mut [T],
    dofs: &[usize],
    values: &[T],
    mode: DirichletMode,
) -> Result<()> {
    let n = a.rows();
    if a.cols() != n || rhs.len() != n {
        return Err(Error::invalid("Dirichlet needs a square system with matching rhs"));
    }
    if dofs.len() != values.len() {
        return Err(Error::invalid("one value per constrained dof"));
    }
    let mut fixed: BTreeMap<usize, T> = BTreeMap::new();
    for (&d, &v) in dofs.iter().zip(values) {
        if d >= n {
            return Err(Error::invalid(format!("dof {d} out of range {n}")));
        }
        if let Some(&prev) = fixed.get(&d) {
            if prev != v {
                return Err(Error::invalid(format!("dof {d} constrained to both {prev} and {v}")));
            }
        }
        fixed.insert(d, v);
    }
    if fixed.is_empty() {
        return Ok(());
    }
    let mut is_fixed = vec![false; n];
    for &d in fixed.keys() {
        is_fixed[d] = true;
        if a.pattern().slot(d, d).is_none() {
            return Err(Error::invalid(format!("no diagonal entry for constrained dof {d}")));
        }
    }
    let row_ptr = a.row_ptr().to_vec();
    let col_idx = a.col_idx().to_vec();
    let vals = a.values_mut();
    if mode == DirichletMode::Symmetric {
        for r in 0..n {
            if is_fixed[r] {
                continue;
            }
            for k in row_ptr[r]..row_ptr[r + 1] {
                let c = col_idx[k];
                if is_fixed[c] {
                    rhs[r] -= vals[k] * fixed[&c];
                    vals[k] = T::zero();
                }
            }
        }
    }
    for (&d, &v) in &fixed {
        for k in row_ptr[d]..row_ptr[d + 1] {
            vals[k] = if col_idx[k] == d { T::one() } else { T::zero() };
        }
        rhs[d] = v;
    }
    Ok(())
}
