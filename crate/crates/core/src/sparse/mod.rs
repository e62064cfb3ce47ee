//! Compressed sparse row matrices and the linear solvers behind every
//! implicit solve.

mod csr;
mod krylov;
mod lu;
pub mod ordering;

use std::fmt::Write as _;
use std::path::Path;

pub use csr::{csr_from_triplets, CsrMatrix, SparsityPattern};
pub use krylov::{solve_gmres, Ilu0, Preconditioner, SolverReport};
pub use lu::{solve_direct, SparseLu, DEFAULT_PIVOT_THRESHOLD};
pub(crate) use lu::solve_refined;

use crate::{Error, Real, Result};

/// Which linear solver backs the implicit solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Sparse LU with threshold partial pivoting.
    #[default]
    Direct,
    /// Restarted GMRES with ILU(0); falls back to LU when it does not converge.
    GmresIlu0,
}

/// Writes `a` in MatrixMarket coordinate format (1-based indices).
pub fn write_matrix_market<T: Real>(a: &CsrMatrix<T>, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", a.rows(), a.cols(), a.nnz());
    for r in 0..a.rows() {
        for k in a.row_ptr()[r]..a.row_ptr()[r + 1] {
            let _ = writeln!(out, "{} {} {:.17e}", r + 1, a.col_idx()[k] + 1, a.values()[k].as_f64());
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
