use std::sync::Arc;

use crate::sparse::{solve_gmres, CsrMatrix, Ilu0, SolverKind, SparseLu, SparsityPattern};
use crate::{Error, Real, Result};

const GMRES_TOL: f64 = 1e-12;
const GMRES_RESTART: usize = 60;
const GMRES_MAX_ITERS: usize = 600;
// a stale factorisation is kept while it preconditions this well
const STALE_MAX_ITERS: usize = 12;

/// Outcome counters, mostly for diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub factorizations: usize,
    pub stale_solves: usize,
}

/// A linear solver that keeps its LU factors between calls. Factors are
/// reused as-is when the matrix values are unchanged. When only the values
/// changed, the old factors first serve as a GMRES preconditioner; they are
/// refreshed in place once that stops converging within a few iterations.
#[derive(Debug, Clone)]
pub struct CachedSolver<T> {
    order: Vec<usize>,
    threshold: T,
    kind: SolverKind,
    lu: Option<SparseLu<T>>,
    pattern: Option<Arc<SparsityPattern>>,
    values: Vec<T>,
    stats: SolveStats,
}

impl<T: Real> CachedSolver<T> {
    pub fn new(order: Vec<usize>, threshold: T, kind: SolverKind) -> Self {
        Self {
            order,
            threshold,
            kind,
            lu: None,
            pattern: None,
            values: Vec::new(),
            stats: SolveStats::default(),
        }
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    fn ensure_factors(&mut self, a: &CsrMatrix<T>) -> Result<()> {
        let same_pattern = self
            .pattern
            .as_ref()
            .is_some_and(|p| Arc::ptr_eq(p, a.pattern()) || **p == **a.pattern());
        if same_pattern && self.values == a.values() {
            return Ok(());
        }
        match (&mut self.lu, same_pattern) {
            (Some(lu), true) => lu.refactor(a)?,
            _ => {
                let lu = if self.order.len() == a.rows() {
                    SparseLu::factor_ordered(a, self.order.clone(), self.threshold)?
                } else {
                    SparseLu::factor_with_threshold(a, self.threshold)?
                };
                self.lu = Some(lu);
                self.pattern = Some(Arc::clone(a.pattern()));
            }
        }
        self.stats.factorizations += 1;
        self.values.clear();
        self.values.extend_from_slice(a.values());
        Ok(())
    }

    fn try_stale(&mut self, a: &CsrMatrix<T>, b: &[T]) -> Result<Option<Vec<T>>> {
        let (Some(lu), Some(p)) = (&self.lu, &self.pattern) else {
            return Ok(None);
        };
        if !(Arc::ptr_eq(p, a.pattern()) || **p == **a.pattern()) || self.values == a.values() {
            return Ok(None);
        }
        let (x, rep) = solve_gmres(a, b, T::lit(GMRES_TOL), STALE_MAX_ITERS, STALE_MAX_ITERS, Some(lu))?;
        if rep.converged && x.iter().all(|v| v.is_finite()) {
            self.stats.stale_solves += 1;
            return Ok(Some(x));
        }
        Ok(None)
    }

    pub fn solve(&mut self, a: &CsrMatrix<T>, b: &[T]) -> Result<Vec<T>> {
        if b.len() != a.rows() {
            return Err(Error::invalid("rhs length does not match matrix"));
        }
        if self.kind == SolverKind::GmresIlu0 {
            if let Ok(ilu) = Ilu0::new(a) {
                let (x, rep) = solve_gmres(a, b, T::lit(GMRES_TOL), GMRES_RESTART, GMRES_MAX_ITERS, Some(&ilu))?;
                if rep.converged {
                    return Ok(x);
                }
            }
        }
        if let Some(x) = self.try_stale(a, b)? {
            return Ok(x);
        }
        self.ensure_factors(a)?;
        let lu = self.lu.as_ref().expect("factors present");
        let x = crate::sparse::solve_refined(lu, a, b);
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Singular { column: k });
        }
        Ok(x)
    }
}
