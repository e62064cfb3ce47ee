//! Restarted GMRES with right preconditioning, and an ILU(0) preconditioner.

use super::{CsrMatrix, SparseLu};
use crate::scalar::{dot, norm2};
use crate::{Error, Real, Result};

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    /// Final relative residual `||b - A x|| / ||b||`, recomputed from `x`.
    pub residual: f64,
    pub converged: bool,
}

/// Approximate inverse applied as `z = M^{-1} r`.
pub trait Preconditioner<T> {
    fn apply(&self, r: &[T], z: &mut [T]);
}

impl<T: Real> Preconditioner<T> for SparseLu<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
        self.solve_in_place(z);
    }
}

/// Incomplete LU factorisation with the sparsity pattern of `A`.
#[derive(Debug, Clone)]
pub struct Ilu0<T> {
    factors: CsrMatrix<T>,
    diag: Vec<usize>,
}

impl<T: Real> Ilu0<T> {
    pub fn new(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if n != a.cols() {
            return Err(Error::invalid("ILU(0) needs a square matrix"));
        }
        let mut f = a.clone();
        let rp = a.row_ptr().to_vec();
        let ci = a.col_idx().to_vec();
        let mut diag = vec![usize::MAX; n];
        for (r, d) in diag.iter_mut().enumerate() {
            if let Some(s) = a.pattern().slot(r, r) {
                *d = s;
            } else {
                return Err(Error::Singular { column: r });
            }
        }
        let vals = f.values_mut();
        for i in 1..n {
            for kk in rp[i]..rp[i + 1] {
                let k = ci[kk];
                if k >= i {
                    break;
                }
                let pivot = vals[diag[k]];
                if pivot == T::zero() || !pivot.is_finite() {
                    return Err(Error::Singular { column: k });
                }
                vals[kk] /= pivot;
                let lik = vals[kk];
                // a_ij -= l_ik * u_kj for j > k present in row i
                let (mut p, mut q) = (kk + 1, diag[k] + 1);
                while p < rp[i + 1] && q < rp[k + 1] {
                    match ci[p].cmp(&ci[q]) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            let ukj = vals[q];
                            vals[p] -= lik * ukj;
                            p += 1;
                            q += 1;
                        }
                    }
                }
            }
        }
        for (r, &d) in diag.iter().enumerate() {
            if vals[d] == T::zero() || !vals[d].is_finite() {
                return Err(Error::Singular { column: r });
            }
        }
        Ok(Self { factors: f, diag })
    }
}

impl<T: Real> Preconditioner<T> for Ilu0<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        let rp = self.factors.row_ptr();
        let ci = self.factors.col_idx();
        let v = self.factors.values();
        let n = r.len();
        for i in 0..n {
            let mut acc = r[i];
            for k in rp[i]..self.diag[i] {
                acc -= v[k] * z[ci[k]];
            }
            z[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for k in self.diag[i] + 1..rp[i + 1] {
                acc -= v[k] * z[ci[k]];
            }
            z[i] = acc / v[self.diag[i]];
        }
    }
}

/// Restarted GMRES(`restart`) with right preconditioning, starting from zero.
///
/// Convergence is judged on the true residual, so a converged report always
/// satisfies `||b - A x|| <= tol ||b||`. Breakdown or exhausting `max_iters`
/// yields `converged = false` with the best iterate.
pub fn solve_gmres<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    tol: T,
    restart: usize,
    max_iters: usize,
    preconditioner: Option<&dyn Preconditioner<T>>,
) -> Result<(Vec<T>, SolverReport)> {
    let n = a.rows();
    if n != a.cols() || b.len() != n {
        return Err(Error::invalid("GMRES dimension mismatch"));
    }
    let restart = restart.max(1);
    let bnorm = norm2(b);
    let mut x = vec![T::zero(); n];
    if bnorm == T::zero() {
        return Ok((
            x,
            SolverReport {
                iterations: 0,
                residual: 0.0,
                converged: true,
            },
        ));
    }
    let precond = |v: &[T], out: &mut [T]| match preconditioner {
        Some(p) => p.apply(v, out),
        None => out.copy_from_slice(v),
    };
    let mut iterations = 0;
    let mut z = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    loop {
        let r = a.residual(&x, b);
        let beta = norm2(&r);
        if beta <= tol * bnorm || iterations >= max_iters {
            break;
        }
        let mut basis: Vec<Vec<T>> = vec![r.iter().map(|&v| v / beta).collect()];
        let mut h: Vec<Vec<T>> = Vec::new();
        let (mut cs, mut sn): (Vec<T>, Vec<T>) = (Vec::new(), Vec::new());
        let mut g = vec![beta];
        let mut breakdown = false;
        for j in 0..restart {
            if iterations >= max_iters {
                break;
            }
            iterations += 1;
            precond(&basis[j], &mut z);
            a.matvec_into(&z, &mut w);
            let mut col = Vec::with_capacity(j + 2);
            for v in &basis {
                let hij = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(wi, &vi)| *wi -= hij * vi);
                col.push(hij);
            }
            let hnext = norm2(&w);
            col.push(hnext);
            for i in 0..j {
                let (a0, a1) = (col[i], col[i + 1]);
                col[i] = cs[i] * a0 + sn[i] * a1;
                col[i + 1] = -sn[i] * a0 + cs[i] * a1;
            }
            let denom = col[j].hypot(col[j + 1]);
            if denom == T::zero() || !denom.is_finite() {
                breakdown = true;
                h.push(col);
                break;
            }
            let (c, s) = (col[j] / denom, col[j + 1] / denom);
            cs.push(c);
            sn.push(s);
            col[j] = denom;
            col[j + 1] = T::zero();
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s * gj);
            h.push(col);
            let lucky = hnext <= T::epsilon() * beta;
            if g[j + 1].abs() <= tol * bnorm || lucky {
                break;
            }
            basis.push(w.iter().map(|&v| v / hnext).collect());
        }
        // back substitution on the rotated Hessenberg system
        let m = cs.len();
        let mut y = vec![T::zero(); m];
        for i in (0..m).rev() {
            let mut acc = g[i];
            for (k, yk) in y.iter().enumerate().take(m).skip(i + 1) {
                acc -= h[k][i] * *yk;
            }
            y[i] = acc / h[i][i];
        }
        let mut update = vec![T::zero(); n];
        for (yi, v) in y.iter().zip(&basis) {
            update.iter_mut().zip(v).for_each(|(u, &vi)| *u += *yi * vi);
        }
        precond(&update, &mut z);
        x.iter_mut().zip(&z).for_each(|(xi, &zi)| *xi += zi);
        if breakdown {
            break;
        }
    }
    let residual = (norm2(&a.residual(&x, b)) / bnorm).as_f64();
    Ok((
        x,
        SolverReport {
            iterations,
            residual,
            converged: residual <= tol.as_f64(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::csr_from_triplets;

    #[test]
    fn identity_one_iteration() {
        let a = CsrMatrix::<f64>::identity(6);
        let b = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let (x, rep) = solve_gmres(&a, &b, 1e-12, 30, 100, None).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        assert!(x.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-14));
    }

    #[test]
    fn diagonal_within_krylov_bound() {
        let trip: Vec<_> = (0..10).map(|i| (i, i, (i + 1) as f64)).collect();
        let a = csr_from_triplets(&trip, (10, 10)).unwrap();
        let b = vec![1.0; 10];
        let (x, rep) = solve_gmres(&a, &b, 1e-12, 50, 100, None).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 10);
        for (i, xi) in x.iter().enumerate() {
            assert!((xi - 1.0 / (i + 1) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn non_convergence_is_reported_not_raised() {
        let trip: Vec<_> = (0..40).map(|i| (i, i, (i + 1) as f64)).collect();
        let a = csr_from_triplets(&trip, (40, 40)).unwrap();
        let (_, rep) = solve_gmres(&a, &vec![1.0; 40], 1e-14, 3, 3, None).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 3);
    }

    #[test]
    fn ilu0_exact_on_tridiagonal() {
        // ILU(0) of a tridiagonal matrix is its exact LU
        let n = 12;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 4.0));
            if i > 0 {
                trip.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                trip.push((i, i + 1, -2.0));
            }
        }
        let a = csr_from_triplets(&trip, (n, n)).unwrap();
        let ilu = Ilu0::new(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let (_, rep) = solve_gmres(&a, &b, 1e-12, 20, 20, Some(&ilu)).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 2);
    }

    #[test]
    fn ilu0_zero_pivot_is_singular() {
        let a = csr_from_triplets(&[(0, 0, 0.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)], (2, 2)).unwrap();
        assert!(matches!(Ilu0::new(&a), Err(Error::Singular { .. })));
    }
}
