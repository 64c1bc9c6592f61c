use super::{Laplacian, SolveError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub relative_residual: T,
}

/// Jacobi-preconditioned conjugate gradients on a grounded Laplacian.
/// Fails instead of returning an answer short of `tol`.
pub fn pcg<T: Real>(a: &Laplacian<T>, b: &[T], tol: T, max_iter: usize) -> Result<CgOutcome<T>, SolveError> {
    let n = a.dim();
    let inv_diag: Vec<T> = (0..n).map(|i| T::one() / a.diag(i)).collect();
    let bnorm = b.iter().map(|&x| x * x).sum::<T>().sqrt();
    let mut x = vec![T::zero(); n];
    if bnorm == T::zero() {
        return Ok(CgOutcome { x, iterations: 0, relative_residual: T::zero() });
    }
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &d)| ri * d).collect();
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz: T = r.iter().zip(&z).map(|(&a, &b)| a * b).sum();
    let mut rel = T::one();
    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let pap: T = p.iter().zip(&ap).map(|(&a, &b)| a * b).sum();
        if !(pap > T::zero()) {
            return Err(SolveError::Diverged { iterations: it, residual: rel.to_f64_lossy() });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = r.iter().map(|&v| v * v).sum::<T>().sqrt() / bnorm;
        if rel < tol {
            // recompute the true residual so drift in r cannot fake convergence
            let true_rel = a.relative_residual(&x, b);
            if true_rel < tol {
                return Ok(CgOutcome { x, iterations: it, relative_residual: true_rel });
            }
            a.matvec(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next: T = r.iter().zip(&z).map(|(&a, &b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolveError::Diverged { iterations: max_iter, residual: rel.to_f64_lossy() })
}
