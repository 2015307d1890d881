//! Tridiagonal elimination and preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Thomas algorithm for `sub[i-1] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
///
/// No pivoting; the drift-diffusion and Helmholtz systems assembled here are
/// column diagonally dominant M-matrices, for which elimination is stable.
pub fn thomas<T: Scalar>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    assert!(n >= 2, "tridiagonal system needs n >= 2");
    assert_eq!(sub.len(), n - 1);
    assert_eq!(sup.len(), n - 1);
    assert_eq!(rhs.len(), n);

    let mut c = vec![T::zero(); n - 1];
    let mut d = vec![T::zero(); n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = sup[i] / m;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let xi = x[i] - c[i] * x[i + 1];
        x[i] = xi;
    }
    x
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// (semi-)definite operator given as a matrix-free `apply`.
///
/// When `project_volumes` is set the iteration is restricted to the
/// zero-volume-weighted-mean subspace, which handles the pure-Neumann
/// (singular) case.
pub fn pcg<T: Scalar>(
    apply: &dyn Fn(&[T], &mut [T]),
    diag: &[T],
    b: &[T],
    tol: T,
    max_iter: usize,
    project_volumes: Option<&[T]>,
) -> Result<(Vec<T>, usize)> {
    let n = b.len();
    let dot = |a: &[T], c: &[T]| -> T { a.iter().zip(c).map(|(&x, &y)| x * y).sum() };

    let project = |v: &mut [T]| {
        if let Some(vols) = project_volumes {
            let total: T = vols.iter().copied().sum();
            let mean = dot(v, vols) / total;
            for x in v.iter_mut() {
                *x -= mean;
            }
        }
    };

    let mut b = b.to_vec();
    project(&mut b);
    let bnorm = dot(&b, &b).sqrt();
    if bnorm == T::zero() {
        return Ok((vec![T::zero(); n], 0));
    }

    let mut x = vec![T::zero(); n];
    let mut r = b.clone();
    let mut z: Vec<T> = r.iter().zip(diag).map(|(&ri, &di)| ri / di).collect();
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];

    for it in 0..max_iter {
        apply(&p, &mut ap);
        project(&mut ap);
        let denom = dot(&p, &ap);
        if denom <= T::zero() {
            return Err(Error::SolverFailure {
                iterations: it,
                residual: (dot(&r, &r).sqrt() / bnorm).as_f64(),
            });
        }
        let alpha = rz / denom;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = dot(&r, &r).sqrt();
        if rnorm <= tol * bnorm {
            return Ok((x, it + 1));
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        project(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    Err(Error::SolverFailure {
        iterations: max_iter,
        residual: (dot(&r, &r).sqrt() / bnorm).as_f64(),
    })
}
