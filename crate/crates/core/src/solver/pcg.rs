use alloc::vec;
use alloc::vec::Vec;

use crate::sparse::{dot, norm, CsrMatrix};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

pub(super) fn inverse_diagonal(a: &CsrMatrix) -> Result<Vec<f64>> {
    a.diagonal()
        .into_iter()
        .enumerate()
        .map(|(row, d)| {
            if d > 0.0 && d.is_finite() {
                Ok(1.0 / d)
            } else {
                Err(Error::NotPositiveDefinite { row, pivot: d })
            }
        })
        .collect()
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`, starting from `x`.
///
/// Stops when `||b - A x|| <= tolerance * ||b||`.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<CgReport> {
    let inv_diag = inverse_diagonal(a)?;
    solve_with_preconditioner(a, &inv_diag, b, x, tolerance, max_iterations)
}

pub(super) fn solve_with_preconditioner(
    a: &CsrMatrix,
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<CgReport> {
    let n = a.dim();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgReport { iterations: 0, relative_residual: 0.0 });
    }
    let mut r = a.mul_vec(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let target = tolerance * b_norm;
    let mut res = norm(&r);
    if res <= target {
        return Ok(CgReport { iterations: 0, relative_residual: res / b_norm });
    }
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iterations {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite { row: it, pivot: pap });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm(&r);
        if res <= target {
            return Ok(CgReport { iterations: it, relative_residual: res / b_norm });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        residual: res / b_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn solves_tridiagonal() {
        let a = laplacian_1d(50);
        let exact: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&exact);
        let mut x = vec![0.0; 50];
        let report = conjugate_gradient(&a, &b, &mut x, 1e-12, 1000).unwrap();
        assert!(report.iterations <= 50);
        for (u, v) in x.iter().zip(&exact) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let a = laplacian_1d(100);
        let b = vec![1.0; 100];
        let mut x = vec![0.0; 100];
        assert!(matches!(
            conjugate_gradient(&a, &b, &mut x, 1e-14, 3),
            Err(Error::NotConverged { iterations: 3, .. })
        ));
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = laplacian_1d(4);
        let mut x = vec![1.0; 4];
        conjugate_gradient(&a, &[0.0; 4], &mut x, 1e-10, 10).unwrap();
        assert_eq!(x, vec![0.0; 4]);
    }
}
