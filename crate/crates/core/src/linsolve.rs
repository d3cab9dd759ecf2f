//! Dense solves for the reduced Newton system `M d = r`.
//!
//! `M` is a principal block of the Jacobian and in general not symmetric.
//! Small blocks are factorized directly (LU with partial pivoting); larger
//! ones go through restarted GMRES with a right Jacobi preconditioner, so
//! the residual it tracks is the residual of the original system.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearMethod {
    Direct,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveOptions {
    /// Systems with `dim < direct_threshold` are factorized.
    pub direct_threshold: usize,
    /// Relative residual target `||M d - r|| <= lin_tol * ||r||`.
    pub lin_tol: f64,
    /// Iteration cap for the Krylov path; `None` means `10 * dim`.
    pub lin_maxit: Option<usize>,
}

impl Default for LinearSolveOptions {
    fn default() -> Self {
        Self {
            direct_threshold: 20,
            lin_tol: 1e-12,
            lin_maxit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolveReport {
    pub method: LinearMethod,
    pub iterations: usize,
    /// `||M d - r||_2`, recomputed from the returned solution.
    pub residual_norm: f64,
    pub solution: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearSolveError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("right-hand side has length {got}, matrix has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix of dimension {dim} is singular to working precision")]
    Singular { dim: usize },
    #[error("no convergence after {iterations} iterations (relative residual {relative_residual:.3e})")]
    NotConverged {
        iterations: usize,
        relative_residual: f64,
    },
}

/// `||M d - r||_2`.
pub fn residual_norm(m: &DMatrix<f64>, d: &[f64], r: &[f64]) -> f64 {
    let md = m * DVector::from_column_slice(d);
    md.iter()
        .zip(r)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn check(m: &DMatrix<f64>, r: &[f64]) -> Result<(), LinearSolveError> {
    if !m.is_square() {
        return Err(LinearSolveError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if r.len() != m.nrows() {
        return Err(LinearSolveError::DimensionMismatch {
            expected: m.nrows(),
            got: r.len(),
        });
    }
    Ok(())
}

/// Solves `M d = r`, picking the direct or iterative path by dimension.
pub fn solve_m_system(
    m: &DMatrix<f64>,
    r: &[f64],
    opts: &LinearSolveOptions,
) -> Result<LinearSolveReport, LinearSolveError> {
    check(m, r)?;
    if m.nrows() < opts.direct_threshold {
        solve_direct(m, r, opts.lin_tol)
    } else {
        let maxit = opts.lin_maxit.unwrap_or(10 * m.nrows()).max(1);
        solve_gmres(m, r, opts.lin_tol, maxit)
    }
}

/// LU with partial pivoting plus up to two steps of iterative refinement.
pub fn solve_direct(
    m: &DMatrix<f64>,
    r: &[f64],
    tol: f64,
) -> Result<LinearSolveReport, LinearSolveError> {
    check(m, r)?;
    let n = m.nrows();
    let lu = m.clone().lu();
    let u = lu.u();
    let scale = m.amax();
    let pivot_floor = n as f64 * f64::EPSILON * scale;
    if scale == 0.0 || u.diagonal().iter().any(|p| p.abs() <= pivot_floor) {
        return Err(LinearSolveError::Singular { dim: n });
    }
    let rhs = DVector::from_column_slice(r);
    let mut d = lu.solve(&rhs).ok_or(LinearSolveError::Singular { dim: n })?;
    let target = tol * norm2(r);
    let mut iterations = 1;
    for _ in 0..2 {
        let res = &rhs - m * &d;
        if res.norm() <= target {
            break;
        }
        if let Some(corr) = lu.solve(&res) {
            d += corr;
            iterations += 1;
        }
    }
    let solution: Vec<f64> = d.iter().copied().collect();
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(LinearSolveError::Singular { dim: n });
    }
    Ok(LinearSolveReport {
        method: LinearMethod::Direct,
        iterations,
        residual_norm: residual_norm(m, &solution, r),
        solution,
    })
}

/// Restarted GMRES with a right diagonal preconditioner.
pub fn solve_gmres(
    m: &DMatrix<f64>,
    r: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<LinearSolveReport, LinearSolveError> {
    check(m, r)?;
    let n = m.nrows();
    let rnorm = norm2(r);
    if rnorm == 0.0 {
        return Ok(LinearSolveReport {
            method: LinearMethod::Iterative,
            iterations: 0,
            residual_norm: 0.0,
            solution: vec![0.0; n],
        });
    }
    let target = tol * rnorm;
    let restart = n.min(200);
    let inv_diag: Vec<f64> = m
        .diagonal()
        .iter()
        .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let apply = |v: &[f64]| -> Vec<f64> {
        let z = DVector::from_iterator(n, v.iter().zip(&inv_diag).map(|(a, p)| a * p));
        (m * z).iter().copied().collect()
    };

    let mut x = vec![0.0; n];
    let mut total = 0usize;
    loop {
        let mx = m * DVector::from_column_slice(&x);
        let r0: Vec<f64> = r.iter().zip(mx.iter()).map(|(a, b)| a - b).collect();
        let beta = norm2(&r0);
        if beta <= target {
            break;
        }
        if total >= maxit {
            return Err(LinearSolveError::NotConverged {
                iterations: total,
                relative_residual: beta / rnorm,
            });
        }

        let mut basis: Vec<Vec<f64>> = vec![r0.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            let mut w = apply(&basis[k]);
            // Two passes of modified Gram-Schmidt.
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let dot: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
                    h[i][k] += dot;
                    w.iter_mut().zip(v).for_each(|(a, b)| *a -= dot * b);
                }
            }
            let wn = norm2(&w);
            h[k + 1][k] = wn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                return Err(LinearSolveError::Singular { dim: n });
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            if g[k + 1].abs() <= 0.5 * target || wn == 0.0 || total >= maxit {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }

        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = ((i + 1)..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, (vi, p)) in x.iter_mut().zip(basis[j].iter().zip(&inv_diag)) {
                *xi += yj * vi * p;
            }
        }
    }

    if x.iter().any(|v| !v.is_finite()) {
        return Err(LinearSolveError::Singular { dim: n });
    }
    Ok(LinearSolveReport {
        method: LinearMethod::Iterative,
        iterations: total,
        residual_norm: residual_norm(m, &x, r),
        solution: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_system() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, -2.0, 0.0, 1.0]);
        let rep = solve_m_system(&m, &[1.0, 1.0], &LinearSolveOptions::default()).unwrap();
        assert_eq!(rep.method, LinearMethod::Direct);
        assert!((rep.solution[0] - 1.0).abs() < 1e-15);
        assert!((rep.solution[1] - 1.0).abs() < 1e-15);
        let it = solve_gmres(&m, &[1.0, 1.0], 1e-12, 20).unwrap();
        assert!((it.solution[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_returns_rhs() {
        let m = DMatrix::<f64>::identity(30, 30);
        let r: Vec<f64> = (0..30).map(|i| i as f64 - 7.5).collect();
        let rep = solve_m_system(&m, &r, &LinearSolveOptions::default()).unwrap();
        assert_eq!(rep.method, LinearMethod::Iterative);
        for (a, b) in rep.solution.iter().zip(&r) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_is_an_error() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(
            solve_direct(&m, &[1.0, 1.0], 1e-12),
            Err(LinearSolveError::Singular { dim: 2 })
        );
        let z = DMatrix::<f64>::zeros(3, 3);
        assert!(solve_direct(&z, &[1.0, 0.0, 0.0], 1e-12).is_err());
    }

    #[test]
    fn zero_rhs() {
        let m = DMatrix::<f64>::identity(25, 25) * 2.0;
        let rep = solve_m_system(&m, &[0.0; 25], &LinearSolveOptions::default()).unwrap();
        assert!(rep.solution.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_errors() {
        let m = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(
            solve_m_system(&m, &[1.0, 1.0], &LinearSolveOptions::default()),
            Err(LinearSolveError::NotSquare { .. })
        ));
        let m = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(
            solve_m_system(&m, &[1.0], &LinearSolveOptions::default()),
            Err(LinearSolveError::DimensionMismatch { .. })
        ));
    }
}
