//! Brute-force enumeration of nonnegative solutions for tiny systems.
//!
//! Every grid point of `[0, box_hi]^n` seeds a projected damped Newton
//! (Levenberg-Marquardt) polish of `||A x^{m-1} - b||^2` over `x >= 0`.
//! The residual and its Jacobian are evaluated entry by entry from the raw
//! tensor with the product rule, independently of the contraction kernels.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::exec::{map_collect, Execution};
use crate::tensor::SquareTensor;

/// Largest dimension the enumeration accepts.
pub const MAX_ORACLE_DIM: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle supports n <= {MAX_ORACLE_DIM}, got n = {0}")]
    TooLarge(usize),
    #[error("b has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid needs at least 2 points per axis and a positive box, got {grid_points} and {box_hi}")]
    BadGrid { grid_points: usize, box_hi: f64 },
}

/// Residual `A x^{m-1} - b` and its Jacobian, summed over raw entries.
fn residual_and_jacobian(a: &SquareTensor, b: &[f64], x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let n = b.len();
    let mut r: Vec<f64> = b.iter().map(|v| -v).collect();
    let mut jac = DMatrix::zeros(n, n);
    for (t, v) in a.entries() {
        let i = t[0] as usize;
        let tail = &t[1..];
        r[i] += v * tail.iter().map(|&k| x[k as usize]).product::<f64>();
        for (pos, &k) in tail.iter().enumerate() {
            let others: f64 = tail
                .iter()
                .enumerate()
                .filter(|(q, _)| *q != pos)
                .map(|(_, &l)| x[l as usize])
                .product();
            jac[(i, k as usize)] += v * others;
        }
    }
    (r, jac)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Projected Levenberg-Marquardt from `x0`, keeping components flagged in
/// `fixed` at zero. Returns the final point and residual norm.
fn polish(a: &SquareTensor, b: &[f64], x0: &[f64], fixed: &[bool], max_steps: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut r, mut jac) = residual_and_jacobian(a, b, &x);
    let mut res = norm2(&r);
    let mut lambda = 1e-3;
    for _ in 0..max_steps {
        if res == 0.0 {
            break;
        }
        let jt = jac.transpose();
        let g = &jt * DVector::from_column_slice(&r);
        let h = &jt * &jac;
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = h.clone();
            for k in 0..n {
                damped[(k, k)] += lambda * (1.0 + h[(k, k)]);
            }
            let Some(step) = damped.lu().solve(&g) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .zip(fixed)
                .map(|((xi, si), &z)| if z { 0.0 } else { (xi - si).max(0.0) })
                .collect();
            let (tr, tj) = residual_and_jacobian(a, b, &trial);
            let tres = norm2(&tr);
            if tres < res {
                x = trial;
                r = tr;
                jac = tj;
                res = tres;
                lambda = (lambda * 0.3).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, res)
}

/// Components below this are tried at exactly zero.
const SNAP: f64 = 1e-3;

/// Polishes from `x0`, then re-polishes with the small components pinned to
/// zero. Roots with a zero component are often degenerate, where the free
/// polish creeps in slowly; the pinned one lands on them exactly.
fn polish_with_snap(a: &SquareTensor, b: &[f64], x0: &[f64], max_steps: usize) -> (Vec<f64>, f64) {
    let free = vec![false; x0.len()];
    let (x, res) = polish(a, b, x0, &free, max_steps);
    let small: Vec<bool> = x.iter().map(|&v| v < SNAP).collect();
    if !small.iter().any(|&z| z) {
        return (x, res);
    }
    let start: Vec<f64> = x.iter().zip(&small).map(|(&v, &z)| if z { 0.0 } else { v }).collect();
    let (xs, rs) = polish(a, b, &start, &small, max_steps);
    if rs <= res {
        (xs, rs)
    } else {
        (x, res)
    }
}

/// All nonnegative solutions of `A x^{m-1} = b` found from a uniform grid
/// of starts on `[0, box_hi]^n`, deduplicated at `1e-6` and sorted
/// lexicographically. A polished point counts as a solution when
/// `||A x^{m-1} - b||_2 <= polish_tol`.
pub fn enumerate_nonneg_solutions(
    a: &SquareTensor,
    b: &[f64],
    box_hi: f64,
    grid_points: usize,
    polish_tol: f64,
) -> Result<Vec<Vec<f64>>, OracleError> {
    let n = a.dim();
    if n > MAX_ORACLE_DIM {
        return Err(OracleError::TooLarge(n));
    }
    if b.len() != n {
        return Err(OracleError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if grid_points < 2 || !(box_hi > 0.0) {
        return Err(OracleError::BadGrid {
            grid_points,
            box_hi,
        });
    }
    let total = grid_points.pow(n as u32);
    let starts: Vec<Vec<f64>> = (0..total)
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let c = k % grid_points;
                    k /= grid_points;
                    box_hi * c as f64 / (grid_points - 1) as f64
                })
                .collect()
        })
        .collect();
    let polished = map_collect(&starts, Execution::default(), |x0| polish_with_snap(a, b, x0, 500));

    let mut found: Vec<Vec<f64>> = Vec::new();
    for (x, res) in polished {
        if !(res <= polish_tol) {
            continue;
        }
        let dup = found.iter().any(|y| {
            y.iter()
                .zip(&x)
                .all(|(p, q)| (p - q).abs() <= 1e-6 * (1.0 + p.abs()))
        });
        if !dup {
            found.push(x);
        }
    }
    found.sort_by(|p, q| {
        p.iter()
            .zip(q)
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{fixture_solutions, named_fixture, FIXTURES};

    #[test]
    fn jacobian_matches_known_values() {
        let f = named_fixture("example2-i").unwrap();
        let (r, j) = residual_and_jacobian(&f.a, &f.b, &[1.0, 1.0]);
        assert_eq!(r, vec![-1.0, -7.0]);
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[-1.0, -2.0, 0.0, 3.0]));
    }

    #[test]
    fn recovers_fixture_solutions() {
        for name in FIXTURES {
            let f = named_fixture(name).unwrap();
            let got = enumerate_nonneg_solutions(&f.a, &f.b, 6.0, 13, 1e-10).unwrap();
            let want = fixture_solutions(name).unwrap();
            assert_eq!(got.len(), want.len(), "{name}: {got:?}");
            for (g, w) in got.iter().zip(&want) {
                for (p, q) in g.iter().zip(w) {
                    assert!((p - q).abs() < 1e-6, "{name}: {got:?}");
                }
            }
        }
    }

    #[test]
    fn rejects_large_dimension() {
        let a = SquareTensor::identity(3, 4).unwrap();
        assert_eq!(
            enumerate_nonneg_solutions(&a, &[1.0; 4], 1.0, 3, 1e-8),
            Err(OracleError::TooLarge(4))
        );
    }
}
