//! Feasible starting points `x >= 0` with `A x^{m-1} >= b`.
//!
//! Zero components of `b` are lifted by a small `epsilon`, giving a system
//! with a strictly positive right-hand side and a unique positive solution.
//! That solution is computed with the Jacobi fixed point of the split
//! `A = s I - B`:
//!
//! ```text
//! x <- ((B x^{m-1} + b) / s)^{1/(m-1)}
//! ```
//!
//! started from the sub-solution `(b / s)^{1/(m-1)}`, so the iterates
//! increase monotonically towards the solution.

use thiserror::Error;

use crate::structure::{self, StructureError};
use crate::tensor::{SquareTensor, TensorError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    /// Added to every zero component of `b`.
    pub epsilon_value: f64,
    /// Stop once `||A x^{m-1} - b||_2 <= inner_tol * (1 + ||b||_2)`.
    pub inner_tol: f64,
    pub inner_maxit: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            epsilon_value: 1e-3,
            inner_tol: 1e-12,
            inner_maxit: 10_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BootstrapError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("right-hand side component {index} is {value}; expected a nonnegative value")]
    NegativeRhs { index: usize, value: f64 },
    #[error("positive system solve did not converge in {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("bootstrap point violates feasibility at component {index}: F = {value:.3e}")]
    Infeasible { index: usize, value: f64 },
}

/// `b + epsilon` on the zero components of `b`.
pub fn perturb_rhs(b: &[f64], epsilon_value: f64) -> Vec<f64> {
    b.iter()
        .map(|&v| if v == 0.0 { epsilon_value } else { v })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositiveSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    /// Largest decrease of any component between consecutive iterates
    /// (zero for a monotone run).
    pub max_decrease: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn root(v: f64, degree: usize) -> f64 {
    match degree {
        1 => v,
        2 => v.sqrt(),
        3 => v.cbrt(),
        _ => v.powf(1.0 / degree as f64),
    }
}

/// Jacobi fixed point for `A x^{m-1} = b_pos` with the shift `s`.
///
/// `B x^{m-1}` is never formed: `B x^{m-1} + b = s x^{m-1} - (A x^{m-1} - b)`.
pub fn jacobi_fixed_point(
    a: &SquareTensor,
    s: f64,
    b_pos: &[f64],
    cfg: &BootstrapConfig,
) -> Result<PositiveSolution, BootstrapError> {
    let a = a.clone().into_canonical();
    let degree = a.order() - 1;
    let threshold = cfg.inner_tol * (1.0 + norm2(b_pos));
    let mut x: Vec<f64> = b_pos.iter().map(|&v| root(v.max(0.0) / s, degree)).collect();
    let mut max_decrease = 0.0_f64;
    let mut residual = f64::INFINITY;
    for it in 0..=cfg.inner_maxit {
        let ax = a.contract_m1(&x)?;
        let f: Vec<f64> = ax.iter().zip(b_pos).map(|(p, q)| p - q).collect();
        residual = norm2(&f);
        if residual <= threshold {
            return Ok(PositiveSolution {
                x,
                iterations: it,
                residual_norm: residual,
                max_decrease,
            });
        }
        if !residual.is_finite() {
            break;
        }
        for (xi, fi) in x.iter_mut().zip(&f) {
            let next = root((xi.powi(degree as i32) - fi / s).max(0.0), degree);
            max_decrease = max_decrease.max(*xi - next);
            *xi = next;
        }
    }
    Err(BootstrapError::NotConverged {
        iterations: cfg.inner_maxit,
        residual,
    })
}

/// Positive solution of `A x^{m-1} = b_pos` for `b_pos > 0`.
///
/// After the fixed point converges, `x` is rescaled by the smallest
/// `t >= 1` with `t^{m-1} A x^{m-1} >= b_pos`, which removes the tiny
/// negative residuals the sub-solution iterates carry.
pub fn solve_positive(
    a: &SquareTensor,
    b_pos: &[f64],
    cfg: &BootstrapConfig,
) -> Result<Vec<f64>, BootstrapError> {
    if let Some((index, &value)) = b_pos.iter().enumerate().find(|(_, &v)| !(v >= 0.0)) {
        return Err(BootstrapError::NegativeRhs { index, value });
    }
    if b_pos.len() != a.dim() {
        return Err(TensorError::DimensionMismatch {
            expected: a.dim(),
            got: b_pos.len(),
        }
        .into());
    }
    let split = structure::row_sum_bound(a, 0.0)?;
    let mut x = jacobi_fixed_point(a, split.s, b_pos, cfg)?.x;

    let degree = a.order() - 1;
    let ax = a.contract_m1(&x)?;
    let mut lift = 1.0_f64;
    for (&y, &b) in ax.iter().zip(b_pos) {
        if b > 0.0 {
            if !(y > 0.0) {
                return Err(BootstrapError::NotConverged {
                    iterations: cfg.inner_maxit,
                    residual: f64::NAN,
                });
            }
            lift = lift.max(b / y);
        }
    }
    if lift > 1.0 {
        // One extra ulp keeps rounding in the rescaled product on the safe side.
        let t = root(lift, degree) * (1.0 + 2.0 * f64::EPSILON);
        x.iter_mut().for_each(|v| *v *= t);
    }
    Ok(x)
}

/// Where a starting point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartSource {
    User,
    Bootstrap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartPoint {
    pub x: Vec<f64>,
    pub source: StartSource,
    /// Why a user-supplied point was rejected, if one was.
    pub rejected: Option<String>,
}

/// Returns `user_x0` when it is nonnegative and feasible
/// (`F(x0) >= -eps_active`), otherwise the bootstrap point.
pub fn make_start(
    a: &SquareTensor,
    b: &[f64],
    user_x0: Option<&[f64]>,
    cfg: &BootstrapConfig,
    eps_active: f64,
) -> Result<StartPoint, BootstrapError> {
    if let Some((index, &value)) = b.iter().enumerate().find(|(_, &v)| !(v >= 0.0)) {
        return Err(BootstrapError::NegativeRhs { index, value });
    }
    let mut rejected = None;
    if let Some(x0) = user_x0 {
        match check_feasible(a, b, x0, eps_active) {
            Ok(()) => {
                return Ok(StartPoint {
                    x: x0.to_vec(),
                    source: StartSource::User,
                    rejected: None,
                })
            }
            Err(reason) => rejected = Some(reason),
        }
    }
    let b_pos = perturb_rhs(b, cfg.epsilon_value);
    let x = solve_positive(a, &b_pos, cfg)?;
    let f = a.contract_m1(&x)?;
    for (index, (fi, bi)) in f.iter().zip(b).enumerate() {
        let value = fi - bi;
        if value < -eps_active {
            return Err(BootstrapError::Infeasible { index, value });
        }
    }
    Ok(StartPoint {
        x,
        source: StartSource::Bootstrap,
        rejected,
    })
}

fn check_feasible(a: &SquareTensor, b: &[f64], x0: &[f64], eps_active: f64) -> Result<(), String> {
    if x0.len() != a.dim() {
        return Err(format!(
            "x0 has length {}, expected {}",
            x0.len(),
            a.dim()
        ));
    }
    if let Some((i, v)) = x0.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
        return Err(format!("x0[{i}] = {v} is not a finite nonnegative value"));
    }
    let ax = a.contract_m1(x0).map_err(|e| e.to_string())?;
    for (i, (p, q)) in ax.iter().zip(b).enumerate() {
        if p - q < -eps_active {
            return Err(format!("F(x0)[{i}] = {:.6e} is negative", p - q));
        }
    }
    Ok(())
}
