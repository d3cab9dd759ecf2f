//! The nonnegativity-preserving Newton-type iteration.
//!
//! Each iteration starts from a feasible point (`x >= 0`, `F(x) >= 0`
//! with `F(x) = A x^{m-1} - b`) and
//!
//! 1. splits the indices into the largest-residual index `j`, the other
//!    positive-residual indices `I` and the zero-residual indices `Ibar`;
//! 2. shrinks `x_j` towards zero by backtracking on `delta1^p` until
//!    `F_j` is still nonnegative;
//! 3. takes a Newton step on the block `I` (with `x_j` and `x_Ibar` held
//!    fixed) and backtracks on `delta2^q` until `F_I` is still
//!    nonnegative.
//!
//! Both updates only ever decrease `x`, so the iterates form a
//! componentwise nonincreasing, nonnegative sequence.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bootstrap::{self, BootstrapConfig, StartSource};
use crate::linsolve::{self, LinearMethod, LinearSolveError, LinearSolveOptions, LinearSolveReport};
use crate::structure::{self, StructureError};
use crate::tensor::{SquareTensor, TensorError};

/// Components below this value count as zero when classifying solutions.
pub const ZERO_COMPONENT_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub delta1: f64,
    pub delta2: f64,
    /// Stop once `ReErr <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub p_max: u32,
    pub q_max: u32,
    /// Residuals at or below this value count as zero. `None` picks
    /// `1e-12 * (1 + ||b_scaled||_inf)`.
    pub eps_active: Option<f64>,
    pub direct_threshold: usize,
    pub lin_tol: f64,
    pub lin_maxit: Option<usize>,
    /// Kernels are row-partitioned and order-stable, so runs are
    /// bit-reproducible either way; the flag is carried into reports.
    pub deterministic: bool,
    /// Refuse tensors that cannot be certified as nonsingular M-tensors.
    pub require_certificate: bool,
    pub bootstrap: BootstrapConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta1: 0.2,
            delta2: 0.5,
            tol: 1e-10,
            max_iter: 2000,
            p_max: 64,
            q_max: 64,
            eps_active: None,
            direct_threshold: 20,
            lin_tol: 1e-12,
            lin_maxit: None,
            deterministic: false,
            require_certificate: true,
            bootstrap: BootstrapConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |what: &str| Err(SolveError::InvalidConfig(what.to_string()));
        if !(self.delta1 > 0.0 && self.delta1 < 1.0) {
            return bad("delta1 must lie in (0, 1)");
        }
        if !(self.delta2 > 0.0 && self.delta2 < 1.0) {
            return bad("delta2 must lie in (0, 1)");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if let Some(e) = self.eps_active {
            if !(e >= 0.0) {
                return bad("eps_active must be nonnegative");
            }
        }
        if !(self.bootstrap.epsilon_value > 0.0) {
            return bad("bootstrap epsilon must be positive");
        }
        Ok(())
    }

    fn linear_options(&self) -> LinearSolveOptions {
        LinearSolveOptions {
            direct_threshold: self.direct_threshold,
            lin_tol: self.lin_tol,
            lin_maxit: self.lin_maxit,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("right-hand side has length {got}, tensor dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("right-hand side component {index} is {value}; expected a finite nonnegative value")]
    InvalidRhs { index: usize, value: f64 },
    #[error("coefficient tensor and right-hand side are identically zero")]
    ZeroProblem,
    #[error("coefficient tensor could not be certified as a nonsingular M-tensor")]
    NotCertified,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("coordinate backtracking on index {j} exceeded p_max = {p_max}")]
    CoordinateBacktrack { j: usize, p_max: u32 },
    #[error("Newton backtracking exceeded q_max = {q_max}")]
    NewtonBacktrack { q_max: u32 },
    #[error("reduced Newton system: {0}")]
    Linear(#[from] LinearSolveError),
}

/// `A / kappa`, `b / kappa` with `kappa` the largest absolute entry of
/// `A` and `b`. Solutions are unchanged by the scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledProblem {
    pub a: SquareTensor,
    pub b: Vec<f64>,
    pub kappa: f64,
}

impl ScaledProblem {
    pub fn new(a: &SquareTensor, b: &[f64]) -> Result<Self, SolveError> {
        if b.len() != a.dim() {
            return Err(SolveError::DimensionMismatch {
                expected: a.dim(),
                got: b.len(),
            });
        }
        let kappa = b.iter().fold(a.max_abs(), |acc, v| acc.max(v.abs()));
        if kappa == 0.0 {
            return Err(SolveError::ZeroProblem);
        }
        Ok(Self {
            a: a.divided_by(kappa),
            b: b.iter().map(|v| v / kappa).collect(),
            kappa,
        })
    }
}

/// `F(x) = A x^{m-1} - b`.
pub fn residual(a: &SquareTensor, b: &[f64], x: &[f64]) -> Result<Vec<f64>, TensorError> {
    if b.len() != a.dim() {
        return Err(TensorError::DimensionMismatch {
            expected: a.dim(),
            got: b.len(),
        });
    }
    let mut f = a.contract_m1(x)?;
    f.iter_mut().zip(b).for_each(|(fi, bi)| *fi -= bi);
    Ok(f)
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Index classification of one iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivePartition {
    /// Index of the largest residual.
    pub j: usize,
    /// Positive-residual indices other than `j`, ascending.
    pub active: Vec<usize>,
    /// Zero-residual indices, ascending.
    pub inactive: Vec<usize>,
    /// Indices of `inactive` whose iterate is also zero.
    pub zero_set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    /// Every residual is within `eps_active` of zero.
    Solved,
    Partition(ActivePartition),
}

/// Classifies residuals: `F_l <= eps` is zero, `j` is the first index of
/// the largest remaining residual.
pub fn classify(f: &[f64], x: &[f64], eps_active: f64) -> Classification {
    let mut inactive = Vec::new();
    let mut positive = Vec::new();
    for (i, &fi) in f.iter().enumerate() {
        if fi <= eps_active {
            inactive.push(i);
        } else {
            positive.push(i);
        }
    }
    let Some(&first) = positive.first() else {
        return Classification::Solved;
    };
    let j = positive
        .iter()
        .copied()
        .fold(first, |best, i| if f[i] > f[best] { i } else { best });
    let active = positive.into_iter().filter(|&i| i != j).collect();
    let zero_set = inactive
        .iter()
        .copied()
        .filter(|&i| x[i] <= eps_active)
        .collect();
    Classification::Partition(ActivePartition {
        j,
        active,
        inactive,
        zero_set,
    })
}

/// Backtracks `x_j <- x_j - delta1^p x_j` for `p = 0, 1, ...` and returns
/// the first value keeping `F_j >= 0`, with its exponent. `p = 0` sets the
/// component to exactly zero.
pub fn coordinate_step(
    a: &SquareTensor,
    b: &[f64],
    x: &[f64],
    j: usize,
    delta1: f64,
    p_max: u32,
) -> Result<(f64, u32), StepError> {
    if x.len() != a.dim() {
        return Err(TensorError::DimensionMismatch {
            expected: a.dim(),
            got: x.len(),
        }
        .into());
    }
    let canonical;
    let a = if a.is_canonical() {
        a
    } else {
        canonical = a.clone().into_canonical();
        &canonical
    };
    let xj = x[j];
    let mut trial = x.to_vec();
    let mut t = 1.0_f64;
    for p in 0..=p_max {
        let v = if p == 0 { 0.0 } else { xj - t * xj };
        trial[j] = v;
        if a.contract_m1_row(j, &trial) - b[j] >= 0.0 {
            return Ok((v, p));
        }
        t *= delta1;
    }
    Err(StepError::CoordinateBacktrack { j, p_max })
}

/// Result of the Newton update on the active block.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStep {
    /// New values of `x` on `partition.active`, in the same order.
    pub x_active: Vec<f64>,
    pub q: u32,
    /// Full Newton direction on the active block.
    pub direction: Vec<f64>,
    pub reduced_jacobian: DMatrix<f64>,
    pub linear: LinearSolveReport,
}

/// Principal submatrix `m[idx, idx]`.
pub fn principal_submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

/// Newton step on the active block: solves
/// `[F'(x)]_{II} d_I = -F_I(x)` and backtracks `x_I + delta2^q d_I` until
/// `F_I >= 0` at the trial point (with `x_j` still at its old value).
///
/// `abar` must be the semi-symmetrized form of `a` and `f = F(x)`.
/// Returns `None` when the active block is empty.
pub fn newton_step(
    a: &SquareTensor,
    abar: &SquareTensor,
    b: &[f64],
    x: &[f64],
    f: &[f64],
    partition: &ActivePartition,
    cfg: &SolverConfig,
) -> Result<Option<NewtonStep>, StepError> {
    let idx = &partition.active;
    if idx.is_empty() {
        return Ok(None);
    }
    let jac = abar.jacobian(x)?;
    let reduced = principal_submatrix(&jac, idx);
    let rhs: Vec<f64> = idx.iter().map(|&i| f[i]).collect();
    let linear = linsolve::solve_m_system(&reduced, &rhs, &cfg.linear_options())?;
    let direction: Vec<f64> = linear.solution.iter().map(|v| -v).collect();

    let mut trial = x.to_vec();
    let mut t = 1.0_f64;
    for q in 0..=cfg.q_max {
        for (&i, d) in idx.iter().zip(&direction) {
            trial[i] = x[i] + t * d;
        }
        if idx.iter().all(|&i| trial[i] >= 0.0) {
            let g = a.contract_m1_rows(idx, &trial)?;
            if g.iter().zip(idx).all(|(gi, &i)| gi - b[i] >= 0.0) {
                return Ok(Some(NewtonStep {
                    x_active: idx.iter().map(|&i| trial[i]).collect(),
                    q,
                    direction,
                    reduced_jacobian: reduced,
                    linear,
                }));
            }
        }
        t *= cfg.delta2;
    }
    Err(StepError::NewtonBacktrack { q_max: cfg.q_max })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    Maxiter,
    BacktrackFailure,
    BootstrapFailure,
    LinearSolveFailure,
    /// Every residual is inside the zero band but `ReErr > tol`.
    Stalled,
    InvariantViolated,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::Maxiter => "maxiter",
            SolveStatus::BacktrackFailure => "backtrack-failure",
            SolveStatus::BootstrapFailure => "bootstrap-failure",
            SolveStatus::LinearSolveFailure => "linear-solve-failure",
            SolveStatus::Stalled => "stalled",
            SolveStatus::InvariantViolated => "invariant-violated",
        }
    }
}

/// One row of the iteration trace. The terminal row (where the stopping
/// test fired) has no step exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub re_err: f64,
    pub x_norm: f64,
    pub card_active: usize,
    pub card_inactive: usize,
    pub card_zero_set: usize,
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub linear_method: Option<LinearMethod>,
    pub linear_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Final iterate (in original units; scaling does not move solutions).
    pub x: Vec<f64>,
    /// `||A_scaled x^{m-1} - b_scaled||_2` at `x`.
    pub re_err: f64,
    /// Number of completed steps.
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
    pub wall_time: Duration,
    pub kappa: f64,
    pub eps_active: f64,
    pub start_source: Option<StartSource>,
    /// Diagnostic for non-converged runs or a rejected user start.
    pub message: Option<String>,
    pub deterministic: bool,
}

/// Everything an observer sees about one completed step.
#[derive(Debug)]
pub struct IterationView<'a> {
    pub iter: usize,
    /// `x^k` in scaled units (identical to original units).
    pub x: &'a [f64],
    /// `F(x^k)` of the scaled problem.
    pub f: &'a [f64],
    pub partition: &'a ActivePartition,
    /// `x^{k+1}`.
    pub next: &'a [f64],
    /// `[F'(x^k)]_{II}`, absent when `I` is empty.
    pub reduced_jacobian: Option<&'a DMatrix<f64>>,
    pub eps_active: f64,
}

/// Hook called after every step and once at termination. An `Err`
/// stops the solve with [`SolveStatus::InvariantViolated`].
pub trait IterationObserver {
    fn on_iteration(&mut self, view: &IterationView<'_>) -> Result<(), String>;

    fn on_finish(&mut self, _x: &[f64], _f: &[f64], _eps_active: f64) -> Result<(), String> {
        Ok(())
    }
}

impl IterationObserver for () {
    fn on_iteration(&mut self, _view: &IterationView<'_>) -> Result<(), String> {
        Ok(())
    }
}

/// Solves `A x^{m-1} = b` for a nonsingular M-tensor `A` and `b >= 0`.
pub fn solve(
    a: &SquareTensor,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<SolveReport, SolveError> {
    solve_observed(a, b, x0, cfg, &mut ())
}

/// [`solve`] with an [`IterationObserver`].
pub fn solve_observed<O: IterationObserver + ?Sized>(
    a: &SquareTensor,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
    observer: &mut O,
) -> Result<SolveReport, SolveError> {
    let started = Instant::now();
    cfg.validate()?;
    if let Some((index, &value)) = b
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0 && v.is_finite()))
    {
        return Err(SolveError::InvalidRhs { index, value });
    }
    let problem = ScaledProblem::new(a, b)?;
    let (sa, sb) = (&problem.a, &problem.b);
    if cfg.require_certificate && !structure::certify_m_tensor(sa)?.is_certified() {
        return Err(SolveError::NotCertified);
    }
    let b_inf = sb.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let eps_active = cfg.eps_active.unwrap_or(1e-12 * (1.0 + b_inf));

    let mut report = SolveReport {
        status: SolveStatus::Maxiter,
        x: Vec::new(),
        re_err: f64::NAN,
        iterations: 0,
        trace: Vec::new(),
        wall_time: Duration::ZERO,
        kappa: problem.kappa,
        eps_active,
        start_source: None,
        message: None,
        deterministic: cfg.deterministic,
    };

    let start = match bootstrap::make_start(sa, sb, x0, &cfg.bootstrap, eps_active) {
        Ok(s) => s,
        Err(e) => {
            report.status = SolveStatus::BootstrapFailure;
            report.message = Some(e.to_string());
            report.x = x0.map(<[f64]>::to_vec).unwrap_or_default();
            report.wall_time = started.elapsed();
            return Ok(report);
        }
    };
    report.start_source = Some(start.source);
    report.message = start.rejected.map(|r| format!("user start rejected: {r}"));
    let abar = sa.semi_symmetrize();
    let mut x = start.x;

    let mut k = 0usize;
    let final_f = loop {
        let f = residual(sa, sb, &x)?;
        let re_err = norm2(&f);
        let x_norm = norm2(&x);
        report.re_err = re_err;
        let terminal = |partition: Option<&ActivePartition>| IterationRecord {
            iter: k,
            re_err,
            x_norm,
            card_active: partition.map_or(0, |p| p.active.len()),
            card_inactive: partition.map_or(f.len(), |p| p.inactive.len()),
            card_zero_set: partition.map_or_else(
                || x.iter().filter(|&&v| v <= eps_active).count(),
                |p| p.zero_set.len(),
            ),
            p: None,
            q: None,
            linear_method: None,
            linear_iterations: None,
        };
        if re_err <= cfg.tol {
            report.trace.push(terminal(None));
            report.status = SolveStatus::Converged;
            break f;
        }
        let partition = match classify(&f, &x, eps_active) {
            Classification::Solved => {
                report.trace.push(terminal(None));
                report.status = SolveStatus::Stalled;
                report.message = Some(format!(
                    "all residuals within {eps_active:.3e} but ReErr = {re_err:.3e}"
                ));
                break f;
            }
            Classification::Partition(p) => p,
        };
        if k >= cfg.max_iter {
            report.trace.push(terminal(Some(&partition)));
            report.status = SolveStatus::Maxiter;
            break f;
        }

        let step = coordinate_step(sa, sb, &x, partition.j, cfg.delta1, cfg.p_max).and_then(
            |(xj, p)| {
                newton_step(sa, &abar, sb, &x, &f, &partition, cfg).map(|n| (xj, p, n))
            },
        );
        let (xj, p, newton) = match step {
            Ok(s) => s,
            Err(e) => {
                report.trace.push(terminal(Some(&partition)));
                report.status = match e {
                    StepError::Linear(_) => SolveStatus::LinearSolveFailure,
                    _ => SolveStatus::BacktrackFailure,
                };
                report.message = Some(e.to_string());
                break f;
            }
        };

        let mut next = x.clone();
        next[partition.j] = xj;
        if let Some(n) = &newton {
            for (&i, &v) in partition.active.iter().zip(&n.x_active) {
                next[i] = v;
            }
        }
        report.trace.push(IterationRecord {
            iter: k,
            re_err,
            x_norm,
            card_active: partition.active.len(),
            card_inactive: partition.inactive.len(),
            card_zero_set: partition.zero_set.len(),
            p: Some(p),
            q: newton.as_ref().map(|n| n.q),
            linear_method: newton.as_ref().map(|n| n.linear.method),
            linear_iterations: newton.as_ref().map(|n| n.linear.iterations),
        });
        let view = IterationView {
            iter: k,
            x: &x,
            f: &f,
            partition: &partition,
            next: &next,
            reduced_jacobian: newton.as_ref().map(|n| &n.reduced_jacobian),
            eps_active,
        };
        if let Err(msg) = observer.on_iteration(&view) {
            report.status = SolveStatus::InvariantViolated;
            report.message = Some(format!("iteration {k}: {msg}"));
            x = next;
            report.iterations = k + 1;
            report.re_err = norm2(&residual(sa, sb, &x)?);
            report.x = x;
            report.wall_time = started.elapsed();
            return Ok(report);
        }
        x = next;
        k += 1;
    };

    report.iterations = k;
    if let Err(msg) = observer.on_finish(&x, &final_f, eps_active) {
        report.status = SolveStatus::InvariantViolated;
        report.message = Some(format!("final iterate: {msg}"));
    }
    report.x = x;
    report.wall_time = started.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1() -> SquareTensor {
        SquareTensor::canonical_from_entries(
            4,
            2,
            [
                (vec![0, 0, 0, 0], 1.0),
                (vec![1, 1, 1, 1], 1.0),
                (vec![0, 0, 0, 1], -2.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn residual_at_known_solutions() {
        let a = example1();
        assert_eq!(residual(&a, &[0.0, 1.0], &[2.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(residual(&a, &[0.0, 1.0], &[0.0, 1.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn classify_examples() {
        let c = classify(&[3.0, 0.0, 1.0], &[1.0, 0.0, 2.0], 0.0);
        assert_eq!(
            c,
            Classification::Partition(ActivePartition {
                j: 0,
                active: vec![2],
                inactive: vec![1],
                zero_set: vec![1],
            })
        );
        match classify(&[2.0, 2.0], &[1.0, 1.0], 0.0) {
            Classification::Partition(p) => {
                assert_eq!(p.j, 0);
                assert_eq!(p.active, vec![1]);
            }
            _ => panic!(),
        }
        assert_eq!(classify(&[0.0, 0.0], &[1.0, 1.0], 0.0), Classification::Solved);
        assert_eq!(classify(&[1e-13, -1e-13], &[1.0, 1.0], 1e-12), Classification::Solved);
    }

    #[test]
    fn coordinate_step_examples() {
        let a = example1();
        // F = (6400, 0); x_1 can go straight to zero.
        assert_eq!(
            coordinate_step(&a, &[0.0, 8.0], &[20.0, 2.0], 0, 0.2, 64).unwrap(),
            (0.0, 0)
        );
        // g(0) = -8 < 0, g(1) at x_1 = 16 is positive.
        assert_eq!(
            coordinate_step(&a, &[8.0, 0.0], &[20.0, 0.0], 0, 0.2, 64).unwrap(),
            (16.0, 1)
        );
        assert!(matches!(
            coordinate_step(&a, &[8.0, 0.0], &[1.0, 0.0], 0, 0.2, 3),
            Err(StepError::CoordinateBacktrack { j: 0, p_max: 3 })
        ));
    }

    #[test]
    fn newton_step_skips_empty_block() {
        let a = example1();
        let abar = a.semi_symmetrize();
        let p = ActivePartition {
            j: 0,
            active: vec![],
            inactive: vec![1],
            zero_set: vec![],
        };
        let out = newton_step(&a, &abar, &[0.0, 8.0], &[20.0, 2.0], &[6400.0, 0.0], &p, &SolverConfig::default())
            .unwrap();
        assert!(out.is_none());
    }

    #[test]
    fn newton_step_on_diagonal_block_is_exact() {
        // F_1(x) = x_1^2 - 1 on the identity; from x = (2, 2) with j = 0
        // the active block {1} takes a full Newton step to 1.25.
        let a = SquareTensor::identity(3, 2).unwrap();
        let abar = a.semi_symmetrize();
        let b = [1.0, 1.0];
        let x = [2.0, 2.0];
        let f = residual(&a, &b, &x).unwrap();
        let p = ActivePartition {
            j: 0,
            active: vec![1],
            inactive: vec![],
            zero_set: vec![],
        };
        let step = newton_step(&a, &abar, &b, &x, &f, &p, &SolverConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(step.q, 0);
        assert!((step.x_active[0] - 1.25).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.delta1 = 1.0;
        assert!(cfg.validate().is_err());
        cfg = SolverConfig {
            tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_negative_rhs() {
        let a = example1();
        assert!(matches!(
            solve(&a, &[-1.0, 1.0], None, &SolverConfig::default()),
            Err(SolveError::InvalidRhs { index: 0, .. })
        ));
    }

    #[test]
    fn example2_first_scenario_from_feasible_start() {
        let a = example1();
        let rep = solve(&a, &[0.0, 8.0], Some(&[0.0, 20.0]), &SolverConfig::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert_eq!(rep.start_source, Some(StartSource::User));
        assert!(rep.x[0].abs() < 1e-8 && (rep.x[1] - 2.0).abs() < 1e-8);
        assert_eq!(rep.trace.last().unwrap().re_err, rep.re_err);
    }
}
