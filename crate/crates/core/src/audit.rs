//! Per-iteration invariant checks for the solver.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::npa::{IterationObserver, IterationView};
use crate::structure;

/// Which invariant an iteration broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Invariant {
    /// `0 <= x^{k+1} <= x^k` within `eps_active`.
    MonotoneDecrease,
    /// `F(x^k) >= -eps_active`.
    Feasibility,
    /// `J^k` is contained in `J^{k+1}`.
    ZeroSetGrowth,
    /// `[F'(x^k)]_{II}` is a nonsingular M-matrix.
    ReducedJacobian,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Iteration index, or `None` for the final iterate.
    pub iter: Option<usize>,
    pub invariant: Invariant,
    pub detail: String,
}

/// Records invariant violations along a solve.
///
/// In strict mode the first violation stops the solve; otherwise every
/// violation is collected and the solve runs to completion.
#[derive(Debug, Default, Clone)]
pub struct InvariantAudit {
    pub strict: bool,
    pub violations: Vec<Violation>,
    pub iterations_checked: usize,
    /// Reduced Jacobians certified with `w = x_I`.
    pub certified_by_iterate: usize,
    /// Reduced Jacobians that needed the fallback probes.
    pub certified_by_probe: usize,
    prev_zero_set: Option<BTreeSet<usize>>,
}

impl InvariantAudit {
    pub fn new(strict: bool) -> Self {
        Self {
            strict,
            ..Self::default()
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, iter: Option<usize>, invariant: Invariant, detail: String) -> Result<(), String> {
        let v = Violation {
            iter,
            invariant,
            detail,
        };
        let msg = format!("{:?}: {}", v.invariant, v.detail);
        self.violations.push(v);
        if self.strict {
            Err(msg)
        } else {
            Ok(())
        }
    }

    fn check_feasible(&mut self, iter: Option<usize>, f: &[f64], eps: f64) -> Result<(), String> {
        if let Some((i, v)) = f.iter().enumerate().find(|(_, &v)| !(v >= -eps)) {
            return self.record(iter, Invariant::Feasibility, format!("F[{i}] = {v:.6e}"));
        }
        Ok(())
    }

    fn check_zero_set(&mut self, iter: Option<usize>, current: BTreeSet<usize>) -> Result<(), String> {
        let lost = self
            .prev_zero_set
            .as_ref()
            .and_then(|prev| prev.difference(&current).next().copied());
        self.prev_zero_set = Some(current);
        if let Some(i) = lost {
            return self.record(iter, Invariant::ZeroSetGrowth, format!("index {i} left the zero set"));
        }
        Ok(())
    }
}

impl IterationObserver for InvariantAudit {
    fn on_iteration(&mut self, view: &IterationView<'_>) -> Result<(), String> {
        let k = Some(view.iter);
        let eps = view.eps_active;
        self.iterations_checked += 1;

        self.check_feasible(k, view.f, eps)?;

        let step = view
            .x
            .iter()
            .zip(view.next)
            .enumerate()
            .find(|(_, (&old, &new))| !(new >= 0.0 && new <= old + eps));
        if let Some((i, (old, new))) = step {
            self.record(
                k,
                Invariant::MonotoneDecrease,
                format!("x[{i}] went from {old:.17e} to {new:.17e}"),
            )?;
        }

        self.check_zero_set(k, view.partition.zero_set.iter().copied().collect())?;

        if let Some(m) = view.reduced_jacobian {
            let w: Vec<f64> = view.partition.active.iter().map(|&i| view.x[i]).collect();
            if structure::certify_m_matrix_with(m, &w).is_some() {
                self.certified_by_iterate += 1;
            } else if structure::certify_m_matrix(m).is_some() {
                self.certified_by_probe += 1;
            } else {
                self.record(
                    k,
                    Invariant::ReducedJacobian,
                    format!("no certificate for the {0}x{0} reduced Jacobian", m.nrows()),
                )?;
            }
        }
        Ok(())
    }

    fn on_finish(&mut self, x: &[f64], f: &[f64], eps_active: f64) -> Result<(), String> {
        self.check_feasible(None, f, eps_active)?;
        if let Some((i, v)) = x.iter().enumerate().find(|(_, &v)| !(v >= 0.0)) {
            self.record(None, Invariant::MonotoneDecrease, format!("final x[{i}] = {v:.6e}"))?;
        }
        let zero_set = (0..x.len())
            .filter(|&i| f[i] <= eps_active && x[i] <= eps_active)
            .collect();
        self.check_zero_set(None, zero_set)
    }
}
