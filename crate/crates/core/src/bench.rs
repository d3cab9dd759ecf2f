//! Batch solves with invariant auditing and solution-type summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::audit::InvariantAudit;
use crate::exec::{map_collect, Execution};
use crate::generate::ProblemInstance;
use crate::io::fmt_e16;
use crate::npa::{solve_observed, SolveStatus, SolverConfig, ZERO_COMPONENT_THRESHOLD};

/// A run counts as solved when its final `ReErr` is below this.
pub const SUCCESS_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionClass {
    /// At least `n / 3` zero components.
    NonnegativeSparse,
    NonnegativeWithZeros,
    FullyPositive,
    /// Some component below `-1e-5`.
    Negative,
}

impl SolutionClass {
    pub const ALL: [SolutionClass; 4] = [
        SolutionClass::NonnegativeSparse,
        SolutionClass::NonnegativeWithZeros,
        SolutionClass::FullyPositive,
        SolutionClass::Negative,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SolutionClass::NonnegativeSparse => "nonnegative-sparse",
            SolutionClass::NonnegativeWithZeros => "nonnegative-with-zeros",
            SolutionClass::FullyPositive => "fully-positive",
            SolutionClass::Negative => "negative",
        }
    }
}

/// Components with `|x_i| < 1e-5` count as zero.
pub fn classify_solution(x: &[f64]) -> SolutionClass {
    if x.iter().any(|&v| v < -ZERO_COMPONENT_THRESHOLD) {
        return SolutionClass::Negative;
    }
    let zeros = x.iter().filter(|&&v| v < ZERO_COMPONENT_THRESHOLD).count();
    if zeros == 0 {
        SolutionClass::FullyPositive
    } else if 3 * zeros >= x.len() {
        SolutionClass::NonnegativeSparse
    } else {
        SolutionClass::NonnegativeWithZeros
    }
}

/// Where each solve starts.
#[derive(Debug, Clone, PartialEq)]
pub enum StartSpec {
    /// The bootstrap point.
    Auto,
    /// Every component set to the same value.
    Constant(f64),
    Vector(Vec<f64>),
}

impl StartSpec {
    pub fn resolve(&self, n: usize) -> Result<Option<Vec<f64>>, String> {
        match self {
            StartSpec::Auto => Ok(None),
            StartSpec::Constant(v) => Ok(Some(vec![*v; n])),
            StartSpec::Vector(x) if x.len() == n => Ok(Some(x.clone())),
            StartSpec::Vector(x) => Err(format!("x0 has {} components, instance has n = {n}", x.len())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    /// A [`SolveStatus`] name, or `error` when the solve was refused.
    pub status: String,
    pub iterations: usize,
    pub re_err: f64,
    pub wall_time_s: f64,
    pub success: bool,
    /// Present for successful runs.
    pub class: Option<SolutionClass>,
    pub violations: usize,
    pub min_x: f64,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub format: u64,
    pub total: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub failure_rate: f64,
    /// Fractions of successful runs per class; they sum to 1 when any run
    /// succeeded.
    pub class_rates: BTreeMap<&'static str, f64>,
    pub class_counts: BTreeMap<&'static str, usize>,
    pub invariant_violations: usize,
    pub mean_iterations: f64,
    pub mean_wall_time_s: f64,
    pub rows: Vec<BenchRow>,
}

impl BenchSummary {
    pub fn from_rows(mut rows: Vec<BenchRow>) -> Self {
        rows.sort_by_key(|r| r.seed);
        let total = rows.len();
        let successes = rows.iter().filter(|r| r.success).count();
        let mut class_counts: BTreeMap<&'static str, usize> =
            SolutionClass::ALL.iter().map(|c| (c.as_str(), 0)).collect();
        for c in rows.iter().filter_map(|r| r.class) {
            *class_counts.get_mut(c.as_str()).expect("all classes present") += 1;
        }
        let class_rates = class_counts
            .iter()
            .map(|(&k, &v)| (k, if successes > 0 { v as f64 / successes as f64 } else { 0.0 }))
            .collect();
        let mean = |f: &dyn Fn(&BenchRow) -> f64| {
            if total == 0 {
                0.0
            } else {
                rows.iter().map(f).sum::<f64>() / total as f64
            }
        };
        let rate = |k: usize| if total == 0 { 0.0 } else { k as f64 / total as f64 };
        Self {
            format: crate::io::FORMAT_VERSION,
            total,
            successes,
            success_rate: rate(successes),
            failure_rate: rate(total - successes),
            class_rates,
            class_counts,
            invariant_violations: rows.iter().map(|r| r.violations).sum(),
            mean_iterations: mean(&|r| r.iterations as f64),
            mean_wall_time_s: mean(&|r| r.wall_time_s),
            rows,
        }
    }

    /// One line per instance: `seed,m,n,status,iterations,ReErr,wall_time_s,class,violations`.
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("seed,m,n,status,iterations,ReErr,wall_time_s,class,violations\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.seed,
                r.m,
                r.n,
                r.status,
                r.iterations,
                fmt_e16(r.re_err),
                fmt_e16(r.wall_time_s),
                r.class.map_or("", |c| c.as_str()),
                r.violations
            );
        }
        out
    }
}

/// Solves one instance with a strict invariant audit.
pub fn bench_one(inst: &ProblemInstance, start: &StartSpec, cfg: &SolverConfig) -> BenchRow {
    let (m, n) = (inst.a.order(), inst.a.dim());
    let mut row = BenchRow {
        seed: inst.seed,
        m,
        n,
        status: "error".into(),
        iterations: 0,
        re_err: f64::NAN,
        wall_time_s: 0.0,
        success: false,
        class: None,
        violations: 0,
        min_x: f64::NAN,
        message: None,
    };
    let x0 = match start.resolve(n) {
        Ok(x0) => x0,
        Err(e) => {
            row.message = Some(e);
            return row;
        }
    };
    let mut audit = InvariantAudit::new(true);
    match solve_observed(&inst.a, &inst.b, x0.as_deref(), cfg, &mut audit) {
        Ok(r) => {
            row.status = r.status.as_str().to_string();
            row.iterations = r.iterations;
            row.re_err = r.re_err;
            row.wall_time_s = r.wall_time.as_secs_f64();
            row.success = r.status != SolveStatus::InvariantViolated && r.re_err < SUCCESS_THRESHOLD;
            row.class = row.success.then(|| classify_solution(&r.x));
            row.violations = audit.violations.len();
            row.min_x = r.x.iter().copied().fold(f64::INFINITY, f64::min);
            row.message = r.message;
        }
        Err(e) => row.message = Some(e.to_string()),
    }
    row
}

/// Benchmarks every item, loading each instance on demand so large
/// corpora need not sit in memory at once.
pub fn run_bench<T, L>(items: &[T], load: L, start: &StartSpec, cfg: &SolverConfig, exec: Execution) -> BenchSummary
where
    T: Sync,
    L: Fn(&T) -> Result<ProblemInstance, String> + Sync + Send,
{
    let rows = map_collect(items, exec, |item| match load(item) {
        Ok(inst) => bench_one(&inst, start, cfg),
        Err(e) => BenchRow {
            seed: 0,
            m: 0,
            n: 0,
            status: "error".into(),
            iterations: 0,
            re_err: f64::NAN,
            wall_time_s: 0.0,
            success: false,
            class: None,
            violations: 0,
            min_x: f64::NAN,
            message: Some(e),
        },
    });
    BenchSummary::from_rows(rows)
}
