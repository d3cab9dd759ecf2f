//! Seeded random instances and the fixed small fixtures.
//!
//! All randomness comes from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). A unit draw is
//! `(next_u64 >> 11) * 2^-53`, so a corpus is a pure function of its
//! parameters and seed on every platform.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use thiserror::Error;

use crate::tensor::{SquareTensor, TensorError};

/// Attempts allowed for degenerate or infeasible draws.
pub const REDRAW_BUDGET: u32 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("no valid draw within {0} attempts")]
    RedrawBudgetExhausted(u32),
    #[error("unknown fixture {0:?}; expected one of example1-b01, example2-i, example2-ii")]
    UnknownFixture(String),
}

/// The instance generator's random stream.
pub struct InstanceRng(Xoshiro256PlusPlus);

impl InstanceRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1)`: zero draws are rejected.
    pub fn open_unit(&mut self) -> f64 {
        loop {
            let u = self.unit();
            if u > 0.0 {
                return u;
            }
        }
    }
}

/// A multilinear system `A x^{m-1} = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub a: SquareTensor,
    pub b: Vec<f64>,
    /// A known nonnegative solution, when the instance was built from one.
    pub planted: Option<Vec<f64>>,
    pub seed: u64,
    pub recipe: String,
    /// Draws rejected before this one was accepted.
    pub redraws: u32,
}

fn check_params(m: usize, n: usize, zero_fraction: f64, omega: f64) -> Result<(), GenerateError> {
    if m < 3 {
        return Err(GenerateError::InvalidParameter(format!("m = {m} must be at least 3")));
    }
    if n == 0 {
        return Err(GenerateError::InvalidParameter("n must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&zero_fraction) {
        return Err(GenerateError::InvalidParameter(format!(
            "zero fraction {zero_fraction} must lie in [0, 1)"
        )));
    }
    if !(omega > 0.0) {
        return Err(GenerateError::InvalidParameter(format!("omega {omega} must be positive")));
    }
    Ok(())
}

/// Odometer over all `n^m` index tuples in lexicographic order.
struct Tuples {
    cur: Vec<usize>,
    n: usize,
    done: bool,
}

impl Tuples {
    fn new(m: usize, n: usize) -> Self {
        Self {
            cur: vec![0; m],
            n,
            done: false,
        }
    }

    fn advance(&mut self) {
        for k in (0..self.cur.len()).rev() {
            self.cur[k] += 1;
            if self.cur[k] < self.n {
                return;
            }
            self.cur[k] = 0;
        }
        self.done = true;
    }
}

/// Sparse nonnegative `B`: each of the `n^m` entries is zero with
/// probability `zero_fraction`, otherwise uniform on `(0, 1)`. Returns the
/// nonzeros in lexicographic order.
fn draw_nonnegative(rng: &mut InstanceRng, m: usize, n: usize, zero_fraction: f64) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut t = Tuples::new(m, n);
    while !t.done {
        if rng.unit() >= zero_fraction {
            out.push((t.cur.clone(), rng.open_unit()));
        }
        t.advance();
    }
    out
}

fn row_sums(entries: &[(Vec<usize>, f64)], n: usize) -> Vec<f64> {
    let mut s = vec![0.0; n];
    for (t, v) in entries {
        s[t[0]] += v;
    }
    s
}

/// `s I - B` from the nonzeros of `B`.
fn shifted(m: usize, n: usize, s: f64, b: &[(Vec<usize>, f64)]) -> Result<SquareTensor, TensorError> {
    let mut a = SquareTensor::zeros(m, n)?;
    for i in 0..n {
        a.push(&vec![i; m], s)?;
    }
    for (t, v) in b {
        a.push(t, -v)?;
    }
    Ok(a.into_canonical())
}

/// `A = s I - B` with sparse uniform `B >= 0` and
/// `s = (1 + omega) * max_i sum_t b_{i t}`, which exceeds the row-sum bound
/// on the spectral radius of `B`. An all-zero `B` is re-drawn with the next
/// seed.
pub fn gen_random_mtensor(
    m: usize,
    n: usize,
    zero_fraction: f64,
    omega: f64,
    seed: u64,
) -> Result<SquareTensor, GenerateError> {
    check_params(m, n, zero_fraction, omega)?;
    for attempt in 0..REDRAW_BUDGET {
        let mut rng = InstanceRng::new(seed.wrapping_add(attempt as u64));
        let b = draw_nonnegative(&mut rng, m, n, zero_fraction);
        let maxrow = row_sums(&b, n).into_iter().fold(0.0_f64, f64::max);
        if maxrow > 0.0 {
            return Ok(shifted(m, n, (1.0 + omega) * maxrow, &b)?);
        }
    }
    Err(GenerateError::RedrawBudgetExhausted(REDRAW_BUDGET))
}

/// Random M-tensor with a planted sparse nonnegative solution `x*` and
/// `b = A x*^{m-1} >= 0`.
///
/// Each `x*_i` is zero with probability `1 - solution_density`, otherwise
/// uniform on `(0, 1)`. Plain `b = A x*^{m-1}` is negative on almost every
/// zero component of `x*`, so `B` is adjusted before `A` is formed:
///
/// * in a row `i` with `x*_i = 0`, entries whose trailing indices all lie
///   in the support of `x*` are dropped, which makes `b_i = 0` exactly;
/// * in a row `i` of the support, if the support part of `B x*^{m-1}`
///   reaches `s x*_i^{m-1}`, that part is scaled down to half of it.
///
/// Both adjustments only shrink `B`, so `s` still exceeds every row sum.
/// A draw that still yields a negative `b_i` is rejected.
pub fn gen_planted_instance(
    m: usize,
    n: usize,
    zero_fraction_b: f64,
    solution_density: f64,
    omega: f64,
    seed: u64,
) -> Result<ProblemInstance, GenerateError> {
    check_params(m, n, zero_fraction_b, omega)?;
    if !(solution_density > 0.0 && solution_density <= 1.0) {
        return Err(GenerateError::InvalidParameter(format!(
            "solution density {solution_density} must lie in (0, 1]"
        )));
    }
    let recipe = format!(
        "planted(m={m},n={n},zero_frac={zero_fraction_b},density={solution_density},omega={omega})"
    );
    let mut rng = InstanceRng::new(seed);
    for attempt in 0..REDRAW_BUDGET {
        let x: Vec<f64> = (0..n)
            .map(|_| {
                if rng.unit() < solution_density {
                    rng.open_unit()
                } else {
                    0.0
                }
            })
            .collect();
        let in_support = |t: &[usize]| t.iter().all(|&k| x[k] > 0.0);

        let mut b = draw_nonnegative(&mut rng, m, n, zero_fraction_b);
        b.retain(|(t, _)| x[t[0]] > 0.0 || !in_support(&t[1..]));
        let maxrow = row_sums(&b, n).into_iter().fold(0.0_f64, f64::max);
        if maxrow == 0.0 {
            continue;
        }
        let s = (1.0 + omega) * maxrow;

        let mut coupled = vec![0.0; n];
        for (t, v) in &b {
            if x[t[0]] > 0.0 && in_support(&t[1..]) {
                coupled[t[0]] += v * t[1..].iter().map(|&k| x[k]).product::<f64>();
            }
        }
        let shrink: Vec<f64> = (0..n)
            .map(|i| {
                let cap = s * x[i].powi(m as i32 - 1);
                if x[i] > 0.0 && coupled[i] >= cap {
                    0.5 * cap / coupled[i]
                } else {
                    1.0
                }
            })
            .collect();
        for (t, v) in b.iter_mut() {
            if shrink[t[0]] != 1.0 && in_support(&t[1..]) {
                *v *= shrink[t[0]];
            }
        }

        let a = shifted(m, n, s, &b)?;
        let mut rhs = a.contract_m1(&x)?;
        rhs.iter_mut().filter(|v| **v == 0.0).for_each(|v| *v = 0.0);
        if rhs.iter().any(|&v| v < 0.0) {
            continue;
        }
        return Ok(ProblemInstance {
            a,
            b: rhs,
            planted: Some(x),
            seed,
            recipe,
            redraws: attempt,
        });
    }
    Err(GenerateError::RedrawBudgetExhausted(REDRAW_BUDGET))
}

/// Random M-tensor from [`gen_random_mtensor`] with an independent sparse
/// right-hand side: each `b_i` is zero with probability `1 - rhs_density`,
/// otherwise uniform on `(0, 1)`. No solution is known in advance.
pub fn gen_random_rhs_instance(
    m: usize,
    n: usize,
    zero_fraction_b: f64,
    rhs_density: f64,
    omega: f64,
    seed: u64,
) -> Result<ProblemInstance, GenerateError> {
    if !(rhs_density > 0.0 && rhs_density <= 1.0) {
        return Err(GenerateError::InvalidParameter(format!(
            "rhs density {rhs_density} must lie in (0, 1]"
        )));
    }
    let a = gen_random_mtensor(m, n, zero_fraction_b, omega, seed)?;
    // A separate stream so b does not depend on how many draws A consumed.
    let mut rng = InstanceRng::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let b = (0..n)
        .map(|_| {
            if rng.unit() < rhs_density {
                rng.open_unit()
            } else {
                0.0
            }
        })
        .collect();
    Ok(ProblemInstance {
        a,
        b,
        planted: None,
        seed,
        recipe: format!(
            "random-rhs(m={m},n={n},zero_frac={zero_fraction_b},density={rhs_density},omega={omega})"
        ),
        redraws: 0,
    })
}

/// The 4th-order, 2-dimensional tensor with `a_{0000} = a_{1111} = 1` and
/// `a_{0001} = -2` (0-based).
pub fn example1_tensor() -> SquareTensor {
    SquareTensor::canonical_from_entries(
        4,
        2,
        [
            (vec![0, 0, 0, 0], 1.0),
            (vec![1, 1, 1, 1], 1.0),
            (vec![0, 0, 0, 1], -2.0),
        ],
    )
    .expect("valid fixture")
}

/// Names accepted by [`named_fixture`].
pub const FIXTURES: [&str; 3] = ["example1-b01", "example2-i", "example2-ii"];

/// Small fixtures on [`example1_tensor`]:
///
/// | name           | b        | nonnegative solutions |
/// |----------------|----------|-----------------------|
/// | `example1-b01` | (0, 1)   | (0, 1), (2, 1)        |
/// | `example2-i`   | (0, 8)   | (0, 2), (4, 2)        |
/// | `example2-ii`  | (8, 0)   | (2, 0)                |
pub fn named_fixture(name: &str) -> Result<ProblemInstance, GenerateError> {
    let b = match name {
        "example1-b01" => vec![0.0, 1.0],
        "example2-i" => vec![0.0, 8.0],
        "example2-ii" => vec![8.0, 0.0],
        _ => return Err(GenerateError::UnknownFixture(name.to_string())),
    };
    Ok(ProblemInstance {
        a: example1_tensor(),
        b,
        planted: None,
        seed: 0,
        recipe: format!("fixture:{name}"),
        redraws: 0,
    })
}

/// Known nonnegative solutions of a fixture, sorted.
pub fn fixture_solutions(name: &str) -> Result<Vec<Vec<f64>>, GenerateError> {
    match name {
        "example1-b01" => Ok(vec![vec![0.0, 1.0], vec![2.0, 1.0]]),
        "example2-i" => Ok(vec![vec![0.0, 2.0], vec![4.0, 2.0]]),
        "example2-ii" => Ok(vec![vec![2.0, 0.0]]),
        _ => Err(GenerateError::UnknownFixture(name.to_string())),
    }
}
