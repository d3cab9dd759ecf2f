//! Nonnegativity-preserving Newton-type solver for multilinear systems
//! `A x^{m-1} = b` with a nonsingular M-tensor `A` and `b >= 0`.

// `!(v >= 0.0)` style tests are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod bench;
pub mod bootstrap;
pub mod exec;
pub mod generate;
pub mod io;
pub mod linsolve;
pub mod npa;
pub mod oracle;
pub mod structure;
pub mod tensor;

pub use exec::Execution;
pub use npa::{solve, SolveReport, SolveStatus, SolverConfig};
pub use tensor::{SquareTensor, TensorError};
