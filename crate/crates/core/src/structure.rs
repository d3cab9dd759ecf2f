//! Structural predicates and certificates for Z-/M-tensors and M-matrices.
//!
//! All certificates here are sufficient conditions. A failed probe never
//! proves that a tensor or matrix is outside the class; it only means this
//! module could not certify it.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::bootstrap::{self, BootstrapConfig};
use crate::linsolve;
use crate::tensor::{is_diagonal_tuple, SquareTensor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("tensor is not a Z-tensor: entry {index:?} = {value} is a positive off-diagonal entry")]
    NotZTensor { index: Vec<usize>, value: f64 },
    #[error("diagonal entry {index} is {value}, must be positive")]
    NonpositiveDiagonal { index: usize, value: f64 },
}

/// Strict positivity threshold `1e-12 * (1 + scale)`.
pub fn positivity_floor(scale: f64) -> f64 {
    1e-12 * (1.0 + scale)
}

/// True iff every off-diagonal entry is `<= 0`.
pub fn is_z_tensor(a: &SquareTensor) -> bool {
    first_positive_offdiagonal(a).is_none()
}

fn first_positive_offdiagonal(a: &SquareTensor) -> Option<(Vec<usize>, f64)> {
    let c = a.canonical_view();
    let found = c
        .entries()
        .find(|(t, v)| *v > 0.0 && !is_diagonal_tuple(t))
        .map(|(t, v)| (t.iter().map(|&i| i as usize).collect(), v));
    found
}

/// Outcome of a row-sum spectral bound check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    Certified,
    Inconclusive,
}

/// `A = s I - B` with `B >= 0` and an upper bound on the spectral radius of
/// `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct MTensorDecomposition {
    pub s: f64,
    pub b: SquareTensor,
    /// Maximum row sum of `b`.
    pub rho_upper: f64,
    pub certification: Certification,
}

impl MTensorDecomposition {
    pub fn is_certified(&self) -> bool {
        self.certification == Certification::Certified
    }

    /// `s I - B`, canonical.
    pub fn reconstruct(&self) -> SquareTensor {
        let mut a = self.b.scaled(-1.0);
        for i in 0..a.dim() {
            a.push(&vec![i; a.order()], self.s)
                .expect("index in range");
        }
        a.into_canonical()
    }
}

/// `s` and the row-sum bound of `B = s I - A` without forming `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowSumBound {
    pub s: f64,
    pub rho_upper: f64,
    pub certification: Certification,
}

/// Row-sum bound for a Z-tensor with positive diagonal: `s` is the largest
/// diagonal entry and `rho_upper = max_i (s - sum_t a_{i t})`, the largest
/// row sum of `B`.
pub fn row_sum_bound(a: &SquareTensor, margin: f64) -> Result<RowSumBound, StructureError> {
    let c = a.canonical_view();
    if let Some((index, value)) = first_positive_offdiagonal(&c) {
        return Err(StructureError::NotZTensor { index, value });
    }
    let diag = c.diagonal();
    if let Some((index, &value)) = diag.iter().enumerate().find(|(_, &d)| d <= 0.0) {
        return Err(StructureError::NonpositiveDiagonal { index, value });
    }
    let s = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rho_upper = c
        .row_sums()
        .into_iter()
        .map(|r| s - r)
        .fold(0.0_f64, f64::max);
    let certification = if s > (1.0 + margin) * rho_upper {
        Certification::Certified
    } else {
        Certification::Inconclusive
    };
    Ok(RowSumBound {
        s,
        rho_upper,
        certification,
    })
}

/// Splits a Z-tensor as `s I - B` with `s` the largest diagonal entry.
///
/// The split is certified when `s > (1 + margin) * rho_upper`, where
/// `rho_upper` is the maximum row sum of `B`.
pub fn mtensor_split(a: &SquareTensor, margin: f64) -> Result<MTensorDecomposition, StructureError> {
    let bound = row_sum_bound(a, margin)?;
    let s = bound.s;
    let mut b = a.scaled(-1.0);
    for i in 0..a.dim() {
        b.push(&vec![i; a.order()], s).expect("index in range");
    }
    let b = b.into_canonical();
    let rho_upper = b.row_sums().into_iter().fold(0.0_f64, f64::max);
    let certification = if s > (1.0 + margin) * rho_upper {
        Certification::Certified
    } else {
        Certification::Inconclusive
    };
    Ok(MTensorDecomposition {
        s,
        b,
        rho_upper,
        certification,
    })
}

/// True iff `x > 0` and `A x^{m-1} > 0` componentwise.
pub fn is_m_tensor_witness(a: &SquareTensor, x: &[f64]) -> bool {
    if x.len() != a.dim() || x.iter().any(|&v| !(v > 0.0)) {
        return false;
    }
    match a.contract_m1(x) {
        Ok(y) => y.iter().all(|&v| v > 0.0),
        Err(_) => false,
    }
}

/// How a tensor was shown to be a nonsingular M-tensor.
#[derive(Debug, Clone, PartialEq)]
pub enum MTensorVerdict {
    /// The row-sum bound of [`mtensor_split`] suffices.
    RowSumBound { s: f64, rho_upper: f64 },
    /// A positive `x` with positive `A x^{m-1}`.
    Witness(Vec<f64>),
    Inconclusive,
}

impl MTensorVerdict {
    pub fn is_certified(&self) -> bool {
        !matches!(self, MTensorVerdict::Inconclusive)
    }
}

/// Tries the row-sum bound, then the witness probes `x = 1` and the
/// Jacobi fixed point of `A x^{m-1} = 1`.
pub fn certify_m_tensor(a: &SquareTensor) -> Result<MTensorVerdict, StructureError> {
    let split = row_sum_bound(a, 0.0)?;
    if split.certification == Certification::Certified {
        return Ok(MTensorVerdict::RowSumBound {
            s: split.s,
            rho_upper: split.rho_upper,
        });
    }
    let ones = vec![1.0; a.dim()];
    if is_m_tensor_witness(a, &ones) {
        return Ok(MTensorVerdict::Witness(ones));
    }
    let cfg = BootstrapConfig {
        inner_tol: 1e-10,
        inner_maxit: 2_000,
        ..BootstrapConfig::default()
    };
    if let Ok(sol) = bootstrap::jacobi_fixed_point(a, split.s, &ones, &cfg) {
        if is_m_tensor_witness(a, &sol.x) {
            return Ok(MTensorVerdict::Witness(sol.x));
        }
    }
    Ok(MTensorVerdict::Inconclusive)
}

/// Evidence that a square matrix is a nonsingular M-matrix: a Z-pattern
/// and a positive `w` with `M w > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MMatrixCertificate {
    pub dim: usize,
    pub witness: Vec<f64>,
    pub product: Vec<f64>,
}

fn has_z_pattern(m: &DMatrix<f64>, floor: f64) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] <= floor))
}

/// Checks the Z-pattern and the given witness `w`.
pub fn certify_m_matrix_with(m: &DMatrix<f64>, w: &[f64]) -> Option<MMatrixCertificate> {
    if !m.is_square() || w.len() != m.nrows() {
        return None;
    }
    let floor = positivity_floor(m.amax());
    if !has_z_pattern(m, floor) {
        return None;
    }
    let wfloor = positivity_floor(w.iter().fold(0.0_f64, |a, v| a.max(v.abs())));
    if w.iter().any(|&v| !(v > wfloor)) {
        return None;
    }
    let product: Vec<f64> = (m * DVector::from_column_slice(w)).iter().copied().collect();
    if product.iter().any(|&v| !(v > floor)) {
        return None;
    }
    Some(MMatrixCertificate {
        dim: m.nrows(),
        witness: w.to_vec(),
        product,
    })
}

/// Probes `w = 1`, then `w = M^{-1} 1`.
pub fn certify_m_matrix(m: &DMatrix<f64>) -> Option<MMatrixCertificate> {
    if !m.is_square() || m.nrows() == 0 {
        return None;
    }
    let n = m.nrows();
    let ones = vec![1.0; n];
    if let Some(c) = certify_m_matrix_with(m, &ones) {
        return Some(c);
    }
    let w = linsolve::solve_direct(m, &ones, 1e-14).ok()?.solution;
    certify_m_matrix_with(m, &w)
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
    fn z_tensor_checks() {
        assert!(is_z_tensor(&example1()));
        assert!(is_z_tensor(&SquareTensor::identity(3, 4).unwrap()));
        let mut a = example1();
        a.push(&[0, 1, 1, 1], 0.5).unwrap();
        assert!(!is_z_tensor(&a));
        assert!(matches!(
            mtensor_split(&a, 0.0),
            Err(StructureError::NotZTensor { .. })
        ));
    }

    #[test]
    fn nonpositive_diagonal_rejected() {
        let a = SquareTensor::canonical_from_entries(
            3,
            2,
            [(vec![0, 0, 0], 1.0), (vec![1, 0, 0], -1.0)],
        )
        .unwrap();
        assert_eq!(
            mtensor_split(&a, 0.0),
            Err(StructureError::NonpositiveDiagonal {
                index: 1,
                value: 0.0
            })
        );
    }

    #[test]
    fn identity_is_certified() {
        let id = SquareTensor::identity(4, 3).unwrap();
        let split = mtensor_split(&id, 0.0).unwrap();
        assert!(split.is_certified());
        assert_eq!(split.s, 1.0);
        assert_eq!(split.rho_upper, 0.0);
        assert_eq!(split.reconstruct(), id);
    }

    #[test]
    fn example1_needs_a_witness() {
        let a = example1();
        let split = mtensor_split(&a, 0.0).unwrap();
        assert_eq!(split.s, 1.0);
        assert_eq!(split.rho_upper, 2.0);
        assert!(!split.is_certified());
        assert_eq!(split.reconstruct(), a);

        assert!(!is_m_tensor_witness(&a, &[1.0, 5.0]));
        assert!(is_m_tensor_witness(&a, &[5.0, 1.0]));
        assert!(is_m_tensor_witness(
            &SquareTensor::identity(3, 2).unwrap(),
            &[1.0, 1.0]
        ));

        match certify_m_tensor(&a).unwrap() {
            MTensorVerdict::Witness(x) => assert!(is_m_tensor_witness(&a, &x)),
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn m_matrix_certificates() {
        let bad = DMatrix::from_row_slice(2, 2, &[-1.0, -2.0, 0.0, 3.0]);
        assert!(certify_m_matrix(&bad).is_none());
        let good = DMatrix::from_row_slice(2, 2, &[3.0, -2.0, 0.0, 1.0]);
        let c = certify_m_matrix(&good).unwrap();
        assert_eq!(c.witness, vec![1.0, 1.0]);
        assert_eq!(c.product, vec![1.0, 1.0]);
        // Needs the second probe: M * 1 has a negative component.
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -3.0, 0.0, 1.0]);
        let c = certify_m_matrix(&m).unwrap();
        assert!(c.witness.iter().all(|&v| v > 0.0));
        // Positive off-diagonal breaks the Z-pattern.
        let nz = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.0, 1.0]);
        assert!(certify_m_matrix(&nz).is_none());
    }
}
