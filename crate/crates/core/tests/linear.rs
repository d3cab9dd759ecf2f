//! Linear solvers on M-matrix systems and the M-matrix certificate.

use nalgebra::DMatrix;
use proptest::prelude::*;
use tensor_npa::generate::InstanceRng;
use tensor_npa::linsolve::{residual_norm, solve_direct, solve_gmres, solve_m_system, LinearMethod, LinearSolveOptions};
use tensor_npa::structure::certify_m_matrix;

/// Strictly diagonally dominant Z-matrix with a sparse random off-diagonal.
fn dominant_z_matrix(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = InstanceRng::new(seed);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.unit() < 0.3 {
                m[(i, j)] = -rng.unit();
            }
        }
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
        m[(i, i)] = off + 0.5 + rng.unit();
    }
    m
}

#[test]
fn direct_and_gmres_agree_on_a_50x50_m_matrix() {
    let m = dominant_z_matrix(50, 17);
    let mut rng = InstanceRng::new(3);
    let r: Vec<f64> = (0..50).map(|_| rng.unit()).collect();
    let d = solve_direct(&m, &r, 1e-14).unwrap();
    let g = solve_gmres(&m, &r, 1e-12, 500).unwrap();
    assert_eq!(d.method, LinearMethod::Direct);
    assert_eq!(g.method, LinearMethod::Iterative);
    let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(residual_norm(&m, &g.solution, &r) <= 1e-12 * rn * 10.0);
    for (a, b) in d.solution.iter().zip(&g.solution) {
        assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{a} vs {b}");
    }
    // Nonnegative right-hand side, nonnegative solution.
    assert!(d.solution.iter().all(|&v| v >= 0.0));
}

#[test]
fn dispatch_follows_the_threshold() {
    let m = dominant_z_matrix(30, 5);
    let r = vec![1.0; 30];
    let opts = LinearSolveOptions::default();
    assert_eq!(solve_m_system(&m, &r, &opts).unwrap().method, LinearMethod::Iterative);
    let small = dominant_z_matrix(10, 5);
    assert_eq!(solve_m_system(&small, &r[..10], &opts).unwrap().method, LinearMethod::Direct);
}

fn z_matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (prop::collection::vec(0.0f64..1.0, n * n), prop::collection::vec(0.1f64..2.0, n)).prop_map(move |(off, slack)| {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                if i != j {
                    m[(i, j)] = -off[i * n + j];
                    row += off[i * n + j];
                }
            }
            m[(i, i)] = row + slack[i];
        }
        m
    })
}

proptest! {
    #[test]
    fn m_matrix_inverse_is_nonnegative(m in (2usize..=3).prop_flat_map(z_matrix)) {
        let n = m.nrows();
        prop_assert!(certify_m_matrix(&m).is_some());
        for k in 0..n {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            let col = solve_direct(&m, &e, 1e-14).unwrap().solution;
            prop_assert!(col.iter().all(|&v| v >= -1e-14), "column {k}: {col:?}");
            prop_assert!(col[k] > 0.0);
        }
    }
}
