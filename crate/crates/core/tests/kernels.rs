//! Property tests for the contraction kernels and semi-symmetrization.

use proptest::prelude::*;
use tensor_npa::{Execution, SquareTensor};

type Case = (usize, usize, Vec<(Vec<usize>, f64)>, Vec<f64>);

/// `(m, n, entries with duplicates, x)` for small random tensors.
fn tensor_and_point() -> impl Strategy<Value = Case> {
    (3usize..=5, 1usize..=4).prop_flat_map(|(m, n)| {
        let entry = (prop::collection::vec(0..n, m), -2.0f64..2.0);
        (
            Just(m),
            Just(n),
            prop::collection::vec(entry, 0..40),
            prop::collection::vec(-1.5f64..1.5, n),
        )
    })
}

/// Dense `n^m` array, summing duplicates.
fn dense(m: usize, n: usize, entries: &[(Vec<usize>, f64)]) -> Vec<f64> {
    let mut d = vec![0.0; n.pow(m as u32)];
    for (t, v) in entries {
        let flat = t.iter().fold(0, |acc, &i| acc * n + i);
        d[flat] += v;
    }
    d
}

/// `y_i = sum a_{i i2..im} x_{i2} .. x_{im}` by nested loops over the dense array.
fn nested_m1(m: usize, n: usize, d: &[f64], x: &[f64]) -> Vec<f64> {
    let tail = n.pow(m as u32 - 1);
    (0..n)
        .map(|i| {
            (0..tail)
                .map(|r| {
                    let mut rest = r;
                    let mut prod = 1.0;
                    for _ in 1..m {
                        prod *= x[rest % n];
                        rest /= n;
                    }
                    d[i * tail + r] * prod
                })
                .sum()
        })
        .collect()
}

fn close(a: &[f64], b: &[f64], rel: f64) -> bool {
    let scale = a.iter().chain(b).fold(1.0_f64, |s, v| s.max(v.abs()));
    a.iter().zip(b).all(|(p, q)| (p - q).abs() <= rel * scale)
}

proptest! {
    #[test]
    fn contract_m1_matches_nested_loops((m, n, entries, x) in tensor_and_point()) {
        let a = SquareTensor::from_entries(m, n, entries.clone()).unwrap();
        let want = nested_m1(m, n, &dense(m, n, &entries), &x);
        prop_assert!(close(&a.contract_m1(&x).unwrap(), &want, 1e-12));
    }

    #[test]
    fn raw_and_canonical_agree((m, n, entries, x) in tensor_and_point()) {
        let raw = SquareTensor::from_entries(m, n, entries.clone()).unwrap();
        let canon = raw.clone().into_canonical();
        prop_assert!(canon.is_canonical());
        prop_assert!(close(&raw.contract_m1(&x).unwrap(), &canon.contract_m1(&x).unwrap(), 1e-12));
        let j1 = raw.jacobian(&x).unwrap();
        let j2 = canon.jacobian(&x).unwrap();
        prop_assert!(close(j1.as_slice(), j2.as_slice(), 1e-12));
    }

    #[test]
    fn semi_symmetrization_preserves_contraction((m, n, entries, x) in tensor_and_point()) {
        let a = SquareTensor::from_entries(m, n, entries).unwrap();
        let abar = a.semi_symmetrize();
        prop_assert!(abar.is_semi_symmetric(1e-14));
        prop_assert!(close(&a.contract_m1(&x).unwrap(), &abar.contract_m1(&x).unwrap(), 1e-12));
    }

    #[test]
    fn semi_symmetrization_is_idempotent((m, n, entries, _x) in tensor_and_point()) {
        let abar = SquareTensor::from_entries(m, n, entries).unwrap().semi_symmetrize();
        prop_assert_eq!(abar.semi_symmetrize(), abar);
    }

    #[test]
    fn jacobian_matches_central_differences((m, n, entries, x) in tensor_and_point()) {
        let a = SquareTensor::from_entries(m, n, entries).unwrap();
        let jac = a.semi_symmetrize().jacobian(&x).unwrap();
        let h = 1e-5;
        let mut fd = vec![0.0; n * n];
        for k in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let (fp, fm) = (a.contract_m1(&xp).unwrap(), a.contract_m1(&xm).unwrap());
            for i in 0..n {
                fd[i * n + k] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let analytic: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).map(|(i, k)| jac[(i, k)]).collect();
        prop_assert!(close(&analytic, &fd, 1e-6), "{:?} vs {:?}", analytic, fd);
    }

    #[test]
    fn parallel_and_sequential_are_bitwise_equal((m, n, entries, x) in tensor_and_point()) {
        let a = SquareTensor::canonical_from_entries(m, n, entries).unwrap();
        prop_assert_eq!(
            a.contract_m1_with(&x, Execution::Parallel).unwrap(),
            a.contract_m1_with(&x, Execution::Sequential).unwrap()
        );
        prop_assert_eq!(
            a.contract_m2_with(&x, Execution::Parallel).unwrap(),
            a.contract_m2_with(&x, Execution::Sequential).unwrap()
        );
    }

    #[test]
    fn identity_contractions(m in 3usize..=5, x in prop::collection::vec(0.0f64..2.0, 1..6)) {
        let id = SquareTensor::identity(m, x.len()).unwrap();
        let y = id.contract_m1(&x).unwrap();
        for (yi, xi) in y.iter().zip(&x) {
            prop_assert!((yi - xi.powi(m as i32 - 1)).abs() <= 1e-15 * (1.0 + yi.abs()));
        }
    }
}
