//! End-to-end solver behaviour, generators and the enumeration oracle.

use nalgebra::DMatrix;
use proptest::prelude::*;
use tensor_npa::audit::InvariantAudit;
use tensor_npa::bootstrap::{make_start, BootstrapConfig, StartSource};
use tensor_npa::generate::{
    fixture_solutions, gen_planted_instance, gen_random_mtensor, named_fixture, FIXTURES,
};
use tensor_npa::npa::{
    classify, newton_step, residual, solve_observed, Classification, ScaledProblem,
};
use tensor_npa::oracle::enumerate_nonneg_solutions;
use tensor_npa::structure::{is_z_tensor, mtensor_split};
use tensor_npa::{solve, SolveStatus, SolverConfig, SquareTensor};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

#[test]
fn newton_direction_is_nonpositive_on_a_random_instance() {
    let inst = gen_planted_instance(3, 8, 0.6, 0.6, 0.1, 21).unwrap();
    let p = ScaledProblem::new(&inst.a, &inst.b).unwrap();
    let eps = 1e-12 * (1.0 + p.b.iter().fold(0.0_f64, |a, v| a.max(*v)));
    let start = make_start(&p.a, &p.b, None, &BootstrapConfig::default(), eps).unwrap();
    assert_eq!(start.source, StartSource::Bootstrap);
    let f = residual(&p.a, &p.b, &start.x).unwrap();
    let Classification::Partition(part) = classify(&f, &start.x, eps) else {
        panic!("bootstrap point already solves the system");
    };
    assert!(!part.active.is_empty());
    let abar = p.a.semi_symmetrize();
    let step = newton_step(&p.a, &abar, &p.b, &start.x, &f, &part, &SolverConfig::default())
        .unwrap()
        .unwrap();
    assert!(step.direction.iter().all(|&d| d <= 0.0), "{:?}", step.direction);

    // Independent check: -M^{-1} F_I with an explicit inverse that must be nonnegative.
    let inv = step.reduced_jacobian.clone().try_inverse().unwrap();
    assert!(inv.iter().all(|&v| v >= -1e-12));
    let f_i = DMatrix::from_iterator(part.active.len(), 1, part.active.iter().map(|&i| f[i]));
    let d = -(inv * f_i);
    assert!(max_abs_diff(d.as_slice(), &step.direction) <= 1e-10);
}

#[test]
fn planted_instances_solve_to_small_residuals() {
    for seed in 0..5 {
        let inst = gen_planted_instance(3, 30, 0.6, 0.4, 0.1, seed).unwrap();
        let r = solve(&inst.a, &inst.b, None, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert!(r.x.iter().all(|&v| v >= 0.0));
        let p = ScaledProblem::new(&inst.a, &inst.b).unwrap();
        let re = residual(&p.a, &p.b, &r.x).unwrap().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_eq!(re, r.re_err);
        assert!(re <= 1e-10);
        assert_eq!(r.trace.last().unwrap().re_err, r.re_err);
    }
}

#[test]
fn scaling_leaves_the_solution_unchanged() {
    let inst = gen_planted_instance(4, 10, 0.6, 0.5, 0.1, 3).unwrap();
    let p = ScaledProblem::new(&inst.a, &inst.b).unwrap();
    let cfg = SolverConfig {
        deterministic: true,
        ..SolverConfig::default()
    };
    let x0 = vec![5.0; 10];
    let r1 = solve(&inst.a, &inst.b, Some(&x0), &cfg).unwrap();
    let r2 = solve(&p.a, &p.b, Some(&x0), &cfg).unwrap();
    assert_eq!(r2.kappa, 1.0);
    assert!(max_abs_diff(&r1.x, &r2.x) <= 1e-12);
    assert_eq!(r1.iterations, r2.iterations);
}

#[test]
fn positive_rhs_gives_positive_solution() {
    for seed in 0..5 {
        let inst = gen_planted_instance(3, 20, 0.6, 0.4, 0.1, seed).unwrap();
        let b: Vec<f64> = inst.b.iter().map(|v| v + 0.01).collect();
        let r = solve(&inst.a, &b, None, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert!(r.x.iter().all(|&v| v > 0.0), "{:?}", r.x);
    }
}

#[test]
fn audit_is_clean_on_a_4th_order_corpus() {
    for seed in 0..3 {
        let inst = gen_planted_instance(4, 12, 0.8, 0.4, 0.1, seed).unwrap();
        let mut audit = InvariantAudit::new(false);
        let r = solve_observed(&inst.a, &inst.b, None, &SolverConfig::default(), &mut audit).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert!(audit.is_clean(), "{:?}", audit.violations);
    }
}

#[test]
fn uncertifiable_tensor_is_refused_unless_overridden() {
    // A x^2 = (x0^2 - 2 x1^2, x1^2 - 2 x0^2) is never componentwise positive.
    let a = SquareTensor::canonical_from_entries(
        3,
        2,
        [
            (vec![0, 0, 0], 1.0),
            (vec![0, 1, 1], -2.0),
            (vec![1, 1, 1], 1.0),
            (vec![1, 0, 0], -2.0),
        ],
    )
    .unwrap();
    assert!(solve(&a, &[1.0, 1.0], None, &SolverConfig::default()).is_err());
    let cfg = SolverConfig {
        require_certificate: false,
        ..SolverConfig::default()
    };
    let r = solve(&a, &[1.0, 1.0], None, &cfg).unwrap();
    assert_eq!(r.status, SolveStatus::BootstrapFailure);
}

#[test]
fn npa_answers_are_oracle_solutions() {
    for name in FIXTURES {
        let f = named_fixture(name).unwrap();
        let oracle = enumerate_nonneg_solutions(&f.a, &f.b, 10.0, 50, 1e-10).unwrap();
        let known = fixture_solutions(name).unwrap();
        assert_eq!(oracle.len(), known.len(), "{name}: {oracle:?}");
        for (o, k) in oracle.iter().zip(&known) {
            assert!(max_abs_diff(o, k) <= 1e-6, "{name}: {oracle:?}");
        }
        for x0 in [[20.0, 20.0], [0.0, 20.0], [20.0, 0.0]] {
            let r = solve(&f.a, &f.b, Some(&x0), &SolverConfig::default()).unwrap();
            assert_eq!(r.status, SolveStatus::Converged);
            assert!(
                oracle.iter().any(|o| max_abs_diff(o, &r.x) <= 1e-6),
                "{name} from {x0:?}: {:?} not in {oracle:?}",
                r.x
            );
        }
    }
}

#[test]
fn oracle_on_a_diagonal_system() {
    let a = SquareTensor::identity(3, 2).unwrap().scaled(2.0);
    let sols = enumerate_nonneg_solutions(&a, &[2.0, 8.0], 4.0, 9, 1e-10).unwrap();
    assert_eq!(sols.len(), 1);
    assert!(max_abs_diff(&sols[0], &[1.0, 2.0]) <= 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_tensors_are_certified_and_reproducible(
        m in 3usize..=4, n in 1usize..=8, frac in 0.0f64..0.95, seed in any::<u64>()
    ) {
        let a = gen_random_mtensor(m, n, frac, 0.1, seed).unwrap();
        prop_assert!(is_z_tensor(&a));
        let split = mtensor_split(&a, 0.0).unwrap();
        prop_assert!(split.is_certified());
        prop_assert_eq!(&a, &gen_random_mtensor(m, n, frac, 0.1, seed).unwrap());
    }

    #[test]
    fn planted_residual_vanishes(
        m in 3usize..=4, n in 1usize..=10, density in 0.1f64..1.0, seed in any::<u64>()
    ) {
        let inst = gen_planted_instance(m, n, 0.6, density, 0.1, seed).unwrap();
        let x = inst.planted.as_ref().unwrap();
        let f = residual(&inst.a, &inst.b, x).unwrap();
        let scale = inst.b.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
        prop_assert!(f.iter().all(|v| v.abs() <= 1e-12 * scale));
        prop_assert!(inst.b.iter().all(|&v| v >= 0.0));
        prop_assert!(mtensor_split(&inst.a, 0.0).unwrap().is_certified());
        prop_assert_eq!(&inst, &gen_planted_instance(m, n, 0.6, density, 0.1, seed).unwrap());
    }
}
