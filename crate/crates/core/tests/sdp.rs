use mjls::sdp::{self, AffineExpr, LmiProblem, SolveStatus, SolverOptions};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Scalar Lyapunov problem `p > 0, p - a^2 p > 0` with the second constraint
/// multiplied by `scale`.
fn lyapunov(a: f64, scale: f64) -> LmiProblem {
    let mut prob = LmiProblem::new();
    let v = prob.scalar("p");
    prob.require_pd("p", v.expr()).unwrap();
    let dec = AffineExpr::term(v.0, DMatrix::from_element(1, 1, (1.0 - a * a) * scale));
    prob.require_pd("decrease", dec).unwrap();
    prob
}

/// Two-by-two Lyapunov inequality with a matrix variable.
fn matrix_lyapunov(a: &DMatrix<f64>, scale: f64) -> LmiProblem {
    let mut prob = LmiProblem::new();
    let v = prob.symmetric("V", 2);
    prob.require_pd("V", v.expr().sub(&AffineExpr::identity(2)).unwrap()).unwrap();
    let dec = v.expr().sub(&v.expr().left_mul(&a.transpose()).unwrap().right_mul(a).unwrap()).unwrap();
    prob.require_pd("decrease", dec.scale(scale)).unwrap();
    prob
}

fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn solution_passes_independent_eigenvalue_check() {
    let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.8, -0.3, 0.4]);
    let prob = matrix_lyapunov(&a, 1.0);
    let sol = sdp::solve(&prob, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Feasible);
    for c in prob.constraints() {
        let m = c.expr.evaluate(&sol.values);
        assert!(m.symmetric_eigenvalues().min() > 0.0);
    }
}

#[test]
fn repeated_solves_are_identical() {
    let a = DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.1, -0.7]);
    let x = sdp::solve(&matrix_lyapunov(&a, 1.0), &SolverOptions::default()).unwrap();
    let y = sdp::solve(&matrix_lyapunov(&a, 1.0), &SolverOptions::default()).unwrap();
    assert_eq!(x.status, y.status);
    assert!((x.objective - y.objective).abs() <= 1e-9);
    assert_eq!(x.values, y.values);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_a_constraint_keeps_the_status(a in -1.5f64..1.5, scale in 0.01f64..100.0) {
        prop_assume!((a.abs() - 1.0).abs() > 1e-3);
        let base = sdp::solve(&lyapunov(a, 1.0), &SolverOptions::default()).unwrap().status;
        let scaled = sdp::solve(&lyapunov(a, scale), &SolverOptions::default()).unwrap().status;
        prop_assert_eq!(base, scaled);
        prop_assert_eq!(base == SolveStatus::Feasible, a.abs() < 1.0);
    }

    #[test]
    fn lyapunov_status_matches_spectral_radius(e in proptest::collection::vec(-1.2f64..1.2, 4), scale in 0.1f64..10.0) {
        let a = DMatrix::from_row_slice(2, 2, &e);
        let rho = spectral_radius(&a);
        prop_assume!((rho - 1.0).abs() > 0.05);
        let status = sdp::solve(&matrix_lyapunov(&a, scale), &SolverOptions::default()).unwrap().status;
        if rho < 1.0 {
            prop_assert_eq!(status, SolveStatus::Feasible);
        } else {
            prop_assert_ne!(status, SolveStatus::Feasible);
        }
    }
}
