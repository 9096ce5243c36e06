mod common;

use std::sync::Arc;

use common::*;
use optslide::numerics::{SymmetricMatrix, Vector};
use optslide::oracles::{CompositeObjective, OracleCounters, ZeroSum};
use optslide::problems::{exact_minimizer, LossKind, QuadraticSpec, QuadraticTerm};
use optslide::reductions::{regularize, smooth_loss, smoothing_accuracy, ScalarLoss};
use proptest::prelude::*;

/// `max_z { z t − base*(z) − (η/2) z² }` over `points` evenly spaced `z` in
/// the conjugate domain. `abs* = 0` on `[−1, 1]`; `hinge*(z) = z` on `[−1, 0]`.
fn brute_force_smoothing(base: ScalarLoss, eta: f64, t: f64, points: usize) -> f64 {
    let (lo, hi) = base.conjugate_domain().unwrap();
    let conj = |z: f64| if base == ScalarLoss::Hinge { z } else { 0.0 };
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .map(|z| z * t - conj(z) - 0.5 * eta * z * z)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn huber_matches_conjugate_maximization() {
    let s = smooth_loss(ScalarLoss::Abs, 0.3).unwrap();
    for i in 0..400 {
        let t = -2.0 + 4.0 * i as f64 / 399.0;
        let brute = brute_force_smoothing(ScalarLoss::Abs, 0.3, t, 100_000);
        assert!((s.value(t) - brute).abs() <= 1e-6, "t = {t}");
    }
}

#[test]
fn smoothed_hinge_matches_conjugate_maximization() {
    let s = smooth_loss(ScalarLoss::Hinge, 0.2).unwrap();
    for i in 0..400 {
        let t = -1.0 + 4.0 * i as f64 / 399.0;
        let brute = brute_force_smoothing(ScalarLoss::Hinge, 0.2, t, 100_000);
        assert!((s.value(t) - brute).abs() <= 1e-6, "t = {t}");
    }
}

#[test]
fn huber_simple_values() {
    let s = smooth_loss(ScalarLoss::Abs, 0.1).unwrap();
    assert_eq!(s.value(0.0), 0.0);
    assert_eq!(s.derivative(0.0), 0.0);
    assert!((s.value(1.0) - 0.95).abs() <= 1e-15);
    assert_eq!(smoothing_accuracy(0.01, ScalarLoss::Abs).unwrap(), 0.01);
    assert_eq!(smoothing_accuracy(0.01, ScalarLoss::Hinge).unwrap(), 0.01);
    assert!(smooth_loss(ScalarLoss::Logistic, 0.1).is_err());
}

#[test]
fn smoothed_glm_constant_is_row_norm_over_eta() {
    let mut p = spec(15, 30, 5, LossKind::AbsSmoothed, 3);
    p.eta = Some(0.05);
    let inst = p.build().unwrap();
    let design = inst.glm.design();
    let expected = design.max_row_norm_sq() / 0.05;
    assert!((inst.objective.lg() - expected).abs() <= 1e-12 * expected);
}

fn one_dim(c: f64, b: f64) -> CompositeObjective {
    let spec = QuadraticSpec::new(SymmetricMatrix::diagonal(&[c]), Some(Vector::from_vec(vec![b]))).unwrap();
    CompositeObjective::new(Arc::new(QuadraticTerm::new(spec, 0.0)), Arc::new(ZeroSum { n: 1, m: 1 }), 0.0).unwrap()
}

#[test]
fn regularize_sets_ridge() {
    let obj = one_dim(1.0, 1.0);
    let reg = regularize(&obj, 1e-2, 10.0).unwrap();
    assert!((reg.mu() - 1e-4).abs() <= 1e-18);
    assert!((reg.lf() - obj.lf() - 1e-4).abs() <= 1e-15);
    assert!(regularize(&obj, 0.0, 1.0).is_err());
    assert!(regularize(&obj, 1e-2, -1.0).is_err());
}

#[test]
fn regularized_minimizer_shifts_toward_origin() {
    // f(x) = ½(x − 1)² up to a constant; R = 2 bounds |x*| = 1.
    let eps = 0.05;
    let obj = one_dim(1.0, 1.0);
    let reg = regularize(&obj, eps, 2.0).unwrap();
    let mu = eps / 4.0;
    let x_reg = exact_minimizer(&reg).unwrap()[0];
    assert!((x_reg - 1.0 / (1.0 + mu)).abs() <= 1e-14);
    assert!(x_reg > 0.0 && x_reg < 1.0);
    let subopt = 0.5 * (x_reg - 1.0) * (x_reg - 1.0);
    assert!(subopt <= eps);
}

#[test]
fn singular_problem_needs_regularization() {
    let spec = QuadraticSpec::new(SymmetricMatrix::diagonal(&[1.0, 0.0]), Some(Vector::from_vec(vec![1.0, 0.0]))).unwrap();
    let obj = CompositeObjective::new(Arc::new(QuadraticTerm::new(spec, 0.0)), Arc::new(ZeroSum { n: 2, m: 1 }), 0.0).unwrap();
    assert!(exact_minimizer(&obj).is_err());
    let reg = regularize(&obj, 1e-2, 2.0).unwrap();
    let x = exact_minimizer(&reg).unwrap();
    let f = |a: f64, b: f64| value(&obj, &Vector::from_vec(vec![a, b]));
    let (grid_min, _, _) = grid_min_2d(f, -2.0, 2.0, 1001);
    assert!(value(&obj, &x) - grid_min <= 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn smoothing_gap_is_uniformly_bounded(t in -5.0f64..5.0, eta in 1e-3f64..2.0, hinge in any::<bool>()) {
        let base = if hinge { ScalarLoss::Hinge } else { ScalarLoss::Abs };
        let s = smooth_loss(base, eta).unwrap();
        let gap = base.value(t) - s.value(t);
        prop_assert!(gap >= -1e-15);
        prop_assert!(gap <= eta / 2.0 + 1e-12);
        prop_assert!(gap <= s.max_gap() + 1e-12);
    }

    #[test]
    fn smoothed_derivative_is_lipschitz(t in -5.0f64..5.0, u in -5.0f64..5.0, eta in 1e-3f64..2.0, hinge in any::<bool>()) {
        prop_assume!(t != u);
        let base = if hinge { ScalarLoss::Hinge } else { ScalarLoss::Abs };
        let s = smooth_loss(base, eta).unwrap();
        let ratio = (s.derivative(t) - s.derivative(u)).abs() / (t - u).abs();
        prop_assert!(ratio <= 1.0 / eta + 1e-8);
    }

    #[test]
    fn regularized_objective_dominates(x in proptest::collection::vec(-3.0f64..3.0, 12), eps in 1e-4f64..1.0, r in 0.1f64..10.0) {
        let inst = spec(12, 20, 4, LossKind::Logistic, 5).build().unwrap();
        let obj = &inst.objective;
        let reg = regularize(obj, eps, r).unwrap();
        let x = Vector::from_vec(x);
        let mut ctr = OracleCounters::new();
        let (fr, f) = (reg.eval_objective(&x, &mut ctr).unwrap(), obj.eval_objective(&x, &mut ctr).unwrap());
        if x.norm() == 0.0 {
            prop_assert_eq!(fr, f);
        } else {
            prop_assert!(fr > f);
        }
    }
}

#[test]
fn regularized_objective_equal_at_origin() {
    let inst = spec(12, 20, 4, LossKind::Logistic, 5).build().unwrap();
    let reg = regularize(&inst.objective, 0.1, 1.0).unwrap();
    let z = Vector::zeros(12);
    assert_eq!(value(&reg, &z), value(&inst.objective, &z));
}
