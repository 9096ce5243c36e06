mod common;

use std::sync::Arc;

use common::*;
use optslide::numerics::{SparseRow, SymmetricMatrix, Vector};
use optslide::oracles::{CompositeObjective, Components, OracleCounters, ZeroSum};
use optslide::problems::{
    assemble_problem, exact_minimizer, GlmLoss, GlmSpec, QuadraticSpec, QuadraticTerm, SparseDesign,
};
use optslide::solvers::{
    composite_fgm, composite_gd, epoch_length, plain_fgm_baseline, varag_predicted_grad_calls, varag_solve,
    varag_solve_scheduled, FullSmoothModel, InnerSolution, ProxSubproblem, QuadraticAnchors, StoppingRule,
};

fn pure_quadratic(diag: &[f64], mu: f64) -> CompositeObjective {
    let n = diag.len();
    let f = QuadraticTerm::new(QuadraticSpec::new(SymmetricMatrix::diagonal(diag), None).unwrap(), 0.0);
    CompositeObjective::new(Arc::new(f), Arc::new(ZeroSum { n, m: 1 }), mu).unwrap()
}

fn value_of(obj: &CompositeObjective, x: &Vector) -> f64 {
    value(obj, x)
}

/// Minimizer of the linearized model `(1/m)Σg_k + h` for an all-quadratic
/// instance, by the normal equations of the model.
fn model_minimizer(obj: &CompositeObjective, a: &QuadraticAnchors) -> Vector {
    let n = obj.dim();
    let g = obj.finite_sum();
    let parts = g.least_squares_parts().unwrap();
    let m = parts.rows.len() as f64;
    let mut h = nalgebra::DMatrix::<f64>::identity(n, n) * a.sigma();
    let mut rhs = nalgebra::DVector::<f64>::zeros(n);
    for (row, y) in parts.rows.iter().zip(parts.targets) {
        let d = row.densify(n).unwrap();
        for i in 0..n {
            rhs[i] += d[i] * y / m;
            for j in 0..n {
                h[(i, j)] += d[i] * d[j] / m;
            }
        }
    }
    for i in 0..n {
        rhs[i] += a.lf * a.center[i] + a.l * a.prox_center[i] - a.linear[i];
    }
    let sol = h.cholesky().unwrap().solve(&rhs);
    Vector::from_vec(sol.iter().copied().collect())
}

fn anchors_for(obj: &CompositeObjective, at: &Vector, center: &Vector, l: f64) -> QuadraticAnchors {
    QuadraticAnchors {
        linear: obj.grad_f(at, &mut OracleCounters::new()).unwrap(),
        lf: obj.lf(),
        center: at.clone(),
        l,
        prox_center: center.clone(),
    }
}

#[test]
fn fgm_one_dimensional() {
    let obj = pure_quadratic(&[1.0], 0.0);
    let x0 = Vector::from_vec(vec![1.0]);
    let rep = composite_fgm(&FullSmoothModel(&obj), 1.0, 0.0, &x0, &StoppingRule::grad_norm(1e-8, 10_000), &mut OracleCounters::new()).unwrap();
    assert!(rep.converged);
    assert!(rep.x_out[0].abs() <= 1e-4);
}

#[test]
fn fgm_condition_number_one() {
    let obj = pure_quadratic(&[2.0; 6], 2.0);
    let x0 = Vector::from_vec(vec![1.0, -2.0, 3.0, 0.5, 0.0, 1.0]);
    let stop = StoppingRule::func_gap(1e-10, 0.0, 5);
    let rep = composite_fgm(&FullSmoothModel(&obj), 2.0, 2.0, &x0, &stop, &mut OracleCounters::new()).unwrap();
    assert!(rep.converged && rep.iterations <= 5);
    assert!(value_of(&obj, &rep.x_out) <= 1e-10);
}

#[test]
fn fgm_all_quadratic_gap() {
    let mut p = spec(30, 40, 6, optslide::problems::LossKind::Squared, 4);
    p.mu_reg = 0.05;
    let inst = p.build().unwrap();
    let obj = &inst.objective;
    let f_star = value(obj, &exact_minimizer(obj).unwrap());
    let stop = StoppingRule::func_gap(1e-8, f_star, 100_000);
    let rep = plain_fgm_baseline(obj, &Vector::zeros(obj.dim()), &stop, &mut OracleCounters::new()).unwrap();
    assert!(rep.converged);
    assert!(value(obj, &rep.x_out) - f_star <= 1e-8);
    assert_eq!(rep.final_value, Some(value(obj, &rep.x_out)));
    assert!(value(obj, &rep.x_out) <= value(obj, &Vector::zeros(obj.dim())));
}

#[test]
fn fgm_fixed_iteration_counts() {
    let inst = regime_quadratic(3);
    let obj = &inst.objective;
    let m = obj.m() as u64;
    for t in [1usize, 7, 40] {
        let mut ctr = OracleCounters::new();
        let rep = plain_fgm_baseline(obj, &Vector::zeros(obj.dim()), &StoppingRule::fixed(t), &mut ctr).unwrap();
        let t = t as u64;
        assert_eq!(rep.iterations as u64, t);
        assert_eq!(ctr.grad_f_calls, t);
        assert_eq!(ctr.grad_gk_calls, m * t);
        assert_eq!(ctr.f_evals, t + 1);
        assert_eq!(ctr.g_evals, m * (t + 1));
        assert_eq!(rep.counters, ctr);
    }
}

#[test]
fn fgm_baseline_iteration_envelope() {
    // κ = (L_f + L_g)/μ = 100.
    let mut p = spec(20, 16, 4, optslide::problems::LossKind::Squared, 5);
    p.lambda_max_target = 0.49;
    p.mu_reg = 0.01;
    p.lg_target = Some(0.5);
    let inst = p.build().unwrap();
    let obj = &inst.objective;
    let kappa = (obj.lf() + obj.lg()) / obj.mu();
    assert!((kappa - 100.0).abs() < 1e-9, "{kappa}");
    let eps = 1e-8;
    let f_star = value(obj, &exact_minimizer(obj).unwrap());
    let rep = plain_fgm_baseline(obj, &Vector::zeros(obj.dim()), &StoppingRule::func_gap(eps, f_star, 1_000_000), &mut OracleCounters::new()).unwrap();
    assert!(rep.converged);
    assert!(rep.iterations as f64 <= 20.0 * kappa.sqrt() * (1.0 / eps).ln());
}

#[test]
fn divergence_detected_with_wrong_constant() {
    let obj = pure_quadratic(&[1.0, 1.0], 0.0);
    let x0 = Vector::from_vec(vec![1.0, 1.0]);
    let err = composite_fgm(&FullSmoothModel(&obj), 0.25, 0.0, &x0, &StoppingRule::grad_norm(1e-12, 10_000), &mut OracleCounters::new());
    assert!(matches!(err, Err(optslide::Error::Divergence { .. })), "{err:?}");
}

#[test]
fn gd_reduces_to_gradient_descent() {
    let obj = pure_quadratic(&[2.0], 0.0);
    let sub = ProxSubproblem { obj: &obj, l: 0.0, center: Vector::zeros(1) };
    let x0 = Vector::from_vec(vec![1.0]);
    let out = composite_gd(
        &sub,
        &x0,
        None,
        |req, _ctr| {
            // g ≡ 0: the model minimizer is the gradient step.
            let a = req.model;
            let x = Vector::from_vec(vec![a.center[0] - a.linear[0] / a.lf]);
            Ok(InnerSolution { x, full_grad: None, converged: true, iterations: 1, inner_steps: 0 })
        },
        &StoppingRule::fixed(5),
        &mut OracleCounters::new(),
    )
    .unwrap();
    // Step 1/L_f on a 1-D quadratic with curvature L_f lands on the minimizer.
    assert_eq!(out.report.x_out[0], 0.0);
}

#[test]
fn gd_solves_prox_subproblem() {
    let inst = regime_quadratic(6);
    let obj = &inst.objective;
    let n = obj.dim();
    let l = obj.lf();
    let center = random_vector(&mut rng(3), n, 1.0);
    // Direct solve of the subproblem: exact minimizer of F + (L/2)‖x − center‖².
    let parts = obj.smooth().quadratic_parts().unwrap();
    let shifted_b = {
        let mut b = parts.b.cloned().unwrap_or_else(|| Vector::zeros(n));
        b.axpy(l, &center);
        b
    };
    let spec = QuadraticSpec::new(parts.c.clone(), Some(shifted_b)).unwrap();
    let sub_obj = CompositeObjective::new(
        Arc::new(QuadraticTerm::new(spec, parts.ridge + l)),
        obj.finite_sum().clone(),
        obj.mu() + l,
    )
    .unwrap();
    let x_sub = exact_minimizer(&sub_obj).unwrap();
    let sub = ProxSubproblem { obj, l, center: center.clone() };
    let phi_star = sub.value(&x_sub, &mut OracleCounters::new()).unwrap();

    let out = composite_gd(
        &sub,
        &Vector::zeros(n),
        None,
        |req, _ctr| {
            let x = model_minimizer(obj, req.model);
            Ok(InnerSolution { x, full_grad: None, converged: true, iterations: 1, inner_steps: 0 })
        },
        &StoppingRule::func_gap(1e-6, phi_star, 10_000),
        &mut OracleCounters::new(),
    )
    .unwrap();
    assert!(out.report.converged);
    assert!(sub.value(&out.report.x_out, &mut OracleCounters::new()).unwrap() - phi_star <= 1e-6);
}

#[test]
fn gd_fixed_iteration_counts() {
    let inst = regime_quadratic(7);
    let obj = &inst.objective;
    let sub = ProxSubproblem { obj, l: 0.5, center: Vector::zeros(obj.dim()) };
    let mut calls = 0;
    let mut ctr = OracleCounters::new();
    let out = composite_gd(
        &sub,
        &Vector::zeros(obj.dim()),
        None,
        |req, _ctr| {
            calls += 1;
            Ok(InnerSolution { x: req.start.clone(), full_grad: None, converged: true, iterations: 0, inner_steps: 0 })
        },
        &StoppingRule::fixed(9),
        &mut ctr,
    )
    .unwrap();
    assert_eq!(ctr.grad_f_calls, 9);
    assert_eq!(ctr.grad_gk_calls, 0);
    assert_eq!(calls, 9);
    assert_eq!(out.report.iterations, 9);
}

#[test]
fn gd_propagates_inner_failure_with_context() {
    let inst = regime_quadratic(8);
    let obj = &inst.objective;
    let sub = ProxSubproblem { obj, l: 0.5, center: Vector::zeros(obj.dim()) };
    let err = composite_gd(
        &sub,
        &Vector::zeros(obj.dim()),
        None,
        |req, _| {
            if req.iteration == 2 {
                Err(optslide::Error::InvalidParameter("boom".into()))
            } else {
                Ok(InnerSolution { x: req.start.clone(), full_grad: None, converged: true, iterations: 0, inner_steps: 0 })
            }
        },
        &StoppingRule::fixed(5),
        &mut OracleCounters::new(),
    )
    .unwrap_err();
    let text = err.to_string();
    assert!(text.contains("inner_gd") && text.contains('2'), "{text}");
    assert!(matches!(err.root(), optslide::Error::InvalidParameter(_)));
}

#[test]
fn varag_reaches_model_minimizer() {
    let inst = regime_quadratic(9);
    let obj = &inst.objective;
    let n = obj.dim();
    let at = random_vector(&mut rng(4), n, 0.5);
    let center = random_vector(&mut rng(5), n, 0.5);
    let a = anchors_for(obj, &at, &center, obj.lf());
    let x_star = model_minimizer(obj, &a);
    let model_value = |x: &Vector| obj.eval_g(x, &mut OracleCounters::new()).unwrap() + a.value(x);
    let f_star = model_value(&x_star);
    let out = varag_solve(&Components(obj), &a, &at, &StoppingRule::func_gap(1e-9, f_star, 10_000), 17, &mut OracleCounters::new()).unwrap();
    assert!(out.report.converged);
    assert!(model_value(&out.report.x_out) - f_star <= 1e-9);
}

#[test]
fn varag_fixed_epoch_counts() {
    let inst = regime_quadratic(10);
    let obj = &inst.objective;
    let n = obj.dim();
    let m = obj.m();
    let a = anchors_for(obj, &Vector::zeros(n), &Vector::zeros(n), 1.0);
    for epochs in [1usize, 3, 8, 12] {
        let mut ctr = OracleCounters::new();
        let out = varag_solve(&Components(obj), &a, &Vector::zeros(n), &StoppingRule::fixed(epochs), 5, &mut ctr).unwrap();
        let steps: u64 = (1..=epochs).map(|s| epoch_length(s, m) as u64).sum();
        assert_eq!(ctr.grad_gk_calls, (epochs * m) as u64 + steps);
        assert_eq!(ctr.grad_gk_calls, varag_predicted_grad_calls(epochs, m));
        assert_eq!(out.inner_steps, steps);
        assert_eq!(ctr.grad_f_calls, 0);
        assert_eq!(out.report.iterations, epochs);
    }
    let mut ctr = OracleCounters::new();
    varag_solve_scheduled(&Components(obj), &a, &Vector::zeros(n), &StoppingRule::fixed(4), 5, 3, &mut ctr).unwrap();
    let steps: u64 = (3..=6).map(|s| epoch_length(s, m) as u64).sum();
    assert_eq!(ctr.grad_gk_calls, 4 * m as u64 + steps);
}

#[test]
fn varag_same_seed_is_identical() {
    let inst = regime_quadratic(11);
    let obj = &inst.objective;
    let n = obj.dim();
    let a = anchors_for(obj, &Vector::zeros(n), &Vector::zeros(n), 0.3);
    let run = || {
        let mut ctr = OracleCounters::new();
        let o = varag_solve(&Components(obj), &a, &Vector::zeros(n), &StoppingRule::grad_norm(1e-7, 1000), 99, &mut ctr).unwrap();
        (o.report.x_out, ctr)
    };
    let (x1, c1) = run();
    let (x2, c2) = run();
    assert_eq!(c1, c2);
    assert_eq!(x1.as_slice(), x2.as_slice());
}

#[test]
fn varag_single_component_matches_fgm() {
    let n = 5;
    let row = SparseRow::from_dense(&[1.0, -0.5, 0.25, 2.0, 0.0]);
    let design = SparseDesign::new(vec![row], n).unwrap();
    let glm = GlmSpec::new(design, vec![1.5], GlmLoss::Squared).unwrap();
    let q = QuadraticSpec::new(SymmetricMatrix::identity(n), None).unwrap();
    let obj = assemble_problem(q, Arc::new(glm), 0.0).unwrap();
    let at = Vector::from_vec(vec![0.2, 0.1, -0.3, 0.4, 1.0]);
    let center = Vector::from_vec(vec![-1.0, 0.0, 1.0, 0.5, 0.0]);
    let a = anchors_for(&obj, &at, &center, 0.7);
    let exact = model_minimizer(&obj, &a);

    let vr = varag_solve(&Components(&obj), &a, &at, &StoppingRule::grad_norm(1e-12, 100_000), 1, &mut OracleCounters::new()).unwrap();

    struct Model<'a>(&'a CompositeObjective, &'a QuadraticAnchors);
    impl optslide::solvers::CompositeModel for Model<'_> {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn smooth_gradient(&self, x: &Vector, ctr: &mut OracleCounters) -> optslide::Result<Vector> {
            self.0.full_grad_g(x, ctr)
        }
        fn objective(&self, x: &Vector, ctr: &mut OracleCounters) -> optslide::Result<f64> {
            Ok(self.0.eval_g(x, ctr)? + self.1.value(x))
        }
        fn prox(&self, v: &Vector, step: f64) -> Vector {
            optslide::solvers::quadratic_prox(&self.1.linear, step, v, self.1.lf, &self.1.center, self.1.l, &self.1.prox_center).unwrap()
        }
    }
    let fgm = composite_fgm(
        &Model(&obj, &a),
        obj.lg(),
        0.0,
        &at,
        &StoppingRule::grad_norm(1e-12, 100_000),
        &mut OracleCounters::new(),
    )
    .unwrap();
    assert!(vr.report.x_out.dist(&fgm.x_out) <= 1e-8);
    assert!(vr.report.x_out.dist(&exact) <= 1e-8);
}

#[test]
fn quadratic_prox_examples() {
    let a = Vector::from_vec(vec![1.0, -2.0, 3.0]);
    let z = Vector::zeros(3);
    let x = optslide::solvers::quadratic_prox(&z, 0.7, &a, 2.0, &a, 5.0, &a).unwrap();
    for i in 0..3 {
        assert!((x[i] - a[i]).abs() <= 1e-15);
    }
    let v = Vector::from_vec(vec![0.5, 0.5, -1.0]);
    let x = optslide::solvers::quadratic_prox(&v, 0.1, &a, 0.0, &z, 0.0, &z).unwrap();
    let step = a.lincomb(1.0, -0.1, &v);
    assert!(x.dist(&step) <= 1e-15);
}
