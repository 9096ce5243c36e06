use crate::error::{Error, Result};
use crate::numerics::{check_dim, Vector};
use crate::oracles::{CompositeObjective, OracleCounters};

use super::{LevelStats, QuadraticAnchors, SolverReport, StopKind, StoppingRule, VrOutcome};

/// The proximal subproblem `Φ(x) = F(x) + (L/2)‖x − x^k‖²`.
#[derive(Clone, Debug)]
pub struct ProxSubproblem<'a> {
    pub obj: &'a CompositeObjective,
    pub l: f64,
    pub center: Vector,
}

impl ProxSubproblem<'_> {
    pub fn value(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<f64> {
        Ok(self.obj.eval_objective(x, ctr)? + 0.5 * self.l * x.dist(&self.center).powi(2))
    }

    /// `∇Φ(x)` from already-known `∇f(x)` and `∇g(x)`.
    pub fn gradient_from(&self, x: &Vector, grad_f: &Vector, grad_g: &Vector) -> Vector {
        let mut g = grad_f.add(grad_g);
        g.axpy(self.l, &x.sub(&self.center));
        g
    }
}

/// Linearization of `f` at `x̃` with its quadratic upper bound; together
/// with `g` this is the model minimized at each step of [`composite_gd`].
pub type ProxLinearModel = QuadraticAnchors;

/// What the model solver hands back.
#[derive(Clone, Debug)]
pub struct InnerSolution {
    pub x: Vector,
    /// `∇g(x)` if the solver already has it.
    pub full_grad: Option<Vector>,
    pub converged: bool,
    pub iterations: usize,
    pub inner_steps: u64,
}

impl From<VrOutcome> for InnerSolution {
    fn from(o: VrOutcome) -> Self {
        InnerSolution {
            x: o.report.x_out,
            full_grad: o.full_grad,
            converged: o.report.converged,
            iterations: o.report.iterations,
            inner_steps: o.inner_steps,
        }
    }
}

/// One call into the model solver.
#[derive(Debug)]
pub struct ModelRequest<'a> {
    pub iteration: usize,
    pub model: &'a ProxLinearModel,
    pub start: &'a Vector,
    /// `‖∇Φ(start)‖` when it was available without extra oracle calls or
    /// already paid for by the stopping test.
    pub grad_norm: Option<f64>,
}

/// Result of [`composite_gd`].
#[derive(Clone, Debug)]
pub struct GdOutcome {
    /// Counters cover this level and everything beneath it.
    pub report: SolverReport,
    /// Calls and iterations spent inside the model solver.
    pub model_level: LevelStats,
    pub inner_steps: u64,
    /// Model solves that stopped on their budget instead of their tolerance.
    pub unconverged_models: usize,
}

/// Composite gradient method on `Φ` with step `1/L_f`, treating
/// `g + (L/2)‖· − x^k‖²` as the composite.
///
/// Each iteration makes one `∇f` call at the current point and hands the
/// resulting model to `model_solver`, started at that point. `known` may carry
/// `(∇f(x0), ∇g(x0))`, which replaces the first `∇f` call and allows the
/// `GradNorm` test before any model solve. The `GradNorm` test on `‖∇Φ‖` uses
/// the `∇g` returned by the model solver and otherwise pays `m` calls for it.
pub fn composite_gd<S>(
    sub: &ProxSubproblem<'_>,
    x0: &Vector,
    known: Option<(Vector, Vector)>,
    mut model_solver: S,
    budget: &StoppingRule,
    ctr: &mut OracleCounters,
) -> Result<GdOutcome>
where
    S: FnMut(ModelRequest<'_>, &mut OracleCounters) -> Result<InnerSolution>,
{
    budget.validate()?;
    let obj = sub.obj;
    check_dim(obj.dim(), x0.len())?;
    check_dim(obj.dim(), sub.center.len())?;
    let lf = obj.lf();
    if !(sub.l >= 0.0) || !(lf + sub.l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "prox parameter must be >= 0 with L_f + L > 0 (L = {})",
            sub.l
        )));
    }
    let start = *ctr;
    let cap = budget.cap();
    let mut x = x0.clone();
    let (mut grad_f, mut grad_g) = match known {
        Some((gf, gg)) => (Some(gf), Some(gg)),
        None => (None, None),
    };
    let mut model_level = LevelStats::default();
    let mut inner_steps = 0u64;
    let mut unconverged_models = 0usize;
    let mut trace = Vec::new();
    let mut final_value = None;
    let mut converged = false;
    let mut iterations = 0usize;

    while iterations < cap {
        let gf = match grad_f.take() {
            Some(g) => g,
            None => obj.grad_f(&x, ctr)?,
        };
        let needs_grad_g = matches!(budget.kind, StopKind::GradNorm { .. }) && iterations > 0;
        let gg = match grad_g.take() {
            Some(g) => Some(g),
            None if needs_grad_g => Some(obj.full_grad_g(&x, ctr)?),
            None => None,
        };
        let grad_norm = gg.map(|gg| sub.gradient_from(&x, &gf, &gg).norm());
        match budget.kind {
            StopKind::GradNorm { tol } => {
                if grad_norm.is_some_and(|g| g <= tol) {
                    converged = true;
                    break;
                }
            }
            StopKind::FuncGap { tol, f_star } => {
                let val = sub.value(&x, ctr)?;
                trace.push((iterations, val));
                final_value = Some(val);
                if val - f_star <= tol {
                    converged = true;
                    break;
                }
            }
            _ => {}
        }

        let model = ProxLinearModel {
            linear: gf,
            lf,
            center: x.clone(),
            l: sub.l,
            prox_center: sub.center.clone(),
        };
        let before = *ctr;
        let req = ModelRequest {
            iteration: iterations,
            model: &model,
            start: &x,
            grad_norm,
        };
        let sol = model_solver(req, ctr).map_err(|e| e.nested("inner_gd", iterations))?;
        model_level.counters += ctr.since(&before);
        model_level.iterations += sol.iterations as u64;
        inner_steps += sol.inner_steps;
        if !sol.converged {
            unconverged_models += 1;
        }
        check_dim(obj.dim(), sol.x.len())?;
        x = sol.x;
        grad_g = sol.full_grad;
        iterations += 1;
    }

    if !converged {
        if let StopKind::FuncGap { tol, f_star } = budget.kind {
            let val = sub.value(&x, ctr)?;
            trace.push((iterations, val));
            final_value = Some(val);
            converged = val - f_star <= tol;
        }
    }

    let mut diagnostics = Vec::new();
    if unconverged_models > 0 {
        diagnostics.push(format!("{unconverged_models} model solves hit their budget"));
    }
    Ok(GdOutcome {
        report: SolverReport {
            x_out: x,
            iterations,
            counters: ctr.since(&start),
            trace,
            converged: converged || budget.is_fixed(),
            final_value,
            levels: None,
            diagnostics,
        },
        model_level,
        inner_steps,
        unconverged_models,
    })
}
