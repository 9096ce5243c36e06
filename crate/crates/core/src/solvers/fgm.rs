use crate::error::{Error, Result};
use crate::numerics::{check_dim, Vector};
use crate::oracles::{CompositeObjective, OracleCounters};

use super::{SolverReport, StopKind, StoppingRule};

/// Consecutive objective increases above the starting value tolerated before
/// giving up. Momentum makes the objective oscillate, so increases below
/// `φ(x0)` are not counted.
const DIVERGENCE_STREAK: usize = 50;

/// `φ = s + h` with `s` smooth (queried by gradient) and `h` handled by a
/// proximal map.
pub trait CompositeModel {
    fn dim(&self) -> usize;
    fn smooth_gradient(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<Vector>;
    /// Full objective `φ(x)`.
    fn objective(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<f64>;
    /// `argmin_x h(x) + ‖x − v‖²/(2·step)`
    fn prox(&self, v: &Vector, step: f64) -> Vector;
}

/// All of `F` treated as smooth; the prox is the identity.
pub struct FullSmoothModel<'a>(pub &'a CompositeObjective);

impl CompositeModel for FullSmoothModel<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn smooth_gradient(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<Vector> {
        self.0.grad_objective(x, ctr)
    }
    fn objective(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<f64> {
        self.0.eval_objective(x, ctr)
    }
    fn prox(&self, v: &Vector, _step: f64) -> Vector {
        v.clone()
    }
}

/// Nesterov's accelerated composite gradient method.
///
/// With `mu > 0` the momentum is the constant `(1 − √q)/(1 + √q)`,
/// `q = min(mu / l_smooth, 1)`; with `mu = 0` it follows the usual
/// `t_{k+1} = (1 + √(1 + 4t_k²))/2` sequence. Each iteration makes one smooth
/// gradient query at the extrapolated point and one objective evaluation at
/// the new iterate (plus one at `x0`).
///
/// `GradNorm` stops on the gradient mapping `l_smooth·‖y − x⁺‖`.
pub fn composite_fgm<M: CompositeModel + ?Sized>(
    model: &M,
    l_smooth: f64,
    mu: f64,
    x0: &Vector,
    stop: &StoppingRule,
    ctr: &mut OracleCounters,
) -> Result<SolverReport> {
    stop.validate()?;
    check_dim(model.dim(), x0.len())?;
    if !(l_smooth > 0.0) || !(mu >= 0.0) || !l_smooth.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "FGM needs l_smooth > 0 and mu >= 0 (got {l_smooth}, {mu})"
        )));
    }
    let start = *ctr;
    let step = 1.0 / l_smooth;
    let q = (mu / l_smooth).min(1.0);
    let strong_beta = (1.0 - q.sqrt()) / (1.0 + q.sqrt());

    let mut x = x0.clone();
    let mut x_prev = x0.clone();
    let mut t = 1.0f64;
    let mut value = model.objective(&x, ctr)?;
    let initial_value = value;
    let mut trace = vec![(0usize, value)];
    let mut streak = 0usize;
    let cap = stop.cap();
    let mut converged = false;
    let mut iterations = 0usize;

    if let StopKind::FuncGap { tol, f_star } = stop.kind {
        converged = value - f_star <= tol;
    }

    while !converged && iterations < cap {
        let beta = if mu > 0.0 {
            strong_beta
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let b = (t - 1.0) / t_next;
            t = t_next;
            b
        };
        let y = x.lincomb(1.0 + beta, -beta, &x_prev);
        let g = model.smooth_gradient(&y, ctr)?;
        let mut v = y.clone();
        v.axpy(-step, &g);
        let x_new = model.prox(&v, step);
        if let Some(k) = x_new.first_non_finite() {
            return Err(Error::NonFinite {
                what: "FGM iterate",
                coordinate: k,
            });
        }
        iterations += 1;
        let new_value = model.objective(&x_new, ctr)?;
        streak = if new_value > value && new_value > initial_value { streak + 1 } else { 0 };
        if streak >= DIVERGENCE_STREAK {
            return Err(Error::Divergence {
                solver: "fgm",
                iteration: iterations,
                streak,
            });
        }
        converged = match stop.kind {
            StopKind::GradNorm { tol } => l_smooth * y.dist(&x_new) <= tol,
            StopKind::FuncGap { tol, f_star } => new_value - f_star <= tol,
            StopKind::FixedIters { iters } => iterations >= iters,
        };
        x_prev = std::mem::replace(&mut x, x_new);
        value = new_value;
        trace.push((iterations, value));
    }

    Ok(SolverReport {
        x_out: x,
        iterations,
        counters: ctr.since(&start),
        trace,
        converged,
        final_value: Some(value),
        levels: None,
        diagnostics: Vec::new(),
    })
}

/// FGM on the whole of `F` with `L = L_f + L_g`: every iteration costs one
/// `∇f` and `m` component gradients.
pub fn plain_fgm_baseline(
    obj: &CompositeObjective,
    x0: &Vector,
    stop: &StoppingRule,
    ctr: &mut OracleCounters,
) -> Result<SolverReport> {
    composite_fgm(&FullSmoothModel(obj), obj.lf() + obj.lg(), obj.mu(), x0, stop, ctr)
}
