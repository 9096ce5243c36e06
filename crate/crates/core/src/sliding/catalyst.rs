use crate::error::{Error, Result};
use crate::numerics::{check_dim, Vector};
use crate::oracles::{CompositeObjective, OracleCounters};
use crate::solvers::{SolverReport, StopKind, StoppingRule};

/// Fraction of the initial gap used as the first inner accuracy.
const EPS0_FRACTION: f64 = 2.0 / 9.0;

/// State of the accelerated proximal-point loop.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalystState {
    pub x_k: Vector,
    pub y_k: Vector,
    pub alpha_k: f64,
    /// `μ/(μ + L)`
    pub q: f64,
    pub l: f64,
}

impl CatalystState {
    pub fn new(x0: Vector, mu: f64, l: f64) -> Result<Self> {
        if !(mu > 0.0) || !(l > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "proximal-point loop needs mu > 0 and L > 0 (mu = {mu}, L = {l})"
            )));
        }
        let q = mu / (mu + l);
        Ok(CatalystState {
            y_k: x0.clone(),
            x_k: x0,
            alpha_k: q.sqrt(),
            q,
            l,
        })
    }

    /// Accepts the next approximate prox point and extrapolates the center.
    pub fn advance(&mut self, x_next: Vector) {
        let alpha_next = next_alpha(self.alpha_k, self.q);
        let beta = self.alpha_k * (1.0 - self.alpha_k) / (self.alpha_k * self.alpha_k + alpha_next);
        self.y_k = x_next.lincomb(1.0 + beta, -beta, &self.x_k);
        self.x_k = x_next;
        self.alpha_k = alpha_next;
    }

    /// Per-iteration contraction used by the inner accuracy schedule.
    pub fn rho(&self) -> f64 {
        1.0 - 0.9 * self.q.sqrt()
    }
}

/// Root in `(0, 1)` of `α² = (1 − α)·alpha² + q·α`.
pub fn next_alpha(alpha: f64, q: f64) -> f64 {
    let a2 = alpha * alpha;
    let b = a2 - q;
    0.5 * (-b + (b * b + 4.0 * a2).sqrt())
}

/// One request to the proximal-subproblem solver.
#[derive(Debug)]
pub struct ProxRequest<'a> {
    pub iteration: usize,
    /// Prox center `y_k`.
    pub center: &'a Vector,
    pub start: &'a Vector,
    /// Requested accuracy on `F + (L/2)‖· − y_k‖²`.
    pub eps: f64,
    /// `(∇f, ∇g)` at `start`, when known.
    pub known: Option<(Vector, Vector)>,
}

#[derive(Clone, Debug)]
pub struct ProxResponse {
    pub x: Vector,
    pub converged: bool,
}

/// Outer loop settings after defaults have been resolved.
#[derive(Clone, Debug)]
pub struct OuterSettings {
    pub l: f64,
    pub stop: StoppingRule,
    pub warm_start: bool,
}

/// Accelerated inexact proximal-point loop.
///
/// Iteration `k` asks `inner` for an `ε_k`-accurate minimizer of
/// `F + (L/2)‖· − y_k‖²` with `ε_k = ε₀ ρ^{k+1}`, `ε₀ = (2/9)·gap₀`, and
/// `ρ = 1 − 0.9√q`. The initial gap is `F(x0) − f*` under `FuncGap` and the
/// strong-convexity bound `‖∇F(x0)‖²/(2μ)` otherwise. A full `∇F` is taken
/// at `x0` and at every new iterate; with warm starts it is handed to the
/// next inner solve.
pub fn catalyst_outer<I>(
    obj: &CompositeObjective,
    settings: &OuterSettings,
    x0: &Vector,
    mut inner: I,
    ctr: &mut OracleCounters,
) -> Result<SolverReport>
where
    I: FnMut(ProxRequest<'_>, &mut OracleCounters) -> Result<ProxResponse>,
{
    settings.stop.validate()?;
    check_dim(obj.dim(), x0.len())?;
    let mu = obj.mu();
    let start_ctr = *ctr;
    let mut state = CatalystState::new(x0.clone(), mu, settings.l)?;
    let rho = state.rho();

    let gf0 = obj.grad_f(x0, ctr)?;
    let gg0 = obj.full_grad_g(x0, ctr)?;
    let grad_norm0 = gf0.add(&gg0).norm();
    let mut value = obj.eval_objective(x0, ctr)?;
    let mut trace = vec![(0usize, value)];
    let gap0 = match settings.stop.kind {
        StopKind::FuncGap { f_star, .. } => (value - f_star).max(0.0),
        _ => grad_norm0 * grad_norm0 / (2.0 * mu),
    };
    let eps0 = EPS0_FRACTION * gap0;

    let stop_met = |value: f64, grad_norm: f64, k: usize| match settings.stop.kind {
        StopKind::GradNorm { tol } => grad_norm <= tol,
        StopKind::FuncGap { tol, f_star } => value - f_star <= tol,
        StopKind::FixedIters { iters } => k >= iters,
    };
    let mut converged = stop_met(value, grad_norm0, 0);
    let mut known = Some((gf0, gg0));
    let known_at_x0 = known.clone();
    let mut iterations = 0usize;
    let mut unconverged_inner = 0usize;
    let cap = settings.stop.cap();

    while !converged && iterations < cap {
        let eps_k = eps0 * rho.powi(iterations as i32 + 1);
        let (start, start_known) = if settings.warm_start {
            (state.x_k.clone(), known.take())
        } else {
            (x0.clone(), known_at_x0.clone())
        };
        let resp = inner(
            ProxRequest {
                iteration: iterations,
                center: &state.y_k,
                start: &start,
                eps: eps_k,
                known: start_known,
            },
            ctr,
        )
        .map_err(|e| e.nested("outer", iterations))?;
        check_dim(obj.dim(), resp.x.len())?;
        if !resp.converged {
            unconverged_inner += 1;
        }
        iterations += 1;

        let gf = obj.grad_f(&resp.x, ctr)?;
        let gg = obj.full_grad_g(&resp.x, ctr)?;
        let grad_norm = gf.add(&gg).norm();
        value = obj.eval_objective(&resp.x, ctr)?;
        trace.push((iterations, value));
        known = Some((gf, gg));
        state.advance(resp.x);
        converged = stop_met(value, grad_norm, iterations);
    }

    let mut diagnostics = Vec::new();
    if unconverged_inner > 0 {
        diagnostics.push(format!(
            "outer: {unconverged_inner} of {iterations} proximal subproblems stopped on their budget"
        ));
    }
    if !converged {
        diagnostics.push(format!("outer: stopping rule not met after {iterations} iterations"));
    }
    Ok(SolverReport {
        x_out: state.x_k,
        iterations,
        counters: ctr.since(&start_ctr),
        trace,
        converged,
        final_value: Some(value),
        levels: None,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_root_matches_quadratic_formula() {
        let q = 0.5;
        let a = 0.3;
        let r = next_alpha(a, q);
        assert!((r * r - ((1.0 - r) * a * a + q * r)).abs() < 1e-15);
        assert!(r > 0.0 && r < 1.0);
    }

    #[test]
    fn alpha_fixed_point_at_sqrt_q() {
        for q in [1e-4f64, 0.01, 0.5] {
            assert!((next_alpha(q.sqrt(), q) - q.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn equal_l_and_mu_gives_half() {
        let st = CatalystState::new(Vector::zeros(1), 2.0, 2.0).unwrap();
        assert_eq!(st.q, 0.5);
    }
}
