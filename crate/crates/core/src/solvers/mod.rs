//! Building-block solvers: accelerated composite gradient (FGM), the
//! non-accelerated composite gradient method on the proximal subproblem, and
//! an accelerated variance-reduced method for the linearized subproblem.

mod fgm;
mod gd;
mod varag;

pub use fgm::{composite_fgm, plain_fgm_baseline, CompositeModel, FullSmoothModel};
pub use gd::{composite_gd, GdOutcome, InnerSolution, ModelRequest, ProxLinearModel, ProxSubproblem};
pub use varag::{
    epoch_length, varag_predicted_grad_calls, varag_solve, varag_solve_scheduled, QuadraticAnchors, VrOutcome,
};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::oracles::OracleCounters;

/// Trace points kept when a report is serialized.
pub const MAX_TRACE_POINTS: usize = 1000;

/// When to stop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StopKind {
    /// Gradient (or gradient-mapping) norm at most `tol`.
    GradNorm { tol: f64 },
    /// Objective within `tol` of a known optimal value.
    FuncGap { tol: f64, f_star: f64 },
    /// Exactly this many iterations.
    FixedIters { iters: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    #[serde(flatten)]
    pub kind: StopKind,
    pub max_iters: usize,
}

impl StoppingRule {
    pub fn grad_norm(tol: f64, max_iters: usize) -> Self {
        StoppingRule {
            kind: StopKind::GradNorm { tol },
            max_iters,
        }
    }

    pub fn func_gap(tol: f64, f_star: f64, max_iters: usize) -> Self {
        StoppingRule {
            kind: StopKind::FuncGap { tol, f_star },
            max_iters,
        }
    }

    pub fn fixed(iters: usize) -> Self {
        StoppingRule {
            kind: StopKind::FixedIters { iters },
            max_iters: iters.max(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        match self.kind {
            StopKind::GradNorm { tol } if !(tol >= 0.0) => {
                Err(Error::InvalidParameter(format!("grad-norm tolerance must be >= 0, got {tol}")))
            }
            StopKind::FuncGap { tol, f_star } if !(tol >= 0.0) || !f_star.is_finite() => {
                Err(Error::InvalidParameter(format!(
                    "function-gap rule needs tol >= 0 and finite f_star (tol = {tol}, f_star = {f_star})"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Iteration cap: the fixed count for `FixedIters`, `max_iters` otherwise.
    pub fn cap(&self) -> usize {
        match self.kind {
            StopKind::FixedIters { iters } => iters,
            _ => self.max_iters,
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self.kind, StopKind::FixedIters { .. })
    }
}

/// Per-level accounting of a nested solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub counters: OracleCounters,
    pub iterations: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Levels {
    pub outer: LevelStats,
    pub inner_gd: LevelStats,
    pub vr: LevelStats,
    /// Single-component steps inside the variance-reduced solver.
    pub vr_inner_steps: u64,
}

/// Result of one solver invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub x_out: Vector,
    pub iterations: usize,
    pub counters: OracleCounters,
    #[serde(serialize_with = "serialize_trace")]
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
    /// Objective at `x_out`, when the solver evaluated it.
    pub final_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub levels: Option<Levels>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<String>,
}

impl SolverReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Evenly thins a trace to at most [`MAX_TRACE_POINTS`], keeping both ends.
pub fn downsample_trace(trace: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let len = trace.len();
    if len <= MAX_TRACE_POINTS {
        return trace.to_vec();
    }
    let last = len - 1;
    (0..MAX_TRACE_POINTS)
        .map(|i| trace[i * last / (MAX_TRACE_POINTS - 1)])
        .collect()
}

fn serialize_trace<S: Serializer>(trace: &[(usize, f64)], s: S) -> std::result::Result<S::Ok, S::Error> {
    downsample_trace(trace).serialize(s)
}

/// `argmin_x ⟨v,x⟩ + ‖x−x̄‖²/(2γ) + (L_f/2)‖x−x̃‖² + (L/2)‖x−x^k‖²`,
/// coordinatewise in closed form.
pub fn quadratic_prox(
    v: &Vector,
    gamma: f64,
    xbar: &Vector,
    lf: f64,
    xtilde: &Vector,
    l: f64,
    xk: &Vector,
) -> Result<Vector> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("prox step must be > 0, got {gamma}")));
    }
    if !(lf >= 0.0) || !(l >= 0.0) {
        return Err(Error::InvalidParameter("prox anchor weights must be >= 0".into()));
    }
    let n = v.len();
    for other in [xbar, xtilde, xk] {
        crate::numerics::check_dim(n, other.len())?;
    }
    let mut out = Vector::zeros(n);
    prox_into(v.as_slice(), gamma, xbar.as_slice(), lf, xtilde.as_slice(), l, xk.as_slice(), out.as_mut_slice());
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn prox_into(
    v: &[f64],
    gamma: f64,
    xbar: &[f64],
    lf: f64,
    xtilde: &[f64],
    l: f64,
    xk: &[f64],
    out: &mut [f64],
) {
    let inv = 1.0 / gamma;
    let denom = inv + lf + l;
    for i in 0..out.len() {
        out[i] = (xbar[i] * inv + lf * xtilde[i] + l * xk[i] - v[i]) / denom;
    }
}
